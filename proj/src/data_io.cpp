// SPDX-License-Identifier: Apache-2.0
#include "sslseq/data_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sslseq::data {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

double parse_iso8601(const std::string& text) {
  int y, mo, d, h, mi;
  double s;
  char tail[8] = {0};
  const std::string t = trim(text);
  int n = std::sscanf(t.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf%7s", &y, &mo, &d, &h, &mi, &s, tail);
  if (n < 6) n = std::sscanf(t.c_str(), "%4d-%2d-%2d %2d:%2d:%lf%7s", &y, &mo, &d, &h, &mi, &s, tail);
  if (n < 6 || (n == 7 && std::strcmp(tail, "Z") != 0 && std::strcmp(tail, "+00:00") != 0)) {
    throw std::invalid_argument("not an ISO-8601 UTC timestamp: '" + text + "'");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  const double whole = std::floor(s);
  tm.tm_sec = static_cast<int>(whole);
  return static_cast<double>(timegm(&tm)) + (s - whole);
}

Timestamp parse_iso8601_seconds(const std::string& text) {
  return static_cast<Timestamp>(std::llround(parse_iso8601(text)));
}

std::string format_iso8601(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(trim(line));
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && trim(line).back() == ',') out.emplace_back();
  return out;
}

StreamFile read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("stream csv: missing header");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "participant_id" || header[1] != "timestamp") {
    throw std::invalid_argument("stream csv: header must start with participant_id,timestamp");
  }
  StreamFile file;
  file.feature_names.assign(header.begin() + 2, header.end());
  std::map<std::string, ParticipantStream> by_pid;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("stream csv line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " cells");
    }
    StreamRow row;
    row.time = parse_iso8601_seconds(cells[1]);
    for (std::size_t i = 2; i < cells.size(); ++i) {
      row.values.push_back(cells[i].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[i]));
    }
    auto& s = by_pid[cells[0]];
    s.participant_id = cells[0];
    s.rows.push_back(std::move(row));
  }
  for (auto& [pid, s] : by_pid) file.streams.push_back(std::move(s));
  return file;
}

StreamFile read_stream_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_stream_csv(in);
}

void write_stream_csv(std::ostream& out, const StreamFile& file) {
  out << "participant_id,timestamp";
  for (const auto& f : file.feature_names) out << ',' << f;
  out << '\n';
  char buf[64];
  for (const auto& s : file.streams) {
    for (const auto& row : s.rows) {
      out << s.participant_id << ',' << format_iso8601(row.time);
      for (double v : row.values) {
        out << ',';
        if (std::isfinite(v)) {
          std::snprintf(buf, sizeof buf, "%.17g", v);
          out << buf;
        }
      }
      out << '\n';
    }
  }
}

std::vector<LabelEvent> read_label_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("label csv: missing header");
  auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"participant_id", "timestamp", "raw_level"}) {
    throw std::invalid_argument("label csv: header must be participant_id,timestamp,raw_level");
  }
  std::vector<LabelEvent> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3) throw std::invalid_argument("label csv: expected 3 cells in '" + line + "'");
    out.push_back({cells[0], parse_iso8601_seconds(cells[1]), std::stoi(cells[2])});
  }
  return out;
}

std::vector<LabelEvent> read_label_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_label_csv(in);
}

void write_f64_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("unexpected end of binary data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  ds.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["feature_names"] = ds.feature_names;
  meta["steps"] = ds.steps();
  meta["features"] = ds.feature_count();
  meta["step_minutes"] = ds.step_minutes;
  meta["binarization_rule"] = to_string(ds.rule);
  meta["window_count"] = ds.windows.size();
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "windows.bin", std::ios::binary);
    for (const auto& w : ds.windows) {
      for (Eigen::Index t = 0; t < w.features.rows(); ++t) {
        for (Eigen::Index f = 0; f < w.features.cols(); ++f) write_f64_le(out, w.features(t, f));
      }
    }
  }
  std::ofstream out(dir / "index.csv");
  out << "window_id,participant_id,t_end,label,raw_level\n";
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& w = ds.windows[i];
    out << i << ',' << w.participant_id << ',' << format_iso8601(w.t_end) << ',';
    if (w.label) out << static_cast<int>(*w.label);
    out << ',';
    if (w.raw_level) out << *w.raw_level;
    out << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json meta;
  {
    auto in = open_in(dir / "meta.json");
    in >> meta;
  }
  Dataset ds;
  ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  ds.step_minutes = meta.at("step_minutes").get<int>();
  ds.rule = parse_binarization_rule(meta.at("binarization_rule").get<std::string>());
  const int steps = meta.at("steps").get<int>();
  const int nf = meta.at("features").get<int>();
  if (nf != static_cast<int>(ds.feature_names.size())) {
    throw std::invalid_argument("meta.json: feature count disagrees with feature_names");
  }

  auto index = open_in(dir / "index.csv");
  auto bin = open_in(dir / "windows.bin");
  std::string line;
  std::getline(index, line);
  while (std::getline(index, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 5) throw std::invalid_argument("index.csv: malformed row '" + line + "'");
    if (std::stoul(cells[0]) != ds.windows.size()) throw std::invalid_argument("index.csv: window ids out of order");
    SequenceWindow w;
    w.participant_id = cells[1];
    w.t_end = parse_iso8601_seconds(cells[2]);
    if (!cells[3].empty()) w.label = static_cast<BinaryLabel>(std::stoi(cells[3]));
    if (!cells[4].empty()) w.raw_level = std::stoi(cells[4]);
    w.features.resize(steps, nf);
    for (int t = 0; t < steps; ++t) {
      for (int f = 0; f < nf; ++f) w.features(t, f) = read_f64_le(bin);
    }
    ds.windows.push_back(std::move(w));
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw std::invalid_argument("windows.bin: trailing data");
  ds.reindex();
  ds.validate();
  return ds;
}

}  // namespace sslseq::data
