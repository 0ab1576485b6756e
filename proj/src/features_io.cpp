// SPDX-License-Identifier: Apache-2.0
#include "sslseq/features_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace sslseq::features {

namespace {

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

void sort_by_time(std::vector<TimedValue>& v) {
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
}

const std::vector<std::string> kTimeNames = {"mean_nni", "sdnn", "sdsd", "rmssd", "median_nni", "nni_50",
                                             "pnni_50", "nni_20", "pnni_20", "range_nni", "cvsd", "cvnni",
                                             "mean_hr", "max_hr", "min_hr", "std_hr"};
const std::vector<std::string> kFreqNames = {"total_power", "vlf", "lf", "hf", "lf_hf_ratio", "lfnu", "hfnu"};
const std::vector<std::string> kScNames = {"sc_level", "sc_phasic_power", "sc_response_rate",
                                           "sc_second_diff_power", "sc_response_count", "sc_magnitude_sum",
                                           "sc_duration_sum", "sc_area_sum"};

}  // namespace

std::map<std::string, std::vector<TimedValue>> read_rr_csv(const std::filesystem::path& path) {
  auto in = open(path);
  std::string line;
  std::getline(in, line);
  if (data::split_csv_line(line) != std::vector<std::string>{"participant_id", "timestamp", "rr_ms"}) {
    throw std::invalid_argument("rr csv: header must be participant_id,timestamp,rr_ms");
  }
  std::map<std::string, std::vector<TimedValue>> out;
  while (std::getline(in, line)) {
    auto c = data::split_csv_line(line);
    if (c.empty() || c[0].empty()) continue;
    if (c.size() != 3) throw std::invalid_argument("rr csv: malformed row '" + line + "'");
    out[c[0]].push_back({data::parse_iso8601(c[1]), std::stod(c[2])});
  }
  for (auto& [pid, v] : out) sort_by_time(v);
  return out;
}

ScFile read_sc_csv(const std::filesystem::path& path) {
  auto in = open(path);
  std::string line;
  std::getline(in, line);
  auto meta = data::split_csv_line(line);
  if (meta.size() != 2 || meta[0] != "sample_rate_hz") {
    throw std::invalid_argument("sc csv: first line must be sample_rate_hz,<rate>");
  }
  ScFile f;
  f.sample_rate_hz = std::stod(meta[1]);
  std::getline(in, line);
  if (data::split_csv_line(line) != std::vector<std::string>{"participant_id", "timestamp", "sc_us"}) {
    throw std::invalid_argument("sc csv: header must be participant_id,timestamp,sc_us");
  }
  while (std::getline(in, line)) {
    auto c = data::split_csv_line(line);
    if (c.empty() || c[0].empty()) continue;
    if (c.size() != 3) throw std::invalid_argument("sc csv: malformed row '" + line + "'");
    f.samples[c[0]].push_back({data::parse_iso8601(c[1]), std::stod(c[2])});
  }
  for (auto& [pid, v] : f.samples) sort_by_time(v);
  return f;
}

std::map<std::string, PhoneEventLog> read_phone_csv(const std::filesystem::path& path) {
  auto in = open(path);
  std::string line;
  std::getline(in, line);
  auto header = data::split_csv_line(line);
  if (header.size() < 3 || header[0] != "participant_id" || header[1] != "timestamp" || header[2] != "kind") {
    throw std::invalid_argument("phone csv: header must start with participant_id,timestamp,kind");
  }
  std::map<std::string, PhoneEventLog> out;
  while (std::getline(in, line)) {
    auto c = data::split_csv_line(line);
    if (c.empty() || c[0].empty()) continue;
    if (c.size() < 3) throw std::invalid_argument("phone csv: malformed row '" + line + "'");
    PhoneEvent e;
    e.time = data::parse_iso8601(c[1]);
    e.kind = parse_event_kind(c[2]);
    for (std::size_t i = 3; i < c.size(); ++i) {
      if (c[i].empty()) continue;
      if (e.kind == EventKind::app_use && e.app.empty()) {
        e.app = c[i];
      } else {
        e.values.push_back(std::stod(c[i]));
      }
    }
    out[c[0]].events.push_back(std::move(e));
  }
  for (auto& [pid, log] : out) {
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
  }
  return out;
}

data::StreamFile extract_stream(const std::map<std::string, std::vector<TimedValue>>* rr, const ScFile* sc,
                                const std::map<std::string, PhoneEventLog>* phone, const ExtractOptions& opt) {
  if (opt.resolution_minutes < 1) throw std::invalid_argument("extract_stream: resolution must be >= 1 minute");
  const double res = opt.resolution_minutes * 60.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::string> names;
  if (rr) {
    names.insert(names.end(), kTimeNames.begin(), kTimeNames.end());
    names.insert(names.end(), kFreqNames.begin(), kFreqNames.end());
  }
  if (sc) names.insert(names.end(), kScNames.begin(), kScNames.end());
  if (phone) {
    auto probe = phone_features({}, 0.0, 1.0);
    names.insert(names.end(), probe.names.begin(), probe.names.end());
  }
  std::vector<std::size_t> keep_idx;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (opt.keep.empty() || std::find(opt.keep.begin(), opt.keep.end(), names[i]) != opt.keep.end()) {
      keep_idx.push_back(i);
    }
  }
  for (const auto& k : opt.keep) {
    if (std::find(names.begin(), names.end(), k) == names.end()) {
      throw std::invalid_argument("extract_stream: feature '" + k + "' is not produced by the given sources");
    }
  }

  std::set<std::string> participants;
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = -t_min;
  std::map<std::string, std::pair<double, double>> span;
  auto touch = [&](const std::string& pid, double t) {
    participants.insert(pid);
    auto& s = span.try_emplace(pid, t, t).first->second;
    s.first = std::min(s.first, t);
    s.second = std::max(s.second, t);
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  };
  if (rr) for (const auto& [pid, v] : *rr) for (const auto& x : v) touch(pid, x.time);
  if (sc) for (const auto& [pid, v] : sc->samples) for (const auto& x : v) touch(pid, x.time);
  if (phone) for (const auto& [pid, log] : *phone) for (const auto& e : log.events) touch(pid, e.time);

  auto slice = [](const std::vector<TimedValue>& v, double lo, double hi) {
    auto first = std::lower_bound(v.begin(), v.end(), lo, [](const TimedValue& a, double t) { return a.time < t; });
    auto last = std::lower_bound(first, v.end(), hi, [](const TimedValue& a, double t) { return a.time < t; });
    std::vector<double> out;
    for (auto it = first; it != last; ++it) out.push_back(it->value);
    return out;
  };

  data::StreamFile file;
  for (auto i : keep_idx) file.feature_names.push_back(names[i]);
  for (const auto& pid : participants) {
    data::ParticipantStream stream;
    stream.participant_id = pid;
    const auto [lo, hi] = span[pid];
    // Rows sit on a global grid so streams from different sources align.
    double t = (std::floor(lo / res) + 1.0) * res;
    for (; t <= std::ceil(hi / res) * res; t += res) {
      std::vector<double> row;
      row.reserve(names.size());
      if (rr) {
        std::vector<double> ivs;
        if (auto it = rr->find(pid); it != rr->end()) ivs = slice(it->second, t - res, t);
        auto ing = ingest_rr(ivs, t - res);
        try {
          auto tf = hrv_time_features(ing.series);
          row.insert(row.end(), tf.values.begin(), tf.values.end());
        } catch (const InsufficientDataError&) {
          row.insert(row.end(), kTimeNames.size(), nan);
        }
        try {
          auto ff = hrv_freq_features(ing.series, opt.bands);
          row.insert(row.end(), ff.record.values.begin(), ff.record.values.end());
        } catch (const InsufficientDataError&) {
          row.insert(row.end(), kFreqNames.size(), nan);
        }
      }
      if (sc) {
        std::vector<double> samples;
        if (auto it = sc->samples.find(pid); it != sc->samples.end()) samples = slice(it->second, t - res, t);
        try {
          auto f = sc_features({samples, sc->sample_rate_hz}, opt.sc);
          row.insert(row.end(), f.values.begin(), f.values.end());
        } catch (const InsufficientDataError&) {
          row.insert(row.end(), kScNames.size(), nan);
        }
      }
      if (phone) {
        PhoneEventLog empty;
        const PhoneEventLog* log = &empty;
        if (auto it = phone->find(pid); it != phone->end()) log = &it->second;
        auto f = phone_features(*log, t - res, t, opt.app_map);
        row.insert(row.end(), f.values.begin(), f.values.end());
      }
      data::StreamRow out_row;
      out_row.time = static_cast<data::Timestamp>(std::llround(t));
      for (auto i : keep_idx) out_row.values.push_back(row[i]);
      stream.rows.push_back(std::move(out_row));
    }
    file.streams.push_back(std::move(stream));
  }
  return file;
}

}  // namespace sslseq::features
