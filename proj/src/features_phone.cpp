// SPDX-License-Identifier: Apache-2.0
#include "sslseq/features.hpp"

#include "sslseq/data_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace sslseq::features {

namespace {
const std::vector<std::string> kCategories = {"com", "entertain", "product", "social", "fit"};
}

EventKind parse_event_kind(const std::string& text) {
  static const std::map<std::string, EventKind> kinds = {
      {"accel", EventKind::accel}, {"app_use", EventKind::app_use},
      {"call", EventKind::call},   {"sms", EventKind::sms},
      {"conversation", EventKind::conversation}, {"gps", EventKind::gps},
      {"screen", EventKind::screen}};
  auto it = kinds.find(text);
  if (it == kinds.end()) throw std::invalid_argument("unknown phone event kind '" + text + "'");
  return it->second;
}

AppCategoryMap read_app_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open app map '" + path + "'");
  AppCategoryMap map;
  const std::set<std::string> valid(kCategories.begin(), kCategories.end());
  std::string line;
  while (std::getline(in, line)) {
    auto cells = data::split_csv_line(line);
    if (cells.empty() || cells[0].empty() || cells[0][0] == '#') continue;
    if (cells.size() != 2) throw std::invalid_argument("app map: expected app_name,category in '" + line + "'");
    if (cells[0] == "app_name") continue;
    if (!valid.count(cells[1])) throw std::invalid_argument("app map: unknown category '" + cells[1] + "'");
    map[cells[0]] = cells[1];
  }
  return map;
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusM = 6371000.0;
  const double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

FeatureRecord phone_features(const PhoneEventLog& log, double t_start, double t_end, const AppCategoryMap& app_map) {
  if (!(t_end > t_start)) throw std::invalid_argument("phone_features: empty window");
  double accel_sum = 0.0;
  std::size_t accel_n = 0;
  double appall = 0.0;
  std::map<std::string, double> per_category;
  double call_count[3] = {0, 0, 0}, call_sum[3] = {0, 0, 0}, sms_count[3] = {0, 0, 0};
  double conversation = 0.0, screen = 0.0, distance = 0.0;
  bool have_fix = false;
  double last_lat = 0.0, last_lon = 0.0;
  double prev_time = -std::numeric_limits<double>::infinity();

  auto need = [](const PhoneEvent& e, std::size_t n) {
    if (e.values.size() < n) throw std::invalid_argument("phone event payload too short");
  };
  auto type_of = [](double v) {
    const int t = static_cast<int>(v);
    if (t != 1 && t != 2) throw std::invalid_argument("call/sms type must be 1 (outgoing) or 2 (incoming)");
    return t;
  };

  for (const auto& e : log.events) {
    if (e.time < prev_time) throw std::invalid_argument("phone_features: event times must be non-decreasing");
    prev_time = e.time;
    if (e.time < t_start || e.time >= t_end) continue;
    switch (e.kind) {
      case EventKind::accel:
        need(e, 3);
        accel_sum += std::sqrt(e.values[0] * e.values[0] + e.values[1] * e.values[1] + e.values[2] * e.values[2]);
        ++accel_n;
        break;
      case EventKind::app_use: {
        appall += 1.0;
        auto it = app_map.find(e.app);
        if (it != app_map.end()) per_category[it->second] += 1.0;
        break;
      }
      case EventKind::call: {
        need(e, 2);
        const int t = type_of(e.values[0]);
        call_count[t] += 1.0;
        call_sum[t] += e.values[1];
        break;
      }
      case EventKind::sms:
        need(e, 1);
        sms_count[type_of(e.values[0])] += 1.0;
        break;
      case EventKind::conversation:
        need(e, 1);
        conversation += e.values[0];
        break;
      case EventKind::screen:
        need(e, 1);
        screen += e.values[0];
        break;
      case EventKind::gps:
        need(e, 2);
        if (have_fix) distance += haversine_m(last_lat, last_lon, e.values[0], e.values[1]);
        last_lat = e.values[0];
        last_lon = e.values[1];
        have_fix = true;
        break;
    }
  }

  FeatureRecord r;
  r.add("accel_mean", accel_n ? accel_sum / static_cast<double>(accel_n) : 0.0);
  r.add("appall", appall);
  for (const auto& c : kCategories) r.add("app_" + c, per_category[c]);
  r.add("call_log_count_type1", call_count[1]);
  r.add("call_log_count_type2", call_count[2]);
  r.add("call_log_sum_type1", call_sum[1]);
  r.add("call_log_sum_type2", call_sum[2]);
  r.add("conversation_sum", conversation);
  r.add("distances_sum", distance);
  r.add("screen_sum", screen);
  r.add("sms_log_count_type1", sms_count[1]);
  r.add("sms_log_count_type2", sms_count[2]);
  return r;
}

}  // namespace sslseq::features
