// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/data_io.hpp"
#include "sslseq/features.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sslseq::features {

struct TimedValue {
  double time = 0.0;  // seconds since epoch
  double value = 0.0;
};

/// `participant_id,timestamp,rr_ms`; the timestamp marks the closing beat.
std::map<std::string, std::vector<TimedValue>> read_rr_csv(const std::filesystem::path& path);

struct ScFile {
  double sample_rate_hz = 0.0;
  std::map<std::string, std::vector<TimedValue>> samples;
};

/// First line `sample_rate_hz,<rate>`, then `participant_id,timestamp,sc_us`.
ScFile read_sc_csv(const std::filesystem::path& path);

/// `participant_id,timestamp,kind,field1,field2,...`
std::map<std::string, PhoneEventLog> read_phone_csv(const std::filesystem::path& path);

struct ExtractOptions {
  int resolution_minutes = 5;
  BandSpec bands;
  ScOptions sc;
  AppCategoryMap app_map;
  /// Registry filter; empty keeps every emitted feature.
  std::vector<std::string> keep;
};

/// Computes one feature row per resolution step, stamped at the step's end,
/// from whichever sources are present. Steps where a source lacks data get
/// NaN cells (treated as missing by segmentation).
data::StreamFile extract_stream(const std::map<std::string, std::vector<TimedValue>>* rr, const ScFile* sc,
                                const std::map<std::string, PhoneEventLog>* phone, const ExtractOptions& opt);

}  // namespace sslseq::features
