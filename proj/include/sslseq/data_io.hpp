// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/data.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sslseq::data {

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z]" as UTC. Fractional seconds are kept.
double parse_iso8601(const std::string& text);
Timestamp parse_iso8601_seconds(const std::string& text);
std::string format_iso8601(Timestamp t);

/// Minimal CSV splitting (no quoted fields; the formats here never need them).
std::vector<std::string> split_csv_line(const std::string& line);

struct StreamFile {
  std::vector<std::string> feature_names;
  std::vector<ParticipantStream> streams;  // sorted by participant id
};

/// `participant_id,timestamp,<feature_1>,...`; empty cells read as missing.
StreamFile read_stream_csv(std::istream& in);
StreamFile read_stream_csv(const std::filesystem::path& path);
void write_stream_csv(std::ostream& out, const StreamFile& file);

/// `participant_id,timestamp,raw_level`.
std::vector<LabelEvent> read_label_csv(std::istream& in);
std::vector<LabelEvent> read_label_csv(const std::filesystem::path& path);

/// Directory layout: meta.json, windows.bin (row-major little-endian
/// float64, windows in dataset order), index.csv.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

void write_f64_le(std::ostream& out, double v);
double read_f64_le(std::istream& in);

}  // namespace sslseq::data
