// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/optimizers.hpp"
#include "core/types.hpp"

namespace sourcetrace {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s, std::size_t line, std::size_t column);

/// FNV-1a 64-bit, hex-encoded; identifies run manifests in output headers.
std::uint64_t fnv1a64(const std::string& bytes);
std::string manifest_hash(const std::string& manifest);

struct LoadedObservations {
  Stream observations;
  std::string manifest;               // from a "# manifest: ..." comment, if present
  std::vector<std::string> warnings;  // e.g. negative concentrations
};

/// Observation CSV: UTF-8, LF line endings, header
/// `sensor_id,location_m,time_min,concentration`, full-precision floats, plus
/// a manifest comment line. Negative concentrations load with a warning
/// (noise can push below zero); malformed rows raise ParseError with the
/// offending line.
std::string write_observations(const Stream& obs, const std::string& manifest);
LoadedObservations load_observations(const std::string& text);

std::string write_trace(const RunTrace& trace, const std::string& manifest);

struct LoadedTrace {
  RunTrace trace;  // algo/config fields are not stored in the file
  std::string manifest;
};
LoadedTrace load_trace(const std::string& text);

// Filesystem helpers (whole-file, binary-exact).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace sourcetrace
