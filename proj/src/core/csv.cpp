// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#include "core/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sourcetrace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line, std::size_t column) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || s.empty()) {
    throw ParseError("not a number: '" + s + "'", line, column);
  }
  return v;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string manifest_hash(const std::string& manifest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(manifest)));
  return std::string(buf);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

struct LineReader {
  std::istringstream in;
  std::size_t line_no = 0;
  std::string manifest;

  explicit LineReader(const std::string& text) : in(text) {}

  /// Next non-comment, non-blank line; captures the manifest comment.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        constexpr const char* kTag = "# manifest: ";
        if (line.rfind(kTag, 0) == 0) manifest = line.substr(std::string(kTag).size());
        continue;
      }
      return true;
    }
    return false;
  }
};

constexpr const char* kObsHeader = "sensor_id,location_m,time_min,concentration";
constexpr const char* kTraceHeader =
    "n,s,l,t,eta_s,eta_l,eta_t,inner_steps,grad_calls,loss,local_contrib";

}  // namespace

std::string write_observations(const Stream& obs, const std::string& manifest) {
  std::string out;
  out += "# manifest: " + manifest + "\n";
  out += kObsHeader;
  out += "\n";
  for (const Observation& o : obs) {
    out += std::to_string(o.sensor_id);
    out += ',';
    out += format_double(o.sensor_location);
    out += ',';
    out += format_double(o.sample_time);
    out += ',';
    out += format_double(o.concentration);
    out += '\n';
  }
  return out;
}

LoadedObservations load_observations(const std::string& text) {
  LoadedObservations out;
  LineReader reader(text);
  std::string line;
  if (!reader.next(line)) throw ParseError("missing header row", reader.line_no, 1);
  if (line != kObsHeader) throw ParseError("unexpected header '" + line + "'", reader.line_no, 1);
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), reader.line_no,
                       fields.size());
    }
    Observation o;
    o.sensor_id = static_cast<int>(parse_double(fields[0], reader.line_no, 1));
    o.sensor_location = parse_double(fields[1], reader.line_no, 2);
    o.sample_time = parse_double(fields[2], reader.line_no, 3);
    o.concentration = parse_double(fields[3], reader.line_no, 4);
    if (!std::isfinite(o.sample_time) || !std::isfinite(o.concentration)) {
      throw ParseError("non-finite value", reader.line_no, 3);
    }
    if (o.concentration < 0) {
      out.warnings.push_back("line " + std::to_string(reader.line_no) +
                             ": negative concentration (kept; noise can push below zero)");
    }
    out.observations.push_back(o);
  }
  out.manifest = reader.manifest;
  return out;
}

std::string write_trace(const RunTrace& trace, const std::string& manifest) {
  std::string out;
  out += "# manifest: " + manifest + "\n";
  out += "# algo: " + trace.algo + "\n";
  out += "# seed: " + std::to_string(trace.seed) + "\n";
  out += "# start: " + format_double(trace.start[0]) + "," + format_double(trace.start[1]) + "," +
         format_double(trace.start[2]) + "\n";
  out += kTraceHeader;
  out += "\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.n);
    for (int i = 0; i < 3; ++i) out += "," + format_double(r.estimate[i]);
    for (int i = 0; i < 3; ++i) out += "," + format_double(r.eta[i]);
    out += "," + std::to_string(r.inner_steps);
    out += "," + std::to_string(r.gradient_calls);
    out += "," + format_double(r.loss);
    out += "," + format_double(r.local_contrib);
    out += '\n';
  }
  return out;
}

LoadedTrace load_trace(const std::string& text) {
  LoadedTrace out;
  // pre-scan the auxiliary comments
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# algo: ", 0) == 0) out.trace.algo = line.substr(8);
      if (line.rfind("# seed: ", 0) == 0) out.trace.seed = std::stoull(line.substr(8));
      if (line.rfind("# start: ", 0) == 0) {
        const auto fields = split_fields(line.substr(9));
        if (fields.size() == 3) {
          for (int i = 0; i < 3; ++i) out.trace.start[i] = parse_double(fields[i], 0, i + 1);
        }
      }
    }
  }
  LineReader reader(text);
  std::string line;
  if (!reader.next(line)) throw ParseError("missing header row", reader.line_no, 1);
  if (line != kTraceHeader) throw ParseError("unexpected header '" + line + "'", reader.line_no, 1);
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != 11) {
      throw ParseError("expected 11 fields, got " + std::to_string(fields.size()), reader.line_no,
                       fields.size());
    }
    TraceRow r;
    r.n = static_cast<std::int64_t>(parse_double(fields[0], reader.line_no, 1));
    for (int i = 0; i < 3; ++i) r.estimate[i] = parse_double(fields[1 + i], reader.line_no, 2 + i);
    for (int i = 0; i < 3; ++i) r.eta[i] = parse_double(fields[4 + i], reader.line_no, 5 + i);
    r.inner_steps = static_cast<std::int64_t>(parse_double(fields[7], reader.line_no, 8));
    r.gradient_calls = static_cast<std::uint64_t>(parse_double(fields[8], reader.line_no, 9));
    r.loss = parse_double(fields[9], reader.line_no, 10);
    r.local_contrib = parse_double(fields[10], reader.line_no, 11);
    out.trace.rows.push_back(r);
  }
  out.manifest = reader.manifest;
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::data, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::data, "cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error(Errc::data, "failed writing '" + path + "'");
}

}  // namespace sourcetrace
