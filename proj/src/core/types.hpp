// Copyright 2026 the sourcetrace authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sourcetrace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Componentwise (Hadamard) product.
inline Vec3 hadamard(const Vec3& a, const Vec3& b) {
  return {a[0] * b[0], a[1] * b[1], a[2] * b[2]};
}
/// Componentwise division.
inline Vec3 ediv(const Vec3& a, const Vec3& b) {
  return {a[0] / b[0], a[1] / b[1], a[2] / b[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
  return std::max(std::abs(a[0]), std::max(std::abs(a[1]), std::abs(a[2])));
}
/// Minimum element (the paper's ||.||_min on positive step vectors).
inline double norm_min(const Vec3& a) {
  return std::min(std::abs(a[0]), std::min(std::abs(a[1]), std::abs(a[2])));
}
inline bool all_finite(const Vec3& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

inline Mat3 mat3_zero() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }

inline Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}
inline Mat3 operator*(double s, const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = s * a[i][j];
  return r;
}
inline double frobenius_norm(const Mat3& a) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}
inline Mat3 symmetrize(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = 0.5 * (a[i][j] + a[j][i]);
  return r;
}

/// Physical constants of the advection-dispersion model.
struct RiverParams {
  double cross_section_area = 0;  // A, m^2
  double dispersion = 0;          // D, m^2/min
  double velocity = 0;            // v, m/min
  double decay = 0;               // k, 1/min

  bool valid() const {
    return cross_section_area > 0 && dispersion > 0 && velocity > 0 && decay >= 0 &&
           std::isfinite(cross_section_area) && std::isfinite(dispersion) &&
           std::isfinite(velocity) && std::isfinite(decay);
  }
};

/// Decision vector: released mass, source location, release time.
struct SourceEstimate {
  double mass = 0;          // s
  double location = 0;      // l, m
  double release_time = 0;  // t, min

  Vec3 vec() const { return {mass, location, release_time}; }
  static SourceEstimate from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
  bool finite() const { return all_finite(vec()); }
};

/// One sensor sampling.
struct Observation {
  int sensor_id = 0;
  double sensor_location = 0;  // l_m, m
  double sample_time = 0;      // t_m^n, min
  double concentration = 0;    // c_m^n
};

/// Time-ordered observation sequence, possibly interleaving several sensors.
using Stream = std::vector<Observation>;

/// Empirical moduli of the loss family on a feasible box.
struct SmoothnessConstants {
  double lipschitz_loss = 0;           // kappa
  double lipschitz_grad = 0;           // beta (smoothness)
  double lipschitz_hessian = 0;        // iota
  double loss_bound = 0;               // B
  double lipschitz_residual = 0;       // sigma
  double lipschitz_residual_grad = 0;  // gamma

  bool valid() const {
    return lipschitz_loss > 0 && lipschitz_grad > 0 && lipschitz_hessian > 0 && loss_bound > 0 &&
           lipschitz_residual > 0 && lipschitz_residual_grad > 0;
  }
};

// ---------------------------------------------------------------------------
// Errors. Categories align with the CLI exit codes.

enum class Errc : int {
  invalid = 1,
  config = 2,
  data = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct ElapsedTimeError : Error {
  explicit ElapsedTimeError(const std::string& w) : Error(Errc::numeric, w) {}
};
struct LineSearchStalledError : Error {
  explicit LineSearchStalledError(const std::string& w) : Error(Errc::numeric, w) {}
};
struct NonFiniteIterateError : Error {
  explicit NonFiniteIterateError(const std::string& w) : Error(Errc::numeric, w) {}
};
struct EpochBudgetError : Error {
  explicit EpochBudgetError(const std::string& w) : Error(Errc::numeric, w) {}
};
struct AsymmetricInputError : Error {
  explicit AsymmetricInputError(const std::string& w) : Error(Errc::invalid, w) {}
};
struct NotLocallyConvexError : Error {
  explicit NotLocallyConvexError(const std::string& w) : Error(Errc::numeric, w) {}
};
struct TooFewSamplesError : Error {
  explicit TooFewSamplesError(const std::string& w) : Error(Errc::invalid, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(Errc::config, w) {}
};
struct ParseError : Error {
  ParseError(const std::string& w, std::size_t line, std::size_t column)
      : Error(Errc::data, w + " (line " + std::to_string(line) + ", column " +
                              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace sourcetrace
