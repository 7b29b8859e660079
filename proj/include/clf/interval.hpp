#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace clf {

// Closed real interval [lo, hi]. Arithmetic is outward-sound in exact
// arithmetic; no directed rounding is attempted.
struct Interval {
  double lo{0.0};
  double hi{0.0};

  Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit point interval
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
  [[nodiscard]] bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

  static Interval whole() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
};

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

inline Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// x^k with the monotone / even-power case split, which is tight, unlike
// repeated interval multiplication ([-1,1]*[-1,1] = [-1,1] but [-1,1]^2 = [0,1]).
inline Interval pow(const Interval& x, unsigned k) {
  if (k == 0) return {1.0, 1.0};
  const double a = std::pow(x.lo, static_cast<double>(k));
  const double b = std::pow(x.hi, static_cast<double>(k));
  if (k % 2 == 1) return {a, b};
  if (x.lo >= 0.0) return {a, b};
  if (x.hi <= 0.0) return {b, a};
  return {0.0, std::max(a, b)};
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.lo << ", " << iv.hi << ']';
}

}  // namespace clf
