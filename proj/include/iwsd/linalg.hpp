#ifndef IWSD_LINALG_HPP_
#define IWSD_LINALG_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace iwsd {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("squared_distance: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const Vec& a, const Vec& b) {
  return std::sqrt(squared_distance(a, b));
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("sub: dimension mismatch");
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("add: dimension mismatch");
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vec scaled(const Vec& a, double s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

inline bool all_finite(const Vec& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace iwsd

#endif  // IWSD_LINALG_HPP_
