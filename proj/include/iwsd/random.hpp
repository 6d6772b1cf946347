#ifndef IWSD_RANDOM_HPP_
#define IWSD_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace iwsd {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent substream seed. Chaining calls gives a cheap
// splittable hierarchy: derive(derive(seed, trial), method).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2dull));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller, cosine branch only. Two uniforms per draw keeps the stream
// consumption independent of the standard library implementation.
inline double normal_draw(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.39894228040143267793994605993438;
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

// First moment of clip(X, lo, hi) for X ~ N(mu, sigma^2).
inline double clipped_normal_mean(double mu, double sigma, double lo,
                                  double hi) {
  if (sigma <= 0.0) return std::min(std::max(mu, lo), hi);
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  return lo * normal_cdf(a) + hi * (1.0 - normal_cdf(b)) + mu * z -
         sigma * (normal_pdf(b) - normal_pdf(a));
}

// Second moment of clip(X, lo, hi) for X ~ N(mu, sigma^2).
inline double clipped_normal_sq_mean(double mu, double sigma, double lo,
                                     double hi) {
  if (sigma <= 0.0) {
    const double v = std::min(std::max(mu, lo), hi);
    return v * v;
  }
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  const double interior = mu * mu * z +
                          2.0 * mu * sigma * (normal_pdf(a) - normal_pdf(b)) +
                          sigma * sigma *
                              (z + a * normal_pdf(a) - b * normal_pdf(b));
  return lo * lo * normal_cdf(a) + hi * hi * (1.0 - normal_cdf(b)) + interior;
}

inline double clipped_normal_draw(Rng& rng, double mu, double sigma, double lo,
                                  double hi) {
  const double x = mu + sigma * normal_draw(rng);
  return std::min(std::max(x, lo), hi);
}

}  // namespace iwsd

#endif  // IWSD_RANDOM_HPP_
