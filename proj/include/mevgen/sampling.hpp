#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/model.hpp"

namespace mevgen {

// SplitMix64 viewed as a counter-based generator: the k-th output of a stream is a pure
// function of (seed, k), so any segment can be produced independently. Period 2^64.
class CounterStream {
public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t bits(std::uint64_t index) const noexcept {
    std::uint64_t z = seed_ + (index + 1) * kGamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Midpoint of one of 2^52 equal cells of [0,1); every midpoint is exact, so never 0 or 1.
  double uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(index) >> 12) + 0.5) * 0x1.0p-52;
  }

private:
  std::uint64_t seed_;
};

// Inverse CDF of the unit Frechet law exp(-1/z).
inline double sample_unit_frechet(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("sample_unit_frechet requires u in (0,1)");
  return -1.0 / std::log(u);
}

namespace detail {

inline void evaluate_vector(const ModelSpec& spec, std::span<const double> z,
                            std::span<const double> y, std::span<double> out) noexcept {
  const std::size_t D = spec.factor_count();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = spec.alpha().row(i);
    double x = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      if (row[j] != 0.0) x = std::max(x, row[j] * z[j]);
    }
    const double slack = spec.slack(i);
    if (slack > 0.0) x = std::max(x, slack * y[i]);
    out[i] = x;
  }
}

}  // namespace detail

// X_i = max_j alpha[i][j] Z_j  v  slack_i Y_i. Zero-weight terms are skipped rather than
// multiplied, so an unbounded latent never produces 0 * inf.
inline std::vector<double> sample_vector(const ModelSpec& spec, std::span<const double> z,
                                         std::span<const double> y) {
  require_valid(spec);
  if (z.size() != spec.factor_count()) {
    throw ShapeError("z has " + std::to_string(z.size()) + " entries, model has D = " +
                     std::to_string(spec.factor_count()));
  }
  if (y.size() != spec.dim()) {
    throw ShapeError("y has " + std::to_string(y.size()) + " entries, model has d = " +
                     std::to_string(spec.dim()));
  }
  for (double v : z) {
    if (!(v > 0.0)) throw DomainError("latent factors must be positive");
  }
  for (double v : y) {
    if (!(v > 0.0)) throw DomainError("latent factors must be positive");
  }
  std::vector<double> out(spec.dim());
  detail::evaluate_vector(spec, z, y, out);
  return out;
}

// 64-bit FNV-1a over (d, D, C, alpha) as raw IEEE bits, rendered as 16 hex digits.
inline std::string spec_fingerprint(const ModelSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(spec.dim());
  mix(spec.factor_count());
  mix(std::bit_cast<std::uint64_t>(spec.scale()));
  for (double a : spec.alpha().values()) mix(std::bit_cast<std::uint64_t>(a));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SampleBatch {
  std::size_t n = 0;
  std::size_t d = 0;
  Matrix data;  // n x d, one observation per row
  std::uint64_t seed = 0;
  std::string spec_fingerprint;

  std::span<const double> observation(std::size_t t) const { return data.row(t); }
};

// Observation t consumes stream positions [t(D+d), (t+1)(D+d)): Z_1..Z_D then Y_1..Y_d.
// Y_i is drawn even when its weight is zero, so specs with equal (d, D) stay aligned.
inline void sample_range(const ModelSpec& spec, const CounterStream& stream, std::size_t begin,
                         std::size_t end, Matrix& out) {
  const std::size_t D = spec.factor_count();
  const std::size_t d = spec.dim();
  const std::uint64_t stride = D + d;
  std::vector<double> z(D);
  std::vector<double> y(d);
  for (std::size_t t = begin; t < end; ++t) {
    std::uint64_t pos = static_cast<std::uint64_t>(t) * stride;
    for (std::size_t j = 0; j < D; ++j) z[j] = -1.0 / std::log(stream.uniform(pos++));
    for (std::size_t i = 0; i < d; ++i) y[i] = -1.0 / std::log(stream.uniform(pos++));
    detail::evaluate_vector(spec, z, y, out.row(t));
  }
}

// n i.i.d. draws. `threads` = 0 picks hardware concurrency; output does not depend on it.
inline SampleBatch sample_batch(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                                unsigned threads = 0) {
  require_valid(spec);
  SampleBatch batch;
  batch.n = n;
  batch.d = spec.dim();
  batch.seed = seed;
  batch.spec_fingerprint = spec_fingerprint(spec);
  batch.data = Matrix(n, spec.dim());
  if (n == 0) return batch;

  const CounterStream stream(seed);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, (n + 4095) / 4096);
  if (workers <= 1) {
    sample_range(spec, stream, 0, n, batch.data);
    return batch;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&spec, &stream, &batch, begin, end] {
        sample_range(spec, stream, begin, end, batch.data);
      });
    }
  }  // joined
  return batch;
}

}  // namespace mevgen
