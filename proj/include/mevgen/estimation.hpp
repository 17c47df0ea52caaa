#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/model.hpp"
#include "mevgen/sampling.hpp"

namespace mevgen {

inline constexpr double kZ95 = 1.959963984540054;

// How observations are mapped to the uniform scale before thresholding.
struct MarginModel {
  enum class Kind { rank, known };

  Kind kind = Kind::rank;
  double scale = 0.0;  // C of the Frechet(C) margins when kind == known

  static MarginModel rank() { return {Kind::rank, 0.0}; }
  static MarginModel known(double c) {
    if (!(c > 0.0)) throw DomainError("known margins need C > 0");
    return {Kind::known, c};
  }
};

struct EstimateReport {
  std::size_t d = 0;
  std::size_t n = 0;
  double u = 0.0;
  MarginModel margins;
  // lambda_hat(s,k) = P(F_s > u | F_k > u); NaN where margin k has no exceedance.
  Matrix lambda_hat;
  // joint / min(exceedances of s, exceedances of k); symmetric.
  Matrix lambda_sym;
  Matrix half_width;
  std::vector<std::size_t> counts;       // d x d joint exceedances, diagonal = marginal
  std::vector<std::size_t> exceedances;  // per margin

  std::size_t count(std::size_t s, std::size_t k) const { return counts[s * d + k]; }
  bool defined(std::size_t s, std::size_t k) const { return !std::isnan(lambda_hat(s, k)); }
};

// Normal-approximation 95% half-width of a proportion p over m trials.
inline double proportion_half_width(double p, std::size_t m) {
  if (m == 0) return std::numeric_limits<double>::quiet_NaN();
  return kZ95 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(m));
}

namespace detail {

// Per-observation exceedance flags, row-major n x d.
inline std::vector<std::uint8_t> exceedance_flags(const SampleBatch& batch, double u,
                                                  const MarginModel& margins) {
  const std::size_t n = batch.n;
  const std::size_t d = batch.d;
  std::vector<std::uint8_t> flags(n * d, 0);
  if (margins.kind == MarginModel::Kind::known) {
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < d; ++i) {
        const double x = batch.data(t, i);
        flags[t * d + i] = x > 0.0 && std::exp(-margins.scale / x) > u;
      }
    }
    return flags;
  }
  // Empirical rank transform rank/(n+1); ties broken by observation order.
  std::vector<std::size_t> order(n);
  const double denom = static_cast<double>(n) + 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return batch.data(a, i) < batch.data(b, i);
    });
    for (std::size_t r = 0; r < n; ++r) {
      flags[order[r] * d + i] = static_cast<double>(r + 1) / denom > u;
    }
  }
  return flags;
}

}  // namespace detail

inline EstimateReport estimate_tail_dep(const SampleBatch& batch, double u,
                                        const MarginModel& margins) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("threshold u must lie in (0,1)");
  if (batch.n == 0) throw DomainError("cannot estimate from an empty batch");
  const std::size_t n = batch.n;
  const std::size_t d = batch.d;
  const auto flags = detail::exceedance_flags(batch, u, margins);

  EstimateReport r;
  r.d = d;
  r.n = n;
  r.u = u;
  r.margins = margins;
  r.counts.assign(d * d, 0);
  r.exceedances.assign(d, 0);
  std::vector<std::size_t> hits;
  hits.reserve(d);
  for (std::size_t t = 0; t < n; ++t) {
    hits.clear();
    for (std::size_t i = 0; i < d; ++i) {
      if (flags[t * d + i]) hits.push_back(i);
    }
    for (std::size_t a : hits) {
      for (std::size_t b : hits) ++r.counts[a * d + b];
    }
  }
  for (std::size_t i = 0; i < d; ++i) r.exceedances[i] = r.counts[i * d + i];

  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.lambda_hat = Matrix(d, d, nan);
  r.lambda_sym = Matrix(d, d, nan);
  r.half_width = Matrix(d, d, nan);
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t cond = r.exceedances[k];
      if (s == k) {
        r.lambda_hat(s, k) = 1.0;
        r.lambda_sym(s, k) = 1.0;
        r.half_width(s, k) = 0.0;
        continue;
      }
      if (cond > 0) {
        const double p = static_cast<double>(r.count(s, k)) / static_cast<double>(cond);
        r.lambda_hat(s, k) = p;
        r.half_width(s, k) = proportion_half_width(p, cond);
      }
      const std::size_t lo = std::min(r.exceedances[s], cond);
      if (lo > 0) r.lambda_sym(s, k) = static_cast<double>(r.count(s, k)) / static_cast<double>(lo);
    }
  }
  return r;
}

// P(F_s > u | F_k > u) under the model at finite u: (1 - 2u + C_sk(u,u)) / (1 - u),
// with the bivariate copula diagonal taken from the full copula at u_i = 1 off the pair.
inline double finite_u_tail_dep(const ModelSpec& spec, std::size_t s, std::size_t k, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("threshold u must lie in (0,1)");
  if (s >= spec.dim() || k >= spec.dim()) throw DomainError("margin index out of range");
  if (s == k) return 1.0;
  std::vector<double> point(spec.dim(), 1.0);
  point[s] = u;
  point[k] = u;
  const double diag = copula(spec, point);
  return std::clamp((1.0 - 2.0 * u + diag) / (1.0 - u), 0.0, 1.0);
}

struct FlaggedPair {
  std::size_t s;
  std::size_t k;
  double deviation;
  double tolerance;
};

struct ThresholdComparison {
  double u;
  EstimateReport estimate;
  Matrix exact_finite_u;
  Matrix lambda_limit;
  std::vector<FlaggedPair> flagged;
  std::vector<std::pair<std::size_t, std::size_t>> undefined;
};

inline constexpr std::size_t kFlagHalfWidths = 3;

// Compares known-margin estimates against the model at each threshold. A pair is flagged when
// |lambda_hat - exact| exceeds 3 half-widths; a degenerate empirical half-width (p = 0 or 1)
// falls back to the half-width at the exact proportion.
inline std::vector<ThresholdComparison> theoretical_vs_empirical(
    const ModelSpec& spec, const SampleBatch& batch, const std::vector<double>& u_grid) {
  require_valid(spec);
  const std::string fp = spec_fingerprint(spec);
  if (batch.spec_fingerprint != fp) {
    throw ProvenanceError("batch fingerprint " + batch.spec_fingerprint +
                          " does not match model fingerprint " + fp);
  }
  if (batch.d != spec.dim()) throw ShapeError("batch dimension does not match model");
  const TailDepMatrix limit = tail_dep_matrix(spec);
  const std::size_t d = spec.dim();

  std::vector<ThresholdComparison> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) {
    ThresholdComparison cmp{u, estimate_tail_dep(batch, u, MarginModel::known(spec.scale())),
                            Matrix(d, d, 1.0), limit.values(), {}, {}};
    for (std::size_t s = 0; s < d; ++s) {
      for (std::size_t k = 0; k < d; ++k) {
        if (s == k) continue;
        const double exact = finite_u_tail_dep(spec, s, k, u);
        cmp.exact_finite_u(s, k) = exact;
        if (!cmp.estimate.defined(s, k)) {
          cmp.undefined.emplace_back(s, k);
          continue;
        }
        double hw = cmp.estimate.half_width(s, k);
        if (hw == 0.0) hw = proportion_half_width(exact, cmp.estimate.exceedances[k]);
        const double dev = std::abs(cmp.estimate.lambda_hat(s, k) - exact);
        const double tol = static_cast<double>(kFlagHalfWidths) * hw;
        if (dev > tol) cmp.flagged.push_back({s, k, dev, tol});
      }
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

inline std::vector<double> default_u_grid() { return {0.90, 0.95, 0.99}; }

}  // namespace mevgen
