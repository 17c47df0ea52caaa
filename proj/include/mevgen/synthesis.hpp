#pragma once

// Builds a model whose pairwise tail dependence is a prescribed matrix Lambda (scaled by 1/C).
//
// One shared factor per pair (s,k), s<k, so D = d(d-1)/2. Columns are laid out in blocks:
// block s holds the pairs (s,s+1), ..., (s,d-1). Row s carries lambda_sk in its own block and
// the row maximum m_r of every earlier row r in column (r,s). Any two rows then share exactly
// one nonzero column, which makes sum_j min(alpha_s, alpha_k) = min(lambda_sk, m_s) = lambda_sk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/model.hpp"

namespace mevgen {

inline constexpr double kExactTolerance = 1e-12;

// Block bookkeeping for the pair-per-column layout.
class SynthesisPlan {
public:
  explicit SynthesisPlan(const TailDepMatrix& target) : d_(target.dim()) {
    block_end_.assign(d_, 0);
    for (std::size_t i = 1; i < d_; ++i) block_end_[i] = block_end_[i - 1] + (d_ - i);
    row_max_.assign(d_ - 1, 0.0);
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      double m = 0.0;
      for (std::size_t k = i + 1; k < d_; ++k) m = std::max(m, target(i, k));
      row_max_[i] = m;
    }
  }

  std::size_t dim() const noexcept { return d_; }
  std::size_t columns() const noexcept { return d_ * (d_ - 1) / 2; }

  // Number of columns in blocks 1..i (one-based block count), i.e. n(i) with n(0) = 0.
  std::size_t block_end(std::size_t i) const { return block_end_.at(i); }
  const std::vector<std::size_t>& block_ends() const noexcept { return block_end_; }

  // m_i = max_{k>i} lambda_ik. The last margin opens no block, so it has no row maximum.
  double row_max(std::size_t i) const {
    if (i + 1 >= d_) {
      throw std::logic_error("row maximum requested for margin " + std::to_string(i + 1) +
                             ", defined only for margins 1.." + std::to_string(d_ - 1));
    }
    return row_max_[i];
  }
  const std::vector<double>& row_maxima() const noexcept { return row_max_; }

  // Zero-based column of pair (s,k), s<k.
  std::size_t column(std::size_t s, std::size_t k) const {
    if (!(s < k && k < d_)) throw DomainError("pair must satisfy s < k < d");
    return block_end_[s] + (k - s) - 1;
  }

  // Inverse of column().
  std::pair<std::size_t, std::size_t> pair_of(std::size_t col) const {
    if (col >= columns()) throw DomainError("column out of range");
    std::size_t s = 0;
    while (block_end_[s + 1] <= col) ++s;
    return {s, s + 1 + (col - block_end_[s])};
  }

private:
  std::size_t d_;
  std::vector<std::size_t> block_end_;
  std::vector<double> row_max_;
};

inline SynthesisPlan build_plan(const TailDepMatrix& target) { return SynthesisPlan(target); }

// Row sum of the synthesized coefficient matrix for margin i: sum_{r<i} m_r + sum_{k>i} lambda_ik.
inline double synthesized_row_sum(const TailDepMatrix& target, const SynthesisPlan& plan,
                                  std::size_t i) {
  double s = 0.0;
  for (std::size_t r = 0; r < i; ++r) s += plan.row_max(r);
  for (std::size_t k = i + 1; k < target.dim(); ++k) s += target(i, k);
  return s;
}

// Smallest C for which the construction is feasible (max synthesized row sum).
inline double c_min(const TailDepMatrix& target) {
  const SynthesisPlan plan(target);
  double best = 0.0;
  for (std::size_t i = 0; i < target.dim(); ++i) {
    best = std::max(best, synthesized_row_sum(target, plan, i));
  }
  return best;
}

inline Matrix build_alpha(const TailDepMatrix& target, const SynthesisPlan& plan) {
  const std::size_t d = target.dim();
  if (plan.dim() != d) throw ShapeError("plan was built for a different dimension");
  Matrix a(d, plan.columns(), 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t r = 0; r < i; ++r) a(i, plan.column(r, i)) = plan.row_max(r);
    for (std::size_t k = i + 1; k < d; ++k) a(i, plan.column(i, k)) = target(i, k);
  }
  return a;
}

struct SynthesisResult {
  ModelSpec spec;
  TailDepMatrix achieved;
  bool exact;
  double c_used;
  double c_min;
};

inline SynthesisResult synthesize(const TailDepMatrix& target, std::optional<double> c = {}) {
  const SynthesisPlan plan(target);
  const double cmin = c_min(target);
  double used = std::max(cmin, 1.0);
  if (c) {
    if (!(*c > 0.0) || !std::isfinite(*c) || *c < cmin - kFeasibilityTolerance) {
      throw InfeasibleError(*c, cmin);
    }
    used = *c;
  }
  ModelSpec spec(build_alpha(target, plan), used);
  require_valid(spec);
  TailDepMatrix achieved = tail_dep_matrix(spec);

  const std::size_t d = target.dim();
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t k = s + 1; k < d; ++k) {
      if (std::abs(achieved(s, k) - target(s, k) / used) > kExactTolerance) {
        throw std::logic_error("synthesized coefficient (" + std::to_string(s + 1) + "," +
                               std::to_string(k + 1) + ") does not match target / C");
      }
    }
  }
  const bool exact = std::abs(used - 1.0) <= kExactTolerance;
  return SynthesisResult{std::move(spec), std::move(achieved), exact, used, cmin};
}

struct ExactnessReport {
  bool sums_within_one;    // c_min <= 1: the target itself is attainable
  bool entries_bounded;    // every lambda_sk <= 1/(d-1), which implies the above
  double c_min;
};

inline ExactnessReport exactness_check(const TailDepMatrix& target) {
  const std::size_t d = target.dim();
  const double cmin = c_min(target);
  const double bound = 1.0 / static_cast<double>(d - 1);
  bool bounded = true;
  for (std::size_t s = 0; s < d && bounded; ++s) {
    for (std::size_t k = s + 1; k < d; ++k) {
      if (target(s, k) > bound + kExactTolerance) {
        bounded = false;
        break;
      }
    }
  }
  const bool within_one = cmin <= 1.0 + kExactTolerance;
  if (bounded && !within_one) {
    throw std::logic_error("entrywise bound holds but c_min = " + std::to_string(cmin) + " > 1");
  }
  return ExactnessReport{within_one, bounded, cmin};
}

}  // namespace mevgen
