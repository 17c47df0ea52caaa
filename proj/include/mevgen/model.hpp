#pragma once

// Parametric max-stable family built from shared and idiosyncratic unit Frechet factors:
//
//   X_i = max_j (alpha[i][j] * Z_j)  v  (C - sum_j alpha[i][j]) * Y_i,   i = 0..d-1
//
// Closed-form joint CDF, extreme-value copula and pairwise dependence coefficients.
// Indices are zero-based throughout the library; user-facing messages are one-based.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"

namespace mevgen {

// Absolute slack allowed on C >= row sum; rows within it are treated as having no
// idiosyncratic term.
inline constexpr double kFeasibilityTolerance = 1e-9;

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
};

// Immutable model parametrization: d margins, D shared factors, d x D weights, scale C.
class ModelSpec {
public:
  ModelSpec(Matrix alpha, double c) : alpha_(std::move(alpha)), c_(c) {
    const std::size_t d = alpha_.rows();
    row_sums_.assign(d, 0.0);
    slack_.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (double a : alpha_.row(i)) s += a;
      row_sums_[i] = s;
      double slack = c_ - s;
      if (slack < 0.0 && slack >= -kFeasibilityTolerance) slack = 0.0;
      slack_[i] = slack;
    }
    report_ = check();
  }

  std::size_t dim() const noexcept { return alpha_.rows(); }
  std::size_t factor_count() const noexcept { return alpha_.cols(); }
  const Matrix& alpha() const noexcept { return alpha_; }
  double scale() const noexcept { return c_; }

  double row_sum(std::size_t i) const { return row_sums_.at(i); }

  // Weight of the idiosyncratic term Y_i, i.e. C - row_sum(i), clamped at 0 within tolerance.
  double slack(std::size_t i) const { return slack_.at(i); }

  const ValidationReport& report() const noexcept { return report_; }

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    return a.c_ == b.c_ && a.alpha_ == b.alpha_;
  }

private:
  ValidationReport check() const {
    ValidationReport r;
    const std::size_t d = dim();
    const std::size_t D = factor_count();
    if (d < 2) r.violations.push_back("d = " + std::to_string(d) + " must be >= 2");
    if (D < 1) r.violations.push_back("D = " + std::to_string(D) + " must be >= 1");
    if (!(c_ > 0.0) || !std::isfinite(c_)) {
      r.violations.push_back("C = " + std::to_string(c_) + " must be positive and finite");
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < D; ++j) {
        const double a = alpha_(i, j);
        if (!(a >= 0.0) || !std::isfinite(a)) {
          r.violations.push_back("alpha(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                 ") = " + std::to_string(a) + " must be finite and >= 0");
        }
      }
      if (!(slack_[i] >= 0.0)) {
        r.violations.push_back("row " + std::to_string(i + 1) + " sum " +
                               std::to_string(row_sums_[i]) + " exceeds C = " +
                               std::to_string(c_));
      }
    }
    return r;
  }

  Matrix alpha_;
  double c_;
  std::vector<double> row_sums_;
  std::vector<double> slack_;
  ValidationReport report_;
};

inline ValidationReport validate_spec(const ModelSpec& spec) { return spec.report(); }

inline void require_valid(const ModelSpec& spec) {
  if (!spec.report().ok()) throw ValidationError(spec.report().violations);
}

// Symmetric matrix of pairwise tail-dependence coefficients with unit diagonal.
class TailDepMatrix {
public:
  static constexpr double kSymmetryTolerance = 1e-9;

  // Validates and normalizes: upper triangle is authoritative and mirrored into the lower.
  static TailDepMatrix from_matrix(const Matrix& m) {
    std::vector<std::string> v;
    const std::size_t d = m.rows();
    if (m.cols() != d) throw ShapeError("tail-dependence matrix must be square");
    if (d < 2) v.push_back("d = " + std::to_string(d) + " must be >= 2");
    const auto at = [](std::size_t s, std::size_t k) {
      return "(" + std::to_string(s + 1) + "," + std::to_string(k + 1) + ")";
    };
    for (std::size_t s = 0; s < d; ++s) {
      if (!(std::abs(m(s, s) - 1.0) <= kSymmetryTolerance)) {
        v.push_back("diagonal " + at(s, s) + " = " + std::to_string(m(s, s)) + " must be 1");
      }
      for (std::size_t k = s + 1; k < d; ++k) {
        const double up = m(s, k);
        if (!(up >= 0.0 && up <= 1.0)) {
          v.push_back("entry " + at(s, k) + " = " + std::to_string(up) + " outside [0,1]");
        }
        if (!(std::abs(up - m(k, s)) <= kSymmetryTolerance)) {
          v.push_back("asymmetric at " + at(s, k) + ": " + std::to_string(up) + " vs " +
                      std::to_string(m(k, s)));
        }
      }
    }
    if (!v.empty()) throw ValidationError(std::move(v));

    TailDepMatrix out;
    out.lambda_ = Matrix(d, d, 1.0);
    for (std::size_t s = 0; s < d; ++s) {
      for (std::size_t k = s + 1; k < d; ++k) {
        out.lambda_(s, k) = m(s, k);
        out.lambda_(k, s) = m(s, k);
      }
    }
    return out;
  }

  std::size_t dim() const noexcept { return lambda_.rows(); }
  double operator()(std::size_t s, std::size_t k) const noexcept { return lambda_(s, k); }
  const Matrix& values() const noexcept { return lambda_; }

private:
  Matrix lambda_;
};

// Pairwise extremal coefficients, 1 on the diagonal.
struct ExtremalMatrix {
  Matrix epsilon;

  std::size_t dim() const noexcept { return epsilon.rows(); }
  double operator()(std::size_t s, std::size_t k) const noexcept { return epsilon(s, k); }
};

// P(X_i <= x) = exp(-C/x), the same Frechet(C) law for every margin.
inline double marginal_cdf(const ModelSpec& spec, std::size_t i, double x) {
  if (i >= spec.dim()) throw DomainError("margin index out of range");
  if (!(x > 0.0)) throw DomainError("marginal_cdf requires x > 0");
  return std::exp(-spec.scale() / x);
}

// -log F(x). Zero weights drop out of their factor (1/0 = +inf convention).
inline double joint_cdf_exponent(const ModelSpec& spec, std::span<const double> x) {
  require_valid(spec);
  const std::size_t d = spec.dim();
  const std::size_t D = spec.factor_count();
  if (x.size() != d) {
    throw ShapeError("point has " + std::to_string(x.size()) + " coordinates, model has d = " +
                     std::to_string(d));
  }
  for (double xi : x) {
    if (!(xi > 0.0)) throw DomainError("joint_cdf requires every x_i > 0");
  }
  std::vector<double> col_max(D, 0.0);
  double exponent = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double inv = 1.0 / x[i];
    const auto row = spec.alpha().row(i);
    for (std::size_t j = 0; j < D; ++j) {
      if (row[j] == 0.0) continue;
      col_max[j] = std::max(col_max[j], row[j] * inv);
    }
    exponent += spec.slack(i) * inv;
  }
  for (double m : col_max) exponent += m;
  return exponent;
}

inline double log_joint_cdf(const ModelSpec& spec, std::span<const double> x) {
  return -joint_cdf_exponent(spec, x);
}

inline double joint_cdf(const ModelSpec& spec, std::span<const double> x) {
  return std::exp(-joint_cdf_exponent(spec, x));
}

// log of the extreme-value copula, evaluated as a single sum.
inline double log_copula(const ModelSpec& spec, std::span<const double> u) {
  require_valid(spec);
  const std::size_t d = spec.dim();
  const std::size_t D = spec.factor_count();
  if (u.size() != d) {
    throw ShapeError("point has " + std::to_string(u.size()) + " coordinates, model has d = " +
                     std::to_string(d));
  }
  for (double ui : u) {
    if (!(ui > 0.0 && ui <= 1.0)) throw DomainError("copula requires every u_i in (0,1]");
  }
  const double inv_c = 1.0 / spec.scale();
  // Each log u_i <= 0, so the minimum of u_i^w is the most negative w * log u_i.
  std::vector<double> col_min(D, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double lu = std::log(u[i]);
    const auto row = spec.alpha().row(i);
    for (std::size_t j = 0; j < D; ++j) {
      if (row[j] == 0.0) continue;
      col_min[j] = std::min(col_min[j], row[j] * inv_c * lu);
    }
    total += spec.slack(i) * inv_c * lu;
  }
  for (double m : col_min) total += m;
  return total;
}

inline double copula(const ModelSpec& spec, std::span<const double> u) {
  return std::exp(log_copula(spec, u));
}

// lambda_sk = (1/C) sum_j min(alpha[s][j], alpha[k][j]); diagonal fixed at 1.
inline TailDepMatrix tail_dep_matrix(const ModelSpec& spec) {
  require_valid(spec);
  const std::size_t d = spec.dim();
  const double inv_c = 1.0 / spec.scale();
  Matrix lambda(d, d, 1.0);
  for (std::size_t s = 0; s < d; ++s) {
    const auto rs = spec.alpha().row(s);
    for (std::size_t k = s + 1; k < d; ++k) {
      const auto rk = spec.alpha().row(k);
      double sum = 0.0;
      for (std::size_t j = 0; j < rs.size(); ++j) sum += std::min(rs[j], rk[j]);
      // Clamp rounding spill from a row sum sitting on the C boundary.
      const double l = std::min(sum * inv_c, 1.0);
      lambda(s, k) = l;
      lambda(k, s) = l;
    }
  }
  return TailDepMatrix::from_matrix(lambda);
}

inline ExtremalMatrix extremal_matrix(const ModelSpec& spec) {
  const TailDepMatrix lambda = tail_dep_matrix(spec);
  const std::size_t d = lambda.dim();
  ExtremalMatrix out{Matrix(d, d, 1.0)};
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t k = 0; k < d; ++k) {
      if (s != k) out.epsilon(s, k) = 2.0 - lambda(s, k);
    }
  }
  return out;
}

// theta_S = -log F(C, ..., C) restricted to the margins in `subset`; lies in [1, |S|].
inline double multivariate_extremal_coeff(const ModelSpec& spec,
                                          std::span<const std::size_t> subset) {
  require_valid(spec);
  if (subset.size() < 2) throw DomainError("extremal coefficient needs at least two margins");
  std::vector<bool> seen(spec.dim(), false);
  for (std::size_t i : subset) {
    if (i >= spec.dim()) throw DomainError("margin index " + std::to_string(i + 1) + " out of range");
    if (seen[i]) throw DomainError("margin index " + std::to_string(i + 1) + " repeated");
    seen[i] = true;
  }
  const std::size_t D = spec.factor_count();
  double total = 0.0;
  for (std::size_t j = 0; j < D; ++j) {
    double m = 0.0;
    for (std::size_t i : subset) m = std::max(m, spec.alpha()(i, j));
    total += m;
  }
  for (std::size_t i : subset) total += spec.slack(i);
  return total / spec.scale();
}

}  // namespace mevgen
