#pragma once

// JSON encodings of models, dependence matrices, synthesis results and estimate reports.
// Doubles go through nlohmann's shortest round-trip formatting; NaN is written as null.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mevgen/errors.hpp"
#include "mevgen/estimation.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/model.hpp"
#include "mevgen/sampling.hpp"
#include "mevgen/synthesis.hpp"

namespace mevgen::io {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double v : m.row(r)) {
      if (std::isnan(v)) {
        row.push_back(nullptr);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array()) throw ParseError(what + " row " + std::to_string(r + 1) + " is not an array");
    std::vector<double> vals;
    vals.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!row[c].is_number()) {
        throw ParseError(what + " entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) +
                         ") is not a number");
      }
      vals.push_back(row[c].get<double>());
    }
    rows.push_back(std::move(vals));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const ShapeError& e) {
    throw ParseError(what + ": " + e.what());
  }
}

// Parses JSON text, reporting failures as "<source>:<line>:<column>: <message>".
inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    if (const auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_json_file(const std::string& path) { return parse_json(read_file(path), path); }

namespace detail {

inline const json& field(const json& j, const char* name, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw ParseError(what + " is missing field \"" + name + "\"");
  return *it;
}

inline std::size_t size_field(const json& j, const char* name, const std::string& what) {
  const json& v = field(j, name, what);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(what + " field \"" + name + "\" must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace detail

inline json to_json(const ModelSpec& spec) {
  return json{{"d", spec.dim()},
              {"D", spec.factor_count()},
              {"C", spec.scale()},
              {"alpha", matrix_to_json(spec.alpha())}};
}

// Shape-checked decode; model invariants are left to validate_spec.
inline ModelSpec spec_from_json(const json& j) {
  const std::string what = "model spec";
  const std::size_t d = detail::size_field(j, "d", what);
  const std::size_t D = detail::size_field(j, "D", what);
  const json& c = detail::field(j, "C", what);
  if (!c.is_number()) throw ParseError("model spec field \"C\" must be a number");
  Matrix alpha = matrix_from_json(detail::field(j, "alpha", what), "alpha");
  if (alpha.rows() != d) {
    throw ParseError("alpha has " + std::to_string(alpha.rows()) + " rows but d = " + std::to_string(d));
  }
  if (d > 0 && alpha.cols() != D) {
    throw ParseError("alpha has " + std::to_string(alpha.cols()) + " columns but D = " +
                     std::to_string(D));
  }
  if (d == 0) alpha = Matrix(0, D);
  return ModelSpec(std::move(alpha), c.get<double>());
}

inline json to_json(const TailDepMatrix& lambda) {
  return json{{"d", lambda.dim()}, {"lambda", matrix_to_json(lambda.values())}};
}

inline TailDepMatrix lambda_from_json(const json& j) {
  const std::string what = "tail-dependence matrix";
  const std::size_t d = detail::size_field(j, "d", what);
  Matrix m = matrix_from_json(detail::field(j, "lambda", what), "lambda");
  if (m.rows() != d || m.cols() != d) {
    throw ParseError("lambda must be " + std::to_string(d) + " x " + std::to_string(d));
  }
  return TailDepMatrix::from_matrix(m);
}

inline json to_json(const ExtremalMatrix& eps) {
  return json{{"d", eps.dim()}, {"epsilon", matrix_to_json(eps.epsilon)}};
}

inline json to_json(const SynthesisResult& r) {
  return json{{"spec", to_json(r.spec)},
              {"achieved", to_json(r.achieved)},
              {"exact", r.exact},
              {"c_used", r.c_used},
              {"c_min", r.c_min}};
}

inline json counts_to_json(const std::vector<std::size_t>& counts, std::size_t d) {
  json rows = json::array();
  for (std::size_t s = 0; s < d; ++s) {
    json row = json::array();
    for (std::size_t k = 0; k < d; ++k) row.push_back(counts[s * d + k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const EstimateReport& r) {
  return json{{"u", r.u},
              {"n", r.n},
              {"margins", r.margins.kind == MarginModel::Kind::rank ? "rank" : "known"},
              {"lambda_hat", matrix_to_json(r.lambda_hat)},
              {"lambda_sym", matrix_to_json(r.lambda_sym)},
              {"half_width", matrix_to_json(r.half_width)},
              {"counts", counts_to_json(r.counts, r.d)},
              {"exact_finite_u", nullptr},
              {"lambda_limit", nullptr}};
}

inline json to_json(const ThresholdComparison& c) {
  json j = to_json(c.estimate);
  j["exact_finite_u"] = matrix_to_json(c.exact_finite_u);
  j["lambda_limit"] = matrix_to_json(c.lambda_limit);
  json flags = json::array();
  for (const auto& f : c.flagged) {
    flags.push_back(json{{"pair", {f.s + 1, f.k + 1}}, {"deviation", f.deviation}, {"tolerance", f.tolerance}});
  }
  j["flagged"] = std::move(flags);
  json undefined = json::array();
  for (const auto& [s, k] : c.undefined) undefined.push_back(json::array({s + 1, k + 1}));
  j["undefined"] = std::move(undefined);
  return j;
}

struct BatchMetadata {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string spec_fingerprint;
};

inline json to_json(const BatchMetadata& m) {
  return json{{"n", m.n}, {"seed", m.seed}, {"spec_fingerprint", m.spec_fingerprint}};
}

inline BatchMetadata metadata_from_json(const json& j) {
  const std::string what = "sample metadata";
  BatchMetadata m;
  m.n = detail::size_field(j, "n", what);
  const json& seed = detail::field(j, "seed", what);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError("sample metadata field \"seed\" must be an integer");
  }
  m.seed = seed.get<std::uint64_t>();
  const json& fp = detail::field(j, "spec_fingerprint", what);
  if (!fp.is_string()) throw ParseError("sample metadata field \"spec_fingerprint\" must be a string");
  m.spec_fingerprint = fp.get<std::string>();
  return m;
}

}  // namespace mevgen::io
