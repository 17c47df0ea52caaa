// mevgen: synthesize, evaluate, sample and validate max-stable factor models.
//
// Exit codes: 0 success, 2 usage or parse error, 3 validation or infeasibility,
// 4 provenance mismatch.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mevgen/csv_io.hpp"
#include "mevgen/json_io.hpp"
#include "mevgen/mevgen.hpp"
#include "mevgen/plot.hpp"

namespace {

using mevgen::io::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitProvenance = 4;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

mevgen::ModelSpec load_spec(const std::string& path) {
  return mevgen::io::spec_from_json(mevgen::io::load_json_file(path));
}

mevgen::ModelSpec load_valid_spec(const std::string& path) {
  auto spec = load_spec(path);
  mevgen::require_valid(spec);
  return spec;
}

std::string sidecar_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string lambda_file;
  std::optional<double> c;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const auto target = mevgen::io::lambda_from_json(mevgen::io::load_json_file(a.lambda_file));
  const auto result = mevgen::synthesize(target, a.c);
  const auto exactness = mevgen::exactness_check(target);

  bool any_dependence = false;
  for (std::size_t s = 0; s < target.dim(); ++s) {
    for (std::size_t k = s + 1; k < target.dim(); ++k) any_dependence |= target(s, k) > 0.0;
  }
  if (!any_dependence) std::cerr << "warning: no extremal dependence requested\n";

  const std::string doc = mevgen::io::to_json(result).dump(2) + "\n";
  std::ostream& info = a.out.empty() ? std::cerr : std::cout;
  if (!a.out.empty()) write_text(a.out, doc);
  info << "c_min: " << json(result.c_min).dump() << "\n"
       << "c_used: " << json(result.c_used).dump() << "\n"
       << "sums_within_one (target attainable at C = 1): "
       << (exactness.sums_within_one ? "true" : "false") << "\n"
       << "entries_bounded (all lambda <= 1/(d-1)): "
       << (exactness.entries_bounded ? "true" : "false") << "\n"
       << "achieved: " << (result.exact ? "target" : "target / C") << "\n";
  if (a.out.empty()) std::cout << doc;
  return kExitOk;
}

struct SampleArgs {
  std::string spec_file;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 0;
};

int run_sample(const SampleArgs& a) {
  const auto spec = load_valid_spec(a.spec_file);
  const auto batch = mevgen::sample_batch(spec, a.n, a.seed, a.threads);
  if (a.out.empty() || a.out == "-") {
    mevgen::io::write_csv(std::cout, batch);
    return kExitOk;
  }
  {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw UsageError("cannot write " + a.out);
    mevgen::io::write_csv(out, batch);
  }
  const mevgen::io::BatchMetadata meta{batch.n, batch.seed, batch.spec_fingerprint};
  write_text(sidecar_path(a.out), mevgen::io::to_json(meta).dump(2) + "\n");
  return kExitOk;
}

int run_coeffs(const std::string& spec_file) {
  const auto spec = load_valid_spec(spec_file);
  const auto lambda = mevgen::tail_dep_matrix(spec);
  const auto eps = mevgen::extremal_matrix(spec);
  const json doc{{"d", spec.dim()},
                 {"lambda", mevgen::io::matrix_to_json(lambda.values())},
                 {"epsilon", mevgen::io::matrix_to_json(eps.epsilon)}};
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

struct CdfArgs {
  std::string spec_file;
  std::vector<double> x;
  std::vector<double> u;
};

int run_cdf(const CdfArgs& a) {
  const auto spec = load_valid_spec(a.spec_file);
  json doc = json::object();
  if (a.x.empty() == a.u.empty()) throw UsageError("give exactly one of --x or --u");
  if (!a.x.empty()) {
    doc["x"] = a.x;
    doc["cdf"] = mevgen::joint_cdf(spec, a.x);
    doc["log_cdf"] = mevgen::log_joint_cdf(spec, a.x);
  } else {
    doc["u"] = a.u;
    doc["copula"] = mevgen::copula(spec, a.u);
    doc["log_copula"] = mevgen::log_copula(spec, a.u);
  }
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

mevgen::SampleBatch load_batch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mevgen::ParseError("cannot open " + path);
  auto batch = mevgen::io::read_csv(in, path);
  if (std::filesystem::exists(sidecar_path(path))) {
    const auto meta =
        mevgen::io::metadata_from_json(mevgen::io::load_json_file(sidecar_path(path)));
    batch.seed = meta.seed;
    batch.spec_fingerprint = meta.spec_fingerprint;
  }
  return batch;
}

struct EstimateArgs {
  std::string samples;
  double u = 0.95;
  std::string spec_file;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  if (!(a.u > 0.0 && a.u < 1.0)) throw UsageError("--u must lie in (0,1)");
  auto batch = load_batch(a.samples);
  if (batch.n == 0) throw UsageError(a.samples + " holds no observations");
  const auto rank = mevgen::estimate_tail_dep(batch, a.u, mevgen::MarginModel::rank());
  json doc = mevgen::io::to_json(rank);

  if (!a.spec_file.empty()) {
    const auto spec = load_valid_spec(a.spec_file);
    if (batch.d != spec.dim()) {
      throw UsageError("samples have " + std::to_string(batch.d) + " columns, model has d = " +
                       std::to_string(spec.dim()));
    }
    if (batch.spec_fingerprint.empty()) {
      std::cerr << "warning: no metadata sidecar for " << a.samples
                << "; provenance not checked\n";
      batch.spec_fingerprint = mevgen::spec_fingerprint(spec);
    }
    const auto cmp = mevgen::theoretical_vs_empirical(spec, batch, {a.u});
    const auto& c = cmp.front();
    doc["exact_finite_u"] = mevgen::io::matrix_to_json(c.exact_finite_u);
    doc["lambda_limit"] = mevgen::io::matrix_to_json(c.lambda_limit);
    doc["known"] = mevgen::io::to_json(c);
    doc["spec_fingerprint"] = batch.spec_fingerprint;
    doc["consistent"] = c.flagged.empty();
    for (const auto& f : c.flagged) {
      std::cerr << "flag: pair (" << f.s + 1 << "," << f.k + 1 << ") deviates by " << f.deviation
                << " > " << f.tolerance << "\n";
    }
  }
  write_text(a.out, doc.dump(2) + "\n");
  return kExitOk;
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("pair \"" + text + "\" must look like s,k");
  try {
    std::size_t used = 0;
    const auto s = std::stoul(text.substr(0, comma), &used);
    if (used != comma) throw UsageError("bad pair " + text);
    const auto rest = text.substr(comma + 1);
    const auto k = std::stoul(rest, &used);
    if (used != rest.size()) throw UsageError("bad pair " + text);
    return {s, k};
  } catch (const std::logic_error&) {
    throw UsageError("pair \"" + text + "\" must look like s,k");
  }
}

struct PlotArgs {
  std::string samples;
  std::vector<std::string> pairs;
  std::string out;
  std::string scale = "linear";
};

int run_plot(const PlotArgs& a) {
  mevgen::io::PlotRequest req;
  req.batch_path = a.samples;
  req.output_path = a.out;
  req.scale = a.scale == "log" ? mevgen::io::AxisScale::log : mevgen::io::AxisScale::linear;
  for (const auto& p : a.pairs) req.pairs.push_back(parse_pair(p));
  const auto batch = load_batch(req.batch_path);
  if (req.pairs.empty()) {
    for (std::size_t s = 1; s <= batch.d; ++s) {
      for (std::size_t k = s + 1; k <= batch.d; ++k) req.pairs.emplace_back(s, k);
    }
  }
  try {
    mevgen::io::check_pairs(req.pairs, batch.d);
  } catch (const mevgen::DomainError& e) {
    throw UsageError(e.what());
  }
  write_text(req.output_path, mevgen::io::render_scatter_svg(batch, req.pairs, req.scale));
  return kExitOk;
}

// Validation plus a small battery of closed-form identities on seeded random points.
int run_check(const std::string& spec_file) {
  const auto spec = load_spec(spec_file);
  const auto report = mevgen::validate_spec(spec);
  if (!report.ok()) {
    std::cout << "spec: INVALID\n";
    for (const auto& v : report.violations) std::cout << "  " << v << "\n";
    return kExitInvalid;
  }
  std::cout << "spec: ok (d = " << spec.dim() << ", D = " << spec.factor_count()
            << ", C = " << json(spec.scale()).dump() << ")\n";

  const std::size_t d = spec.dim();
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_real_distribution<double> pos(0.2, 20.0);
  std::uniform_real_distribution<double> power(0.1, 10.0);
  bool all_ok = true;
  const auto line = [&all_ok](const char* name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    all_ok = all_ok && ok;
  };

  bool margins = true;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = pos(rng);
    std::vector<double> pt(d, 1e9);
    pt[i] = x;
    margins = margins && std::abs(mevgen::joint_cdf(spec, pt) - mevgen::marginal_cdf(spec, i, x)) <= 1e-6;
  }
  line("margin law", margins);

  bool stable = true;
  bool consistent = true;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> u(d);
    std::vector<double> ut(d);
    std::vector<double> x(d);
    std::vector<double> ux(d);
    const double t = power(rng);
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = unit(rng);
      ut[i] = std::pow(u[i], t);
      x[i] = pos(rng);
      ux[i] = std::exp(-spec.scale() / x[i]);
    }
    stable = stable &&
             std::abs(t * mevgen::log_copula(spec, u) - mevgen::log_copula(spec, ut)) <= 1e-12 *
                 std::max(1.0, std::abs(mevgen::log_copula(spec, ut)));
    const double f = mevgen::joint_cdf(spec, x);
    consistent = consistent && std::abs(f - mevgen::copula(spec, ux)) <= 1e-12 * std::max(f, 1e-300);
  }
  line("max-stability", stable);
  line("cdf/copula consistency", consistent);

  const auto lambda = mevgen::tail_dep_matrix(spec);
  bool eps_ok = true;
  bool bounds_ok = true;
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t k = s + 1; k < d; ++k) {
      std::vector<double> u(d, 1.0);
      u[s] = std::exp(-1.0);
      u[k] = std::exp(-1.0);
      eps_ok = eps_ok && std::abs(2.0 - lambda(s, k) + mevgen::log_copula(spec, u)) <= 1e-12;
      const double cap = std::min(spec.row_sum(s), spec.row_sum(k)) / spec.scale();
      bounds_ok = bounds_ok && lambda(s, k) >= 0.0 && lambda(s, k) <= cap + 1e-12 &&
                  lambda(s, k) == lambda(k, s);
    }
  }
  line("extremal coefficient = -log copula diagonal", eps_ok);
  line("tail-dependence bounds", bounds_ok);
  return all_ok ? kExitOk : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-stable factor models with prescribed tail dependence"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Build a model from a tail-dependence matrix");
  synth_cmd->add_option("lambda-file", synth.lambda_file, "Lambda JSON {\"d\", \"lambda\"}")->required();
  synth_cmd->add_option("--c", synth.c, "Scale constant C (default max(c_min, 1))");
  synth_cmd->add_option("--out", synth.out, "Write the result JSON here");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw observations to CSV");
  sample_cmd->add_option("spec-file", sample.spec_file, "Model JSON")->required();
  sample_cmd->add_option("--n", sample.n, "Number of observations")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "64-bit seed")->capture_default_str();
  sample_cmd->add_option("--out", sample.out, "CSV path; a <out>.meta.json sidecar is written too");
  sample_cmd->add_option("--threads", sample.threads, "Worker threads (0 = all cores)");

  std::string coeffs_spec;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "Print tail-dependence and extremal matrices");
  coeffs_cmd->add_option("spec-file", coeffs_spec, "Model JSON")->required();

  CdfArgs cdf;
  auto* cdf_cmd = app.add_subcommand("cdf", "Evaluate the joint CDF (--x) or copula (--u)");
  cdf_cmd->add_option("spec-file", cdf.spec_file, "Model JSON")->required();
  cdf_cmd->add_option("--x", cdf.x, "Point, comma separated")->delimiter(',');
  cdf_cmd->add_option("--u", cdf.u, "Copula argument, comma separated")->delimiter(',');

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Empirical tail dependence from a CSV batch");
  est_cmd->add_option("samples-file", est.samples, "CSV written by `sample`")->required();
  est_cmd->add_option("--u", est.u, "Threshold in (0,1)")->capture_default_str();
  est_cmd->add_option("--spec", est.spec_file, "Model JSON for known margins and comparison");
  est_cmd->add_option("--out", est.out, "Write the report here instead of stdout");

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Pairwise scatter panels as SVG");
  plot_cmd->add_option("samples-file", plot.samples, "CSV written by `sample`")->required();
  plot_cmd->add_option("--pair", plot.pairs, "Coordinate pair s,k (repeatable; default all)");
  plot_cmd->add_option("--out", plot.out, "SVG path")->required();
  plot_cmd->add_option("--scale", plot.scale, "Axis scale")
      ->check(CLI::IsMember({"linear", "log"}))
      ->capture_default_str();

  std::string check_spec;
  auto* check_cmd = app.add_subcommand("check", "Validate a model and run identity checks");
  check_cmd->add_option("spec-file", check_spec, "Model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*sample_cmd) return run_sample(sample);
    if (*coeffs_cmd) return run_coeffs(coeffs_spec);
    if (*cdf_cmd) return run_cdf(cdf);
    if (*est_cmd) return run_estimate(est);
    if (*plot_cmd) return run_plot(plot);
    if (*check_cmd) return run_check(check_spec);
  } catch (const mevgen::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const mevgen::ValidationError& e) {
    std::cerr << "error: invalid input\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kExitInvalid;
  } catch (const mevgen::ProvenanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvenance;
  } catch (const mevgen::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mevgen::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mevgen::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
