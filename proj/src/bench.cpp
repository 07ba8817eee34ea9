#include "sicd/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sicd/baselines.hpp"
#include "sicd/shift_invert.hpp"
#include "sicd/spectrum.hpp"

namespace sicd {

MethodSpec MethodSpec::parse(std::string_view text) {
  MethodSpec m;
  if (text == "power") return m;
  if (text == "cpm") {
    m.kind = Kind::cpm;
    return m;
  }
  if (text.substr(0, 4) == "cpm:") {
    m.kind = Kind::cpm;
    const std::string k(text.substr(4));
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != k.size() || v < 1) throw std::invalid_argument("bad cpm width '" + k + "'");
    m.cpm_k = static_cast<std::size_t>(v);
    return m;
  }
  if (text.substr(0, 3) == "si-") {
    m.kind = Kind::si;
    m.solver = solver_from_string(text.substr(3));
    return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::power: return "power";
    case Kind::cpm: return cpm_k == 0 ? "cpm" : "cpm:" + std::to_string(cpm_k);
    case Kind::si: return "si-" + std::string(to_string(solver));
  }
  return "?";
}

double RunSpec::effective_delta_tilde() const {
  if (delta_tilde) return *delta_tilde;
  return std::holds_alternative<SyntheticSource>(source) ? 1e-4 : 0.05;
}

void RunSpec::validate() const {
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  const double dt = effective_delta_tilde();
  if (!(dt > 0.0 && dt <= 1.0)) throw std::invalid_argument("delta_tilde must lie in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(subproblem_passes > 0.0)) throw std::invalid_argument("subproblem passes must be positive");
  if (!(budget_passes > 0.0)) throw std::invalid_argument("pass budget must be positive");
  if (agd_smoothness && !(*agd_smoothness > 0.0)) {
    throw std::invalid_argument("agd smoothness must be positive");
  }
  if (const auto* s = std::get_if<EdgeListSource>(&source)) {
    if (!(s->scale > 0.0)) throw std::invalid_argument("scale must be positive");
  }
}

SymmetricMatrix build_matrix(const RunSpec& spec) {
  if (const auto* s = std::get_if<SyntheticSource>(&spec.source)) {
    return synthetic_spiked(s->d, s->delta, spec.seed);
  }
  const auto& e = std::get<EdgeListSource>(spec.source);
  try {
    return normalized_laplacian(load_edge_list(e.path), e.scale);
  } catch (const ParseError& err) {
    throw std::runtime_error(e.path.string() + ":" + std::to_string(err.line()) + ": " + err.what());
  } catch (const std::exception& err) {
    throw std::runtime_error(e.path.string() + ": " + err.what());
  }
}

double reference_eigenvalue(const SymmetricOperator& a, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (a.dim() <= kDenseLimit) return dense_spectrum(a).eigenvalues[0];

  SIConfig config;
  config.delta_tilde = 1e-3;
  config.solver = Solver::exact;
  const Phase1Result p1 = phase1_locate(a, config, random_unit_vector(a.dim(), 0));
  SolveOptions options;
  options.kind = Solver::exact;
  Vector w = p1.w;
  constexpr std::size_t kMaxSteps = 500;
  for (std::size_t t = 0; t < kMaxSteps; ++t) {
    w = inexact_power_step(a, w, p1.lambda_f, options, config.delta_tilde / 8.0).w;
    const Vector aw = a.apply(w);
    const double rho = w.dot(aw);
    if ((aw - rho * w).norm() <= tolerance) return rho;
  }
  throw std::runtime_error("reference eigenvalue did not converge");
}

double cached_reference_eigenvalue(const std::filesystem::path& path, const SymmetricOperator& a,
                                   double tolerance) {
  std::filesystem::path cache = path;
  cache += ".rho1";
  {
    std::ifstream in(cache);
    std::size_t d = 0;
    double rho = 0;
    if (in >> d >> rho && d == a.dim() && std::isfinite(rho)) return rho;
  }
  const double rho = reference_eigenvalue(a, tolerance);
  std::ofstream out(cache);
  if (out) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", rho);
    out << a.dim() << ' ' << buf << '\n';
  }
  return rho;
}

std::vector<TraceRecord> run_benchmark(const RunSpec& spec) {
  spec.validate();
  const SymmetricMatrix a = build_matrix(spec);
  std::optional<double> rho1;
  if (spec.reference) {
    if (const auto* e = std::get_if<EdgeListSource>(&spec.source)) {
      rho1 = cached_reference_eigenvalue(e->path, a);
    } else {
      rho1 = reference_eigenvalue(a);
    }
  }
  return run_benchmark(spec, a, rho1);
}

namespace {

std::vector<TraceRecord> method_trace(const MethodSpec& m, const RunSpec& spec,
                                      const SymmetricOperator& a, const Vector& w0) {
  if (m.kind == MethodSpec::Kind::si) {
    SIConfig config;
    config.delta_tilde = spec.effective_delta_tilde();
    config.epsilon = spec.epsilon;
    config.solver = m.solver;
    config.subproblem_budget = Budget::passes(spec.subproblem_passes);
    config.max_total_passes = spec.budget_passes;
    config.seed = spec.seed;
    config.agd_smoothness = spec.agd_smoothness;
    return run_si(a, config, w0).trace;
  }
  BaselineConfig config;
  config.passes = spec.budget_passes;
  config.k = m.cpm_k;
  config.seed = spec.seed;
  return m.kind == MethodSpec::Kind::power ? power_method(a, w0, config).trace
                                           : cpm_run(a, w0, config).trace;
}

}  // namespace

std::vector<TraceRecord> run_benchmark(const RunSpec& spec, const SymmetricOperator& a,
                                       std::optional<double> rho1) {
  spec.validate();
  const Vector w0 = random_unit_vector(a.dim(), spec.seed);
  std::vector<TraceRecord> all;
  for (const MethodSpec& m : spec.methods) {
    std::vector<TraceRecord> rows;
    try {
      rows = method_trace(m, spec, a, w0);
    } catch (const std::exception& e) {
      throw std::runtime_error(m.label() + ": " + e.what());
    }
    for (auto& r : rows) {
      r.method = m.label();
      if (rho1) r.suboptimality = *rho1 - r.rayleigh;
      all.push_back(std::move(r));
    }
  }
  return all;
}

std::optional<double> passes_to_reach(const std::vector<TraceRecord>& records,
                                      std::string_view method, double threshold) {
  std::optional<double> best;
  for (const auto& r : records) {
    if (r.method != method || !r.suboptimality || *r.suboptimality > threshold) continue;
    if (!best || r.passes < *best) best = r.passes;
  }
  return best;
}

}  // namespace sicd
