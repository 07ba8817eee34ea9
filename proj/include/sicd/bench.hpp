#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sicd/least_squares.hpp"
#include "sicd/linalg.hpp"
#include "sicd/trace.hpp"

namespace sicd {

struct SyntheticSource {
  std::size_t d = 100;
  double delta = 5e-3;
};

struct EdgeListSource {
  std::filesystem::path path;
  double scale = 0.5;
};

struct MethodSpec {
  enum class Kind { power, cpm, si };
  Kind kind = Kind::power;
  std::size_t cpm_k = 0;  // 0: max(1, d / 10)
  Solver solver = Solver::gsl;

  /// "power", "cpm", "cpm:K", or "si-<solver>".
  static MethodSpec parse(std::string_view text);
  std::string label() const;
};

struct RunSpec {
  std::variant<SyntheticSource, EdgeListSource> source;
  std::vector<MethodSpec> methods;
  /// Defaults to 1e-4 for synthetic input and 0.05 for edge lists.
  std::optional<double> delta_tilde;
  double epsilon = 1e-4;
  double subproblem_passes = 4;
  double budget_passes = 200;
  std::uint64_t seed = 0;
  /// Overrides the smoothness constant of the si-agd inner solver.
  std::optional<double> agd_smoothness;
  /// Compute or load rho_1 so rows carry suboptimality.
  bool reference = true;

  double effective_delta_tilde() const;
  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Builds the operator a spec names. Edge-list errors carry the path.
SymmetricMatrix build_matrix(const RunSpec& spec);

/// Top eigenvalue to within `tolerance`: the dense oracle when
/// d <= kDenseLimit, otherwise shift-and-invert with exact inner solves run
/// until the residual falls below the tolerance.
double reference_eigenvalue(const SymmetricOperator& a, double tolerance = 1e-12);

/// reference_eigenvalue for an edge list, cached in "<path>.rho1".
double cached_reference_eigenvalue(const std::filesystem::path& path, const SymmetricOperator& a,
                                   double tolerance = 1e-12);

/// Runs every method from the same random start. Series are concatenated
/// in method order.
std::vector<TraceRecord> run_benchmark(const RunSpec& spec);
std::vector<TraceRecord> run_benchmark(const RunSpec& spec, const SymmetricOperator& a,
                                       std::optional<double> rho1);

/// Smallest pass count at which `method` reaches suboptimality <= threshold.
std::optional<double> passes_to_reach(const std::vector<TraceRecord>& records,
                                      std::string_view method, double threshold);

}  // namespace sicd
