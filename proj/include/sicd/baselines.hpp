#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sicd/linalg.hpp"
#include "sicd/trace.hpp"

namespace sicd {

struct BaselineConfig {
  /// Stop once this many passes (coordinate updates / d) are charged.
  double passes = 100;
  /// Coordinates refreshed per CPM step; 0 picks max(1, d / 10).
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

struct BaselineResult {
  Vector w;
  double rayleigh = 0;
  std::size_t iterations = 0;
  std::vector<TraceRecord> trace;
};

/// w <- A w / ||A w||, each iteration charged d updates. Throws when A w = 0.
BaselineResult power_method(const SymmetricOperator& a, const Vector& w0,
                            const BaselineConfig& config);

/// Coordinate-wise power method: each step computes c = A x / (x^T A x) - x,
/// replaces the k entries of largest |c| (lowest index on ties) by their
/// power-step values and renormalizes. A x is kept current by column scans;
/// each step is charged k updates. Throws when x^T A x <= 0.
BaselineResult cpm_run(const SymmetricOperator& a, const Vector& w0, const BaselineConfig& config);

/// The k indices of largest |c|, ordered by decreasing |c| then index.
std::vector<std::size_t> top_k_indices(const Vector& c, std::size_t k);

}  // namespace sicd
