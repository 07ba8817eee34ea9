#include "sicd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sicd {

namespace {

void check_start(const SymmetricOperator& a, const Vector& w0, const BaselineConfig& config) {
  if (static_cast<std::size_t>(w0.size()) != a.dim()) throw std::invalid_argument("w0 has wrong length");
  if (!(std::abs(w0.norm() - 1.0) <= 1e-12)) throw std::invalid_argument("w0 is not unit norm");
  if (!(config.passes > 0.0)) throw std::invalid_argument("pass budget must be positive");
}

}  // namespace

BaselineResult power_method(const SymmetricOperator& a, const Vector& w0,
                            const BaselineConfig& config) {
  check_start(a, w0, config);
  RunTrace trace("power", a);
  BaselineResult r;
  r.w = w0;
  trace.record(r.w);
  while (trace.passes() < config.passes) {
    const Vector aw = a.apply(r.w);
    const double n = aw.norm();
    if (!(n > 0.0)) throw std::runtime_error("power method hit the null space of A");
    r.w = aw / n;
    trace.charge(a.dim());
    trace.record(r.w);
    ++r.iterations;
  }
  r.rayleigh = quadratic_form(a, r.w);
  r.trace = trace.take();
  return r;
}

std::vector<std::size_t> top_k_indices(const Vector& c, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(c.size()));
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t i, std::size_t j) {
                      const double ci = std::abs(c[static_cast<Eigen::Index>(i)]);
                      const double cj = std::abs(c[static_cast<Eigen::Index>(j)]);
                      return ci != cj ? ci > cj : i < j;
                    });
  idx.resize(k);
  return idx;
}

BaselineResult cpm_run(const SymmetricOperator& a, const Vector& w0, const BaselineConfig& config) {
  check_start(a, w0, config);
  const std::size_t d = a.dim();
  const std::size_t k = config.k == 0 ? std::max<std::size_t>(1, d / 10) : config.k;
  if (k > d) throw std::invalid_argument("cpm k exceeds the dimension");

  RunTrace trace("cpm", a);
  BaselineResult r;
  Vector x = w0;
  Vector ax = a.apply(x);
  trace.record(x);
  // one row per pass keeps the series comparable with the other methods
  double next_row = 1.0;
  while (trace.passes() < config.passes) {
    const double q = x.dot(ax);
    if (!(q > 0.0)) throw std::runtime_error("cpm needs x^T A x > 0");
    const Vector target = ax / q;
    const Vector c = target - x;
    for (std::size_t j : top_k_indices(c, k)) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double delta = target[jj] - x[jj];
      if (delta == 0.0) continue;
      x[jj] = target[jj];
      a.add_column(j, delta, ax);
    }
    const double n = x.norm();
    x /= n;
    ax /= n;
    trace.charge(k);
    ++r.iterations;
    if (trace.passes() >= next_row || trace.passes() >= config.passes) {
      trace.record(x);
      next_row = std::floor(trace.passes()) + 1.0;
    }
  }
  r.w = x;
  r.rayleigh = quadratic_form(a, x);
  r.trace = trace.take();
  return r;
}

}  // namespace sicd
