#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sicd/linalg.hpp"

namespace sicd {

/// One convergence sample. `passes` counts coordinate updates / d, with a
/// full matvec charged as d updates.
struct TraceRecord {
  std::string method;
  double passes = 0;
  double seconds = 0;
  double rayleigh = 0;
  std::optional<double> suboptimality;
};

/// Accumulates cost and convergence samples for one method run.
class RunTrace {
 public:
  RunTrace(std::string method, const SymmetricOperator& a);

  void charge(std::uint64_t updates) { updates_ += updates; }
  std::uint64_t updates() const { return updates_; }
  double passes() const;

  /// Appends a row for unit vector w; its Rayleigh quotient is measured
  /// with an uncharged matvec.
  void record(const Vector& w);
  void record(double rayleigh);

  const std::vector<TraceRecord>& records() const { return records_; }
  std::vector<TraceRecord> take() { return std::move(records_); }

 private:
  std::string method_;
  const SymmetricOperator& a_;
  std::uint64_t updates_ = 0;
  std::chrono::steady_clock::time_point start_;
  std::vector<TraceRecord> records_;
};

/// CSV with header "method,passes,seconds,rayleigh,suboptimality", 17
/// significant digits, rows sorted by (method, passes).
void emit_trace(std::vector<TraceRecord> records, std::ostream& out);
std::vector<TraceRecord> parse_trace(std::istream& in);

}  // namespace sicd
