#include "sicd/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace sicd {

RunTrace::RunTrace(std::string method, const SymmetricOperator& a)
    : method_(std::move(method)), a_(a), start_(std::chrono::steady_clock::now()) {}

double RunTrace::passes() const {
  return static_cast<double>(updates_) / static_cast<double>(a_.dim());
}

void RunTrace::record(const Vector& w) { record(w.dot(a_.apply(w))); }

void RunTrace::record(double rayleigh) {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
  records_.push_back({method_, passes(), elapsed.count(), rayleigh, std::nullopt});
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view field, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

void emit_trace(std::vector<TraceRecord> records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("no trace records to emit");
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.passes < b.passes;
  });
  out << "method,passes,seconds,rayleigh,suboptimality\n";
  for (const auto& r : records) {
    out << r.method << ',' << format_double(r.passes) << ',' << format_double(r.seconds) << ','
        << format_double(r.rayleigh) << ',';
    if (r.suboptimality) out << format_double(*r.suboptimality);
    out << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing trace");
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "method,passes,seconds,rayleigh,suboptimality") {
    throw ParseError(line_no, "missing trace header");
  }
  std::vector<TraceRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields");
    TraceRecord r;
    r.method = std::string(fields[0]);
    r.passes = parse_double(fields[1], line_no);
    r.seconds = parse_double(fields[2], line_no);
    r.rayleigh = parse_double(fields[3], line_no);
    if (!fields[4].empty()) r.suboptimality = parse_double(fields[4], line_no);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sicd
