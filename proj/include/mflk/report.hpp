#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mflk/config.hpp"

namespace mflk {

/// One CSV row. M = 0 marks the limit level.
struct ReportRow {
  std::string experiment;
  int M = 0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
};

enum class VerdictStatus { Pass, SubsequenceConsistent, Fail };

struct Verdict {
  std::string id;
  VerdictStatus status = VerdictStatus::Fail;
  std::string details;

  bool ok() const { return status != VerdictStatus::Fail; }
};

class ConvergenceReport {
 public:
  explicit ConvergenceReport(std::string experiment) : experiment_(std::move(experiment)) {}

  const std::string& experiment() const { return experiment_; }
  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }

  void add_row(int M, const std::string& metric, double value, double std_error, std::uint64_t seed,
               double runtime_ms = 0.0);
  void add_verdict(Verdict v) { verdicts_.push_back(std::move(v)); }
  void append(const ConvergenceReport& other);

  /// Value of `metric` at level M. Throws if absent.
  const ReportRow& row(const std::string& metric, int M) const;
  /// (M, value) for every M > 0 row of `metric`, ordered by M.
  std::vector<std::pair<int, double>> series(const std::string& metric) const;

  /// True iff no verdict failed.
  bool passed() const;
  const Verdict* find_verdict(const std::string& id) const;

 private:
  std::string experiment_;
  std::vector<ReportRow> rows_;
  std::vector<Verdict> verdicts_;
};

std::string to_string(VerdictStatus s);

/// Length of the longest strictly decreasing subsequence.
int longest_decreasing_run(const std::vector<double>& values);

/// Trend check on a metric series: Pass when strictly decreasing over the
/// whole schedule, SubsequenceConsistent when some strictly decreasing
/// sub-schedule of length >= 3 exists, Fail otherwise.
Verdict trend_verdict(const std::string& id, const ConvergenceReport& report, const std::string& metric);

/// Pass iff lhs <= rhs.
Verdict bound_verdict(const std::string& id, double lhs, double rhs, const std::string& what);

void write_csv(std::ostream& os, const std::vector<ConvergenceReport>& reports);
void write_json(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ConvergenceReport>& reports);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace mflk
