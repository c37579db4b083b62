#include "mflk/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mflk/io.hpp"
#include "mflk/version.hpp"

namespace mflk {

void ConvergenceReport::add_row(int M, const std::string& metric, double value, double std_error, std::uint64_t seed,
                                double runtime_ms) {
  for (const auto& r : rows_)
    if (r.M == M && r.metric == metric) throw std::logic_error("report: duplicate row " + metric);
  rows_.push_back({experiment_, M, metric, value, std_error, runtime_ms, seed});
}

void ConvergenceReport::append(const ConvergenceReport& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  verdicts_.insert(verdicts_.end(), other.verdicts_.begin(), other.verdicts_.end());
}

const ReportRow& ConvergenceReport::row(const std::string& metric, int M) const {
  for (const auto& r : rows_)
    if (r.M == M && r.metric == metric) return r;
  throw std::out_of_range("report: no row " + metric + " at M=" + std::to_string(M));
}

std::vector<std::pair<int, double>> ConvergenceReport::series(const std::string& metric) const {
  std::vector<std::pair<int, double>> s;
  for (const auto& r : rows_)
    if (r.metric == metric && r.M > 0) s.emplace_back(r.M, r.value);
  std::sort(s.begin(), s.end());
  return s;
}

bool ConvergenceReport::passed() const {
  return std::all_of(verdicts_.begin(), verdicts_.end(), [](const Verdict& v) { return v.ok(); });
}

const Verdict* ConvergenceReport::find_verdict(const std::string& id) const {
  for (const auto& v : verdicts_)
    if (v.id == id) return &v;
  return nullptr;
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "pass";
    case VerdictStatus::SubsequenceConsistent: return "subsequence-consistent";
    case VerdictStatus::Fail: return "fail";
  }
  return "fail";
}

int longest_decreasing_run(const std::vector<double>& values) {
  std::vector<int> best(values.size(), 1);
  int out = values.empty() ? 0 : 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (values[j] > values[i]) best[i] = std::max(best[i], best[j] + 1);
    out = std::max(out, best[i]);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Verdict trend_verdict(const std::string& id, const ConvergenceReport& report, const std::string& metric) {
  const auto s = report.series(metric);
  std::vector<double> vals;
  std::ostringstream d;
  d << metric << ":";
  for (const auto& [m, v] : s) {
    vals.push_back(v);
    d << " M=" << m << "->" << format_double(v);
  }
  Verdict out{id, VerdictStatus::Fail, d.str()};
  if (vals.size() < 2) {
    out.details += " (need at least two levels)";
    return out;
  }
  const int run = longest_decreasing_run(vals);
  if (run == static_cast<int>(vals.size())) out.status = VerdictStatus::Pass;
  else if (run >= 3) out.status = VerdictStatus::SubsequenceConsistent;
  out.details += "; longest decreasing sub-schedule " + std::to_string(run);
  return out;
}

Verdict bound_verdict(const std::string& id, double lhs, double rhs, const std::string& what) {
  return {id, lhs <= rhs ? VerdictStatus::Pass : VerdictStatus::Fail,
          what + ": " + format_double(lhs) + " <= " + format_double(rhs)};
}

void write_csv(std::ostream& os, const std::vector<ConvergenceReport>& reports) {
  os << "experiment,M,metric,value,std_error,runtime_ms,seed\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows())
      os << r.experiment << ',' << r.M << ',' << r.metric << ',' << format_double(r.value) << ','
         << format_double(r.std_error) << ',' << format_double(r.runtime_ms) << ',' << r.seed << '\n';
}

void write_json(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ConvergenceReport>& reports) {
  io::json config = io::json::object();
  for (const auto& [k, v] : cfg.echo()) config[k] = v;
  io::json rows = io::json::array(), verdicts = io::json::array();
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows())
      rows.push_back({{"experiment", r.experiment},
                      {"M", r.M},
                      {"metric", r.metric},
                      {"value", r.value},
                      {"std_error", r.std_error},
                      {"runtime_ms", r.runtime_ms},
                      {"seed", r.seed}});
    for (const auto& v : rep.verdicts())
      verdicts.push_back({{"experiment", rep.experiment()},
                          {"criterion", v.id},
                          {"status", to_string(v.status)},
                          {"details", v.details}});
  }
  io::json doc = {{"config", config}, {"rows", rows}, {"verdicts", verdicts}, {"version", kVersion}};
  os << doc.dump(2) << '\n';
}

}  // namespace mflk
