#include "mflk/io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace mflk::io {

namespace {

json matrix_columns(const Eigen::MatrixXd& m) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::VectorXd v = m.col(c);
    cols.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  return cols;
}

Eigen::MatrixXd matrix_from_columns(const json& cols, int dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto v = cols[c].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim) throw std::invalid_argument("json: point has wrong dimension");
    for (int k = 0; k < dim; ++k) m(k, static_cast<Eigen::Index>(c)) = v[static_cast<std::size_t>(k)];
  }
  return m;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

BoxDomain domain_or_unit(const json& j, int dim) {
  return j.contains("domain") ? domain_from_json(j.at("domain")) : BoxDomain::unit(dim);
}

}  // namespace

json to_json(const BoxDomain& d) {
  return {{"lower", std::vector<double>(d.lower().data(), d.lower().data() + d.dim())},
          {"upper", std::vector<double>(d.upper().data(), d.upper().data() + d.dim())}};
}

json to_json(const Configuration& x) {
  return {{"dim", x.dim()}, {"domain", to_json(x.domain())}, {"points", matrix_columns(x.points())}};
}

json to_json(const DiscreteMeasure& mu) {
  return {{"dim", mu.dim()},
          {"domain", to_json(mu.domain())},
          {"atoms", matrix_columns(mu.atoms())},
          {"weights", std::vector<double>(mu.weights().data(), mu.weights().data() + mu.size())}};
}

json to_json(const BaseKernel& k) { return {{"family", to_string(k.family())}, {"lengthscale", k.lengthscale()}}; }

json to_json(const MeasureKernel& k) {
  return {{"base", to_json(k.base())}, {"outer", {{"kind", to_string(k.outer())}, {"sigma", k.sigma()}}}};
}

json to_json(const FiniteKernel& k) {
  json j = to_json(k.limit());
  j["estimator"] = to_string(k.estimator());
  return j;
}

json to_json(const SolverReport& r) {
  return {{"alpha", std::vector<double>(r.alpha.data(), r.alpha.data() + r.alpha.size())},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"objective_trace", r.objective_trace}};
}

json to_json(const Trajectory& t) {
  json snaps = json::array();
  for (const auto& s : t.snapshots) snaps.push_back(matrix_columns(s.points()));
  json j = {{"clamp_events", t.clamp_events}, {"snapshots", snaps}};
  if (!t.snapshots.empty()) j["domain"] = to_json(t.snapshots.front().domain());
  return j;
}

BoxDomain domain_from_json(const json& j) { return BoxDomain(vector_from(j.at("lower")), vector_from(j.at("upper"))); }

Configuration configuration_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  return Configuration(domain_or_unit(j, dim), matrix_from_columns(j.at("points"), dim));
}

DiscreteMeasure measure_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  return DiscreteMeasure(domain_or_unit(j, dim), matrix_from_columns(j.at("atoms"), dim), vector_from(j.at("weights")));
}

BaseFamily parse_base_family(const std::string& s) {
  if (s == "gaussian") return BaseFamily::Gaussian;
  if (s == "laplace") return BaseFamily::Laplace;
  throw std::invalid_argument("unknown base kernel family: " + s);
}

OuterKind parse_outer_kind(const std::string& s) {
  if (s == "linear_embedding") return OuterKind::LinearEmbedding;
  if (s == "gaussian_embedding") return OuterKind::GaussianEmbedding;
  if (s == "w1_exponential") return OuterKind::W1Exponential;
  throw std::invalid_argument("unknown outer kernel kind: " + s);
}

Estimator parse_estimator(const std::string& s) {
  if (s == "plug_in") return Estimator::PlugIn;
  if (s == "u_statistic") return Estimator::UStatistic;
  throw std::invalid_argument("unknown estimator: " + s);
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "absolute") return LossKind::Absolute;
  if (s == "hinge") return LossKind::Hinge;
  if (s == "eps_insensitive") return LossKind::EpsInsensitive;
  throw std::invalid_argument("unknown loss: " + s);
}

FunctionalKind parse_functional_kind(const std::string& s) {
  if (s == "spread") return FunctionalKind::Spread;
  if (s == "mean1d") return FunctionalKind::Mean1D;
  if (s == "interaction_energy") return FunctionalKind::InteractionEnergy;
  throw std::invalid_argument("unknown functional: " + s);
}

BaseKernel base_kernel_from_json(const json& j) {
  return BaseKernel(parse_base_family(j.at("family").get<std::string>()), j.at("lengthscale").get<double>());
}

MeasureKernel measure_kernel_from_json(const json& j) {
  const auto& outer = j.at("outer");
  return MeasureKernel(base_kernel_from_json(j.at("base")), parse_outer_kind(outer.at("kind").get<std::string>()),
                       outer.value("sigma", 1.0));
}

FiniteKernel finite_kernel_from_json(const json& j) {
  return FiniteKernel(measure_kernel_from_json(j), parse_estimator(j.value("estimator", std::string("plug_in"))));
}

RkhsFunction<MeasureKernel> measure_function_from_json(const json& j) {
  std::vector<DiscreteMeasure> centers;
  for (const auto& c : j.at("centers")) centers.push_back(measure_from_json(c));
  return RkhsFunction<MeasureKernel>(measure_kernel_from_json(j.at("kernel")), std::move(centers),
                                     vector_from(j.at("coeffs")));
}

RkhsFunction<FiniteKernel> finite_function_from_json(const json& j) {
  std::vector<Configuration> centers;
  for (const auto& c : j.at("centers")) centers.push_back(configuration_from_json(c));
  return RkhsFunction<FiniteKernel>(finite_kernel_from_json(j.at("kernel")), std::move(centers),
                                    vector_from(j.at("coeffs")));
}

namespace {

template <class Input, class Parse>
Dataset<Input> dataset_from_rows(const std::vector<json>& rows, const TargetRange& range, const char* kind,
                                 Parse parse) {
  std::vector<Input> inputs;
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].at("input_kind").get<std::string>() != kind)
      throw std::invalid_argument(std::string("dataset row is not a ") + kind);
    inputs.push_back(parse(rows[i].at("input")));
    y[static_cast<Eigen::Index>(i)] = rows[i].at("target").get<double>();
  }
  return Dataset<Input>(std::move(inputs), std::move(y), range);
}

}  // namespace

MeasureDataset measure_dataset_from_rows(const std::vector<json>& rows, const TargetRange& range) {
  return dataset_from_rows<DiscreteMeasure>(rows, range, "measure", measure_from_json);
}

ConfigurationDataset configuration_dataset_from_rows(const std::vector<json>& rows, const TargetRange& range) {
  return dataset_from_rows<Configuration>(rows, range, "configuration", configuration_from_json);
}

void write_jsonl(std::ostream& os, const std::vector<json>& rows) {
  for (const auto& r : rows) os << r.dump() << '\n';
}

std::vector<json> read_jsonl(std::istream& is) {
  std::vector<json> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(json::parse(line));
  }
  return rows;
}

}  // namespace mflk::io
