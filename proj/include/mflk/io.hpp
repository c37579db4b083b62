#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mflk/kernels.hpp"
#include "mflk/learning.hpp"
#include "mflk/measures.hpp"
#include "mflk/particles.hpp"
#include "mflk/rkhs.hpp"

namespace mflk::io {

using json = nlohmann::json;

json to_json(const BoxDomain& d);
json to_json(const Configuration& x);
json to_json(const DiscreteMeasure& mu);
json to_json(const BaseKernel& k);
json to_json(const MeasureKernel& k);
json to_json(const FiniteKernel& k);
json to_json(const SolverReport& r);
json to_json(const Trajectory& t);

BoxDomain domain_from_json(const json& j);
Configuration configuration_from_json(const json& j);
DiscreteMeasure measure_from_json(const json& j);
BaseKernel base_kernel_from_json(const json& j);
MeasureKernel measure_kernel_from_json(const json& j);
FiniteKernel finite_kernel_from_json(const json& j);

BaseFamily parse_base_family(const std::string& s);
OuterKind parse_outer_kind(const std::string& s);
Estimator parse_estimator(const std::string& s);
LossKind parse_loss_kind(const std::string& s);
FunctionalKind parse_functional_kind(const std::string& s);

template <class Kernel>
json to_json(const RkhsFunction<Kernel>& f) {
  json centers = json::array();
  for (const auto& c : f.centers()) centers.push_back(to_json(c));
  return {{"kernel", to_json(f.kernel())},
          {"centers", centers},
          {"coeffs", std::vector<double>(f.coeffs().data(), f.coeffs().data() + f.coeffs().size())}};
}

RkhsFunction<MeasureKernel> measure_function_from_json(const json& j);
RkhsFunction<FiniteKernel> finite_function_from_json(const json& j);

// One dataset row: {input_kind, input, target, M, seed}. M is 0 for measures.
template <class Input>
std::vector<json> dataset_rows(const Dataset<Input>& data, int M, std::uint64_t seed) {
  std::vector<json> rows;
  for (int n = 0; n < data.size(); ++n) {
    rows.push_back({{"input_kind", std::is_same_v<Input, DiscreteMeasure> ? "measure" : "configuration"},
                    {"input", to_json(data.inputs[static_cast<std::size_t>(n)])},
                    {"target", data.targets[n]},
                    {"M", M},
                    {"seed", seed}});
  }
  return rows;
}

MeasureDataset measure_dataset_from_rows(const std::vector<json>& rows, const TargetRange& range);
ConfigurationDataset configuration_dataset_from_rows(const std::vector<json>& rows, const TargetRange& range);

void write_jsonl(std::ostream& os, const std::vector<json>& rows);
std::vector<json> read_jsonl(std::istream& is);

}  // namespace mflk::io
