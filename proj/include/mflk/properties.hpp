#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mflk {

struct PropertyResult {
  std::string id;
  bool passed = false;
  double measured = 0.0;  // worst observed value of the checked quantity
  std::string details;
};

// Randomized invariant checks, each on its own stream derived from `seed`.
PropertyResult check_transport_oracle(std::uint64_t seed);
PropertyResult check_gram_psd(std::uint64_t seed);
PropertyResult check_permutation_invariance(std::uint64_t seed);
PropertyResult check_plugin_exactness(std::uint64_t seed);
PropertyResult check_norm_characterization(std::uint64_t seed);
PropertyResult check_solver_optimality(std::uint64_t seed);

std::vector<PropertyResult> run_property_suite(std::uint64_t seed);

}  // namespace mflk
