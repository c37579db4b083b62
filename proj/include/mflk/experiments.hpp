#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mflk/config.hpp"
#include "mflk/report.hpp"
#include "mflk/rkhs.hpp"

namespace mflk {

// Each experiment is a pure function of the config: every (experiment, M,
// replicate) cell draws from its own derived stream, so reports are identical
// for any thread count.

ConvergenceReport exp_kernel_mfl(const ExperimentConfig& cfg);
ConvergenceReport exp_rkhs_mfl(const ExperimentConfig& cfg);
ConvergenceReport exp_gamma_inequalities(const ExperimentConfig& cfg);
ConvergenceReport exp_representer_mfl(const ExperimentConfig& cfg);
ConvergenceReport exp_empirical_svm(const ExperimentConfig& cfg);
ConvergenceReport exp_risk_convergence(const ExperimentConfig& cfg);
ConvergenceReport exp_inf_sample_svm(const ExperimentConfig& cfg);
ConvergenceReport exp_minimal_risk(const ExperimentConfig& cfg);
ConvergenceReport exp_approximation(const ExperimentConfig& cfg);

struct ExperimentEntry {
  std::string name;  // CLI subcommand
  std::function<ConvergenceReport(const ExperimentConfig&)> run;
};

/// All experiments in the order `all` runs them.
const std::vector<ExperimentEntry>& experiment_registry();

/// Reference measures for a setup: `count` random bumps from stream `tag`.
std::vector<DiscreteMeasure> reference_measures(const ExperimentConfig& cfg, int count, std::uint64_t tag);

/// Reference element of the limit RKHS used by the RKHS and Gamma experiments.
RkhsFunction<MeasureKernel> reference_function(const ExperimentConfig& cfg, int index);

/// Runs body(i) for i in [0, n) on up to `threads` threads.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace mflk
