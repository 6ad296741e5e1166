#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "dmrselect/core.hpp"
#include "dmrselect/glm.hpp"

namespace dmr {

// Aggregated selector performance over Monte Carlo replications.
struct SelectorMetrics {
  double tm = 0.0;   // fraction of exactly-true selections
  double cf = 0.0;   // correct-factors rate; NaN when not applicable
  double tpr = 0.0;  // elementary-constraint rates
  double fdr = 0.0;
  double tpr_star = 0.0;  // dimension-based rates
  double fdr_star = 0.0;
  double msep_mean = 0.0;
  double msep_sd = 0.0;
  double md_mean = 0.0;  // selected model dimension
  double md_sd = 0.0;
  int failures = 0;
  int reps = 0;
};

// Constraint-set rates: B(M) is every within-cluster level pair (both
// non-reference) plus every zero coefficient.  TPR = |B ∩ B_hat| / |B|,
// FDR = 1 - |B ∩ B_hat| / |B_hat|; an empty denominator yields 0 for FDR
// and 1 for TPR (vacuously complete).
std::pair<double, double> elementary_rates(const FeasibleModel& truth,
                                           const FeasibleModel& selected,
                                           const DesignShape& shape);

// Dimension-based rates: TPR* = |T ∩ T_hat| / |T|,
// FDR* = 1 - |T ∩ T_hat| / |T_hat|, with |.| the subspace dimension.
std::pair<double, double> star_rates(const FeasibleModel& truth,
                                     const FeasibleModel& selected,
                                     const DesignShape& shape);

// One of the three synthetic benchmarks:
//   1: three factors (8/4/3 levels), balanced full factorial, n = 96 c;
//   2: one factor (8 levels) + 8 AR(0.8)-correlated continuous, n = 128 c;
//   3: design of experiment 1 with a Bernoulli(logit) response, n = 96 c.
struct ExperimentSpec {
  int id = 1;
  int c = 1;
  int n = 0;
  Family family = Family::Gaussian;
  DesignShape shape;
  FeasibleModel true_model;
  Vector beta_star;  // design coordinates

  static ExperimentSpec make(int id, int c);
};

struct ExperimentData {
  DesignMatrix design;
  Vector y;
  Vector y_new;  // independent response on the same design, for MSEP
};

// Deterministic given (spec, seed).
ExperimentData generate_experiment(const ExperimentSpec& spec,
                                   std::uint64_t seed);

using Selector =
    std::function<SelectionResult(const DesignMatrix&, const Vector&)>;

// Run `reps` seeded replications and aggregate.  A replication whose
// selector throws is counted in `failures` and excluded from the averages.
SelectorMetrics run_monte_carlo(const ExperimentSpec& spec,
                                const Selector& selector, int reps,
                                std::uint64_t seed);

std::string metrics_csv_header();
std::string metrics_csv_row(const ExperimentSpec& spec,
                            const std::string& selector_name,
                            const SelectorMetrics& metrics);

}  // namespace dmr
