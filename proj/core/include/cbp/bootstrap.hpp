#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbp/fit.hpp"

namespace cbp {

struct BootstrapOptions {
  FitOptions fit;
  TransitionMethod method;
  unsigned threads = 0;
  /// Fraction of replicates allowed to fail before the run throws.
  double max_failure_rate = 0.05;
};

struct BootstrapRun {
  std::string family_id;
  std::vector<std::string> param_names;
  std::vector<double> generating_params;
  std::int64_t n = 0;
  std::int64_t B = 0;
  std::uint64_t seed = 0;
  /// One row per replicate that survived and was refitted, in replicate order.
  std::vector<std::vector<double>> estimates;
  std::vector<std::uint64_t> replicate_seeds;
  std::int64_t extinctions = 0;
  std::int64_t failures = 0;
};

/// Simulates B trajectories of length n from the fitted parameters, starting
/// at the family's z0, and refits each. Replicate r uses seed
/// derive_key(seed, r). Replicates that die out are dropped and counted;
/// non-converged fits are counted as failures and throw BootstrapFailure when
/// they exceed max_failure_rate.
BootstrapRun parametric_bootstrap(const ParametricFamily& family, const std::vector<double>& params, std::int64_t n,
                                  std::int64_t B, std::uint64_t seed, const BootstrapOptions& options = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::vector<double> sample, double p);

/// Per-parameter percentile intervals at the given level.
std::vector<Interval> ci_percentile(const BootstrapRun& run, double level);

enum class MseEstimator { Mle, MomentBased };

std::string to_string(MseEstimator estimator);
MseEstimator mse_estimator_from_string(const std::string& name);

struct MseCurve {
  std::vector<std::int64_t> lengths;
  /// Natural parameters followed by "m" and "sigma2".
  std::vector<std::string> param_names;
  /// mse[i][j]: length i, parameter j.
  std::vector<std::vector<double>> mse;
  /// Replicate standard deviation of each estimate.
  std::vector<std::vector<double>> sd;
  std::int64_t B = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> excluded;
};

/// For each length, simulates B trajectories from the true parameters and
/// records the mean squared error of each estimate. Replicate r uses the same
/// seed at every length, so shorter paths are prefixes of longer ones.
MseCurve mse_curve(const ParametricFamily& family, const std::vector<double>& true_params,
                   const std::vector<std::int64_t>& lengths, std::int64_t B, std::uint64_t seed,
                   MseEstimator estimator = MseEstimator::Mle, const BootstrapOptions& options = {});

/// Columns length,param,mse,B,seed.
void write_mse_csv(std::ostream& out, const MseCurve& curve);

}  // namespace cbp
