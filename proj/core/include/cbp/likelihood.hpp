#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cbp/model.hpp"
#include "cbp/normal.hpp"
#include "cbp/pmf.hpp"
#include "cbp/simulate.hpp"

namespace cbp {

enum class TransitionKind {
  ExactConvolution,
  PgfInversion,
  DiscretisedNormal,
  /// PgfInversion for transitions whose support exceeds 2^16 points,
  /// ExactConvolution otherwise.
  Auto,
};

struct TransitionMethod {
  TransitionKind kind = TransitionKind::ExactConvolution;
  /// Decades of aliasing accuracy for PgfInversion; must lie in [6, 14].
  double gamma = 9.0;

  static TransitionMethod exact() { return {TransitionKind::ExactConvolution, 9.0}; }
  static TransitionMethod pgf(double gamma = 9.0) { return {TransitionKind::PgfInversion, gamma}; }
  static TransitionMethod normal() { return {TransitionKind::DiscretisedNormal, 9.0}; }
  static TransitionMethod automatic() { return {TransitionKind::Auto, 9.0}; }
};

std::string_view to_string(TransitionKind kind) noexcept;
TransitionKind transition_kind_from_string(std::string_view name);

inline constexpr std::size_t kAutoExactSupport = std::size_t{1} << 16;

using Pgf = std::function<std::complex<double>(std::complex<double>)>;

/// Lattice inversion of a probability generating function:
///   p_k ~ 1/(2k r^k) [G(r) + (-1)^k G(-r) + 2 sum_{j=1}^{k-1} (-1)^j Re G(r e^{i pi j/k})]
/// with r = 10^{-gamma/(2k)}; p_0 = G(0). Throws NumericalInstability when the
/// result is below -10^{-gamma}; smaller negatives are returned as zero.
double invert_pgf(const Pgf& pgf, std::int64_t k, double gamma = 9.0);

/// E[Z_1 | Z_0 = z] and Var[Z_1 | Z_0 = z]: m eps(z) and sigma^2 eps(z) + m^2 nu^2(z).
struct ConditionalMoments {
  double mean = 0.0;
  double variance = 0.0;
};
ConditionalMoments cond_mean_var(const CbpModel& model, std::int64_t z);

/// Law of xi_1 + ... + xi_U for U ~ counts independent of the xi_i.
Pmf compound_sum_pmf(const Pmf& counts, const OffspringSpec& offspring, std::size_t support_cap = kDefaultSupportCap);

/// Law of Z_1 given Z_0 = z_prev. The exact method mixes the offspring sum
/// laws over a window of phi(z_prev) holding all but 1e-12 of its mass.
Pmf transition_pmf(const CbpModel& model, std::int64_t z_prev, const TransitionMethod& method = {},
                   std::size_t support_cap = kDefaultSupportCap);

/// True when P(Z_1 = z_next | Z_0 = z_prev) > 0 under the model.
bool transition_reachable(const CbpModel& model, std::int64_t z_prev, std::int64_t z_next);

inline constexpr double kUnderflowFloor = 1e-300;

struct LikelihoodReport {
  double value = 0.0;
  /// Some transition is outside the reachable support.
  bool impossible = false;
  /// Number of transitions with probability below kUnderflowFloor; when
  /// non-zero, value is -inf.
  std::int64_t underflow_steps = 0;
  /// Sum with each underflowing step counted as log(kUnderflowFloor) minus
  /// half its squared standardised distance from the conditional mean, so
  /// the optimiser can climb out of regions where every step underflows.
  /// Finite unless some step is impossible.
  double floored_value = 0.0;
};

/// Non-throwing evaluation used by the optimiser.
LikelihoodReport evaluate_log_likelihood(const CbpModel& model, const Trajectory& traj,
                                         const TransitionMethod& method = {});

/// Sum of log transition probabilities. Throws ImpossibleTransition for an
/// unreachable step; returns -inf when a step underflows.
double log_likelihood(const CbpModel& model, const Trajectory& traj, const TransitionMethod& method = {});

}  // namespace cbp
