#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cbp/model.hpp"
#include "cbp/simulate.hpp"

namespace cbp {

enum class InputsUsed { SizesOnly, SizesAndProgenitors, SizesAndKnownControl };

std::string_view to_string(InputsUsed inputs) noexcept;

struct EstimateReport {
  std::string name;
  double value = 0.0;
  std::int64_t n_terms = 0;
  InputsUsed inputs_used = InputsUsed::SizesOnly;
  /// Set for variance-type estimators that came out negative; the value is
  /// reported unclamped.
  bool negative = false;
};

/// sum_{i=1}^n Z_i / sum_{i=0}^{n-1} Z_i.
EstimateReport bgwp_mean(const Trajectory& traj);

struct KnownControlEstimates {
  EstimateReport m_hat;
  EstimateReport sigma2;  // "sigma2_bar" with m known, otherwise "sigma2_hat"
};

/// Averages over I = {k : epsilon(Z_{k-1}) > 0}:
///   m_hat     = Z_k / epsilon(Z_{k-1})
///   sigma2    = [(Z_k - m epsilon)^2 - m^2 nu^2] / epsilon
/// where m is m_known if given, else Z_n / epsilon(Z_{n-1}).
KnownControlEstimates known_control_estimates(const Trajectory& traj, const ControlSpec& control,
                                              std::optional<double> m_known = std::nullopt);

struct LinearGrowthEstimates {
  EstimateReport g_hat;
  EstimateReport h;  // "h_bar" with g known, otherwise "h_hat"
};

/// Averages over I = {k : Z_{k-1} > 0}: g_hat = Z_k / Z_{k-1} and
/// h = (Z_k - g Z_{k-1})^2 / Z_{k-1}, with g = g_known or Z_n / Z_{n-1}.
LinearGrowthEstimates linear_growth_estimates(const Trajectory& traj, std::optional<double> g_known = std::nullopt);

struct ProgenitorEstimates {
  EstimateReport m_hat;
  EstimateReport alpha_hat;
  EstimateReport sigma2;  // "sigma2_bar" | "sigma2_hat"
  EstimateReport beta;    // "beta_bar" | "beta_hat"
};

/// m_hat and sigma2 average over {1 <= k <= n : phi(Z_{k-1}) > 0}; alpha_hat
/// and beta average over {0 <= k <= n-1 : Z_k > 0}. Unknown m and alpha are
/// replaced by Z_n / phi(Z_{n-1}) and phi(Z_{n-1}) / Z_{n-1}.
ProgenitorEstimates progenitor_estimates(const Trajectory& traj, std::optional<double> m_known = std::nullopt,
                                         std::optional<double> alpha_known = std::nullopt);

/// (Z_n - m Z_{n-1}) / (m Z_{n-1}^q), from the final transition only.
EstimateReport power_drift_estimate(const Trajectory& traj, double m, double q);

/// Average of the single-transition drift estimate over all k with Z_{k-1} > 0.
EstimateReport power_drift_estimate_avg(const Trajectory& traj, double m, double q);

struct DerivedControlParams {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
};

/// alpha_hat = g / m, beta_hat = (m h - sigma^2 g) / m^3.
DerivedControlParams derived_control_params(double g_hat, double h_hat, double m, double sigma2);

}  // namespace cbp
