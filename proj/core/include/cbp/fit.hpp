#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbp/likelihood.hpp"
#include "cbp/model.hpp"
#include "cbp/nelder_mead.hpp"
#include "cbp/simulate.hpp"

namespace cbp {

enum class FamilyKind {
  FiniteSimplex,  // p_lo..p_hi on {support_min..support_max}
  Poisson,        // lambda
  Geometric,      // p, support from 0
  Binomial,       // p with fixed trials
};

/// An offspring family with free parameters, optionally paired with a
/// Poisson-linear control whose alpha is also free. Natural parameters are
/// the family's probabilities or rates, followed by alpha when free.
struct ParametricFamily {
  FamilyKind kind = FamilyKind::FiniteSimplex;
  std::int64_t support_min = 0;
  std::int64_t support_max = 2;
  std::int64_t binomial_trials = 1;
  ControlSpec control;
  bool free_control_alpha = false;
  std::int64_t z0 = 1;

  static ParametricFamily finite_simplex(std::int64_t support_max, std::int64_t z0 = 1,
                                         std::int64_t support_min = 0);

  std::size_t n_params() const;
  std::size_t n_free() const;
  std::vector<std::string> param_names() const;
  std::string id() const;

  CbpModel model(std::span<const double> natural) const;
  std::vector<double> to_unconstrained(std::span<const double> natural) const;
  std::vector<double> from_unconstrained(std::span<const double> theta) const;
  /// Penalty applied to unconstrained coordinates beyond the logit bound.
  double boundary_penalty(std::span<const double> theta) const;
  /// Offspring mean and variance implied by the natural parameters.
  std::pair<double, double> offspring_mean_var(std::span<const double> natural) const;

  void validate(std::span<const double> natural) const;

  bool operator==(const ParametricFamily&) const = default;
};

/// Logits (and log-rates) are clamped to this magnitude when mapped back.
inline constexpr double kLogitBound = 30.0;

struct FitOptions {
  int starts = 8;
  /// Explicit unconstrained start points; when non-empty they replace the
  /// generated starts and `starts` is ignored.
  std::vector<std::vector<double>> start_points;
  std::uint64_t seed = 0;
  NelderMeadOptions optimizer;
  unsigned threads = 1;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  double loglik = 0.0;
  bool converged = false;
  std::int64_t n_evals = 0;
  int best_start = 0;
};

/// Multistart Nelder-Mead maximum likelihood. Start 0 is the centre of the
/// unconstrained space; start r > 0 is drawn from stream derive_key(seed, r).
/// The best start wins by log-likelihood, ties broken by the
/// lexicographically smallest parameter vector.
FitResult fit_mle(const ParametricFamily& family, const Trajectory& traj, const TransitionMethod& method = {},
                  const FitOptions& options = {});

nlohmann::json family_to_json(const ParametricFamily& family);
ParametricFamily family_from_json(const nlohmann::json& node);
nlohmann::json fit_result_to_json(const FitResult& fit);

inline constexpr std::string_view kFamilySchema = "cbp-family/v1";

}  // namespace cbp
