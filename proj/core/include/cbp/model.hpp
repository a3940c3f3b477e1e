#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cbp/pmf.hpp"
#include "cbp/rng.hpp"

namespace cbp {

// ---------------------------------------------------------------------------
// Offspring families (law of xi, the per-progenitor number of offspring)
// ---------------------------------------------------------------------------

/// P(xi = offset + j) = probs[j].
struct FiniteOffspring {
  std::vector<double> probs;
  std::int64_t offset = 0;
  bool operator==(const FiniteOffspring&) const = default;
};

struct PoissonOffspring {
  double lambda = 1.0;
  bool operator==(const PoissonOffspring&) const = default;
};

struct BinomialOffspring {
  std::int64_t trials = 1;
  double p = 0.5;
  bool operator==(const BinomialOffspring&) const = default;
};

/// P(xi = k) = (1-p)^k p for k >= 0, or shifted by one when starts_at_one.
struct GeometricOffspring {
  double p = 0.5;
  bool starts_at_one = false;
  bool operator==(const GeometricOffspring&) const = default;
};

struct DeterministicOffspring {
  std::int64_t value = 1;
  bool operator==(const DeterministicOffspring&) const = default;
};

class OffspringSpec {
 public:
  using Family = std::variant<FiniteOffspring, PoissonOffspring, BinomialOffspring,
                              GeometricOffspring, DeterministicOffspring>;

  /// Validates parameter ranges; throws InvalidArgument.
  explicit OffspringSpec(Family family);

  static OffspringSpec finite(std::vector<double> probs, std::int64_t offset = 0);
  static OffspringSpec poisson(double lambda);
  static OffspringSpec binomial(std::int64_t trials, double p);
  static OffspringSpec geometric(double p, bool starts_at_one = false);
  static OffspringSpec deterministic(std::int64_t value);

  const Family& family() const noexcept { return family_; }
  std::string_view family_name() const noexcept;
  std::int64_t min_value() const noexcept;
  /// Largest value with positive probability; nullopt when unbounded.
  std::optional<std::int64_t> max_value() const noexcept;

  bool operator==(const OffspringSpec&) const = default;

 private:
  Family family_;
};

/// Unbounded families are truncated once the certified tail falls below this.
inline constexpr double kOffspringTail = 1e-14;

Pmf offspring_pmf(const OffspringSpec& spec, double tail = kOffspringTail);

/// Closed-form mean and central moments through order four; the third
/// absolute central moment and lattice span come from the rendered pmf.
MomentSummary offspring_moments(const OffspringSpec& spec);

std::complex<double> offspring_pgf(const OffspringSpec& spec, std::complex<double> s);

/// Law of xi_1 + ... + xi_count. Families whose sums stay in a closed form
/// (Poisson, binomial, geometric, deterministic) are rendered directly;
/// finite supports go through convolve_power.
Pmf offspring_sum_pmf(const OffspringSpec& spec, std::int64_t count, double tail = kOffspringTail);

/// Draws xi_1 + ... + xi_count exactly, using the closed-form law of the sum
/// (Poisson, binomial, negative binomial, multinomial counts) so the cost
/// does not grow with `count`.
std::int64_t sample_offspring_sum(const OffspringSpec& spec, std::int64_t count, CounterRng& rng);

// ---------------------------------------------------------------------------
// Control families (law of phi(z), the number of progenitors at size z)
// ---------------------------------------------------------------------------

/// phi(z) = z.
struct IdentityControl {
  bool operator==(const IdentityControl&) const = default;
};

/// phi(z) = floor(alpha z).
struct ScaledControl {
  double alpha = 1.0;
  bool operator==(const ScaledControl&) const = default;
};

/// phi(z) ~ Poisson(alpha z).
struct PoissonLinearControl {
  double alpha = 1.0;
  bool operator==(const PoissonLinearControl&) const = default;
};

/// phi(z) ~ Poisson(z + a z^q).
struct PoissonDriftControl {
  double a = 0.0;
  double q = 0.5;
  bool operator==(const PoissonDriftControl&) const = default;
};

/// phi(z) ~ Binomial(trials_per_individual * z, p).
struct BinomialLinearControl {
  std::int64_t trials_per_individual = 1;
  double p = 0.5;
  bool operator==(const BinomialLinearControl&) const = default;
};

/// phi(z) is a sum of z i.i.d. copies of `increment`.
struct IidSumControl {
  OffspringSpec increment = OffspringSpec::deterministic(1);
  bool operator==(const IidSumControl&) const = default;
};

class ControlSpec {
 public:
  using Family = std::variant<IdentityControl, ScaledControl, PoissonLinearControl,
                              PoissonDriftControl, BinomialLinearControl, IidSumControl>;

  ControlSpec() : family_(IdentityControl{}) {}
  explicit ControlSpec(Family family);

  static ControlSpec identity() { return ControlSpec(); }
  static ControlSpec scaled(double alpha);
  static ControlSpec poisson_linear(double alpha);
  static ControlSpec poisson_drift(double a, double q);
  static ControlSpec binomial_linear(std::int64_t trials_per_individual, double p);
  static ControlSpec iid_sum(OffspringSpec increment);

  const Family& family() const noexcept { return family_; }
  std::string_view family_name() const noexcept;

  bool operator==(const ControlSpec&) const = default;

 private:
  Family family_;
};

struct ControlMoments {
  double mean = 0.0;            // epsilon(z)
  double variance = 0.0;        // nu^2(z)
  double third_central = 0.0;   // iota(z)
  double fourth_central = 0.0;  // E(phi(z) - epsilon(z))^4
};

ControlMoments control_moments(const ControlSpec& control, std::int64_t z);

/// Law of phi(z); unbounded laws are truncated to a window around the mean
/// holding all but `tail` of the mass.
inline constexpr double kControlTail = 1e-12;
Pmf control_pmf(const ControlSpec& control, std::int64_t z, double tail = kControlTail);

std::complex<double> control_pgf(const ControlSpec& control, std::int64_t z, std::complex<double> w);

std::int64_t sample_control(const ControlSpec& control, std::int64_t z, CounterRng& rng);

/// phi(z) = chi_1 + ... + chi_count in law, with chi_i i.i.d. ~ increment.
struct LinearDivision {
  std::int64_t count = 0;
  OffspringSpec increment = OffspringSpec::deterministic(1);
};

/// The increment decomposition at size z, or nullopt when the family is not
/// linearly divisible (a scaled control with non-integer alpha).
std::optional<LinearDivision> linear_division(const ControlSpec& control, std::int64_t z);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct CbpModel {
  OffspringSpec offspring = OffspringSpec::deterministic(1);
  ControlSpec control;
  std::int64_t z0 = 1;
  std::string id;

  bool operator==(const CbpModel&) const = default;
};

CbpModel make_bgwp(OffspringSpec offspring, std::int64_t z0);

/// Human-readable one-line description, used as a model id when none is set.
std::string describe(const CbpModel& model);

/// tau(z) = epsilon(z) m / z.
double mean_growth_rate(const CbpModel& model, std::int64_t z);

/// Up to `points` distinct integers spaced geometrically on [lo, hi].
std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int points);

struct RegularityReport {
  double a_hat = 0.0;  // sup epsilon(z)/z
  double b_hat = 0.0;  // sup nu^2(z)/z
  double c_hat = 0.0;  // sup |iota(z)|/z
  double d_hat = 0.0;  // sup E(phi(z)-epsilon(z))^4 / z^2
  double tau_liminf_hat = 0.0;
  bool lattice_ok = false;
  double eta_hat = 0.0;
  bool linearly_divisible = false;
  bool supercritical = false;
  std::vector<std::int64_t> grid;
};

/// Empirical growth and moment bounds over a 64-point geometric grid on
/// [1, z_max]. tau_liminf_hat is the minimum of tau over the top decade of
/// the grid; eta_hat is the minimum over the grid of
/// max_x min(P(chi = x), P(chi = x + 1)) for the increment law chi.
RegularityReport check_regularity(const CbpModel& model, std::int64_t z_max);

/// Solves p1 + 2 p2 = m, p1 + 4 p2 = var + m^2, p0 + p1 + p2 = 1 for
/// support_max == 2. support_max == 3 is not identified by two moments and
/// throws Unidentifiable. Results within 1e-9 of the simplex are clamped.
Pmf solve_p_from_moments(double m_hat, double var_hat, int support_max);

}  // namespace cbp
