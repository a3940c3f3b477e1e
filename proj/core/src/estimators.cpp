#include "cbp/estimators.hpp"

#include <cmath>
#include <vector>

#include "cbp/error.hpp"
#include "cbp/pmf.hpp"

namespace cbp {

std::string_view to_string(InputsUsed inputs) noexcept {
  switch (inputs) {
    case InputsUsed::SizesOnly:
      return "sizes-only";
    case InputsUsed::SizesAndProgenitors:
      return "sizes+progenitors";
    case InputsUsed::SizesAndKnownControl:
      return "sizes+known-control";
  }
  return "?";
}

namespace {

struct Mean {
  std::vector<double> terms;
  void add(double v) { terms.push_back(v); }
  double value() const { return compensated_sum(terms) / static_cast<double>(terms.size()); }
  std::int64_t count() const { return static_cast<std::int64_t>(terms.size()); }
};

EstimateReport report(std::string name, const Mean& mean, InputsUsed inputs) {
  if (mean.terms.empty()) fail(ErrorCode::EmptyIndexSet, name + ": no usable terms in the index set");
  EstimateReport r{std::move(name), mean.value(), mean.count(), inputs, false};
  return r;
}

EstimateReport variance_report(std::string name, const Mean& mean, InputsUsed inputs) {
  EstimateReport r = report(std::move(name), mean, inputs);
  r.negative = r.value < 0.0;
  return r;
}

void require_transition(const Trajectory& traj) {
  require(traj.sizes.size() >= 2, ErrorCode::InvalidArgument, "estimators need at least one transition");
}

double as_real(std::int64_t v) { return static_cast<double>(v); }

}  // namespace

EstimateReport bgwp_mean(const Trajectory& traj) {
  require_transition(traj);
  std::vector<double> num;
  std::vector<double> den;
  for (std::size_t k = 1; k < traj.sizes.size(); ++k) {
    num.push_back(as_real(traj.sizes[k]));
    den.push_back(as_real(traj.sizes[k - 1]));
  }
  const double denominator = compensated_sum(den);
  if (denominator == 0.0) fail(ErrorCode::AllZero, "bgwp_mean: all parent generations are empty");
  std::int64_t terms = 0;
  for (double d : den) terms += d > 0.0 ? 1 : 0;
  return {"m_hat_bgwp", compensated_sum(num) / denominator, terms, InputsUsed::SizesOnly, false};
}

KnownControlEstimates known_control_estimates(const Trajectory& traj, const ControlSpec& control,
                                              std::optional<double> m_known) {
  require_transition(traj);
  const auto& z = traj.sizes;
  const std::size_t n = z.size() - 1;
  std::vector<ControlMoments> cm(n);
  for (std::size_t k = 1; k <= n; ++k) cm[k - 1] = control_moments(control, z[k - 1]);

  double m = 0.0;
  if (m_known) {
    m = *m_known;
  } else {
    const double eps_last = cm[n - 1].mean;
    if (eps_last <= 0.0) fail(ErrorCode::ZeroPopulation, "sigma2_hat: epsilon(Z_{n-1}) is zero");
    m = as_real(z[n]) / eps_last;
  }

  Mean m_hat;
  Mean sigma2;
  for (std::size_t k = 1; k <= n; ++k) {
    const double eps = cm[k - 1].mean;
    if (!(eps > 0.0)) continue;
    const double zk = as_real(z[k]);
    m_hat.add(zk / eps);
    const double resid = zk - m * eps;
    sigma2.add((resid * resid - m * m * cm[k - 1].variance) / eps);
  }
  return {report("m_hat", m_hat, InputsUsed::SizesAndKnownControl),
          variance_report(m_known ? "sigma2_bar" : "sigma2_hat", sigma2, InputsUsed::SizesAndKnownControl)};
}

LinearGrowthEstimates linear_growth_estimates(const Trajectory& traj, std::optional<double> g_known) {
  require_transition(traj);
  const auto& z = traj.sizes;
  const std::size_t n = z.size() - 1;
  double g = 0.0;
  if (g_known) {
    g = *g_known;
  } else {
    if (z[n - 1] == 0) fail(ErrorCode::ZeroPopulation, "h_hat: Z_{n-1} is zero");
    g = as_real(z[n]) / as_real(z[n - 1]);
  }
  Mean g_hat;
  Mean h;
  for (std::size_t k = 1; k <= n; ++k) {
    if (z[k - 1] <= 0) continue;
    const double prev = as_real(z[k - 1]);
    const double zk = as_real(z[k]);
    g_hat.add(zk / prev);
    const double resid = zk - g * prev;
    h.add(resid * resid / prev);
  }
  return {report("g_hat", g_hat, InputsUsed::SizesOnly),
          variance_report(g_known ? "h_bar" : "h_hat", h, InputsUsed::SizesOnly)};
}

ProgenitorEstimates progenitor_estimates(const Trajectory& traj, std::optional<double> m_known,
                                         std::optional<double> alpha_known) {
  require_transition(traj);
  if (!traj.progenitors) fail(ErrorCode::MissingProgenitors, "progenitor estimators need observed phi(Z_k)");
  const auto& z = traj.sizes;
  const auto& phi = *traj.progenitors;
  const std::size_t n = z.size() - 1;
  require(phi.size() >= n, ErrorCode::MissingProgenitors, "progenitor column is shorter than the trajectory");

  double m = 0.0;
  if (m_known) {
    m = *m_known;
  } else {
    if (phi[n - 1] == 0) fail(ErrorCode::ZeroPopulation, "m tilde: phi(Z_{n-1}) is zero");
    m = as_real(z[n]) / as_real(phi[n - 1]);
  }
  double alpha = 0.0;
  if (alpha_known) {
    alpha = *alpha_known;
  } else {
    if (z[n - 1] == 0) fail(ErrorCode::ZeroPopulation, "alpha tilde: Z_{n-1} is zero");
    alpha = as_real(phi[n - 1]) / as_real(z[n - 1]);
  }

  Mean m_hat;
  Mean sigma2;
  for (std::size_t k = 1; k <= n; ++k) {
    if (phi[k - 1] <= 0) continue;
    const double u = as_real(phi[k - 1]);
    const double resid = as_real(z[k]) - m * u;
    m_hat.add(as_real(z[k]) / u);
    sigma2.add(resid * resid / u);
  }
  Mean alpha_hat;
  Mean beta;
  for (std::size_t k = 0; k < n; ++k) {
    if (z[k] <= 0) continue;
    const double zk = as_real(z[k]);
    const double resid = as_real(phi[k]) - alpha * zk;
    alpha_hat.add(as_real(phi[k]) / zk);
    beta.add(resid * resid / zk);
  }
  constexpr auto kInputs = InputsUsed::SizesAndProgenitors;
  return {report("m_hat", m_hat, kInputs), report("alpha_hat", alpha_hat, kInputs),
          variance_report(m_known ? "sigma2_bar" : "sigma2_hat", sigma2, kInputs),
          variance_report(alpha_known ? "beta_bar" : "beta_hat", beta, kInputs)};
}

namespace {

double drift_term(std::int64_t prev, std::int64_t next, double m, double q) {
  return (as_real(next) - m * as_real(prev)) / (m * std::pow(as_real(prev), q));
}

void check_drift_args(double m, double q) {
  require(m > 0.0, ErrorCode::InvalidArgument, "drift estimate needs m > 0");
  require(q > 0.0, ErrorCode::InvalidArgument, "drift estimate needs q > 0");
}

}  // namespace

EstimateReport power_drift_estimate(const Trajectory& traj, double m, double q) {
  require_transition(traj);
  check_drift_args(m, q);
  const std::size_t n = traj.sizes.size() - 1;
  if (traj.sizes[n - 1] <= 0) fail(ErrorCode::ZeroPopulation, "a_bar: Z_{n-1} is zero");
  return {"a_bar", drift_term(traj.sizes[n - 1], traj.sizes[n], m, q), 1, InputsUsed::SizesOnly, false};
}

EstimateReport power_drift_estimate_avg(const Trajectory& traj, double m, double q) {
  require_transition(traj);
  check_drift_args(m, q);
  Mean avg;
  for (std::size_t k = 1; k < traj.sizes.size(); ++k) {
    if (traj.sizes[k - 1] > 0) avg.add(drift_term(traj.sizes[k - 1], traj.sizes[k], m, q));
  }
  return report("a_bar_avg", avg, InputsUsed::SizesOnly);
}

DerivedControlParams derived_control_params(double g_hat, double h_hat, double m, double sigma2) {
  require(m > 0.0, ErrorCode::InvalidArgument, "derived control parameters need m > 0");
  return {g_hat / m, (m * h_hat - sigma2 * g_hat) / (m * m * m)};
}

}  // namespace cbp
