#include "cbp/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cbp/error.hpp"
#include "cbp/numeric_format.hpp"
#include "cbp/tvd.hpp"

namespace cbp {

namespace {

constexpr double kMomentTolerance = 1e-9;
constexpr double kZeroRelative = 1e-12;

Evidence equality_evidence(const std::string& name, double x, double y) {
  const double diff = std::abs(x - y);
  return {name, diff, kMomentTolerance, diff <= kMomentTolerance,
          format_real(x) + " vs " + format_real(y)};
}

Evidence flag_evidence(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok ? 1.0 : 0.0, 1.0, ok, detail};
}

// Fits |f_a(z) - f_b(z)| ~ z^slope and reports exponent_scale * slope + 2 SE
// against 1. A difference that vanishes on the whole grid meets the bound.
Evidence exponent_evidence(const std::string& name, const std::vector<std::int64_t>& grid, double exponent_scale,
                           const std::function<double(const CbpModel&, std::int64_t)>& f, const CbpModel& a,
                           const CbpModel& b) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::int64_t z : grid) {
    const double fa = f(a, z);
    const double fb = f(b, z);
    const double diff = std::abs(fa - fb);
    const double scale = std::max({std::abs(fa), std::abs(fb), 1.0});
    x.push_back(static_cast<double>(z));
    y.push_back(diff <= kZeroRelative * scale ? 0.0 : diff);
  }
  Evidence e;
  e.name = name;
  e.threshold = 1.0;
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    e.value = -std::numeric_limits<double>::infinity();
    e.met = true;
    e.detail = "difference vanishes on the grid";
    return e;
  }
  const LogLogFit fit = loglog_fit(x, y);
  if (fit.degenerate) {
    e.value = std::nan("");
    e.met = false;
    e.detail = "too few nonzero differences to fit an exponent";
    return e;
  }
  const double r_hat = exponent_scale * fit.slope;
  const double se = exponent_scale * fit.slope_se;
  e.value = r_hat + 2.0 * se;
  e.met = e.value < 1.0;
  e.detail = "r_hat=" + format_real(r_hat) + " se=" + format_real(se) + " points=" + std::to_string(fit.points);
  return e;
}

double conditional_mean(const CbpModel& model, std::int64_t z) {
  return offspring_moments(model.offspring).mean * control_moments(model.control, z).mean;
}

double conditional_variance(const CbpModel& model, std::int64_t z) {
  const MomentSummary xi = offspring_moments(model.offspring);
  const ControlMoments phi = control_moments(model.control, z);
  return xi.variance * phi.mean + xi.mean * xi.mean * phi.variance;
}

double control_mean(const CbpModel& model, std::int64_t z) { return control_moments(model.control, z).mean; }

double control_variance(const CbpModel& model, std::int64_t z) {
  return control_moments(model.control, z).variance;
}

std::string verdict_text(Scenario scenario, bool met) {
  std::string setting;
  switch (scenario) {
    case Scenario::KnownControl:
      setting = "when the control function is known";
      break;
    case Scenario::UnknownControl:
      setting = "for linearly divisible controls observed through population sizes only";
      break;
    case Scenario::ObservedProgenitors:
      setting = "when population sizes and progenitor numbers are observed";
      break;
  }
  if (met) {
    return "Conditions met: the pair is indistinguishable in the limit, so if the two models carry different "
           "parameter values no weakly consistent estimator exists on the set of unbounded growth " +
           setting + ".";
  }
  return "Conditions not met: this pair does not rule out consistent estimation " + setting + ".";
}

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::KnownControl:
      return "known-control";
    case Scenario::UnknownControl:
      return "unknown-control";
    case Scenario::ObservedProgenitors:
      return "observed-progenitors";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "known-control") return Scenario::KnownControl;
  if (name == "unknown-control") return Scenario::UnknownControl;
  if (name == "observed-progenitors") return Scenario::ObservedProgenitors;
  fail(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
}

std::vector<std::int64_t> default_exponent_grid() {
  std::vector<std::int64_t> grid;
  for (int k = 4; k <= 12; ++k) grid.push_back(std::int64_t{1} << k);
  return grid;
}

IdentifiabilityVerdict identifiability_check(const CbpModel& a, const CbpModel& b, Scenario scenario,
                                             const std::vector<std::int64_t>& grid) {
  require(grid.size() >= 2, ErrorCode::InvalidArgument, "exponent grid needs at least two points");
  IdentifiabilityVerdict v;
  v.scenario = scenario;

  const MomentSummary xa = offspring_moments(a.offspring);
  const MomentSummary xb = offspring_moments(b.offspring);
  const RegularityReport ra = check_regularity(a, grid.back());
  const RegularityReport rb = check_regularity(b, grid.back());
  const std::string tau_detail = "tau_a=" + format_real(ra.tau_liminf_hat) + " tau_b=" + format_real(rb.tau_liminf_hat);
  auto& ev = v.evidence;

  switch (scenario) {
    case Scenario::KnownControl:
      ev.push_back(flag_evidence("same_control", a.control == b.control,
                                 std::string(a.control.family_name()) + " vs " + std::string(b.control.family_name())));
      ev.push_back(flag_evidence("different_offspring", !(a.offspring == b.offspring),
                                 describe(a) + " vs " + describe(b)));
      ev.push_back(equality_evidence("offspring_mean", xa.mean, xb.mean));
      ev.push_back(equality_evidence("offspring_variance", xa.variance, xb.variance));
      ev.push_back(flag_evidence("supercritical", ra.supercritical && rb.supercritical, tau_detail));
      break;
    case Scenario::UnknownControl:
      ev.push_back(flag_evidence("linearly_divisible", ra.linearly_divisible && rb.linearly_divisible, ""));
      ev.push_back(flag_evidence("offspring_lattice_one", xa.lattice == 1 && xb.lattice == 1,
                                 "spans " + std::to_string(xa.lattice) + ", " + std::to_string(xb.lattice)));
      ev.push_back(flag_evidence("supercritical", ra.supercritical && rb.supercritical, tau_detail));
      ev.push_back(exponent_evidence("conditional_mean_exponent", grid, 2.0, conditional_mean, a, b));
      ev.push_back(exponent_evidence("conditional_variance_exponent", grid, 1.0, conditional_variance, a, b));
      break;
    case Scenario::ObservedProgenitors: {
      ev.push_back(equality_evidence("offspring_mean", xa.mean, xb.mean));
      ev.push_back(equality_evidence("offspring_variance", xa.variance, xb.variance));
      ev.push_back(flag_evidence("linearly_divisible", ra.linearly_divisible && rb.linearly_divisible, ""));
      ev.push_back(flag_evidence("uniform_lattice_one", ra.lattice_ok && rb.lattice_ok,
                                 "eta_a=" + format_real(ra.eta_hat) + " eta_b=" + format_real(rb.eta_hat)));
      ev.push_back(flag_evidence("supercritical", ra.supercritical && rb.supercritical, tau_detail));
      double nu_ratio = std::numeric_limits<double>::infinity();
      for (std::int64_t z : grid) {
        if (z < grid.back() / 10) continue;
        const double zd = static_cast<double>(z);
        nu_ratio = std::min({nu_ratio, control_variance(a, z) / zd, control_variance(b, z) / zd});
      }
      ev.push_back({"control_variance_growth", nu_ratio, 0.0, nu_ratio > 0.0,
                    "min nu^2(z)/z over the top decade of the grid"});
      ev.push_back(exponent_evidence("control_mean_exponent", grid, 2.0, control_mean, a, b));
      ev.push_back(exponent_evidence("control_variance_exponent", grid, 1.0, control_variance, a, b));
      break;
    }
  }
  v.conditions_met = std::all_of(ev.begin(), ev.end(), [](const Evidence& e) { return e.met; });
  v.conclusion = verdict_text(scenario, v.conditions_met);
  return v;
}

nlohmann::json verdict_to_json(const IdentifiabilityVerdict& verdict) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& e : verdict.evidence) {
    evidence.push_back({{"name", e.name},
                        {"value", format_real(e.value)},
                        {"threshold", format_real(e.threshold)},
                        {"met", e.met},
                        {"detail", e.detail}});
  }
  return {{"schema", "cbp-verdict/v1"},
          {"scenario", to_string(verdict.scenario)},
          {"conditions_met", verdict.conditions_met},
          {"evidence", evidence},
          {"conclusion", verdict.conclusion}};
}

}  // namespace cbp
