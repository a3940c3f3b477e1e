#include "cbp/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbp/error.hpp"
#include "cbp/model_json.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"

namespace cbp {

namespace {

double clamp_logit(double t) { return std::clamp(t, -kLogitBound, kLogitBound); }

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double p) {
  const double tiny = std::exp(-kLogitBound);
  p = std::clamp(p, tiny, 1.0 - tiny);
  return clamp_logit(std::log(p / (1.0 - p)));
}

double safe_log(double v) { return clamp_logit(std::log(std::max(v, std::exp(-kLogitBound)))); }

}  // namespace

ParametricFamily ParametricFamily::finite_simplex(std::int64_t support_max, std::int64_t z0,
                                                  std::int64_t support_min) {
  ParametricFamily f;
  f.kind = FamilyKind::FiniteSimplex;
  f.support_min = support_min;
  f.support_max = support_max;
  f.z0 = z0;
  return f;
}

std::size_t ParametricFamily::n_params() const {
  std::size_t n = kind == FamilyKind::FiniteSimplex ? static_cast<std::size_t>(support_max - support_min + 1) : 1;
  return n + (free_control_alpha ? 1 : 0);
}

std::size_t ParametricFamily::n_free() const { return n_params() - (kind == FamilyKind::FiniteSimplex ? 1 : 0); }

std::vector<std::string> ParametricFamily::param_names() const {
  std::vector<std::string> names;
  switch (kind) {
    case FamilyKind::FiniteSimplex:
      for (std::int64_t k = support_min; k <= support_max; ++k) names.push_back("p" + std::to_string(k));
      break;
    case FamilyKind::Poisson:
      names.emplace_back("lambda");
      break;
    case FamilyKind::Geometric:
    case FamilyKind::Binomial:
      names.emplace_back("p");
      break;
  }
  if (free_control_alpha) names.emplace_back("alpha");
  return names;
}

std::string ParametricFamily::id() const {
  std::string out;
  switch (kind) {
    case FamilyKind::FiniteSimplex:
      out = "finite{" + std::to_string(support_min) + ".." + std::to_string(support_max) + "}";
      break;
    case FamilyKind::Poisson:
      out = "poisson";
      break;
    case FamilyKind::Geometric:
      out = "geometric";
      break;
    case FamilyKind::Binomial:
      out = "binomial(" + std::to_string(binomial_trials) + ")";
      break;
  }
  out += free_control_alpha ? "/poisson-linear(alpha)" : "/" + std::string(control.family_name());
  return out;
}

void ParametricFamily::validate(std::span<const double> natural) const {
  require(natural.size() == n_params(), ErrorCode::InvalidArgument,
          "family " + id() + " expects " + std::to_string(n_params()) + " parameters");
  require(z0 >= 1, ErrorCode::InvalidArgument, "family z0 must be positive");
  if (kind == FamilyKind::FiniteSimplex) {
    require(support_max >= support_min && support_min >= 0, ErrorCode::InvalidArgument,
            "finite family needs 0 <= support_min <= support_max");
  }
  if (free_control_alpha) {
    require(std::holds_alternative<PoissonLinearControl>(control.family()), ErrorCode::InvalidArgument,
            "a free control alpha needs a poisson-linear control");
  }
}

CbpModel ParametricFamily::model(std::span<const double> natural) const {
  validate(natural);
  CbpModel m;
  m.z0 = z0;
  m.control = control;
  switch (kind) {
    case FamilyKind::FiniteSimplex: {
      const auto k = static_cast<std::size_t>(support_max - support_min + 1);
      m.offspring = OffspringSpec::finite({natural.begin(), natural.begin() + static_cast<std::ptrdiff_t>(k)},
                                          support_min);
      break;
    }
    case FamilyKind::Poisson:
      m.offspring = OffspringSpec::poisson(natural[0]);
      break;
    case FamilyKind::Geometric:
      m.offspring = OffspringSpec::geometric(natural[0]);
      break;
    case FamilyKind::Binomial:
      m.offspring = OffspringSpec::binomial(binomial_trials, natural[0]);
      break;
  }
  if (free_control_alpha) m.control = ControlSpec::poisson_linear(natural.back());
  return m;
}

std::vector<double> ParametricFamily::to_unconstrained(std::span<const double> natural) const {
  validate(natural);
  std::vector<double> theta;
  switch (kind) {
    case FamilyKind::FiniteSimplex: {
      const auto k = static_cast<std::size_t>(support_max - support_min + 1);
      const double ref = std::log(std::max(natural[0], std::exp(-kLogitBound)));
      for (std::size_t j = 1; j < k; ++j) {
        theta.push_back(clamp_logit(std::log(std::max(natural[j], std::exp(-kLogitBound))) - ref));
      }
      break;
    }
    case FamilyKind::Poisson:
      theta.push_back(safe_log(natural[0]));
      break;
    case FamilyKind::Geometric:
    case FamilyKind::Binomial:
      theta.push_back(logit(natural[0]));
      break;
  }
  if (free_control_alpha) theta.push_back(safe_log(natural.back()));
  return theta;
}

std::vector<double> ParametricFamily::from_unconstrained(std::span<const double> theta) const {
  require(theta.size() == n_free(), ErrorCode::InvalidArgument, "unconstrained vector has the wrong length");
  std::vector<double> natural;
  std::size_t used = 0;
  switch (kind) {
    case FamilyKind::FiniteSimplex: {
      const auto k = static_cast<std::size_t>(support_max - support_min + 1);
      natural.assign(k, 0.0);
      double max_logit = 0.0;
      for (std::size_t j = 1; j < k; ++j) max_logit = std::max(max_logit, clamp_logit(theta[j - 1]));
      double total = 0.0;
      natural[0] = std::exp(-max_logit);
      total += natural[0];
      for (std::size_t j = 1; j < k; ++j) {
        natural[j] = std::exp(clamp_logit(theta[j - 1]) - max_logit);
        total += natural[j];
      }
      for (double& p : natural) p /= total;
      used = k - 1;
      break;
    }
    case FamilyKind::Poisson:
      natural.push_back(std::exp(clamp_logit(theta[0])));
      used = 1;
      break;
    case FamilyKind::Geometric:
    case FamilyKind::Binomial:
      natural.push_back(logistic(clamp_logit(theta[0])));
      used = 1;
      break;
  }
  if (free_control_alpha) natural.push_back(std::exp(clamp_logit(theta[used])));
  return natural;
}

double ParametricFamily::boundary_penalty(std::span<const double> theta) const {
  double penalty = 0.0;
  for (double t : theta) {
    const double excess = std::abs(t) - kLogitBound;
    if (excess > 0.0) penalty += excess * excess;
  }
  return penalty;
}

std::pair<double, double> ParametricFamily::offspring_mean_var(std::span<const double> natural) const {
  const MomentSummary m = offspring_moments(model(natural).offspring);
  return {m.mean, m.variance};
}

namespace {

struct StartOutcome {
  NelderMeadResult result;
  std::vector<double> natural;
  double loglik = -std::numeric_limits<double>::infinity();
};

bool better(const StartOutcome& a, const StartOutcome& b) {
  if (a.loglik != b.loglik) return a.loglik > b.loglik;
  return std::lexicographical_compare(a.natural.begin(), a.natural.end(), b.natural.begin(), b.natural.end());
}

}  // namespace

FitResult fit_mle(const ParametricFamily& family, const Trajectory& traj, const TransitionMethod& method,
                  const FitOptions& options) {
  require(family.n_free() >= 1, ErrorCode::InvalidArgument, "family has no free parameters");
  require(family.n_free() <= 8, ErrorCode::InvalidArgument, "fit_mle supports at most 8 free parameters");
  require(options.starts >= 1 || !options.start_points.empty(), ErrorCode::InvalidArgument,
          "fit_mle needs at least one start");
  require(traj.sizes.size() >= 2, ErrorCode::InvalidArgument, "fit_mle needs at least one transition");

  const Trajectory& data = traj;
  ParametricFamily fam = family;
  fam.z0 = traj.sizes.front() > 0 ? traj.sizes.front() : family.z0;

  const std::size_t dim = fam.n_free();
  for (const auto& x0 : options.start_points)
    require(x0.size() == dim, ErrorCode::InvalidArgument, "start point dimension does not match the family");
  auto objective = [&](std::span<const double> theta) {
    const std::vector<double> natural = fam.from_unconstrained(theta);
    const LikelihoodReport r = evaluate_log_likelihood(fam.model(natural), data, method);
    if (!std::isfinite(r.floored_value)) return std::numeric_limits<double>::infinity();
    return -r.floored_value + fam.boundary_penalty(theta);
  };

  const bool explicit_starts = !options.start_points.empty();
  std::vector<StartOutcome> outcomes(explicit_starts ? options.start_points.size()
                                                     : static_cast<std::size_t>(options.starts));
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    std::vector<double> x0(dim, 0.0);
    if (explicit_starts) {
      x0 = options.start_points[r];
    } else if (r > 0) {
      CounterRng rng(derive_key(options.seed, r));
      for (double& t : x0) t = -3.0 + 6.0 * rng.uniform();
    }
    StartOutcome out;
    out.result = nelder_mead(objective, x0, options.optimizer);
    out.natural = fam.from_unconstrained(out.result.x);
    const LikelihoodReport report = evaluate_log_likelihood(fam.model(out.natural), data, method);
    out.loglik = report.value;
    outcomes[r] = std::move(out);
  });

  std::size_t best = 0;
  std::int64_t evals = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    evals += outcomes[r].result.evals;
    if (better(outcomes[r], outcomes[best])) best = r;
  }
  FitResult fit;
  fit.names = fam.param_names();
  fit.params = outcomes[best].natural;
  fit.loglik = outcomes[best].loglik;
  fit.converged = outcomes[best].result.converged && std::isfinite(fit.loglik);
  fit.n_evals = evals;
  fit.best_start = static_cast<int>(best);
  return fit;
}

namespace js = json_schema;

nlohmann::json family_to_json(const ParametricFamily& family) {
  nlohmann::json offspring;
  switch (family.kind) {
    case FamilyKind::FiniteSimplex:
      offspring = {{"family", "finite"}, {"support_min", family.support_min}, {"support_max", family.support_max}};
      break;
    case FamilyKind::Poisson:
      offspring = {{"family", "poisson"}};
      break;
    case FamilyKind::Geometric:
      offspring = {{"family", "geometric"}};
      break;
    case FamilyKind::Binomial:
      offspring = {{"family", "binomial"}, {"n", family.binomial_trials}};
      break;
  }
  return {{"schema", std::string(kFamilySchema)},
          {"offspring", offspring},
          {"control", control_to_json(family.control)},
          {"free_control_alpha", family.free_control_alpha},
          {"z0", family.z0}};
}

ParametricFamily family_from_json(const nlohmann::json& node) {
  js::allow_only(node, "", {"schema", "offspring", "control", "free_control_alpha", "z0"});
  const std::string schema = js::string(js::field(node, "", "schema"), "/schema");
  if (schema != kFamilySchema) {
    fail(ErrorCode::SchemaViolation, "/schema: expected '" + std::string(kFamilySchema) + "', got '" + schema + "'");
  }
  ParametricFamily f;
  const auto& off = js::field(node, "", "offspring");
  const std::string name = js::string(js::field(off, "/offspring", "family"), "/offspring/family");
  if (name == "finite") {
    js::allow_only(off, "/offspring", {"family", "support_min", "support_max"});
    f.kind = FamilyKind::FiniteSimplex;
    f.support_min = off.contains("support_min") ? js::integer(off["support_min"], "/offspring/support_min") : 0;
    f.support_max = js::integer(js::field(off, "/offspring", "support_max"), "/offspring/support_max");
    if (f.support_min < 0 || f.support_max <= f.support_min) {
      fail(ErrorCode::SchemaViolation, "/offspring/support_max: must exceed support_min >= 0");
    }
  } else if (name == "poisson") {
    js::allow_only(off, "/offspring", {"family"});
    f.kind = FamilyKind::Poisson;
  } else if (name == "geometric") {
    js::allow_only(off, "/offspring", {"family"});
    f.kind = FamilyKind::Geometric;
  } else if (name == "binomial") {
    js::allow_only(off, "/offspring", {"family", "n"});
    f.kind = FamilyKind::Binomial;
    f.binomial_trials = js::integer(js::field(off, "/offspring", "n"), "/offspring/n");
  } else {
    fail(ErrorCode::SchemaViolation, "/offspring/family: unknown family '" + name + "'");
  }
  if (node.contains("control")) f.control = control_from_json(node["control"], "/control");
  if (node.contains("free_control_alpha")) {
    f.free_control_alpha = js::boolean(node["free_control_alpha"], "/free_control_alpha");
    if (f.free_control_alpha && !std::holds_alternative<PoissonLinearControl>(f.control.family())) {
      fail(ErrorCode::SchemaViolation, "/free_control_alpha: requires a poisson-linear control");
    }
  }
  f.z0 = node.contains("z0") ? js::integer(node["z0"], "/z0") : 1;
  if (f.z0 < 1) fail(ErrorCode::SchemaViolation, "/z0: must be a positive integer");
  return f;
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) params[fit.names[i]] = fit.params[i];
  return {{"schema", "cbp-fit/v1"},
          {"param_order", fit.names},
          {"params", params},
          {"loglik", fit.loglik},
          {"converged", fit.converged},
          {"n_evals", fit.n_evals},
          {"best_start", fit.best_start}};
}

}  // namespace cbp
