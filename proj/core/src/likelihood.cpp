#include "cbp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cbp/error.hpp"

namespace cbp {

std::string_view to_string(TransitionKind kind) noexcept {
  switch (kind) {
    case TransitionKind::ExactConvolution:
      return "exact";
    case TransitionKind::PgfInversion:
      return "pgf";
    case TransitionKind::DiscretisedNormal:
      return "normal";
    case TransitionKind::Auto:
      return "auto";
  }
  return "?";
}

TransitionKind transition_kind_from_string(std::string_view name) {
  for (auto kind : {TransitionKind::ExactConvolution, TransitionKind::PgfInversion, TransitionKind::DiscretisedNormal,
                    TransitionKind::Auto}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::InvalidArgument, "unknown transition method '" + std::string(name) + "'");
}

double invert_pgf(const Pgf& pgf, std::int64_t k, double gamma) {
  require(k >= 0, ErrorCode::InvalidArgument, "pgf inversion needs k >= 0");
  require(gamma >= 6.0 && gamma <= 14.0, ErrorCode::InvalidArgument, "pgf inversion needs gamma in [6, 14]");
  if (k == 0) return pgf({0.0, 0.0}).real();

  const double kd = static_cast<double>(k);
  const double r = std::pow(10.0, -gamma / (2.0 * kd));
  double sum = pgf({r, 0.0}).real() + ((k & 1) ? -1.0 : 1.0) * pgf({-r, 0.0}).real();
  double inner = 0.0;
  double comp = 0.0;
  for (std::int64_t j = 1; j < k; ++j) {
    const double theta = M_PI * static_cast<double>(j) / kd;
    const double term = ((j & 1) ? -1.0 : 1.0) * pgf(std::polar(r, theta)).real();
    const double t = inner + term;
    comp += std::abs(inner) >= std::abs(term) ? (inner - t) + term : (term - t) + inner;
    inner = t;
  }
  sum += 2.0 * (inner + comp);
  const double value = sum / (2.0 * kd * std::pow(r, kd));
  const double floor = std::pow(10.0, -gamma);
  if (value < -floor) {
    fail(ErrorCode::NumericalInstability,
         "pgf inversion at k=" + std::to_string(k) + " returned " + std::to_string(value));
  }
  return std::max(value, 0.0);
}

ConditionalMoments cond_mean_var(const CbpModel& model, std::int64_t z) {
  const MomentSummary xi = offspring_moments(model.offspring);
  const ControlMoments phi = control_moments(model.control, z);
  return {xi.mean * phi.mean, xi.variance * phi.mean + xi.mean * xi.mean * phi.variance};
}

namespace {

// Growable accumulator for a mixture of pmfs on the integers.
class MixtureAccumulator {
 public:
  void add(const Pmf& pmf, double weight, std::size_t cap) {
    const std::int64_t lo = pmf.offset();
    const std::int64_t hi = pmf.max_support();
    if (values_.empty()) {
      offset_ = lo;
      values_.assign(pmf.size(), 0.0);
    } else {
      if (lo < offset_) {
        values_.insert(values_.begin(), static_cast<std::size_t>(offset_ - lo), 0.0);
        offset_ = lo;
      }
      const auto need = static_cast<std::size_t>(hi - offset_ + 1);
      if (need > values_.size()) values_.resize(need, 0.0);
    }
    if (values_.size() > cap) fail(ErrorCode::SupportOverflow, "transition support exceeds the support cap");
    const auto probs = pmf.probs();
    double* dst = values_.data() + (lo - offset_);
    for (std::size_t i = 0; i < probs.size(); ++i) dst[i] += weight * probs[i];
    tail_ += weight * pmf.tail_mass();
  }

  Pmf finish(double extra_tail) {
    return Pmf::from_raw(offset_, std::move(values_), tail_ + extra_tail, 0.0);
  }

 private:
  std::int64_t offset_ = 0;
  std::vector<double> values_;
  double tail_ = 0.0;
};

}  // namespace

Pmf compound_sum_pmf(const Pmf& counts, const OffspringSpec& offspring, std::size_t cap) {
  if (counts.size() == 1) {
    Pmf out = offspring_sum_pmf(offspring, counts.offset());
    if (out.size() > cap) fail(ErrorCode::SupportOverflow, "transition support exceeds the support cap");
    return out;
  }
  MixtureAccumulator acc;
  const bool finite = std::holds_alternative<FiniteOffspring>(offspring.family());
  const Pmf xi = offspring_pmf(offspring);
  Pmf running;
  const auto probs = counts.probs();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::int64_t u = counts.offset() + static_cast<std::int64_t>(i);
    if (finite) {
      running = i == 0 ? convolve_power(xi, u, cap) : convolve(running, xi);
    } else {
      running = offspring_sum_pmf(offspring, u);
    }
    if (probs[i] > 0.0) acc.add(running, probs[i], cap);
  }
  return acc.finish(counts.tail_mass());
}

namespace {

Pmf exact_transition(const CbpModel& model, std::int64_t z, std::size_t cap) {
  return compound_sum_pmf(control_pmf(model.control, z), model.offspring, cap);
}

Pmf pgf_transition(const CbpModel& model, std::int64_t z, double gamma, std::size_t cap) {
  const Pgf compound = [&](std::complex<double> s) {
    return control_pgf(model.control, z, offspring_pgf(model.offspring, s));
  };
  const ConditionalMoments cm = cond_mean_var(model, z);
  const Pmf phi = control_pmf(model.control, z);
  const std::int64_t lo = model.offspring.min_value() * phi.min_support();
  std::optional<std::int64_t> hi;
  if (const auto b = model.offspring.max_value()) hi = *b * phi.max_support();
  const double sd = std::sqrt(cm.variance);
  const auto scan_limit = static_cast<std::int64_t>(std::ceil(cm.mean + 40.0 * sd + 100.0));

  std::vector<double> values;
  double mass = 0.0;
  for (std::int64_t k = lo;; ++k) {
    if (hi && k > *hi) break;
    if (k > scan_limit) break;
    if (values.size() >= cap) fail(ErrorCode::SupportOverflow, "pgf inversion support exceeds the support cap");
    const double p = invert_pgf(compound, k, gamma);
    values.push_back(p);
    mass += p;
    if (mass >= 1.0 - 1e-13 && static_cast<double>(k) > cm.mean) break;
  }
  const double tail = std::max(0.0, 1.0 - mass);
  return Pmf::from_raw(lo, std::move(values), tail, 0.0);
}

std::size_t estimated_support(const CbpModel& model, std::int64_t z) {
  const ConditionalMoments cm = cond_mean_var(model, z);
  double width = 24.0 * std::sqrt(cm.variance) + 1.0;
  if (const auto b = model.offspring.max_value()) {
    const Pmf phi = control_pmf(model.control, z);
    width = std::min(width, static_cast<double>((*b - model.offspring.min_value()) * phi.max_support() + 1));
  }
  return static_cast<std::size_t>(width);
}

}  // namespace

Pmf transition_pmf(const CbpModel& model, std::int64_t z_prev, const TransitionMethod& method,
                   std::size_t support_cap) {
  require(z_prev >= 0, ErrorCode::InvalidArgument, "z_prev must be non-negative");
  if (z_prev == 0) return Pmf::point_mass(0);
  switch (method.kind) {
    case TransitionKind::ExactConvolution:
      return exact_transition(model, z_prev, support_cap);
    case TransitionKind::PgfInversion:
      return pgf_transition(model, z_prev, method.gamma, support_cap);
    case TransitionKind::DiscretisedNormal: {
      const ConditionalMoments cm = cond_mean_var(model, z_prev);
      return dn_render({cm.mean, cm.variance});
    }
    case TransitionKind::Auto:
      if (estimated_support(model, z_prev) <= kAutoExactSupport) return exact_transition(model, z_prev, support_cap);
      return pgf_transition(model, z_prev, method.gamma, support_cap);
  }
  fail(ErrorCode::InvalidArgument, "unknown transition method");
}

namespace {

struct SupportRange {
  std::int64_t lo = 0;
  std::optional<std::int64_t> hi;
};

SupportRange control_support(const ControlSpec& control, std::int64_t z) {
  const std::int64_t unbounded_from_zero = 0;
  if (std::holds_alternative<IdentityControl>(control.family()) ||
      std::holds_alternative<ScaledControl>(control.family())) {
    const auto v = static_cast<std::int64_t>(control_moments(control, z).mean);
    return {v, v};
  }
  if (const auto* c = std::get_if<BinomialLinearControl>(&control.family())) {
    const std::int64_t n = c->trials_per_individual * z;
    if (c->p == 0.0) return {0, 0};
    if (c->p == 1.0) return {n, n};
    return {0, n};
  }
  if (const auto* c = std::get_if<IidSumControl>(&control.family())) {
    SupportRange r{c->increment.min_value() * z, std::nullopt};
    if (const auto b = c->increment.max_value()) r.hi = *b * z;
    return r;
  }
  if (control_moments(control, z).mean == 0.0) return {0, 0};
  return {unbounded_from_zero, std::nullopt};
}

std::int64_t offspring_lattice(const OffspringSpec& spec) {
  if (std::holds_alternative<FiniteOffspring>(spec.family())) return lattice_span(offspring_pmf(spec));
  return 1;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a / b + ((a % b != 0) && ((a > 0) == (b > 0))); }

}  // namespace

bool transition_reachable(const CbpModel& model, std::int64_t z_prev, std::int64_t z_next) {
  if (z_next < 0) return false;
  if (z_prev == 0) return z_next == 0;
  const std::int64_t a = model.offspring.min_value();
  const auto b = model.offspring.max_value();
  const std::int64_t g = offspring_lattice(model.offspring);
  const SupportRange phi = control_support(model.control, z_prev);

  std::int64_t u_lo = phi.lo;
  std::optional<std::int64_t> u_hi = phi.hi;
  if (b) {
    if (*b == 0) return z_next == 0;
    u_lo = std::max(u_lo, ceil_div(z_next, *b));
  }
  if (a > 0) u_hi = u_hi ? std::min(*u_hi, z_next / a) : z_next / a;
  if (u_hi && u_lo > *u_hi) return false;
  if (g == 1 || (b && *b == a)) {
    if (b && *b == a) {
      // Deterministic offspring: z_next must be a multiple of a within range.
      if (z_next % a != 0) return false;
      const std::int64_t u = z_next / a;
      return u >= u_lo && (!u_hi || u <= *u_hi);
    }
    return true;
  }
  const std::int64_t last = u_hi ? std::min(*u_hi, u_lo + g - 1) : u_lo + g - 1;
  for (std::int64_t u = u_lo; u <= last; ++u) {
    if ((z_next - u * a) % g == 0) return true;
  }
  return false;
}

namespace {

// P(xi_1 + ... + xi_z = y) for every pair needed by an identity-control model
// with finite offspring support, by incremental convolution truncated at the
// largest observed size.
std::map<std::pair<std::int64_t, std::int64_t>, double> bgwp_finite_probabilities(
    const Pmf& xi, const std::vector<std::pair<std::int64_t, std::int64_t>>& steps) {
  std::int64_t z_max = 0;
  std::int64_t y_max = 0;
  for (const auto& [z, y] : steps) {
    z_max = std::max(z_max, z);
    y_max = std::max(y_max, y);
  }
  std::map<std::int64_t, std::vector<std::int64_t>> wanted;
  for (const auto& [z, y] : steps) wanted[z].push_back(y);

  const auto width = static_cast<std::size_t>(y_max + 1);
  std::vector<double> current(width, 0.0);
  std::vector<double> next(width, 0.0);
  current[0] = 1.0;  // S_0 = 0
  const auto probs = xi.probs();
  const std::int64_t a = xi.offset();
  std::map<std::pair<std::int64_t, std::int64_t>, double> out;
  const std::int64_t b = xi.max_support();
  std::size_t live = 1;  // current[y] == 0 for y >= live
  for (std::int64_t z = 1; z <= z_max; ++z) {
    const std::size_t next_live = std::min<std::size_t>(width, live + static_cast<std::size_t>(b));
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(next_live), 0.0);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      const double w = probs[j];
      if (w == 0.0) continue;
      const std::int64_t shift = a + static_cast<std::int64_t>(j);
      if (shift > y_max) break;
      const auto s = static_cast<std::size_t>(shift);
      const std::size_t end = std::min(width, live + s);
      for (std::size_t y = s; y < end; ++y) next[y] += w * current[y - s];
    }
    live = next_live;
    std::swap(current, next);
    const auto it = wanted.find(z);
    if (it != wanted.end()) {
      for (std::int64_t y : it->second) out[{z, y}] = current[static_cast<std::size_t>(y)];
    }
  }
  return out;
}

double closed_form_sum_logpmf(const OffspringSpec& spec, std::int64_t count, std::int64_t y) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const double yd = static_cast<double>(y);
  const double c = static_cast<double>(count);
  if (const auto* f = std::get_if<PoissonOffspring>(&spec.family())) {
    const double lambda = f->lambda * c;
    if (lambda == 0.0) return y == 0 ? 0.0 : ninf;
    return yd * std::log(lambda) - lambda - std::lgamma(yd + 1.0);
  }
  if (const auto* f = std::get_if<BinomialOffspring>(&spec.family())) {
    const double n = static_cast<double>(f->trials) * c;
    if (yd > n) return ninf;
    if (f->p == 0.0) return y == 0 ? 0.0 : ninf;
    if (f->p == 1.0) return yd == n ? 0.0 : ninf;
    return std::lgamma(n + 1.0) - std::lgamma(yd + 1.0) - std::lgamma(n - yd + 1.0) + yd * std::log(f->p) +
           (n - yd) * std::log1p(-f->p);
  }
  if (const auto* f = std::get_if<GeometricOffspring>(&spec.family())) {
    const double k = f->starts_at_one ? yd - c : yd;
    if (k < 0.0) return ninf;
    if (f->p == 1.0) return k == 0.0 ? 0.0 : ninf;
    return std::lgamma(k + c) - std::lgamma(k + 1.0) - std::lgamma(c) + c * std::log(f->p) +
           k * std::log1p(-f->p);
  }
  if (const auto* f = std::get_if<DeterministicOffspring>(&spec.family())) {
    return y == f->value * count ? 0.0 : ninf;
  }
  fail(ErrorCode::InvalidArgument, "no closed-form sum law for finite offspring");
}

}  // namespace

LikelihoodReport evaluate_log_likelihood(const CbpModel& model, const Trajectory& traj,
                                         const TransitionMethod& method) {
  require(traj.sizes.size() >= 2, ErrorCode::InvalidArgument, "likelihood needs at least two sizes");
  LikelihoodReport report;
  std::vector<std::pair<std::int64_t, std::int64_t>> steps;
  for (std::size_t k = 1; k < traj.sizes.size(); ++k) {
    const std::int64_t z = traj.sizes[k - 1];
    const std::int64_t y = traj.sizes[k];
    if (z == 0) {
      if (y != 0) report.impossible = true;
      continue;
    }
    steps.emplace_back(z, y);
  }
  if (report.impossible) {
    report.value = -std::numeric_limits<double>::infinity();
    report.floored_value = report.value;
    return report;
  }

  std::vector<double> logs;
  logs.reserve(steps.size());
  double floor_penalty = 0.0;
  auto record = [&](std::int64_t z, std::int64_t y, double log_p) {
    if (std::isfinite(log_p) && log_p >= std::log(kUnderflowFloor)) {
      logs.push_back(log_p);
      return;
    }
    if (!transition_reachable(model, z, y)) {
      report.impossible = true;
    } else {
      ++report.underflow_steps;
      const ConditionalMoments cm = cond_mean_var(model, z);
      const double d = static_cast<double>(y) - cm.mean;
      floor_penalty += 0.5 * d * d / std::max(cm.variance, 1e-12);
    }
  };

  auto by_transition_pmf = [&] {
    std::map<std::int64_t, Pmf> cache;
    for (const auto& [z, y] : steps) {
      auto it = cache.find(z);
      if (it == cache.end()) it = cache.emplace(z, transition_pmf(model, z, method)).first;
      const double p = it->second.at(y);
      record(z, y, p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
    }
  };

  const bool identity = std::holds_alternative<IdentityControl>(model.control.family());
  const bool exact = method.kind == TransitionKind::ExactConvolution || method.kind == TransitionKind::Auto;
  const bool finite = std::holds_alternative<FiniteOffspring>(model.offspring.family());

  if (identity && exact && !finite) {
    for (const auto& [z, y] : steps) record(z, y, closed_form_sum_logpmf(model.offspring, z, y));
  } else if (identity && exact && !steps.empty()) {
    std::int64_t z_max = 0;
    std::int64_t y_max = 0;
    for (const auto& [z, y] : steps) {
      z_max = std::max(z_max, z);
      y_max = std::max(y_max, y);
    }
    const Pmf xi = offspring_pmf(model.offspring);
    if (static_cast<double>(z_max) * static_cast<double>(y_max + 1) * static_cast<double>(xi.size()) <= 5e8) {
      const auto probs = bgwp_finite_probabilities(xi, steps);
      for (const auto& [z, y] : steps) {
        const double p = probs.at({z, y});
        record(z, y, p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
      }
    } else {
      by_transition_pmf();
    }
  } else {
    by_transition_pmf();
  }

  if (report.impossible) {
    report.value = -std::numeric_limits<double>::infinity();
    report.floored_value = report.value;
    return report;
  }
  for (std::int64_t i = 0; i < report.underflow_steps; ++i) logs.push_back(std::log(kUnderflowFloor));
  logs.push_back(-floor_penalty);
  report.floored_value = compensated_sum(logs);
  report.value = report.underflow_steps > 0 ? -std::numeric_limits<double>::infinity() : report.floored_value;
  return report;
}

double log_likelihood(const CbpModel& model, const Trajectory& traj, const TransitionMethod& method) {
  const LikelihoodReport report = evaluate_log_likelihood(model, traj, method);
  if (report.impossible) fail(ErrorCode::ImpossibleTransition, "trajectory contains an unreachable transition");
  return report.value;
}

}  // namespace cbp
