#include "cbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

#include "cbp/error.hpp"

namespace cbp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

// Renders a log-concave pmf from its successive ratios, starting at the mode
// and growing the window until a geometric bound on the remaining mass on
// both sides drops below `tail`. up(k) = p(k+1)/p(k), down(k) = p(k-1)/p(k).
template <class Up, class Down>
Pmf render_log_concave(std::int64_t mode, std::int64_t lower, std::optional<std::int64_t> upper, Up up,
                       Down down, double tail) {
  std::deque<double> w{1.0};
  std::int64_t lo = mode;
  std::int64_t hi = mode;
  double sum = 1.0;
  constexpr std::size_t kMaxWidth = std::size_t{1} << 26;
  const double inf = std::numeric_limits<double>::infinity();

  auto side_bound = [&](bool upper_side) -> double {
    if (upper_side) {
      if (upper && hi >= *upper) return 0.0;
      const double r = up(hi);
      return r < 1.0 ? w.back() * r / (1.0 - r) : inf;
    }
    if (lo <= lower) return 0.0;
    const double r = down(lo);
    return r < 1.0 ? w.front() * r / (1.0 - r) : inf;
  };

  for (;;) {
    const double bu = side_bound(true);
    const double bl = side_bound(false);
    if (bu + bl <= tail * sum) {
      const double rest = (bu + bl) / sum;
      std::vector<double> probs(w.begin(), w.end());
      for (double& p : probs) p = p / sum * (1.0 - rest);
      return Pmf::from_raw(lo, std::move(probs), rest);
    }
    if (w.size() >= kMaxWidth) fail(ErrorCode::SupportOverflow, "pmf window exceeds 2^26 points");
    if (bu >= bl) {
      const double next = w.back() * up(hi);
      w.push_back(next);
      sum += next;
      ++hi;
    } else {
      const double next = w.front() * down(lo);
      w.push_front(next);
      sum += next;
      --lo;
    }
  }
}

Pmf poisson_pmf(double lambda, double tail) {
  if (lambda <= 0.0) return Pmf::point_mass(0);
  const auto mode = static_cast<std::int64_t>(std::floor(lambda));
  return render_log_concave(
      mode, 0, std::nullopt, [lambda](std::int64_t k) { return lambda / static_cast<double>(k + 1); },
      [lambda](std::int64_t k) { return static_cast<double>(k) / lambda; }, tail);
}

Pmf binomial_pmf(std::int64_t n, double p, double tail) {
  if (n == 0 || p == 0.0) return Pmf::point_mass(0);
  if (p == 1.0) return Pmf::point_mass(n);
  const double odds = p / (1.0 - p);
  const auto mode = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p)));
  return render_log_concave(
      mode, 0, n,
      [n, odds](std::int64_t k) { return static_cast<double>(n - k) / static_cast<double>(k + 1) * odds; },
      [n, odds](std::int64_t k) { return static_cast<double>(k) / static_cast<double>(n - k + 1) / odds; },
      tail);
}

// Number of failures before the r-th success, success probability p.
Pmf negative_binomial_pmf(std::int64_t r, double p, std::int64_t shift, double tail) {
  if (r == 0) return Pmf::point_mass(0);
  if (p == 1.0) return Pmf::point_mass(shift);
  const double q = 1.0 - p;
  const double rr = static_cast<double>(r);
  const auto mode = r > 1 ? static_cast<std::int64_t>(std::floor((rr - 1.0) * q / p)) : std::int64_t{0};
  Pmf base = render_log_concave(
      mode, 0, std::nullopt,
      [rr, q](std::int64_t k) { return (static_cast<double>(k) + rr) / static_cast<double>(k + 1) * q; },
      [rr, q](std::int64_t k) { return static_cast<double>(k) / ((static_cast<double>(k) - 1.0 + rr) * q); },
      tail);
  std::vector<double> probs(base.probs().begin(), base.probs().end());
  return Pmf(base.offset() + shift, std::move(probs), base.tail_mass());
}

std::complex<double> cpow_int(std::complex<double> w, std::int64_t n) {
  if (n == 0) return {1.0, 0.0};
  if (w == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
  if (n < 64) {
    std::complex<double> result{1.0, 0.0};
    std::complex<double> base = w;
    for (std::int64_t k = n; k > 0; k >>= 1) {
      if (k & 1) result *= base;
      base *= base;
    }
    return result;
  }
  return std::exp(static_cast<double>(n) * std::log(w));
}

std::int64_t checked_product(std::int64_t a, std::int64_t b) {
  if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a) {
    fail(ErrorCode::SupportOverflow, "integer product overflows 64 bits");
  }
  return a * b;
}

std::int64_t draw_poisson(double mean, CounterRng& rng) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

std::int64_t draw_binomial(std::int64_t trials, double p, CounterRng& rng) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<std::int64_t>(trials, p)(rng);
}

double drift_mean(const PoissonDriftControl& c, std::int64_t z) {
  const double zd = static_cast<double>(z);
  return zd + c.a * std::pow(zd, c.q);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// OffspringSpec
// ---------------------------------------------------------------------------

OffspringSpec::OffspringSpec(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const FiniteOffspring& f) {
                   require(!f.probs.empty(), ErrorCode::InvalidArgument, "finite offspring law needs probabilities");
                   for (double p : f.probs) {
                     require(is_probability(p), ErrorCode::InvalidArgument,
                             "finite offspring probabilities must lie in [0, 1]");
                   }
                   require(f.offset >= 0, ErrorCode::InvalidArgument, "offspring support must be non-negative");
                   const double total = compensated_sum(f.probs);
                   require(std::abs(total - 1.0) <= Pmf::kMassTolerance, ErrorCode::InvalidArgument,
                           "finite offspring probabilities sum to " + format_double(total));
                 },
                 [](const PoissonOffspring& f) {
                   require(std::isfinite(f.lambda) && f.lambda >= 0.0, ErrorCode::InvalidArgument,
                           "Poisson rate must be finite and non-negative");
                 },
                 [](const BinomialOffspring& f) {
                   require(f.trials >= 0, ErrorCode::InvalidArgument, "binomial trials must be non-negative");
                   require(is_probability(f.p), ErrorCode::InvalidArgument, "binomial p must lie in [0, 1]");
                 },
                 [](const GeometricOffspring& f) {
                   require(std::isfinite(f.p) && f.p > 0.0 && f.p <= 1.0, ErrorCode::InvalidArgument,
                           "geometric p must lie in (0, 1]");
                 },
                 [](const DeterministicOffspring& f) {
                   require(f.value >= 0, ErrorCode::InvalidArgument, "deterministic offspring must be non-negative");
                 },
             },
             family_);
}

OffspringSpec OffspringSpec::finite(std::vector<double> probs, std::int64_t offset) {
  return OffspringSpec(FiniteOffspring{std::move(probs), offset});
}
OffspringSpec OffspringSpec::poisson(double lambda) { return OffspringSpec(PoissonOffspring{lambda}); }
OffspringSpec OffspringSpec::binomial(std::int64_t trials, double p) {
  return OffspringSpec(BinomialOffspring{trials, p});
}
OffspringSpec OffspringSpec::geometric(double p, bool starts_at_one) {
  return OffspringSpec(GeometricOffspring{p, starts_at_one});
}
OffspringSpec OffspringSpec::deterministic(std::int64_t value) {
  return OffspringSpec(DeterministicOffspring{value});
}

std::string_view OffspringSpec::family_name() const noexcept {
  return std::visit(Overloaded{
                        [](const FiniteOffspring&) { return std::string_view("finite"); },
                        [](const PoissonOffspring&) { return std::string_view("poisson"); },
                        [](const BinomialOffspring&) { return std::string_view("binomial"); },
                        [](const GeometricOffspring&) { return std::string_view("geometric"); },
                        [](const DeterministicOffspring&) { return std::string_view("deterministic"); },
                    },
                    family_);
}

std::int64_t OffspringSpec::min_value() const noexcept {
  return std::visit(Overloaded{
                        [](const FiniteOffspring& f) {
                          std::size_t j = 0;
                          while (j + 1 < f.probs.size() && f.probs[j] == 0.0) ++j;
                          return f.offset + static_cast<std::int64_t>(j);
                        },
                        [](const PoissonOffspring&) { return std::int64_t{0}; },
                        [](const BinomialOffspring& f) { return f.p == 1.0 ? f.trials : std::int64_t{0}; },
                        [](const GeometricOffspring& f) { return std::int64_t{f.starts_at_one ? 1 : 0}; },
                        [](const DeterministicOffspring& f) { return f.value; },
                    },
                    family_);
}

std::optional<std::int64_t> OffspringSpec::max_value() const noexcept {
  return std::visit(Overloaded{
                        [](const FiniteOffspring& f) -> std::optional<std::int64_t> {
                          std::size_t j = f.probs.size() - 1;
                          while (j > 0 && f.probs[j] == 0.0) --j;
                          return f.offset + static_cast<std::int64_t>(j);
                        },
                        [](const PoissonOffspring& f) -> std::optional<std::int64_t> {
                          if (f.lambda == 0.0) return 0;
                          return std::nullopt;
                        },
                        [](const BinomialOffspring& f) -> std::optional<std::int64_t> {
                          return f.p == 0.0 ? 0 : f.trials;
                        },
                        [](const GeometricOffspring& f) -> std::optional<std::int64_t> {
                          if (f.p == 1.0) return f.starts_at_one ? 1 : 0;
                          return std::nullopt;
                        },
                        [](const DeterministicOffspring& f) -> std::optional<std::int64_t> { return f.value; },
                    },
                    family_);
}

Pmf offspring_pmf(const OffspringSpec& spec, double tail) { return offspring_sum_pmf(spec, 1, tail); }

Pmf offspring_sum_pmf(const OffspringSpec& spec, std::int64_t count, double tail) {
  require(count >= 0, ErrorCode::InvalidArgument, "sum length must be non-negative");
  if (count == 0) return Pmf::point_mass(0);
  return std::visit(
      Overloaded{
          [&](const FiniteOffspring& f) {
            Pmf single = Pmf::from_raw(f.offset, f.probs, 0.0, 0.0);
            return count == 1 ? single : convolve_power(single, count);
          },
          [&](const PoissonOffspring& f) { return poisson_pmf(f.lambda * static_cast<double>(count), tail); },
          [&](const BinomialOffspring& f) { return binomial_pmf(checked_product(f.trials, count), f.p, tail); },
          [&](const GeometricOffspring& f) {
            return negative_binomial_pmf(count, f.p, f.starts_at_one ? count : 0, tail);
          },
          [&](const DeterministicOffspring& f) { return Pmf::point_mass(checked_product(f.value, count)); },
      },
      spec.family());
}

MomentSummary offspring_moments(const OffspringSpec& spec) {
  if (std::holds_alternative<FiniteOffspring>(spec.family())) return pmf_moments(offspring_pmf(spec));
  if (const auto* d = std::get_if<DeterministicOffspring>(&spec.family())) {
    MomentSummary out;
    out.mean = static_cast<double>(d->value);
    return out;
  }
  const MomentSummary rendered = pmf_moments(offspring_pmf(spec));
  MomentSummary out = rendered;
  std::visit(Overloaded{
                 [](const FiniteOffspring&) {},
                 [](const DeterministicOffspring&) {},
                 [&](const PoissonOffspring& f) {
                   const double l = f.lambda;
                   out.mean = l;
                   out.variance = l;
                   out.third_central = l;
                   out.fourth_central = l + 3.0 * l * l;
                 },
                 [&](const BinomialOffspring& f) {
                   const double n = static_cast<double>(f.trials);
                   const double p = f.p;
                   const double q = 1.0 - p;
                   out.mean = n * p;
                   out.variance = n * p * q;
                   out.third_central = n * p * q * (q - p);
                   out.fourth_central = n * p * q * (1.0 + 3.0 * (n - 2.0) * p * q);
                 },
                 [&](const GeometricOffspring& f) {
                   const double p = f.p;
                   const double q = 1.0 - p;
                   out.mean = q / p + (f.starts_at_one ? 1.0 : 0.0);
                   out.variance = q / (p * p);
                   out.third_central = q * (1.0 + q) / (p * p * p);
                   out.fourth_central = q * (1.0 + 7.0 * q + q * q) / (p * p * p * p);
                 },
             },
             spec.family());
  out.third_abs_central = std::max(rendered.third_abs_central, std::abs(out.third_central));
  return out;
}

std::complex<double> offspring_pgf(const OffspringSpec& spec, std::complex<double> s) {
  using C = std::complex<double>;
  return std::visit(Overloaded{
                        [&](const FiniteOffspring& f) {
                          C acc{0.0, 0.0};
                          for (auto it = f.probs.rbegin(); it != f.probs.rend(); ++it) acc = acc * s + *it;
                          return acc * cpow_int(s, f.offset);
                        },
                        [&](const PoissonOffspring& f) { return std::exp(f.lambda * (s - 1.0)); },
                        [&](const BinomialOffspring& f) { return cpow_int(1.0 - f.p + f.p * s, f.trials); },
                        [&](const GeometricOffspring& f) {
                          const C g = f.p / (1.0 - (1.0 - f.p) * s);
                          return f.starts_at_one ? g * s : g;
                        },
                        [&](const DeterministicOffspring& f) { return cpow_int(s, f.value); },
                    },
                    spec.family());
}

std::int64_t sample_offspring_sum(const OffspringSpec& spec, std::int64_t count, CounterRng& rng) {
  if (count <= 0) return 0;
  return std::visit(
      Overloaded{
          [&](const FiniteOffspring& f) {
            std::int64_t remaining = count;
            double mass_left = 1.0;
            std::int64_t total = 0;
            const std::size_t last = f.probs.size() - 1;
            for (std::size_t j = 0; j < last && remaining > 0; ++j) {
              const double pj = f.probs[j];
              const double cond = mass_left > 0.0 ? std::clamp(pj / mass_left, 0.0, 1.0) : 1.0;
              const std::int64_t hits = draw_binomial(remaining, cond, rng);
              total += hits * (f.offset + static_cast<std::int64_t>(j));
              remaining -= hits;
              mass_left -= pj;
            }
            return total + remaining * (f.offset + static_cast<std::int64_t>(last));
          },
          [&](const PoissonOffspring& f) { return draw_poisson(f.lambda * static_cast<double>(count), rng); },
          [&](const BinomialOffspring& f) { return draw_binomial(checked_product(f.trials, count), f.p, rng); },
          [&](const GeometricOffspring& f) {
            const std::int64_t shift = f.starts_at_one ? count : 0;
            if (f.p == 1.0) return shift;
            return shift + std::negative_binomial_distribution<std::int64_t>(count, f.p)(rng);
          },
          [&](const DeterministicOffspring& f) { return checked_product(f.value, count); },
      },
      spec.family());
}

// ---------------------------------------------------------------------------
// ControlSpec
// ---------------------------------------------------------------------------

ControlSpec::ControlSpec(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const IdentityControl&) {},
                 [](const ScaledControl& c) {
                   require(std::isfinite(c.alpha) && c.alpha >= 0.0, ErrorCode::InvalidArgument,
                           "scaled control alpha must be finite and non-negative");
                 },
                 [](const PoissonLinearControl& c) {
                   require(std::isfinite(c.alpha) && c.alpha >= 0.0, ErrorCode::InvalidArgument,
                           "Poisson control alpha must be finite and non-negative");
                 },
                 [](const PoissonDriftControl& c) {
                   require(std::isfinite(c.a) && c.a >= 0.0, ErrorCode::InvalidArgument,
                           "drift coefficient a must be finite and non-negative");
                   require(std::isfinite(c.q) && c.q >= 0.0, ErrorCode::InvalidArgument,
                           "drift exponent q must be finite and non-negative");
                 },
                 [](const BinomialLinearControl& c) {
                   require(c.trials_per_individual >= 0, ErrorCode::InvalidArgument,
                           "binomial control trials must be non-negative");
                   require(is_probability(c.p), ErrorCode::InvalidArgument, "binomial control p must lie in [0, 1]");
                 },
                 [](const IidSumControl&) {},
             },
             family_);
}

ControlSpec ControlSpec::scaled(double alpha) { return ControlSpec(ScaledControl{alpha}); }
ControlSpec ControlSpec::poisson_linear(double alpha) { return ControlSpec(PoissonLinearControl{alpha}); }
ControlSpec ControlSpec::poisson_drift(double a, double q) { return ControlSpec(PoissonDriftControl{a, q}); }
ControlSpec ControlSpec::binomial_linear(std::int64_t trials_per_individual, double p) {
  return ControlSpec(BinomialLinearControl{trials_per_individual, p});
}
ControlSpec ControlSpec::iid_sum(OffspringSpec increment) { return ControlSpec(IidSumControl{std::move(increment)}); }

std::string_view ControlSpec::family_name() const noexcept {
  return std::visit(Overloaded{
                        [](const IdentityControl&) { return std::string_view("identity"); },
                        [](const ScaledControl&) { return std::string_view("scaled"); },
                        [](const PoissonLinearControl&) { return std::string_view("poisson-linear"); },
                        [](const PoissonDriftControl&) { return std::string_view("poisson-drift"); },
                        [](const BinomialLinearControl&) { return std::string_view("binomial-linear"); },
                        [](const IidSumControl&) { return std::string_view("iid-sum"); },
                    },
                    family_);
}

namespace {

ControlMoments poisson_control_moments(double lambda) {
  return {lambda, lambda, lambda, lambda + 3.0 * lambda * lambda};
}

}  // namespace

ControlMoments control_moments(const ControlSpec& control, std::int64_t z) {
  require(z >= 0, ErrorCode::InvalidArgument, "population size must be non-negative");
  const double zd = static_cast<double>(z);
  return std::visit(Overloaded{
                        [&](const IdentityControl&) { return ControlMoments{zd, 0.0, 0.0, 0.0}; },
                        [&](const ScaledControl& c) { return ControlMoments{std::floor(c.alpha * zd), 0.0, 0.0, 0.0}; },
                        [&](const PoissonLinearControl& c) { return poisson_control_moments(c.alpha * zd); },
                        [&](const PoissonDriftControl& c) { return poisson_control_moments(drift_mean(c, z)); },
                        [&](const BinomialLinearControl& c) {
                          const double n = static_cast<double>(c.trials_per_individual) * zd;
                          const double p = c.p;
                          const double q = 1.0 - p;
                          return ControlMoments{n * p, n * p * q, n * p * q * (q - p),
                                                n * p * q * (1.0 + 3.0 * (n - 2.0) * p * q)};
                        },
                        [&](const IidSumControl& c) {
                          const MomentSummary chi = offspring_moments(c.increment);
                          const double s4 = chi.variance * chi.variance;
                          return ControlMoments{zd * chi.mean, zd * chi.variance, zd * chi.third_central,
                                                zd * chi.fourth_central + 3.0 * zd * (zd - 1.0) * s4};
                        },
                    },
                    control.family());
}

Pmf control_pmf(const ControlSpec& control, std::int64_t z, double tail) {
  require(z >= 0, ErrorCode::InvalidArgument, "population size must be non-negative");
  const double zd = static_cast<double>(z);
  return std::visit(
      Overloaded{
          [&](const IdentityControl&) { return Pmf::point_mass(z); },
          [&](const ScaledControl& c) {
            return Pmf::point_mass(static_cast<std::int64_t>(std::floor(c.alpha * zd)));
          },
          [&](const PoissonLinearControl& c) { return poisson_pmf(c.alpha * zd, tail); },
          [&](const PoissonDriftControl& c) { return poisson_pmf(drift_mean(c, z), tail); },
          [&](const BinomialLinearControl& c) {
            return binomial_pmf(checked_product(c.trials_per_individual, z), c.p, tail);
          },
          [&](const IidSumControl& c) { return offspring_sum_pmf(c.increment, z, tail); },
      },
      control.family());
}

std::complex<double> control_pgf(const ControlSpec& control, std::int64_t z, std::complex<double> w) {
  const double zd = static_cast<double>(z);
  return std::visit(
      Overloaded{
          [&](const IdentityControl&) { return cpow_int(w, z); },
          [&](const ScaledControl& c) { return cpow_int(w, static_cast<std::int64_t>(std::floor(c.alpha * zd))); },
          [&](const PoissonLinearControl& c) { return std::exp(c.alpha * zd * (w - 1.0)); },
          [&](const PoissonDriftControl& c) { return std::exp(drift_mean(c, z) * (w - 1.0)); },
          [&](const BinomialLinearControl& c) {
            return cpow_int(1.0 - c.p + c.p * w, checked_product(c.trials_per_individual, z));
          },
          [&](const IidSumControl& c) { return cpow_int(offspring_pgf(c.increment, w), z); },
      },
      control.family());
}

std::int64_t sample_control(const ControlSpec& control, std::int64_t z, CounterRng& rng) {
  if (z <= 0) return 0;
  const double zd = static_cast<double>(z);
  return std::visit(
      Overloaded{
          [&](const IdentityControl&) { return z; },
          [&](const ScaledControl& c) { return static_cast<std::int64_t>(std::floor(c.alpha * zd)); },
          [&](const PoissonLinearControl& c) { return draw_poisson(c.alpha * zd, rng); },
          [&](const PoissonDriftControl& c) { return draw_poisson(drift_mean(c, z), rng); },
          [&](const BinomialLinearControl& c) {
            return draw_binomial(checked_product(c.trials_per_individual, z), c.p, rng);
          },
          [&](const IidSumControl& c) { return sample_offspring_sum(c.increment, z, rng); },
      },
      control.family());
}

std::optional<LinearDivision> linear_division(const ControlSpec& control, std::int64_t z) {
  return std::visit(
      Overloaded{
          [&](const IdentityControl&) -> std::optional<LinearDivision> {
            return LinearDivision{z, OffspringSpec::deterministic(1)};
          },
          [&](const ScaledControl& c) -> std::optional<LinearDivision> {
            if (c.alpha != std::floor(c.alpha)) return std::nullopt;
            return LinearDivision{z, OffspringSpec::deterministic(static_cast<std::int64_t>(c.alpha))};
          },
          [&](const PoissonLinearControl& c) -> std::optional<LinearDivision> {
            return LinearDivision{z, OffspringSpec::poisson(c.alpha)};
          },
          [&](const PoissonDriftControl& c) -> std::optional<LinearDivision> {
            if (z == 0) return LinearDivision{0, OffspringSpec::poisson(1.0)};
            return LinearDivision{z, OffspringSpec::poisson(drift_mean(c, z) / static_cast<double>(z))};
          },
          [&](const BinomialLinearControl& c) -> std::optional<LinearDivision> {
            return LinearDivision{z, OffspringSpec::binomial(c.trials_per_individual, c.p)};
          },
          [&](const IidSumControl& c) -> std::optional<LinearDivision> { return LinearDivision{z, c.increment}; },
      },
      control.family());
}

// ---------------------------------------------------------------------------
// Model-level quantities
// ---------------------------------------------------------------------------

CbpModel make_bgwp(OffspringSpec offspring, std::int64_t z0) {
  return CbpModel{std::move(offspring), ControlSpec::identity(), z0, {}};
}

std::string describe(const CbpModel& model) {
  std::ostringstream os;
  os << model.offspring.family_name() << "/" << model.control.family_name() << "/z0=" << model.z0;
  return os.str();
}

double mean_growth_rate(const CbpModel& model, std::int64_t z) {
  require(z >= 1, ErrorCode::InvalidArgument, "mean growth rate needs z >= 1");
  const double m = offspring_moments(model.offspring).mean;
  return control_moments(model.control, z).mean * m / static_cast<double>(z);
}

std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int points) {
  require(lo >= 1 && hi >= lo, ErrorCode::InvalidArgument, "grid needs 1 <= lo <= hi");
  require(points >= 1, ErrorCode::InvalidArgument, "grid needs at least one point");
  std::vector<std::int64_t> grid;
  if (points == 1 || lo == hi) return {lo};
  const double ratio = std::log(static_cast<double>(hi) / static_cast<double>(lo));
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    auto z = static_cast<std::int64_t>(std::llround(static_cast<double>(lo) * std::exp(ratio * t)));
    z = std::clamp(z, lo, hi);
    if (grid.empty() || z != grid.back()) grid.push_back(z);
  }
  grid.back() = hi;
  return grid;
}

RegularityReport check_regularity(const CbpModel& model, std::int64_t z_max) {
  require(z_max >= 1, ErrorCode::InvalidArgument, "z_max must be positive");
  RegularityReport report;
  report.grid = geometric_grid(1, z_max, 64);
  const double m = offspring_moments(model.offspring).mean;
  const double top_decade = static_cast<double>(z_max) / 10.0;

  report.tau_liminf_hat = std::numeric_limits<double>::infinity();
  report.eta_hat = std::numeric_limits<double>::infinity();
  report.linearly_divisible = true;
  for (std::int64_t z : report.grid) {
    const double zd = static_cast<double>(z);
    const ControlMoments cm = control_moments(model.control, z);
    report.a_hat = std::max(report.a_hat, cm.mean / zd);
    report.b_hat = std::max(report.b_hat, cm.variance / zd);
    report.c_hat = std::max(report.c_hat, std::abs(cm.third_central) / zd);
    report.d_hat = std::max(report.d_hat, cm.fourth_central / (zd * zd));
    if (zd >= top_decade) report.tau_liminf_hat = std::min(report.tau_liminf_hat, cm.mean * m / zd);

    const auto division = linear_division(model.control, z);
    if (!division) {
      report.linearly_divisible = false;
      continue;
    }
    const Pmf chi = offspring_pmf(division->increment);
    double eta = 0.0;
    for (std::int64_t x = chi.min_support(); x < chi.max_support(); ++x) {
      eta = std::max(eta, std::min(chi.at(x), chi.at(x + 1)));
    }
    report.eta_hat = std::min(report.eta_hat, eta);
  }
  if (!report.linearly_divisible) report.eta_hat = 0.0;
  report.lattice_ok = report.eta_hat > 0.0;
  report.supercritical = report.tau_liminf_hat > 1.0;
  return report;
}

Pmf solve_p_from_moments(double m_hat, double var_hat, int support_max) {
  require(std::isfinite(m_hat) && m_hat > 0.0, ErrorCode::InvalidArgument, "mean estimate must be positive");
  require(std::isfinite(var_hat) && var_hat >= 0.0, ErrorCode::InvalidArgument,
          "variance estimate must be non-negative");
  if (support_max == 3) {
    fail(ErrorCode::Unidentifiable,
         "four probabilities on {0,1,2,3} are not determined by the mean and variance");
  }
  require(support_max == 2, ErrorCode::InvalidArgument, "support_max must be 2 or 3");

  constexpr double kClamp = 1e-9;
  const double p2 = (var_hat + m_hat * m_hat - m_hat) / 2.0;
  const double p1 = m_hat - 2.0 * p2;
  const double p0 = 1.0 - p1 - p2;
  std::vector<double> probs{p0, p1, p2};
  for (double& p : probs) {
    if (p < -kClamp || p > 1.0 + kClamp) {
      fail(ErrorCode::OutsideSimplex, "moments (" + format_double(m_hat) + ", " + format_double(var_hat) +
                                          ") give probabilities outside the simplex on {0,1,2}");
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  const double total = probs[0] + probs[1] + probs[2];
  for (double& p : probs) p /= total;
  return Pmf::from_raw(0, std::move(probs), 0.0, 0.0);
}

}  // namespace cbp
