#include "cbp/tvd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbp/error.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"

namespace cbp {

TvdValue tvd_exact(const Pmf& p, const Pmf& q) {
  const std::int64_t lo = std::min(p.min_support(), q.min_support());
  const std::int64_t hi = std::max(p.max_support(), q.max_support());
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t k = lo; k <= hi; ++k) diffs.push_back(std::abs(p.at(k) - q.at(k)));
  const double value = std::clamp(0.5 * compensated_sum(diffs), 0.0, 1.0);
  return {value, 0.5 * (p.tail_mass() + q.tail_mass())};
}

BoundReport dn_tvd_bound(double m, double s2, double m_other, double s2_other, bool with_exact) {
  require(s2 > 0.0 && s2_other > 0.0, ErrorCode::InvalidArgument, "discretised normal bound needs positive variances");
  BoundReport r;
  r.bound_name = "dn-vs-dn";
  const double vmax = std::max(s2, s2_other);
  r.bound_value = 3.0 * std::abs(s2 - s2_other) / (2.0 * vmax) + std::abs(m - m_other) / (2.0 * std::sqrt(vmax));
  r.inputs = {{"m", m}, {"sigma2", s2}, {"m_other", m_other}, {"sigma2_other", s2_other}};
  if (with_exact) r.exact_tvd = tvd_exact(dn_render({m, s2}), dn_render({m_other, s2_other})).value;
  return r;
}

double third_abs_moment_bound(double m, double s2, double gamma) { return 8.0 * (gamma + 3.0 * m * s2 + m * m * m); }

double lattice_smoothing_tvd(const Pmf& pmf) {
  std::vector<double> diffs;
  diffs.reserve(pmf.size() + 1);
  for (std::int64_t k = pmf.min_support(); k <= pmf.max_support() + 1; ++k) {
    diffs.push_back(std::abs(pmf.at(k) - pmf.at(k - 1)));
  }
  return 0.5 * compensated_sum(diffs);
}

BoundReport stein_dn_bound(const Pmf& increment, std::int64_t n, bool with_exact) {
  require(n >= 1, ErrorCode::InvalidArgument, "Stein bound needs n >= 1");
  const MomentSummary mom = pmf_moments(increment);
  if (!(mom.variance > 0.0)) fail(ErrorCode::DegenerateIncrement, "increment has zero variance");
  const double rho = mom.third_abs_central;
  const double s2 = mom.variance;
  const double s = std::sqrt(s2);
  const double nd = static_cast<double>(n);
  const double smoothing = lattice_smoothing_tvd(increment);

  const double first = std::sqrt(2.0 / M_PI) * (3.0 * rho / s2 + 2.0) /
                       std::sqrt(1.0 + 4.0 * (nd - 1.0) * (1.0 - smoothing));
  const double second = (5.0 + 3.0 * std::sqrt(M_PI / 8.0)) * rho / (std::sqrt(nd) * s2 * s);
  const double third = 1.0 / (2.0 * std::sqrt(2.0 * M_PI * nd) * s);

  BoundReport r;
  r.bound_name = "stein-dn";
  r.bound_value = first + second + third;
  r.inputs = {{"n", nd}, {"mean", mom.mean}, {"sigma2", s2}, {"rho", rho}, {"smoothing_tvd", smoothing}};
  if (with_exact) {
    const Pmf sum = convolve_power(increment, n);
    r.exact_tvd = tvd_exact(sum, dn_render({nd * mom.mean, nd * s2})).value;
  }
  return r;
}

double fourth_central_next_step(const CbpModel& model, std::int64_t z) {
  const MomentSummary xi = offspring_moments(model.offspring);
  const ControlMoments phi = control_moments(model.control, z);
  for (double v : {xi.mean, xi.variance, xi.third_central, xi.fourth_central, phi.mean, phi.variance,
                   phi.third_central, phi.fourth_central}) {
    if (!std::isfinite(v)) fail(ErrorCode::MissingMoment, "moments through order four must be finite");
  }
  const double m = xi.mean;
  const double s2 = xi.variance;
  const double s4 = s2 * s2;
  const double m2 = m * m;
  return m2 * m2 * phi.fourth_central + 6.0 * s2 * m2 * phi.third_central +
         (6.0 * s2 * m2 * phi.mean + 4.0 * xi.third_central * m + 3.0 * s4) * phi.variance +
         3.0 * s4 * phi.mean * phi.mean + (xi.fourth_central - 3.0 * s4) * phi.mean;
}

namespace {

struct DnChainPart {
  BoundReport stein;
  double mean = 0.0;
  double variance = 0.0;
};

DnChainPart dn_chain_part(const CbpModel& model, std::int64_t z) {
  const auto division = linear_division(model.control, z);
  if (!division) fail(ErrorCode::NotLinearlyDivisible, "bounded TVD needs a linearly divisible control");
  const Pmf increment = compound_sum_pmf(offspring_pmf(division->increment), model.offspring);
  DnChainPart part;
  part.stein = stein_dn_bound(increment, division->count);
  const double l = static_cast<double>(division->count);
  part.mean = l * part.stein.inputs.at("mean");
  part.variance = l * part.stein.inputs.at("sigma2");
  return part;
}

}  // namespace

BoundReport one_step_tvd(const CbpModel& a, const CbpModel& b, std::int64_t z, TvdMethod method) {
  require(z >= 1, ErrorCode::InvalidArgument, "one-step TVD needs z >= 1");
  BoundReport r;
  r.inputs["z"] = static_cast<double>(z);
  if (method == TvdMethod::Exact) {
    const TvdValue v = tvd_exact(transition_pmf(a, z), transition_pmf(b, z));
    r.bound_name = "exact";
    r.exact_tvd = v.value;
    r.bound_value = std::min(1.0, v.value + v.error_bound);
    r.inputs["tail_error"] = v.error_bound;
    return r;
  }
  const DnChainPart pa = dn_chain_part(a, z);
  const DnChainPart pb = dn_chain_part(b, z);
  const BoundReport middle = dn_tvd_bound(pa.mean, pa.variance, pb.mean, pb.variance);
  r.bound_name = "stein+dn+stein";
  r.bound_value = pa.stein.bound_value + middle.bound_value + pb.stein.bound_value;
  r.inputs["stein_a"] = pa.stein.bound_value;
  r.inputs["dn_vs_dn"] = middle.bound_value;
  r.inputs["stein_b"] = pb.stein.bound_value;
  return r;
}

namespace {

// Walks the laws of xi_1 + ... + xi_u for consecutive u.
class SumLawStream {
 public:
  SumLawStream(const OffspringSpec& offspring, std::int64_t start)
      : offspring_(offspring),
        finite_(std::holds_alternative<FiniteOffspring>(offspring.family())),
        xi_(offspring_pmf(offspring)),
        u_(start),
        current_(offspring_sum_pmf(offspring, start)) {}

  const Pmf& current() const { return current_; }

  void advance() {
    ++u_;
    current_ = finite_ ? convolve(current_, xi_) : offspring_sum_pmf(offspring_, u_);
  }

 private:
  const OffspringSpec& offspring_;
  bool finite_;
  Pmf xi_;
  std::int64_t u_;
  Pmf current_;
};

}  // namespace

double joint_progenitor_tvd(const CbpModel& a, const CbpModel& b, std::int64_t z) {
  const Pmf pa = control_pmf(a.control, z);
  const Pmf pb = control_pmf(b.control, z);
  const std::int64_t lo = std::min(pa.min_support(), pb.min_support());
  const std::int64_t hi = std::max(pa.max_support(), pb.max_support());
  SumLawStream sa(a.offspring, lo);
  SumLawStream sb(b.offspring, lo);
  std::vector<double> parts;
  for (std::int64_t u = lo; u <= hi; ++u) {
    const double wa = pa.at(u);
    const double wb = pb.at(u);
    if (wa > 0.0 || wb > 0.0) {
      const Pmf& la = sa.current();
      const Pmf& lb = sb.current();
      const std::int64_t ylo = std::min(la.min_support(), lb.min_support());
      const std::int64_t yhi = std::max(la.max_support(), lb.max_support());
      for (std::int64_t y = ylo; y <= yhi; ++y) parts.push_back(std::abs(wa * la.at(y) - wb * lb.at(y)));
    }
    if (u < hi) {
      sa.advance();
      sb.advance();
    }
  }
  return std::clamp(0.5 * compensated_sum(parts), 0.0, 1.0);
}

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorCode::InvalidArgument, "log-log fit needs matching vectors");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  LogLogFit fit;
  fit.points = lx.size();
  auto solve = [&lx](const std::vector<double>& yy, double& slope, double& intercept) {
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(yy.begin(), yy.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (yy[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    slope = sxx > 0.0 ? sxy / sxx : std::nan("");
    intercept = my - slope * mx;
  };
  if (lx.size() < 2) {
    fit.degenerate = true;
    fit.slope = fit.intercept = fit.slope_se = std::nan("");
    return fit;
  }
  solve(ly, fit.slope, fit.intercept);
  if (!std::isfinite(fit.slope)) {
    fit.degenerate = true;
    return fit;
  }

  std::vector<double> fitted(lx.size());
  std::vector<double> resid(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    fitted[i] = fit.intercept + fit.slope * lx[i];
    resid[i] = ly[i] - fitted[i];
  }
  constexpr int kResamples = 200;
  std::vector<double> slopes;
  std::vector<double> yy(lx.size());
  for (int r = 0; r < kResamples; ++r) {
    CounterRng rng(derive_key(0x10C10CULL, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < lx.size(); ++i) {
      yy[i] = fitted[i] + resid[static_cast<std::size_t>(rng() % resid.size())];
    }
    double s = 0.0;
    double c = 0.0;
    solve(yy, s, c);
    slopes.push_back(s);
  }
  const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / kResamples;
  double ss = 0.0;
  for (double s : slopes) ss += (s - mean) * (s - mean);
  fit.slope_se = std::sqrt(ss / (kResamples - 1));
  return fit;
}

DecayScan decay_scan(const CbpModel& a, const CbpModel& b, const std::vector<std::int64_t>& z_grid,
                     const DecayScanOptions& options) {
  require(!z_grid.empty(), ErrorCode::InvalidArgument, "decay scan needs a grid");
  DecayScan scan;
  scan.z = z_grid;
  scan.tvd.assign(z_grid.size(), 0.0);
  if (options.with_bounds) scan.bound.assign(z_grid.size(), std::nan(""));
  parallel_for(z_grid.size(), options.threads, [&](std::size_t i) {
    const std::int64_t z = z_grid[i];
    scan.tvd[i] = options.joint_progenitors ? joint_progenitor_tvd(a, b, z) : *one_step_tvd(a, b, z).exact_tvd;
    if (options.with_bounds) {
      try {
        scan.bound[i] = one_step_tvd(a, b, z, TvdMethod::Bounded).bound_value;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotLinearlyDivisible && e.code() != ErrorCode::DegenerateIncrement) throw;
      }
    }
  });
  std::vector<double> x(z_grid.begin(), z_grid.end());
  scan.fit = loglog_fit(x, scan.tvd);
  return scan;
}

double geometric_series_limit(const std::vector<PowerTerm>& terms, double growth, double z) {
  require(growth > 1.0, ErrorCode::InvalidMixing, "geometric growth factor must exceed 1");
  require(z > 0.0, ErrorCode::InvalidArgument, "z must be positive");
  double total = 0.0;
  for (const auto& t : terms) {
    require(t.q > 0.0, ErrorCode::InvalidArgument, "power-term exponents must be positive");
    total += t.c / ((1.0 - std::pow(growth, -t.q)) * std::pow(z, t.q));
  }
  return total;
}

MultiStepBound multi_step_bound(double s, double q, double a, double b, double m, double s2, double t,
                                double alpha, std::int64_t k, double z) {
  if (!(t > 1.0) || !(alpha < 1.0) || !(alpha * t > 1.0)) {
    fail(ErrorCode::InvalidMixing, "multi-step bound needs t > 1 and 1/t < alpha < 1");
  }
  require(k >= 1, ErrorCode::InvalidArgument, "multi-step bound needs k >= 1");
  require(z > 0.0 && q > 0.0 && s >= 0.0 && a >= 0.0 && b >= 0.0, ErrorCode::InvalidArgument,
          "multi-step bound needs z, q > 0 and s, a, b >= 0");
  const double growth = alpha * t;
  const double c = (a * s2 + b * m * m) / ((1.0 - alpha) * (1.0 - alpha) * t * t);

  // K_k(z) unrolled from the innermost term K_1(growth^{k-1} z).
  double value = s * std::pow(std::pow(growth, static_cast<double>(k - 1)) * z, -q);
  for (std::int64_t j = k - 2; j >= 0; --j) {
    const double zj = std::pow(growth, static_cast<double>(j)) * z;
    value += s * std::pow(zj, -q) + c / zj;
  }
  MultiStepBound out;
  out.value = value;
  out.limit = geometric_series_limit({{s, q}, {c, 1.0}}, growth, z);
  return out;
}

}  // namespace cbp
