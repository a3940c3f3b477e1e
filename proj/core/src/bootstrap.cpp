#include "cbp/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cbp/error.hpp"
#include "cbp/estimators.hpp"
#include "cbp/numeric_format.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"

namespace cbp {

namespace {

enum class ReplicateStatus { Ok, Extinct, Truncated, Failed };

struct ReplicateOutcome {
  ReplicateStatus status = ReplicateStatus::Ok;
  std::vector<double> natural;
};

bool usable(const Trajectory& traj) { return !traj.truncated_at && traj.sizes.back() > 0; }

FitOptions replicate_fit_options(const BootstrapOptions& options, std::uint64_t replicate_seed) {
  FitOptions fit = options.fit;
  fit.seed = replicate_seed;
  fit.threads = 1;
  return fit;
}

// Fits one replicate path; families with nothing free return their parameters.
ReplicateOutcome refit(const ParametricFamily& family, const std::vector<double>& params, const Trajectory& traj,
                       const BootstrapOptions& options, std::uint64_t replicate_seed) {
  ReplicateOutcome out;
  if (!usable(traj)) {
    out.status = traj.truncated_at ? ReplicateStatus::Truncated : ReplicateStatus::Extinct;
    return out;
  }
  if (family.n_free() == 0) {
    out.natural = params;
    return out;
  }
  try {
    const FitResult fit = fit_mle(family, traj, options.method, replicate_fit_options(options, replicate_seed));
    if (!fit.converged) {
      out.status = ReplicateStatus::Failed;
      return out;
    }
    out.natural = fit.params;
  } catch (const Error&) {
    out.status = ReplicateStatus::Failed;
  }
  return out;
}

void check_failure_rate(std::int64_t failures, std::int64_t total, double max_rate) {
  if (static_cast<double>(failures) > max_rate * static_cast<double>(total)) {
    fail(ErrorCode::BootstrapFailure, std::to_string(failures) + " of " + std::to_string(total) +
                                          " replicate fits failed");
  }
}

// Moment-based natural parameters where the family admits a closed form.
std::vector<double> moment_natural(const ParametricFamily& family, double m, double s2) {
  const std::size_t k = family.n_params();
  std::vector<double> natural(k, std::nan(""));
  if (family.free_control_alpha) return natural;
  if (family.kind == FamilyKind::Poisson) {
    natural[0] = m;
  } else if (family.kind == FamilyKind::FiniteSimplex && family.support_min == 0 && family.support_max == 2) {
    try {
      const Pmf p = solve_p_from_moments(m, s2, 2);
      for (std::size_t j = 0; j < k; ++j) natural[j] = p.at(static_cast<std::int64_t>(j));
    } catch (const Error&) {
    }
  }
  return natural;
}

}  // namespace

BootstrapRun parametric_bootstrap(const ParametricFamily& family, const std::vector<double>& params, std::int64_t n,
                                  std::int64_t B, std::uint64_t seed, const BootstrapOptions& options) {
  require(B >= 2, ErrorCode::InvalidArgument, "bootstrap needs B >= 2");
  require(n >= 1, ErrorCode::InvalidArgument, "bootstrap needs n >= 1");
  const CbpModel model = family.model(params);

  BootstrapRun run;
  run.family_id = family.id();
  run.param_names = family.param_names();
  run.generating_params = params;
  run.n = n;
  run.B = B;
  run.seed = seed;
  for (std::int64_t r = 0; r < B; ++r) run.replicate_seeds.push_back(derive_key(seed, static_cast<std::uint64_t>(r)));

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(B));
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    const Trajectory traj = simulate_trajectory(model, n, run.replicate_seeds[r]);
    outcomes[r] = refit(family, params, traj, options, run.replicate_seeds[r]);
  });

  for (auto& o : outcomes) {
    switch (o.status) {
      case ReplicateStatus::Ok:
        run.estimates.push_back(std::move(o.natural));
        break;
      case ReplicateStatus::Failed:
        ++run.failures;
        break;
      case ReplicateStatus::Extinct:
      case ReplicateStatus::Truncated:
        ++run.extinctions;
        break;
    }
  }
  check_failure_rate(run.failures, B - run.extinctions, options.max_failure_rate);
  require(!run.estimates.empty(), ErrorCode::BootstrapFailure, "no bootstrap replicate survived");
  return run;
}

double quantile(std::vector<double> sample, double p) {
  require(!sample.empty(), ErrorCode::InvalidArgument, "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "quantile level must lie in [0, 1]");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

std::vector<Interval> ci_percentile(const BootstrapRun& run, double level) {
  require(level > 0.0 && level < 1.0, ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
  require(!run.estimates.empty(), ErrorCode::InvalidArgument, "bootstrap run has no estimates");
  const double tail = (1.0 - level) / 2.0;
  std::vector<Interval> out;
  for (std::size_t j = 0; j < run.param_names.size(); ++j) {
    std::vector<double> column;
    for (const auto& row : run.estimates) column.push_back(row[j]);
    out.push_back({quantile(column, tail), quantile(std::move(column), 1.0 - tail)});
  }
  return out;
}

std::string to_string(MseEstimator estimator) { return estimator == MseEstimator::Mle ? "mle" : "moment-based"; }

MseEstimator mse_estimator_from_string(const std::string& name) {
  if (name == "mle") return MseEstimator::Mle;
  if (name == "moment-based") return MseEstimator::MomentBased;
  fail(ErrorCode::InvalidArgument, "unknown estimator '" + name + "'");
}

MseCurve mse_curve(const ParametricFamily& family, const std::vector<double>& true_params,
                   const std::vector<std::int64_t>& lengths, std::int64_t B, std::uint64_t seed,
                   MseEstimator estimator, const BootstrapOptions& options) {
  require(!lengths.empty(), ErrorCode::InvalidArgument, "MSE curve needs at least one length");
  require(B >= 1, ErrorCode::InvalidArgument, "MSE curve needs B >= 1");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    require(lengths[i] >= 1 && (i == 0 || lengths[i] > lengths[i - 1]), ErrorCode::InvalidArgument,
            "lengths must be positive and strictly increasing");
  }
  const CbpModel model = family.model(true_params);
  const auto [m_true, s2_true] = family.offspring_mean_var(true_params);
  std::vector<double> truth = true_params;
  truth.push_back(m_true);
  truth.push_back(s2_true);

  MseCurve curve;
  curve.lengths = lengths;
  curve.param_names = family.param_names();
  curve.param_names.push_back("m");
  curve.param_names.push_back("sigma2");
  curve.B = B;
  curve.seed = seed;

  const std::size_t n_len = lengths.size();
  const std::size_t n_par = truth.size();
  // rows[r][i]: estimates for replicate r at length i; empty when excluded.
  std::vector<std::vector<std::vector<double>>> rows(static_cast<std::size_t>(B));
  std::vector<std::vector<ReplicateStatus>> status(static_cast<std::size_t>(B));

  parallel_for(rows.size(), options.threads, [&](std::size_t r) {
    const std::uint64_t rs = derive_key(seed, r);
    const Trajectory full = simulate_trajectory(model, lengths.back(), rs);
    rows[r].resize(n_len);
    status[r].resize(n_len);
    for (std::size_t i = 0; i < n_len; ++i) {
      const auto len = static_cast<std::size_t>(lengths[i]);
      Trajectory traj = full;
      if (traj.sizes.size() > len + 1) {
        traj.sizes.resize(len + 1);
        traj.extinct = traj.sizes.back() == 0;
        if (traj.truncated_at && *traj.truncated_at > lengths[i]) traj.truncated_at.reset();
      }
      if (static_cast<std::int64_t>(traj.sizes.size()) < lengths[i] + 1 && !traj.truncated_at) {
        traj.extinct = true;
      }
      std::vector<double> est;
      if (estimator == MseEstimator::Mle) {
        ReplicateOutcome o = refit(family, true_params, traj, options, rs);
        status[r][i] = o.status;
        if (o.status != ReplicateStatus::Ok) continue;
        est = o.natural;
        const auto [m, s2] = family.offspring_mean_var(est);
        est.push_back(m);
        est.push_back(s2);
      } else {
        if (!usable(traj)) {
          status[r][i] = traj.truncated_at ? ReplicateStatus::Truncated : ReplicateStatus::Extinct;
          continue;
        }
        try {
          const double m = bgwp_mean(traj).value;
          const double s2 = known_control_estimates(traj, family.control, m).sigma2.value;
          est = moment_natural(family, m, s2);
          est.push_back(m);
          est.push_back(s2);
          status[r][i] = ReplicateStatus::Ok;
        } catch (const Error&) {
          status[r][i] = ReplicateStatus::Failed;
          continue;
        }
      }
      rows[r][i] = std::move(est);
    }
  });

  curve.mse.assign(n_len, std::vector<double>(n_par, 0.0));
  curve.sd.assign(n_len, std::vector<double>(n_par, 0.0));
  curve.excluded.assign(n_len, 0);
  for (std::size_t i = 0; i < n_len; ++i) {
    std::int64_t failures = 0;
    std::int64_t survivors = 0;
    std::vector<double> sum_sq(n_par, 0.0);
    std::vector<double> sum(n_par, 0.0);
    std::int64_t used = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (status[r][i] == ReplicateStatus::Failed) ++failures;
      if (status[r][i] != ReplicateStatus::Extinct && status[r][i] != ReplicateStatus::Truncated) ++survivors;
      if (status[r][i] != ReplicateStatus::Ok) {
        ++curve.excluded[i];
        continue;
      }
      ++used;
      for (std::size_t j = 0; j < n_par; ++j) {
        const double e = rows[r][i][j];
        sum_sq[j] += (e - truth[j]) * (e - truth[j]);
        sum[j] += e;
      }
    }
    if (estimator == MseEstimator::Mle) check_failure_rate(failures, survivors, options.max_failure_rate);
    for (std::size_t j = 0; j < n_par; ++j) {
      if (used == 0) {
        curve.mse[i][j] = curve.sd[i][j] = std::nan("");
        continue;
      }
      const double u = static_cast<double>(used);
      curve.mse[i][j] = sum_sq[j] / u;
      double ss = 0.0;
      const double mean = sum[j] / u;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (status[r][i] != ReplicateStatus::Ok) continue;
        ss += (rows[r][i][j] - mean) * (rows[r][i][j] - mean);
      }
      curve.sd[i][j] = used > 1 ? std::sqrt(ss / (u - 1.0)) : 0.0;
    }
  }
  return curve;
}

void write_mse_csv(std::ostream& out, const MseCurve& curve) {
  out << "length,param,mse,B,seed\n";
  for (std::size_t i = 0; i < curve.lengths.size(); ++i) {
    for (std::size_t j = 0; j < curve.param_names.size(); ++j) {
      out << curve.lengths[i] << ',' << curve.param_names[j] << ',' << format_real(curve.mse[i][j]) << ','
          << curve.B << ',' << curve.seed << '\n';
    }
  }
}

}  // namespace cbp
