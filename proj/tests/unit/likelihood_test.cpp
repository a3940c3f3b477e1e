#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbp/fit.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/normal.hpp"
#include "cbp/simulate.hpp"
#include "cbp/tvd.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

namespace cbp {
namespace {

TEST(InvertPgf, PoissonAtZeroAndBeyond) {
  auto poisson = [](std::complex<double> s) { return std::exp(s - 1.0); };
  EXPECT_NEAR(invert_pgf(poisson, 0), std::exp(-1.0), 1e-8);
  EXPECT_NEAR(invert_pgf(poisson, 3), std::exp(-1.0) / 6.0, 1e-8);
}

TEST(InvertPgf, PointMassAndBinomial) {
  EXPECT_DOUBLE_EQ(invert_pgf([](std::complex<double>) { return std::complex<double>(1.0); }, 0), 1.0);
  auto bin = [](std::complex<double> s) { return std::pow(0.5 + 0.5 * s, 2); };
  EXPECT_NEAR(invert_pgf(bin, 1), 0.5, 1e-8);
  EXPECT_NEAR(invert_pgf(bin, 5), 0.0, 1e-8);
}

TEST(InvertPgf, GammaOutsideRange) {
  auto poisson = [](std::complex<double> s) { return std::exp(s - 1.0); };
  EXPECT_CBP_ERROR(invert_pgf(poisson, 2, 5.0), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(invert_pgf(poisson, 2, 15.0), ErrorCode::InvalidArgument);
}

TEST(CondMeanVar, Examples) {
  const auto a = cond_mean_var(make_bgwp(OffspringSpec::poisson(2.0), 1), 30);
  EXPECT_DOUBLE_EQ(a.mean, 60.0);
  EXPECT_DOUBLE_EQ(a.variance, 60.0);
  const auto b = cond_mean_var({OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(2.0), 1, ""}, 30);
  EXPECT_DOUBLE_EQ(b.mean, 60.0);
  EXPECT_DOUBLE_EQ(b.variance, 120.0);
}

TEST(CondMeanVar, MonteCarloAtFifty) {
  const CbpModel m{OffspringSpec::binomial(3, 0.4), ControlSpec::poisson_linear(1.5), 50, ""};
  constexpr int kDraws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < kDraws; ++s) {
    const double x = static_cast<double>(simulate_trajectory(m, 1, derive_key(5150, s)).sizes[1]);
    sum += x;
    sum_sq += x * x;
  }
  const auto truth = cond_mean_var(m, 50);
  const double mean = sum / kDraws;
  EXPECT_LE(std::abs(mean - truth.mean), 5.0 * std::sqrt(truth.variance / kDraws));
  const double var = sum_sq / kDraws - mean * mean;
  const double k4 = fourth_central_next_step(m, 50);
  EXPECT_LE(std::abs(var - truth.variance), 5.0 * std::sqrt((k4 - truth.variance * truth.variance) / kDraws));
}

TEST(TransitionPmf, BgwpBinomialSquare) {
  const Pmf p = transition_pmf(make_bgwp(OffspringSpec::finite({0.5, 0.5}), 1), 2);
  EXPECT_NEAR(p.at(0), 0.25, 1e-15);
  EXPECT_NEAR(p.at(1), 0.5, 1e-15);
  EXPECT_NEAR(p.at(2), 0.25, 1e-15);
}

TEST(TransitionPmf, UnitOffspringReproducesControlLaw) {
  for (const auto& c : {ControlSpec::poisson_linear(2.0), ControlSpec::binomial_linear(3, 0.3), ControlSpec::scaled(1.5)}) {
    const CbpModel m{OffspringSpec::deterministic(1), c, 1, ""};
    EXPECT_LE(tvd_exact(transition_pmf(m, 12), control_pmf(c, 12)).value, 1e-12) << c.family_name();
  }
}

TEST(TransitionPmf, PoissonStoppedPoissonMethodsAgree) {
  const CbpModel m{OffspringSpec::poisson(1.3), ControlSpec::poisson_linear(1.4), 1, ""};
  const Pmf exact = transition_pmf(m, 20, TransitionMethod::exact());
  const Pmf pgf = transition_pmf(m, 20, TransitionMethod::pgf());
  EXPECT_LE(tvd_exact(exact, pgf).value, 1e-7);
}

TEST(TransitionPmf, ExactMatchesEnumerationOracle) {
  const std::vector<CbpModel> corpus = {
      {OffspringSpec::finite({0.2, 0.5, 0.3}), ControlSpec::binomial_linear(2, 0.4), 1, ""},
      {OffspringSpec::binomial(2, 0.3), ControlSpec::iid_sum(OffspringSpec::finite({0.5, 0.5}, 1)), 1, ""},
      {OffspringSpec::finite({0.1538, 0.6491, 0.1971}), ControlSpec::identity(), 1, ""}};
  for (const auto& m : corpus) {
    for (std::int64_t z : {1, 3, 8}) {
      const auto law = oracle::next_step_law(m, z);
      ASSERT_TRUE(law);
      const Pmf got = transition_pmf(m, z);
      double worst = 0.0;
      for (std::size_t k = 0; k < law->size(); ++k)
        worst = std::max(worst, std::abs(got.at(static_cast<std::int64_t>(k)) - static_cast<double>((*law)[k])));
      EXPECT_LE(worst, 1e-14) << describe(m) << " z=" << z;
    }
  }
}

TEST(TransitionPmf, DiscretisedNormalUsesConditionalMoments) {
  const CbpModel m{OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(2.0), 1, ""};
  const Pmf dn = transition_pmf(m, 100, TransitionMethod::normal());
  const Pmf ref = dn_render({200.0, 400.0});
  EXPECT_LE(tvd_exact(dn, ref).value, 1e-15);
}

TEST(TransitionPmf, DnConvergesToExactForDivisibleModels) {
  const CbpModel m{OffspringSpec::finite({0.3, 0.4, 0.3}), ControlSpec::poisson_linear(1.2), 1, ""};
  double previous = 1.0;
  for (std::int64_t z = 16; z <= 1024; z *= 4) {
    const double d = tvd_exact(transition_pmf(m, z), transition_pmf(m, z, TransitionMethod::normal())).value;
    EXPECT_LT(d, previous) << "z=" << z;
    previous = d;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(TransitionPmf, SupportCapOverflows) {
  const CbpModel m{OffspringSpec::poisson(5.0), ControlSpec::identity(), 1, ""};
  EXPECT_CBP_ERROR(transition_pmf(m, 1000, TransitionMethod::exact(), 100), ErrorCode::SupportOverflow);
}

TEST(TransitionReachable, RespectsSupports) {
  const CbpModel m = make_bgwp(OffspringSpec::finite({0.5, 0.5}), 1);
  EXPECT_TRUE(transition_reachable(m, 2, 2));
  EXPECT_FALSE(transition_reachable(m, 2, 3));
  EXPECT_TRUE(transition_reachable(m, 0, 0));
  EXPECT_FALSE(transition_reachable(m, 0, 1));
}

TEST(LogLikelihood, DeterministicPathIsCertain) {
  const CbpModel m{OffspringSpec::deterministic(2), ControlSpec::identity(), 1, ""};
  EXPECT_DOUBLE_EQ(log_likelihood(m, simulate_trajectory(m, 10, 3)), 0.0);
}

TEST(LogLikelihood, SmallHandExamples) {
  const CbpModel m = make_bgwp(OffspringSpec::finite({0.5, 0.5}), 1);
  EXPECT_NEAR(log_likelihood(m, make_trajectory({2, 2})), std::log(0.25), 1e-15);
  EXPECT_NEAR(log_likelihood(m, make_trajectory({2, 1})), std::log(0.5), 1e-15);
  EXPECT_NEAR(log_likelihood(m, make_trajectory({1, 1})), std::log(0.5), 1e-15);
}

TEST(LogLikelihood, ImpossibleTransition) {
  const CbpModel m = make_bgwp(OffspringSpec::finite({0.5, 0.5}), 1);
  EXPECT_CBP_ERROR(log_likelihood(m, make_trajectory({1, 3})), ErrorCode::ImpossibleTransition);
  const LikelihoodReport r = evaluate_log_likelihood(m, make_trajectory({1, 3}));
  EXPECT_TRUE(r.impossible);
  EXPECT_EQ(r.value, -std::numeric_limits<double>::infinity());
}

TEST(LogLikelihood, MarkovDecomposition) {
  const CbpModel m{OffspringSpec::finite({0.1538, 0.6491, 0.1971}), ControlSpec::binomial_linear(2, 0.55), 10, ""};
  const Trajectory t = simulate_trajectory(m, 25, 8);
  double sum = 0.0;
  for (std::size_t k = 1; k < t.sizes.size(); ++k)
    sum += log_likelihood(m, make_trajectory({t.sizes[k - 1], t.sizes[k]}));
  EXPECT_NEAR(log_likelihood(m, t), sum, 1e-10 * std::abs(sum));
  const std::vector<std::int64_t> head(t.sizes.begin(), t.sizes.begin() + 11);
  const std::vector<std::int64_t> tail(t.sizes.begin() + 10, t.sizes.end());
  EXPECT_NEAR(log_likelihood(m, t), log_likelihood(m, make_trajectory(head)) + log_likelihood(m, make_trajectory(tail)),
              1e-10 * std::abs(sum));
}

TEST(LogLikelihood, UnderflowIsFlagged) {
  const CbpModel m = make_bgwp(OffspringSpec::poisson(1.0), 1);
  const LikelihoodReport r = evaluate_log_likelihood(m, make_trajectory({1, 170}));
  EXPECT_EQ(r.underflow_steps, 1);
  EXPECT_FALSE(r.impossible);
  EXPECT_EQ(r.value, -std::numeric_limits<double>::infinity());
  EXPECT_LT(r.floored_value, std::log(kUnderflowFloor));
  EXPECT_TRUE(std::isfinite(r.floored_value));
}

TEST(FitMle, StartsInUnderflowRegionStillConverge) {
  // Doubling 200 -> 400 needs every parent to have two offspring, so any start
  // with small p2 underflows on the first step.
  const auto fam = ParametricFamily::finite_simplex(2, 200);
  const Trajectory t = make_trajectory({200, 400, 800});
  FitOptions far;
  far.start_points = {{3.0, -3.0}};
  const std::vector<double> start = fam.from_unconstrained(far.start_points[0]);
  ASSERT_GT(evaluate_log_likelihood(fam.model(start), t).underflow_steps, 0);
  const FitResult f = fit_mle(fam, t, TransitionMethod::exact(), far);
  EXPECT_TRUE(f.converged);
  EXPECT_GT(f.params[2], 1.0 - 1e-6);
}

TEST(TransitionKind, StringRoundTrip) {
  for (auto k : {TransitionKind::ExactConvolution, TransitionKind::PgfInversion, TransitionKind::DiscretisedNormal,
                 TransitionKind::Auto})
    EXPECT_EQ(transition_kind_from_string(to_string(k)), k);
  EXPECT_CBP_ERROR(transition_kind_from_string("magic"), ErrorCode::InvalidArgument);
}

TEST(Normal, DnPmfAtZero) {
  EXPECT_NEAR(dn_pmf({0.0, 1.0}, 0), 0.3829249225480262, 1e-15);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_interval(-1.0, 1.0), std::erf(1.0 / std::numbers::sqrt2), 1e-15);
}

TEST(Normal, FarTailsKeepRelativeAccuracy) {
  const double expected = 0.5 * std::erfc(10.0 / std::numbers::sqrt2);
  EXPECT_NEAR(normal_interval(10.0, std::numeric_limits<double>::infinity()) / expected, 1.0, 1e-13);
}

TEST(Normal, ZeroVarianceRendersPointMass) {
  EXPECT_EQ(dn_render({3.4, 0.0}), Pmf::point_mass(3));
}

// ---- fitting -----------------------------------------------------------------

TEST(Family, SoftmaxRoundTrip) {
  const auto fam = ParametricFamily::finite_simplex(3, 10);
  const std::vector<double> p = {0.0891, 0.8432, 0.003, 0.0647};
  const auto back = fam.from_unconstrained(fam.to_unconstrained(p));
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back[i], p[i], 1e-13);
  EXPECT_EQ(fam.n_free(), 3u);
  EXPECT_EQ(fam.param_names(), (std::vector<std::string>{"p0", "p1", "p2", "p3"}));
}

TEST(Family, JsonRoundTrip) {
  ParametricFamily fam = ParametricFamily::finite_simplex(2, 10);
  fam.control = ControlSpec::poisson_linear(1.0);
  fam.free_control_alpha = true;
  EXPECT_EQ(family_from_json(family_to_json(fam)), fam);
  nlohmann::json bad = family_to_json(fam);
  bad["extra"] = 1;
  EXPECT_CBP_ERROR(family_from_json(bad), ErrorCode::SchemaViolation);
}

TEST(FitMle, RecoversModelOneOnAverage) {
  const auto fam = ParametricFamily::finite_simplex(2, 10);
  const std::vector<double> truth = {0.1538, 0.6491, 0.1971};
  std::vector<double> mean(3, 0.0);
  constexpr int kSeeds = 20;
  for (int s = 0; s < kSeeds; ++s) {
    const Trajectory t = simulate_trajectory(fam.model(truth), 70, derive_key(603, s));
    const FitResult f = fit_mle(fam, t, TransitionMethod::exact(), {.starts = 4, .seed = 1});
    EXPECT_TRUE(f.converged);
    for (std::size_t i = 0; i < 3; ++i) mean[i] += f.params[i] / kSeeds;
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(mean[i] - truth[i]), 0.05) << "p" << i;
}

TEST(FitMle, DeterministicDoublingPushesP2ToOne) {
  const auto fam = ParametricFamily::finite_simplex(3, 1, 1);
  const Trajectory t = simulate_bgwp(OffspringSpec::deterministic(2), 1, 8, 0);
  const FitResult f = fit_mle(fam, t);
  EXPECT_EQ(f.names[1], "p2");
  EXPECT_GT(f.params[1], 1.0 - 1e-6);
  EXPECT_NEAR(f.loglik, 0.0, 1e-5);
}

TEST(FitMle, LargerSupportNestsSmaller) {
  const Trajectory t = simulate_trajectory(
      {OffspringSpec::finite({0.1538, 0.6491, 0.1971}), ControlSpec::identity(), 10, ""}, 70, 1941);
  const FitResult small = fit_mle(ParametricFamily::finite_simplex(2, 10), t);
  const FitResult large = fit_mle(ParametricFamily::finite_simplex(3, 10), t);
  EXPECT_GE(large.loglik, small.loglik - 1e-6);
}

TEST(FitMle, StartOrderDoesNotChangeTheOptimum) {
  const auto fam = ParametricFamily::finite_simplex(2, 10);
  const Trajectory t = simulate_trajectory(fam.model(std::vector<double>{0.2, 0.5, 0.3}), 30, 77);
  std::vector<std::vector<double>> starts = {{0.0, 0.0}, {2.0, -1.0}, {-2.5, 1.5}, {1.0, 2.5}, {-1.0, -2.0}};
  FitOptions forward;
  forward.start_points = starts;
  const FitResult a = fit_mle(fam, t, TransitionMethod::exact(), forward);
  std::reverse(starts.begin(), starts.end());
  std::rotate(starts.begin(), starts.begin() + 2, starts.end());
  FitOptions permuted;
  permuted.start_points = starts;
  const FitResult b = fit_mle(fam, t, TransitionMethod::exact(), permuted);
  EXPECT_EQ(a.loglik, b.loglik);
  for (std::size_t i = 0; i < a.params.size(); ++i) EXPECT_NEAR(a.params[i], b.params[i], 1e-10);
  EXPECT_EQ(forward.start_points[static_cast<std::size_t>(a.best_start)],
            permuted.start_points[static_cast<std::size_t>(b.best_start)]);
}

TEST(FitMle, ThreadCountDoesNotChangeTheResult) {
  const auto fam = ParametricFamily::finite_simplex(2, 10);
  const Trajectory t = simulate_trajectory(fam.model(std::vector<double>{0.2, 0.5, 0.3}), 40, 5);
  FitOptions one{.starts = 6, .seed = 3, .threads = 1};
  FitOptions many{.starts = 6, .seed = 3, .threads = 4};
  const FitResult a = fit_mle(fam, t, TransitionMethod::exact(), one);
  const FitResult b = fit_mle(fam, t, TransitionMethod::exact(), many);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.loglik, b.loglik);
}

TEST(FitMle, PoissonRateHasClosedFormMle) {
  ParametricFamily fam;
  fam.kind = FamilyKind::Poisson;
  fam.z0 = 10;
  const Trajectory t = simulate_bgwp(OffspringSpec::poisson(1.2), 10, 30, 4);
  const FitResult f = fit_mle(fam, t);
  // For a BGWP with Poisson offspring the MLE of lambda is the ratio estimator.
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < t.sizes.size(); ++k) {
    num += static_cast<double>(t.sizes[k]);
    den += static_cast<double>(t.sizes[k - 1]);
  }
  EXPECT_NEAR(f.params[0], num / den, 1e-6);
}

TEST(FitMle, Validation) {
  const auto fam = ParametricFamily::finite_simplex(2, 10);
  EXPECT_CBP_ERROR(fit_mle(fam, make_trajectory({10})), ErrorCode::InvalidArgument);
  FitOptions bad;
  bad.start_points = {{0.0}};
  EXPECT_CBP_ERROR(fit_mle(fam, make_trajectory({10, 11}), TransitionMethod::exact(), bad), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace cbp
