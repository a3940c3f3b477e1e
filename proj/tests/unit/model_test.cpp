#include <gtest/gtest.h>

#include <cmath>

#include "cbp/model.hpp"
#include "cbp/rng.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

namespace cbp {
namespace {

TEST(OffspringSpec, ValidatesParameters) {
  EXPECT_CBP_ERROR(OffspringSpec::finite({0.5, 0.4}), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::finite({1.2, -0.2}), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::finite({}), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::poisson(-1.0), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::binomial(3, 1.5), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::geometric(0.0), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(OffspringSpec::deterministic(-1), ErrorCode::InvalidArgument);
  EXPECT_NO_THROW(OffspringSpec::finite({0.1538, 0.6491, 0.1971}));
}

TEST(OffspringSpec, SupportBounds) {
  EXPECT_EQ(OffspringSpec::finite({0.5, 0.5}, 2).min_value(), 2);
  EXPECT_EQ(OffspringSpec::finite({0.5, 0.5}, 2).max_value(), 3);
  EXPECT_EQ(OffspringSpec::poisson(1.0).max_value(), std::nullopt);
  EXPECT_EQ(OffspringSpec::geometric(0.3, true).min_value(), 1);
  EXPECT_EQ(OffspringSpec::binomial(4, 0.5).max_value(), 4);
}

TEST(OffspringMoments, ClosedFormsMatchRenderedPmf) {
  const std::vector<OffspringSpec> specs = {
      OffspringSpec::poisson(2.5),       OffspringSpec::binomial(7, 0.3), OffspringSpec::geometric(0.4),
      OffspringSpec::geometric(0.6, true), OffspringSpec::deterministic(3),
      OffspringSpec::finite({0.0891, 0.8432, 0.003, 0.0647})};
  for (const auto& s : specs) {
    const MomentSummary closed = offspring_moments(s);
    const MomentSummary summed = pmf_moments(offspring_pmf(s));
    EXPECT_NEAR(closed.mean, summed.mean, 1e-10) << s.family_name();
    EXPECT_NEAR(closed.variance, summed.variance, 1e-9) << s.family_name();
    EXPECT_NEAR(closed.third_central, summed.third_central, 1e-8) << s.family_name();
    EXPECT_NEAR(closed.fourth_central, summed.fourth_central, 1e-8 * (1.0 + closed.fourth_central)) << s.family_name();
  }
}

TEST(OffspringMoments, PoissonIdentities) {
  const MomentSummary m = offspring_moments(OffspringSpec::poisson(1.0));
  EXPECT_DOUBLE_EQ(m.mean, 1.0);
  EXPECT_DOUBLE_EQ(m.variance, 1.0);
  EXPECT_DOUBLE_EQ(m.third_central, 1.0);
  EXPECT_DOUBLE_EQ(m.fourth_central, 4.0);
}

TEST(OffspringMoments, MomentMatchingWitnessPair) {
  const MomentSummary a = offspring_moments(OffspringSpec::finite({0.1538, 0.6491, 0.1971, 0.0}));
  const MomentSummary b = offspring_moments(OffspringSpec::finite({0.0891, 0.8432, 0.003, 0.0647}));
  EXPECT_NEAR(a.mean, b.mean, 1e-12);
  EXPECT_NEAR(a.variance, b.variance, 1e-12);
}

TEST(OffspringPmf, PoissonTailIsCertified) {
  const Pmf p = offspring_pmf(OffspringSpec::poisson(3.0));
  EXPECT_LE(p.tail_mass(), kOffspringTail);
  EXPECT_NEAR(p.at(0), std::exp(-3.0), 1e-16);
  EXPECT_NEAR(p.at(4), std::exp(-3.0) * 81.0 / 24.0, 1e-15);
}

TEST(OffspringSumPmf, ClosedFormsAgreeWithConvolution) {
  for (const auto& s : {OffspringSpec::poisson(1.5), OffspringSpec::binomial(3, 0.25), OffspringSpec::geometric(0.5),
                        OffspringSpec::finite({0.2, 0.3, 0.5})}) {
    const Pmf closed = offspring_sum_pmf(s, 6);
    const Pmf conv = convolve_power(offspring_pmf(s), 6);
    for (std::int64_t k = 0; k < 30; ++k) EXPECT_NEAR(closed.at(k), conv.at(k), 1e-13) << s.family_name() << " k=" << k;
  }
}

TEST(OffspringPgf, EvaluatesAtOneAndZero) {
  const OffspringSpec s = OffspringSpec::binomial(4, 0.3);
  EXPECT_NEAR(std::abs(offspring_pgf(s, 1.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(offspring_pgf(s, 0.0).real(), std::pow(0.7, 4), 1e-15);
}

TEST(OffspringSampling, MomentsWithinFiveStandardErrors) {
  constexpr int kDraws = 1'000'000;
  const std::vector<OffspringSpec> specs = {OffspringSpec::poisson(2.0), OffspringSpec::binomial(5, 0.3),
                                            OffspringSpec::geometric(0.4), OffspringSpec::deterministic(2),
                                            OffspringSpec::finite({0.1538, 0.6491, 0.1971})};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const MomentSummary truth = offspring_moments(specs[i]);
    CounterRng rng(derive_key(77, i));
    double sum = 0.0, sum_sq = 0.0;
    for (int d = 0; d < kDraws; ++d) {
      const double x = static_cast<double>(sample_offspring_sum(specs[i], 1, rng));
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / kDraws;
    const double var = sum_sq / kDraws - mean * mean;
    const double se_mean = std::sqrt(truth.variance / kDraws);
    const double se_var = std::sqrt((truth.fourth_central - truth.variance * truth.variance) / kDraws);
    EXPECT_LE(std::abs(mean - truth.mean), 5.0 * se_mean + 1e-12) << specs[i].family_name();
    EXPECT_LE(std::abs(var - truth.variance), 5.0 * se_var + 1e-12) << specs[i].family_name();
  }
}

TEST(ControlMoments, Deterministic) {
  const ControlMoments c = control_moments(ControlSpec::identity(), 7);
  EXPECT_EQ(c.mean, 7.0);
  EXPECT_EQ(c.variance, 0.0);
  EXPECT_EQ(c.third_central, 0.0);
  EXPECT_EQ(c.fourth_central, 0.0);
}

TEST(ControlMoments, PoissonLinear) {
  const ControlMoments c = control_moments(ControlSpec::poisson_linear(2.0), 10);
  EXPECT_DOUBLE_EQ(c.mean, 20.0);
  EXPECT_DOUBLE_EQ(c.variance, 20.0);
  EXPECT_DOUBLE_EQ(c.third_central, 20.0);
  EXPECT_DOUBLE_EQ(c.fourth_central, 1220.0);
}

TEST(ControlMoments, PoissonDrift) {
  EXPECT_DOUBLE_EQ(control_moments(ControlSpec::poisson_drift(1.0, 0.5), 100).mean, 110.0);
}

TEST(ControlMoments, FiniteControlsMatchEnumeration) {
  const std::vector<ControlSpec> controls = {ControlSpec::scaled(3.0), ControlSpec::binomial_linear(3, 0.4),
                                             ControlSpec::iid_sum(OffspringSpec::finite({0.2, 0.5, 0.3}))};
  for (const auto& c : controls) {
    for (std::int64_t z : {1, 4, 9}) {
      const auto law = oracle::control_law(c, z);
      const oracle::Central ref = oracle::central_moments(*law);
      const ControlMoments got = control_moments(c, z);
      EXPECT_NEAR(got.mean, static_cast<double>(ref.mean), 1e-12) << c.family_name();
      EXPECT_NEAR(got.variance, static_cast<double>(ref.var), 1e-11) << c.family_name();
      EXPECT_NEAR(got.third_central, static_cast<double>(ref.third), 1e-10) << c.family_name();
      EXPECT_NEAR(got.fourth_central, static_cast<double>(ref.fourth), 1e-9) << c.family_name();
    }
  }
}

TEST(ControlPmf, ScaledFloorsAlphaZ) {
  EXPECT_EQ(control_pmf(ControlSpec::scaled(1.5), 3), Pmf::point_mass(4));
}

TEST(LinearDivision, DecomposesDivisibleFamilies) {
  const auto pl = linear_division(ControlSpec::poisson_linear(2.0), 5);
  ASSERT_TRUE(pl);
  EXPECT_EQ(pl->count, 5);
  EXPECT_DOUBLE_EQ(offspring_moments(pl->increment).mean, 2.0);
  const auto id = linear_division(ControlSpec::identity(), 9);
  ASSERT_TRUE(id);
  EXPECT_EQ(id->count, 9);
  EXPECT_EQ(id->increment, OffspringSpec::deterministic(1));
  EXPECT_FALSE(linear_division(ControlSpec::scaled(1.5), 4));
  EXPECT_TRUE(linear_division(ControlSpec::scaled(2.0), 4));
}

TEST(LinearDivision, DriftIncrementCarriesTheDriftTerm) {
  const auto d = linear_division(ControlSpec::poisson_drift(1.0, 0.5), 100);
  ASSERT_TRUE(d);
  EXPECT_NEAR(static_cast<double>(d->count) * offspring_moments(d->increment).mean, 110.0, 1e-12);
}

TEST(MeanGrowthRate, Examples) {
  const CbpModel a{OffspringSpec::poisson(1.5), ControlSpec::poisson_linear(2.0), 1, ""};
  for (std::int64_t z : {1, 10, 1000}) EXPECT_DOUBLE_EQ(mean_growth_rate(a, z), 3.0);
  EXPECT_DOUBLE_EQ(mean_growth_rate(make_bgwp(OffspringSpec::poisson(1.3), 1), 17), 1.3);
  const CbpModel c{OffspringSpec::deterministic(1), ControlSpec::poisson_drift(1.0, 0.5), 1, ""};
  EXPECT_DOUBLE_EQ(mean_growth_rate(c, 100), 1.1);
}

TEST(CheckRegularity, DeterministicControl) {
  const RegularityReport r = check_regularity(make_bgwp(OffspringSpec::poisson(2.0), 1), 1000);
  EXPECT_DOUBLE_EQ(r.a_hat, 1.0);
  EXPECT_DOUBLE_EQ(r.b_hat, 0.0);
  EXPECT_DOUBLE_EQ(r.tau_liminf_hat, 2.0);
  EXPECT_TRUE(r.supercritical);
  EXPECT_LE(r.grid.size(), 64u);
  EXPECT_EQ(r.grid.back(), 1000);
}

TEST(CheckRegularity, PoissonLinear) {
  const RegularityReport r =
      check_regularity({OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(1.1), 1, ""}, 1000);
  EXPECT_NEAR(r.a_hat, 1.1, 1e-12);
  EXPECT_NEAR(r.b_hat, 1.1, 1e-12);
  EXPECT_NEAR(r.c_hat, 1.1, 1e-12);
  EXPECT_NEAR(r.tau_liminf_hat, 1.1, 1e-12);
  EXPECT_TRUE(r.linearly_divisible);
}

TEST(CheckRegularity, UniformLatticeWitness) {
  const CbpModel m{OffspringSpec::poisson(1.0), ControlSpec::iid_sum(OffspringSpec::finite({0.5, 0.5}, 1)), 1, ""};
  const RegularityReport r = check_regularity(m, 100);
  EXPECT_DOUBLE_EQ(r.eta_hat, 0.5);
  EXPECT_TRUE(r.lattice_ok);
}

TEST(CheckRegularity, SubcriticalIsReportedNotThrown) {
  const RegularityReport r = check_regularity(make_bgwp(OffspringSpec::poisson(0.8), 1), 100);
  EXPECT_FALSE(r.supercritical);
}

TEST(SolvePFromMoments, RoundTripsModelI) {
  const Pmf p = solve_p_from_moments(1.0433, 0.3490, 2);
  EXPECT_NEAR(p.at(0), 0.1538, 5e-5);
  EXPECT_NEAR(p.at(1), 0.6491, 5e-5);
  EXPECT_NEAR(p.at(2), 0.1971, 5e-5);
}

TEST(SolvePFromMoments, DeterministicOffspring) {
  const Pmf p = solve_p_from_moments(1.0, 0.0, 2);
  EXPECT_NEAR(p.at(0), 0.0, 1e-15);
  EXPECT_NEAR(p.at(1), 1.0, 1e-15);
  EXPECT_NEAR(p.at(2), 0.0, 1e-15);
}

TEST(SolvePFromMoments, Errors) {
  EXPECT_CBP_ERROR(solve_p_from_moments(2.5, 2.0, 2), ErrorCode::OutsideSimplex);
  EXPECT_CBP_ERROR(solve_p_from_moments(1.0433, 0.349, 3), ErrorCode::Unidentifiable);
  EXPECT_CBP_ERROR(solve_p_from_moments(-1.0, 0.349, 2), ErrorCode::InvalidArgument);
}

TEST(SolvePFromMoments, ClampsNearTheBoundary) {
  // The unclamped solution has p0 = -5e-11.
  const double m = 1.5;
  const double var = 0.25 - 1e-10;
  const Pmf p = solve_p_from_moments(m, var, 2);
  EXPECT_GE(p.at(0), 0.0);
  EXPECT_NEAR(p.at(1) + p.at(0) + p.at(2), 1.0, 1e-12);
}

TEST(GeometricGrid, EndpointsAndMonotone) {
  const auto g = geometric_grid(16, 4096, 9);
  EXPECT_EQ(g.front(), 16);
  EXPECT_EQ(g.back(), 4096);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

}  // namespace
}  // namespace cbp
