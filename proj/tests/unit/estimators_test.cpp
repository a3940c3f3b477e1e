#include <gtest/gtest.h>

#include <cmath>

#include "cbp/estimators.hpp"
#include "cbp/simulate.hpp"
#include "expect_error.hpp"

namespace cbp {
namespace {

Trajectory sizes(std::vector<std::int64_t> z) { return make_trajectory(std::move(z)); }
Trajectory with_progenitors(std::vector<std::int64_t> z, std::vector<std::int64_t> phi) {
  return make_trajectory(std::move(z), std::move(phi));
}

TEST(BgwpMean, HandExamples) {
  EXPECT_DOUBLE_EQ(bgwp_mean(sizes({1, 2, 4, 8})).value, 2.0);
  EXPECT_DOUBLE_EQ(bgwp_mean(sizes({5, 5, 5})).value, 1.0);
  EXPECT_DOUBLE_EQ(bgwp_mean(sizes({2, 3, 7, 9})).value, 19.0 / 12.0);
  EXPECT_EQ(bgwp_mean(sizes({2, 3, 7, 9})).n_terms, 3);
}

TEST(BgwpMean, AllZeroDenominatorThrows) {
  EXPECT_CBP_ERROR(bgwp_mean(sizes({0, 0})), ErrorCode::AllZero);
}

TEST(KnownControl, HandExamples) {
  const auto a = known_control_estimates(sizes({1, 2, 6}), ControlSpec::scaled(2.0));
  EXPECT_DOUBLE_EQ(a.m_hat.value, 1.25);
  EXPECT_EQ(a.m_hat.inputs_used, InputsUsed::SizesAndKnownControl);
  const auto b = known_control_estimates(sizes({1, 2, 4}), ControlSpec::identity(), 2.0);
  EXPECT_DOUBLE_EQ(b.sigma2.value, 0.0);
  EXPECT_EQ(b.sigma2.name, "sigma2_bar");
  const auto c = known_control_estimates(sizes({1, 2, 5}), ControlSpec::identity(), 2.0);
  EXPECT_DOUBLE_EQ(c.sigma2.value, 0.25);
}

TEST(KnownControl, HatUsesFinalRatioAndFlagsNegatives) {
  // m is replaced by 4/2 = 2, both residuals vanish and only the -m^2 nu^2
  // correction of the Poisson(z) control remains.
  const auto r = known_control_estimates(sizes({1, 2, 4}), ControlSpec::poisson_linear(1.0));
  EXPECT_EQ(r.sigma2.name, "sigma2_hat");
  EXPECT_DOUBLE_EQ(r.sigma2.value, -4.0);
  EXPECT_TRUE(r.sigma2.negative);
}

TEST(KnownControl, HatEqualsBarWhenTruthSubstituted) {
  const CbpModel m{OffspringSpec::poisson(1.2), ControlSpec::poisson_linear(1.1), 20, ""};
  const Trajectory t = simulate_trajectory(m, 30, 17);
  const double m_final = static_cast<double>(t.sizes.back()) / (1.1 * static_cast<double>(t.sizes[t.sizes.size() - 2]));
  const auto hat = known_control_estimates(t, m.control);
  const auto bar = known_control_estimates(t, m.control, m_final);
  EXPECT_DOUBLE_EQ(hat.sigma2.value, bar.sigma2.value);
}

TEST(LinearGrowth, HandExamples) {
  EXPECT_DOUBLE_EQ(linear_growth_estimates(sizes({2, 4, 8})).g_hat.value, 2.0);
  EXPECT_DOUBLE_EQ(linear_growth_estimates(sizes({1, 2, 4}), 2.0).h.value, 0.0);
  EXPECT_DOUBLE_EQ(linear_growth_estimates(sizes({4, 9, 16})).g_hat.value, 145.0 / 72.0);
  EXPECT_EQ(linear_growth_estimates(sizes({1, 2, 4}), 2.0).h.name, "h_bar");
}

TEST(LinearGrowth, ExtinctionTermsExcluded) {
  const auto r = linear_growth_estimates(sizes({2, 4, 0, 0}), 2.0);
  EXPECT_EQ(r.g_hat.n_terms, 2);
  EXPECT_DOUBLE_EQ(r.g_hat.value, (2.0 + 0.0) / 2.0);
  EXPECT_TRUE(std::isfinite(r.h.value));
}

TEST(Progenitor, HandExamples) {
  const auto a = progenitor_estimates(with_progenitors({2, 6, 10}, {3, 5}));
  EXPECT_DOUBLE_EQ(a.m_hat.value, 2.0);
  EXPECT_DOUBLE_EQ(a.alpha_hat.value, 7.0 / 6.0);
  EXPECT_DOUBLE_EQ(progenitor_estimates(with_progenitors({1, 2, 4}, {1, 2}), 2.0).sigma2.value, 0.0);
  EXPECT_DOUBLE_EQ(progenitor_estimates(with_progenitors({2, 6}, {4}), std::nullopt, 2.0).beta.value, 0.0);
}

TEST(Progenitor, MissingProgenitorsThrows) {
  EXPECT_CBP_ERROR(progenitor_estimates(sizes({1, 2, 3})), ErrorCode::MissingProgenitors);
}

TEST(Progenitor, IdentityControlMatchesKnownControlTermByTerm) {
  const CbpModel m{OffspringSpec::finite({0.1538, 0.6491, 0.1971}), ControlSpec::identity(), 10, ""};
  const Trajectory t = simulate_trajectory(m, 40, 2, true);
  const auto prog = progenitor_estimates(t);
  const auto known = known_control_estimates(t, ControlSpec::identity());
  EXPECT_DOUBLE_EQ(prog.m_hat.value, known.m_hat.value);
  EXPECT_EQ(prog.m_hat.n_terms, known.m_hat.n_terms);
  EXPECT_DOUBLE_EQ(prog.alpha_hat.value, 1.0);
}

TEST(PowerDrift, HandExamples) {
  EXPECT_DOUBLE_EQ(power_drift_estimate(sizes({16, 40}), 2.0, 0.75).value, 0.5);
  EXPECT_DOUBLE_EQ(power_drift_estimate(sizes({3, 7, 14}), 2.0, 0.75).value, 0.0);
  EXPECT_NEAR(power_drift_estimate(sizes({10, 12}), 1.0, 1.0).value, 0.2, 1e-15);
}

TEST(PowerDrift, UsesOnlyTheFinalTransition) {
  EXPECT_DOUBLE_EQ(power_drift_estimate(sizes({1, 100, 16, 40}), 2.0, 0.75).value, 0.5);
  const auto avg = power_drift_estimate_avg(sizes({16, 40, 80}), 2.0, 0.75);
  EXPECT_EQ(avg.n_terms, 2);
  EXPECT_DOUBLE_EQ(avg.value, 0.25);
}

TEST(LinearGrowth, HatNeedsLivingPenultimateGeneration) {
  EXPECT_CBP_ERROR(linear_growth_estimates(sizes({2, 4, 0, 0})), ErrorCode::ZeroPopulation);
}

TEST(PowerDrift, ZeroPreviousSizeThrows) {
  EXPECT_CBP_ERROR(power_drift_estimate(sizes({3, 0, 0}), 2.0, 0.75), ErrorCode::ZeroPopulation);
}

TEST(DerivedControl, FormulaExamples) {
  const auto a = derived_control_params(2.0, 4.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.alpha_hat, 2.0);
  EXPECT_DOUBLE_EQ(a.beta_hat, 2.0);
  const auto b = derived_control_params(1.7, 2.3, 1.7, 2.3);
  EXPECT_DOUBLE_EQ(b.alpha_hat, 1.0);
  EXPECT_NEAR(b.beta_hat, 0.0, 1e-15);
  const auto c = derived_control_params(1.05, 4.0, 1.05, 1.0);
  EXPECT_NEAR(c.alpha_hat, 1.0, 1e-15);
  EXPECT_NEAR(c.beta_hat, (1.05 * 4.0 - 1.05) / std::pow(1.05, 3), 1e-12);
  EXPECT_NEAR(c.beta_hat, 2.721, 5e-4);
}

TEST(Consistency, LinearPoissonControlAtScale) {
  const CbpModel m{OffspringSpec::poisson(1.0), ControlSpec::poisson_linear(1.05), 100, ""};
  double g = 0.0, h = 0.0;
  int used = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Trajectory t = simulate_trajectory(m, 300, derive_key(2718, s));
    if (t.extinct || t.truncated_at) continue;
    const auto r = linear_growth_estimates(t);
    g += r.g_hat.value;
    h += r.h.value;
    ++used;
  }
  ASSERT_GT(used, 10);
  EXPECT_LT(std::abs(g / used - 1.05), 0.02);
  EXPECT_LT(std::abs(h / used - 2.1) / 2.1, 0.15);
}

}  // namespace
}  // namespace cbp
