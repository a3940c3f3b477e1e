#pragma once

#include <cstdint>

#include "cbp/pmf.hpp"

namespace cbp {

/// Standard normal CDF via erfc (accurate to a few ulps in both tails).
double normal_cdf(double x) noexcept;

/// P(a < N(0,1) <= b), computed on the side of zero that avoids cancellation.
double normal_interval(double a, double b) noexcept;

/// Integer law with P(W = k) = Phi((k + 1/2 - mean)/sd) - Phi((k - 1/2 - mean)/sd).
struct DiscretisedNormal {
  double mean = 0.0;
  double variance = 1.0;
};

double dn_pmf(const DiscretisedNormal& dn, std::int64_t k);

/// Half-width of the rendered window, in standard deviations.
inline constexpr double kDnCutoffSds = 12.0;

/// DN probabilities on [mean - 12 sd, mean + 12 sd]; the excluded mass is
/// recorded as tail. Variance zero renders a point mass at the rounded mean.
Pmf dn_render(const DiscretisedNormal& dn);

}  // namespace cbp
