#include "cbp/normal.hpp"

#include <cmath>
#include <vector>

#include "cbp/error.hpp"

namespace cbp {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_interval(double a, double b) noexcept {
  if (a >= 0.0) {
    // Upper tail: Q(a) - Q(b).
    return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
  }
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - 0.5 * std::erfc(b / std::sqrt(2.0));
}

double dn_pmf(const DiscretisedNormal& dn, std::int64_t k) {
  require(dn.variance > 0.0, ErrorCode::InvalidArgument, "discretised normal needs positive variance");
  const double sd = std::sqrt(dn.variance);
  const double x = static_cast<double>(k) - dn.mean;
  return normal_interval((x - 0.5) / sd, (x + 0.5) / sd);
}

Pmf dn_render(const DiscretisedNormal& dn) {
  require(dn.variance >= 0.0 && std::isfinite(dn.mean), ErrorCode::InvalidArgument,
          "discretised normal needs finite mean and non-negative variance");
  if (dn.variance == 0.0) return Pmf::point_mass(static_cast<std::int64_t>(std::llround(dn.mean)));
  const double sd = std::sqrt(dn.variance);
  const auto lo = static_cast<std::int64_t>(std::floor(dn.mean - kDnCutoffSds * sd));
  const auto hi = static_cast<std::int64_t>(std::ceil(dn.mean + kDnCutoffSds * sd));
  std::vector<double> probs(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t k = lo; k <= hi; ++k) probs[static_cast<std::size_t>(k - lo)] = dn_pmf(dn, k);
  const double below = normal_cdf((static_cast<double>(lo) - 0.5 - dn.mean) / sd);
  const double above = 0.5 * std::erfc((static_cast<double>(hi) + 0.5 - dn.mean) / sd / std::sqrt(2.0));
  return Pmf::from_raw(lo, std::move(probs), below + above, 0.0);
}

}  // namespace cbp
