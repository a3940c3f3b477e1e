#include "cbp/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbp/error.hpp"

namespace cbp {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double diameter(const std::vector<std::vector<double>>& simplex) {
  double d = 0.0;
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    for (std::size_t j = i + 1; j < simplex.size(); ++j) {
      for (std::size_t k = 0; k < simplex[i].size(); ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[j][k]));
    }
  }
  return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  require(!x0.empty(), ErrorCode::InvalidArgument, "Nelder-Mead needs at least one dimension");
  const std::size_t n = x0.size();
  std::int64_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  std::vector<double> trial(n);
  std::vector<double> second(n);
  auto point_along = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (centroid[k] - worst[k]);
  };

  bool converged = false;
  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable on ties so the result does not depend on floating noise in sort order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> sorted_simplex(n + 1);
    std::vector<double> sorted_values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      sorted_simplex[i] = std::move(simplex[order[i]]);
      sorted_values[i] = values[order[i]];
    }
    simplex = std::move(sorted_simplex);
    values = std::move(sorted_values);

    if (diameter(simplex) < options.diameter_tol) {
      converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    const auto& worst = simplex[n];
    point_along(kReflect, trial, worst);
    const double f_reflect = eval(trial);

    if (f_reflect < values[0]) {
      point_along(kExpand, second, worst);
      const double f_expand = eval(second);
      if (f_expand < f_reflect) {
        simplex[n] = second;
        values[n] = f_expand;
      } else {
        simplex[n] = trial;
        values[n] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[n - 1]) {
      simplex[n] = trial;
      values[n] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < values[n];
    point_along(outside ? kContract : -kContract, second, worst);
    const double f_contract = eval(second);
    if (f_contract < (outside ? f_reflect : values[n])) {
      simplex[n] = second;
      values[n] = f_contract;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + kShrink * (simplex[i][k] - simplex[0][k]);
      values[i] = eval(simplex[i]);
    }
  }
  return {simplex[0], values[0], converged, evals};
}

}  // namespace cbp
