#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cbp {

struct NelderMeadOptions {
  /// Converged once every pair of vertices is within this sup-norm distance.
  double diameter_tol = 1e-8;
  std::int64_t max_evals = 20000;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  std::int64_t evals = 0;
};

/// Minimises f from x0. Non-finite function values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace cbp
