#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbp/likelihood.hpp"
#include "cbp/model.hpp"
#include "cbp/normal.hpp"
#include "cbp/pmf.hpp"

namespace cbp {

struct TvdValue {
  double value = 0.0;
  /// Half the combined uncertified tail mass.
  double error_bound = 0.0;
};

/// (1/2) sum_k |p_k - q_k| over the union of stored supports.
TvdValue tvd_exact(const Pmf& p, const Pmf& q);

struct BoundReport {
  std::optional<double> exact_tvd;
  double bound_value = 0.0;
  std::string bound_name;
  std::map<std::string, double> inputs;
};

/// 3|s2 - s2'| / (2 max(s2, s2')) + |m - m'| / (2 max(s, s')) for two
/// discretised normals; the exact distance is attached on request.
BoundReport dn_tvd_bound(double m, double s2, double m_other, double s2_other, bool with_exact = false);

/// 8 (gamma + 3 m s2 + m^3), which dominates E|X - m|^3 for X on N_0.
double third_abs_moment_bound(double m, double s2, double gamma);

/// TVD between the laws of X and X + 1.
double lattice_smoothing_tvd(const Pmf& pmf);

/// Stein-type bound on TVD(S_n, DN(n mu, n s2)) for S_n a sum of n i.i.d.
/// copies of `increment`:
///   sqrt(2/pi) (3 rho / s2 + 2) (1 + 4 (n-1)(1 - ||L_X - L_{X+1}||))^{-1/2}
///   + (5 + 3 sqrt(pi/8)) rho / (sqrt(n) s^3) + 1 / (2 sqrt(2 pi n) s).
/// Throws DegenerateIncrement when the increment has zero variance.
BoundReport stein_dn_bound(const Pmf& increment, std::int64_t n, bool with_exact = false);

/// E[(Z_1 - m eps(z))^4 | Z_0 = z] from offspring and control moments:
///   m^4 k4_phi + 6 s2 m^2 iota + (6 s2 m^2 eps + 4 gamma m + 3 s2^2) nu^2
///   + 3 s2^2 eps^2 + (k4 - 3 s2^2) eps.
double fourth_central_next_step(const CbpModel& model, std::int64_t z);

enum class TvdMethod { Exact, Bounded };

/// TVD between the one-step laws of two models started at z. The bounded
/// method chains Stein bounds for each model's compound increment with the
/// DN-vs-DN bound, and needs both controls to be linearly divisible.
BoundReport one_step_tvd(const CbpModel& a, const CbpModel& b, std::int64_t z, TvdMethod method = TvdMethod::Exact);

/// TVD between the joint laws of (phi(z), Z_1) under two models.
double joint_progenitor_tvd(const CbpModel& a, const CbpModel& b, std::int64_t z);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t points = 0;
  bool degenerate = false;
};

/// Least squares of log y on log x over points with y > 0. Fewer than two
/// usable points gives a degenerate fit with NaN slope. The slope standard
/// error comes from a fixed-seed residual bootstrap with 200 resamples.
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct DecayScan {
  std::vector<std::int64_t> z;
  std::vector<double> tvd;
  std::vector<double> bound;  // empty unless bounds were requested
  LogLogFit fit;
};

struct DecayScanOptions {
  bool with_bounds = false;
  bool joint_progenitors = false;
  unsigned threads = 0;
};

DecayScan decay_scan(const CbpModel& a, const CbpModel& b, const std::vector<std::int64_t>& z_grid,
                     const DecayScanOptions& options = {});

struct MultiStepBound {
  double value = 0.0;  // K_k(z)
  double limit = 0.0;  // lim_{k -> inf} K_k(z)
};

/// Iterates K_1(z) = s z^{-q},
///   K_{j+1}(z) = s z^{-q} + (a s2 + b m^2) / ((1 - alpha)^2 t^2 z) + K_j(alpha t z),
/// and evaluates the k -> infinity limit in closed form. Throws InvalidMixing
/// unless t > 1 and 1/t < alpha < 1.
MultiStepBound multi_step_bound(double s, double q, double a, double b, double m, double s2, double t,
                                double alpha, std::int64_t k, double z);

struct PowerTerm {
  double c = 0.0;
  double q = 0.0;
};

/// sum_i c_i / ((1 - growth^{-q_i}) z^{q_i}): the limit of sum_j f(growth^j z)
/// for f(z) = sum_i c_i z^{-q_i}.
double geometric_series_limit(const std::vector<PowerTerm>& terms, double growth, double z);

}  // namespace cbp
