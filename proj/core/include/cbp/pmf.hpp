#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cbp {

/// Probability mass function on a contiguous integer window
/// [offset, offset + size) plus `tail_mass`, the certified probability that
/// lies outside the stored window.
///
/// Invariants (checked on construction):
///   * every stored probability is finite and >= 0, tail_mass >= 0;
///   * stored mass + tail_mass is within 1e-12 of 1;
///   * the first and last stored probabilities are > 0 unless size() == 1.
class Pmf {
 public:
  static constexpr double kMassTolerance = 1e-12;
  /// Edge entries below this are folded into tail_mass by from_raw().
  static constexpr double kEdgeFloor = 1e-300;

  Pmf();
  Pmf(std::int64_t offset, std::vector<double> probs, double tail_mass = 0.0);

  static Pmf point_mass(std::int64_t k);

  /// Builds a Pmf from unnormalised numerical output. Negative values with
  /// magnitude below `negative_tolerance` are clamped to zero, edge entries
  /// below `edge_floor` are moved into the tail, and if the stored mass exceeds
  /// one by more than kMassTolerance the stored part is rescaled.
  static Pmf from_raw(std::int64_t offset, std::vector<double> values, double tail_mass,
                      double edge_floor = kEdgeFloor, double negative_tolerance = 0.0);

  std::int64_t offset() const noexcept { return offset_; }
  std::int64_t min_support() const noexcept { return offset_; }
  std::int64_t max_support() const noexcept {
    return offset_ + static_cast<std::int64_t>(probs_.size()) - 1;
  }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double tail_mass() const noexcept { return tail_mass_; }
  double stored_mass() const noexcept;

  /// P(X = k); zero outside the stored window.
  double at(std::int64_t k) const noexcept;

  bool operator==(const Pmf&) const = default;

 private:
  std::int64_t offset_;
  std::vector<double> probs_;
  double tail_mass_;
};

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  double third_central = 0.0;
  double third_abs_central = 0.0;
  double fourth_central = 0.0;
  /// gcd of the differences between support points carrying positive mass.
  /// A point mass reports 1.
  std::int64_t lattice = 1;
};

/// Moments by direct summation over the stored support. Throws TailTooHeavy
/// when the uncertified tail exceeds `tail_tolerance`.
MomentSummary pmf_moments(const Pmf& pmf, double tail_tolerance = 1e-10);

std::int64_t lattice_span(const Pmf& pmf);

/// Linear convolution of two pmfs (law of X + Y for independent X, Y).
Pmf convolve(const Pmf& a, const Pmf& b);

/// Default cap on the number of stored points produced by convolve_power.
inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 24;

/// n-fold self-convolution by binary powering. Throws SupportOverflow when the
/// result would hold more than `support_cap` points.
Pmf convolve_power(const Pmf& pmf, std::int64_t n, std::size_t support_cap = kDefaultSupportCap);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values) noexcept;

}  // namespace cbp
