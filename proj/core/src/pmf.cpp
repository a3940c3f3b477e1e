#include "cbp/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cbp/error.hpp"

namespace cbp {

double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

Pmf::Pmf() : offset_(0), probs_{1.0}, tail_mass_(0.0) {}

Pmf::Pmf(std::int64_t offset, std::vector<double> probs, double tail_mass)
    : offset_(offset), probs_(std::move(probs)), tail_mass_(tail_mass) {
  require(!probs_.empty(), ErrorCode::InvalidArgument, "pmf needs at least one stored probability");
  require(std::isfinite(tail_mass_) && tail_mass_ >= 0.0, ErrorCode::InvalidArgument,
          "tail mass must be finite and non-negative");
  for (double p : probs_) {
    require(std::isfinite(p) && p >= 0.0, ErrorCode::InvalidArgument,
            "probabilities must be finite and non-negative");
  }
  if (probs_.size() > 1) {
    require(probs_.front() > 0.0 && probs_.back() > 0.0, ErrorCode::InvalidArgument,
            "first and last stored probabilities must be positive");
  }
  const double total = compensated_sum(probs_) + tail_mass_;
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorCode::InvalidArgument,
          "pmf mass " + std::to_string(total) + " is not within 1e-12 of one");
}

Pmf Pmf::point_mass(std::int64_t k) { return Pmf(k, {1.0}, 0.0); }

Pmf Pmf::from_raw(std::int64_t offset, std::vector<double> values, double tail_mass,
                  double edge_floor, double negative_tolerance) {
  for (double& v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericalInstability, "non-finite probability");
    if (v < 0.0) {
      if (-v > negative_tolerance) {
        fail(ErrorCode::NumericalInstability, "negative probability " + std::to_string(v));
      }
      v = 0.0;
    }
  }
  std::size_t lo = 0;
  std::size_t hi = values.size();
  double dropped = 0.0;
  while (lo < hi && values[lo] <= edge_floor) dropped += values[lo++];
  while (hi > lo && values[hi - 1] <= edge_floor) dropped += values[--hi];
  if (lo == hi) fail(ErrorCode::NumericalInstability, "pmf has no mass above the edge floor");

  std::vector<double> kept(values.begin() + static_cast<std::ptrdiff_t>(lo),
                           values.begin() + static_cast<std::ptrdiff_t>(hi));
  double stored = compensated_sum(kept);
  double tail = std::max(0.0, tail_mass) + dropped;
  if (stored > 1.0 + kMassTolerance / 2) {
    for (double& v : kept) v /= stored;
    stored = 1.0;
  }
  if (std::abs(stored + tail - 1.0) > kMassTolerance / 2) tail = std::max(0.0, 1.0 - stored);
  return Pmf(offset + static_cast<std::int64_t>(lo), std::move(kept), tail);
}

double Pmf::stored_mass() const noexcept { return compensated_sum(probs_); }

double Pmf::at(std::int64_t k) const noexcept {
  if (k < offset_) return 0.0;
  const auto idx = static_cast<std::uint64_t>(k - offset_);
  return idx < probs_.size() ? probs_[idx] : 0.0;
}

std::int64_t lattice_span(const Pmf& pmf) {
  std::int64_t g = 0;
  const auto probs = pmf.probs();
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > 0.0) g = std::gcd(g, static_cast<std::int64_t>(i));
  }
  return g == 0 ? 1 : g;
}

MomentSummary pmf_moments(const Pmf& pmf, double tail_tolerance) {
  if (pmf.tail_mass() > tail_tolerance) {
    fail(ErrorCode::TailTooHeavy, "tail mass " + std::to_string(pmf.tail_mass()) +
                                      " exceeds tolerance " + std::to_string(tail_tolerance));
  }
  const auto probs = pmf.probs();
  const double base = static_cast<double>(pmf.offset());
  std::vector<double> terms(probs.size());

  for (std::size_t i = 0; i < probs.size(); ++i) terms[i] = probs[i] * static_cast<double>(i);
  const double mean = base + compensated_sum(terms);

  auto central = [&](auto power) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      terms[i] = probs[i] * power(base + static_cast<double>(i) - mean);
    }
    return compensated_sum(terms);
  };

  MomentSummary out;
  out.mean = mean;
  out.variance = central([](double d) { return d * d; });
  out.third_central = central([](double d) { return d * d * d; });
  out.third_abs_central = central([](double d) { return std::abs(d * d * d); });
  out.fourth_central = central([](double d) { return d * d * d * d; });
  out.lattice = lattice_span(pmf);
  return out;
}

Pmf convolve(const Pmf& a, const Pmf& b) {
  const auto pa = a.probs();
  const auto pb = b.probs();
  const auto& outer = pa.size() >= pb.size() ? pa : pb;
  const auto& inner = pa.size() >= pb.size() ? pb : pa;
  std::vector<double> out(pa.size() + pb.size() - 1, 0.0);
  for (std::size_t j = 0; j < inner.size(); ++j) {
    const double w = inner[j];
    if (w == 0.0) continue;
    double* dst = out.data() + j;
    for (std::size_t i = 0; i < outer.size(); ++i) dst[i] += w * outer[i];
  }
  const double tail = a.tail_mass() + b.tail_mass() - a.tail_mass() * b.tail_mass();
  return Pmf::from_raw(a.offset() + b.offset(), std::move(out), tail);
}

Pmf convolve_power(const Pmf& pmf, std::int64_t n, std::size_t support_cap) {
  require(n >= 0, ErrorCode::InvalidArgument, "convolution power must be non-negative");
  if (n == 0) return Pmf::point_mass(0);
  const auto width = static_cast<double>(pmf.size() - 1);
  if (width * static_cast<double>(n) + 1.0 > static_cast<double>(support_cap)) {
    fail(ErrorCode::SupportOverflow, std::to_string(n) + "-fold convolution exceeds the support cap of " +
                                         std::to_string(support_cap) + " points");
  }
  Pmf result = Pmf::point_mass(0);
  Pmf base = pmf;
  bool first = true;
  for (std::int64_t k = n; k > 0; k >>= 1) {
    if (k & 1) {
      result = first ? base : convolve(result, base);
      first = false;
    }
    if (k > 1) base = convolve(base, base);
  }
  return result;
}

}  // namespace cbp
