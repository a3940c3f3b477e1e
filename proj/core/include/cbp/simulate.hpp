#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbp/model.hpp"

namespace cbp {

struct Trajectory {
  std::vector<std::int64_t> sizes;  // Z_0..Z_n
  /// phi(Z_0)..phi(Z_{n-1}) when progenitors were observed.
  std::optional<std::vector<std::int64_t>> progenitors;
  std::uint64_t seed = 0;
  std::string model_id;
  bool extinct = false;
  /// First generation whose size exceeded the population cap; sizes stop one
  /// generation earlier.
  std::optional<std::int64_t> truncated_at;

  std::int64_t generations() const noexcept { return static_cast<std::int64_t>(sizes.size()) - 1; }
  bool operator==(const Trajectory&) const = default;
};

/// Wraps observed data; sets `extinct` from the sizes.
Trajectory make_trajectory(std::vector<std::int64_t> sizes,
                           std::optional<std::vector<std::int64_t>> progenitors = std::nullopt);

inline constexpr std::int64_t kDefaultPopCap = std::int64_t{1} << 62;

/// Generation k draws phi(Z_{k-1}) and then the offspring total from the
/// counter stream derive_key(seed, k), so a path is a pure function of
/// (model, seed) and prefixes of longer runs coincide with shorter runs.
Trajectory simulate_trajectory(const CbpModel& model, std::int64_t n, std::uint64_t seed,
                               bool observe_progenitors = false, std::int64_t pop_cap = kDefaultPopCap);

Trajectory simulate_bgwp(const OffspringSpec& offspring, std::int64_t z0, std::int64_t n, std::uint64_t seed);

std::vector<Trajectory> batch_simulate(const CbpModel& model, std::int64_t n, const std::vector<std::uint64_t>& seeds,
                                       bool observe_progenitors = false, std::int64_t pop_cap = kDefaultPopCap,
                                       unsigned threads = 0);

}  // namespace cbp
