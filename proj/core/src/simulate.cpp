#include "cbp/simulate.hpp"

#include <algorithm>

#include "cbp/error.hpp"
#include "cbp/parallel.hpp"

namespace cbp {

namespace {

// Per-progenitor ceiling on offspring, used to stop before a draw whose
// result cannot be represented.
double offspring_ceiling(const OffspringSpec& offspring) {
  const auto max = offspring.max_value();
  return max ? static_cast<double>(*max) : 2.0 * offspring_moments(offspring).mean + 1.0;
}

}  // namespace

Trajectory make_trajectory(std::vector<std::int64_t> sizes, std::optional<std::vector<std::int64_t>> progenitors) {
  require(!sizes.empty(), ErrorCode::InvalidArgument, "trajectory needs at least one size");
  for (auto z : sizes) require(z >= 0, ErrorCode::InvalidArgument, "population sizes must be non-negative");
  if (progenitors) {
    require(progenitors->size() + 1 == sizes.size() || progenitors->size() == sizes.size(),
            ErrorCode::InvalidArgument, "progenitor count must be one per transition");
    for (auto u : *progenitors) require(u >= 0, ErrorCode::InvalidArgument, "progenitor counts must be non-negative");
  }
  Trajectory t;
  t.extinct = std::find(sizes.begin(), sizes.end(), 0) != sizes.end();
  t.sizes = std::move(sizes);
  t.progenitors = std::move(progenitors);
  return t;
}

Trajectory simulate_trajectory(const CbpModel& model, std::int64_t n, std::uint64_t seed, bool observe_progenitors,
                               std::int64_t pop_cap) {
  require(n >= 1, ErrorCode::InvalidArgument, "trajectory length must be at least 1");
  require(model.z0 >= 1, ErrorCode::InvalidArgument, "z0 must be positive");
  require(pop_cap >= model.z0, ErrorCode::InvalidArgument, "pop_cap must be at least z0");

  Trajectory traj;
  traj.seed = seed;
  traj.model_id = model.id.empty() ? describe(model) : model.id;
  traj.sizes.reserve(static_cast<std::size_t>(n) + 1);
  traj.sizes.push_back(model.z0);
  if (observe_progenitors) traj.progenitors.emplace().reserve(static_cast<std::size_t>(n));

  constexpr double kRepresentable = 0x1.0p62;
  const double ceiling = offspring_ceiling(model.offspring);
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t z = traj.sizes.back();
    CounterRng rng = generation_stream(seed, static_cast<std::uint64_t>(k));
    const std::int64_t u = sample_control(model.control, z, rng);
    if (ceiling * static_cast<double>(u) > kRepresentable) {
      traj.truncated_at = k;
      break;
    }
    const std::int64_t next = sample_offspring_sum(model.offspring, u, rng);
    if (next > pop_cap) {
      traj.truncated_at = k;
      break;
    }
    if (observe_progenitors) traj.progenitors->push_back(u);
    traj.sizes.push_back(next);
    if (next == 0) traj.extinct = true;
  }
  return traj;
}

Trajectory simulate_bgwp(const OffspringSpec& offspring, std::int64_t z0, std::int64_t n, std::uint64_t seed) {
  return simulate_trajectory(make_bgwp(offspring, z0), n, seed);
}

std::vector<Trajectory> batch_simulate(const CbpModel& model, std::int64_t n, const std::vector<std::uint64_t>& seeds,
                                       bool observe_progenitors, std::int64_t pop_cap, unsigned threads) {
  std::vector<Trajectory> out(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    out[i] = simulate_trajectory(model, n, seeds[i], observe_progenitors, pop_cap);
  });
  return out;
}

}  // namespace cbp
