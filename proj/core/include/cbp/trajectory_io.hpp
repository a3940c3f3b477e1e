#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "cbp/simulate.hpp"

namespace cbp {

/// Header `generation,size[,progenitors]`, one row per generation. The
/// progenitor cell of the final row is left empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Accepts the format above, a `generation,size` file, or a single column of
/// sizes (optionally headed). Lines starting with '#' are ignored.
Trajectory read_trajectory_csv(std::istream& in);

/// Sidecar path used for trajectory metadata: `<csv>.meta.json`.
std::filesystem::path meta_path_for(const std::filesystem::path& csv);

nlohmann::json trajectory_meta(const Trajectory& traj, const CbpModel* model, const std::string& created);

/// Writes the CSV and, when `created` is non-empty, the metadata sidecar.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& csv, const CbpModel* model = nullptr,
                     const std::string& created = {});

/// Reads the CSV and, if present, restores seed/model_id/truncation from the sidecar.
Trajectory load_trajectory(const std::filesystem::path& csv);

}  // namespace cbp
