#include "cbp/trajectory_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "cbp/error.hpp"
#include "cbp/model_json.hpp"
#include "cbp/numeric_format.hpp"

namespace cbp {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const bool with_phi = traj.progenitors.has_value();
  out << (with_phi ? "generation,size,progenitors\n" : "generation,size\n");
  for (std::size_t k = 0; k < traj.sizes.size(); ++k) {
    out << k << ',' << traj.sizes[k];
    if (with_phi) {
      out << ',';
      if (k < traj.progenitors->size()) out << (*traj.progenitors)[k];
    }
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> phi;
  bool has_phi = false;
  int columns = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '#') continue;
    auto cells = split_csv(line);
    if (columns < 0) {
      columns = static_cast<int>(cells.size());
      bool header = false;
      try {
        parse_int(cells.front());
      } catch (const Error&) {
        header = true;
      }
      if (header) {
        has_phi = columns >= 3;
        continue;
      }
      has_phi = columns >= 3;
    }
    const auto where = " on line " + std::to_string(line_no);
    try {
      if (columns == 1) {
        sizes.push_back(parse_int(cells.at(0)));
        continue;
      }
      if (static_cast<int>(cells.size()) < 2) fail(ErrorCode::Io, "expected generation,size" + where);
      const auto gen = parse_int(cells[0]);
      if (gen != static_cast<std::int64_t>(sizes.size())) {
        fail(ErrorCode::Io, "generations must be 0,1,2,... in order" + where);
      }
      sizes.push_back(parse_int(cells[1]));
      if (has_phi && cells.size() >= 3 && !is_blank(cells[2])) phi.push_back(parse_int(cells[2]));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Io) throw;
      fail(ErrorCode::Io, std::string(e.what()) + where);
    }
  }
  if (sizes.empty()) fail(ErrorCode::Io, "trajectory CSV holds no sizes");
  if (has_phi) {
    if (phi.size() + 1 != sizes.size()) {
      fail(ErrorCode::Io, "progenitor column must be filled for every generation but the last");
    }
    return make_trajectory(std::move(sizes), std::move(phi));
  }
  return make_trajectory(std::move(sizes));
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p += ".meta.json";
  return p;
}

nlohmann::json trajectory_meta(const Trajectory& traj, const CbpModel* model, const std::string& created) {
  nlohmann::json meta{{"schema", "cbp-trajectory-meta/v1"},
                      {"seed", traj.seed},
                      {"model_id", traj.model_id},
                      {"generations", traj.generations()},
                      {"extinct", traj.extinct},
                      {"progenitors_observed", traj.progenitors.has_value()}};
  meta["truncated_at"] = traj.truncated_at ? nlohmann::json(*traj.truncated_at) : nlohmann::json(nullptr);
  if (model) meta["model"] = model_to_json(*model);
  if (!created.empty()) meta["created"] = created;
  return meta;
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& csv, const CbpModel* model,
                     const std::string& created) {
  {
    std::ofstream out(csv);
    if (!out) fail(ErrorCode::Io, "cannot write " + csv.string());
    write_trajectory_csv(out, traj);
  }
  if (!created.empty()) {
    std::ofstream out(meta_path_for(csv));
    if (!out) fail(ErrorCode::Io, "cannot write " + meta_path_for(csv).string());
    out << trajectory_meta(traj, model, created).dump(2) << "\n";
  }
}

Trajectory load_trajectory(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) fail(ErrorCode::Io, "cannot open " + csv.string());
  Trajectory traj = read_trajectory_csv(in);
  const auto meta_file = meta_path_for(csv);
  if (std::filesystem::exists(meta_file)) {
    const auto meta = read_json_file(meta_file);
    if (meta.contains("seed") && meta["seed"].is_number_unsigned()) traj.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("model_id") && meta["model_id"].is_string()) traj.model_id = meta["model_id"];
    if (meta.contains("truncated_at") && meta["truncated_at"].is_number_integer()) {
      traj.truncated_at = meta["truncated_at"].get<std::int64_t>();
    }
  }
  return traj;
}

}  // namespace cbp
