#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbp/model.hpp"

namespace cbp {

enum class Scenario { KnownControl, UnknownControl, ObservedProgenitors };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

struct Evidence {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool met = false;
  std::string detail;
};

struct IdentifiabilityVerdict {
  Scenario scenario = Scenario::KnownControl;
  bool conditions_met = false;
  std::vector<Evidence> evidence;
  std::string conclusion;
};

/// Powers of two from 2^4 to 2^12.
std::vector<std::int64_t> default_exponent_grid();

/// Checks whether the pair satisfies the sufficient conditions under which two
/// processes with different parameters rule out weakly consistent estimation.
/// Growth exponents of moment differences are fitted on `grid` and the
/// threshold r < 1 is tested as r_hat + 2 SE < 1.
IdentifiabilityVerdict identifiability_check(const CbpModel& a, const CbpModel& b, Scenario scenario,
                                             const std::vector<std::int64_t>& grid = default_exponent_grid());

nlohmann::json verdict_to_json(const IdentifiabilityVerdict& verdict);

}  // namespace cbp
