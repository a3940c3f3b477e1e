#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cbp/model.hpp"

namespace cbp {

inline constexpr std::string_view kModelSchema = "cbp-model/v1";

/// Schema helpers shared by every JSON reader in the toolkit. Violations throw
/// SchemaViolation with the JSON pointer of the offending node in the message.
namespace json_schema {

const nlohmann::json& object(const nlohmann::json& node, const std::string& path);
void allow_only(const nlohmann::json& node, const std::string& path, std::initializer_list<std::string_view> keys);
const nlohmann::json& field(const nlohmann::json& node, const std::string& path, std::string_view key);
double number(const nlohmann::json& node, const std::string& path);
std::int64_t integer(const nlohmann::json& node, const std::string& path);
bool boolean(const nlohmann::json& node, const std::string& path);
std::string string(const nlohmann::json& node, const std::string& path);

}  // namespace json_schema

nlohmann::json offspring_to_json(const OffspringSpec& spec);
OffspringSpec offspring_from_json(const nlohmann::json& node, const std::string& path = "/offspring");

nlohmann::json control_to_json(const ControlSpec& control);
ControlSpec control_from_json(const nlohmann::json& node, const std::string& path = "/control");

nlohmann::json model_to_json(const CbpModel& model);
CbpModel model_from_json(const nlohmann::json& node);

nlohmann::json read_json_file(const std::filesystem::path& path);
CbpModel load_model(const std::filesystem::path& path);
void save_model(const CbpModel& model, const std::filesystem::path& path);

}  // namespace cbp
