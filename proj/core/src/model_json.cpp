#include "cbp/model_json.hpp"

#include <fstream>

#include "cbp/error.hpp"

namespace cbp {

using nlohmann::json;

namespace json_schema {

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  fail(ErrorCode::SchemaViolation, (path.empty() ? std::string("/") : path) + ": " + what);
}

}  // namespace

const json& object(const json& node, const std::string& path) {
  if (!node.is_object()) violation(path, "expected an object");
  return node;
}

void allow_only(const json& node, const std::string& path, std::initializer_list<std::string_view> keys) {
  object(node, path);
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) violation(path + "/" + key, "unknown field");
  }
}

const json& field(const json& node, const std::string& path, std::string_view key) {
  object(node, path);
  const auto it = node.find(std::string(key));
  if (it == node.end()) violation(path + "/" + std::string(key), "required field missing");
  return *it;
}

double number(const json& node, const std::string& path) {
  if (!node.is_number()) violation(path, "expected a number");
  return node.get<double>();
}

std::int64_t integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) violation(path, "expected an integer");
  return node.get<std::int64_t>();
}

bool boolean(const json& node, const std::string& path) {
  if (!node.is_boolean()) violation(path, "expected a boolean");
  return node.get<bool>();
}

std::string string(const json& node, const std::string& path) {
  if (!node.is_string()) violation(path, "expected a string");
  return node.get<std::string>();
}

}  // namespace json_schema

namespace js = json_schema;

namespace {

template <class Fn>
auto with_path(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::SchemaViolation, path + ": " + e.what());
    throw;
  }
}

const json& params_of(const json& node, const std::string& path) {
  static const json empty = json::object();
  const auto it = node.find("params");
  return it == node.end() ? empty : js::object(*it, path + "/params");
}

}  // namespace

json offspring_to_json(const OffspringSpec& spec) {
  json params = json::object();
  if (const auto* f = std::get_if<FiniteOffspring>(&spec.family())) {
    params["probs"] = f->probs;
    params["offset"] = f->offset;
  } else if (const auto* p = std::get_if<PoissonOffspring>(&spec.family())) {
    params["lambda"] = p->lambda;
  } else if (const auto* b = std::get_if<BinomialOffspring>(&spec.family())) {
    params["n"] = b->trials;
    params["p"] = b->p;
  } else if (const auto* g = std::get_if<GeometricOffspring>(&spec.family())) {
    params["p"] = g->p;
    params["starts_at_one"] = g->starts_at_one;
  } else if (const auto* d = std::get_if<DeterministicOffspring>(&spec.family())) {
    params["k"] = d->value;
  }
  return json{{"family", std::string(spec.family_name())}, {"params", params}};
}

OffspringSpec offspring_from_json(const json& node, const std::string& path) {
  js::allow_only(node, path, {"family", "params"});
  const std::string family = js::string(js::field(node, path, "family"), path + "/family");
  const json& params = params_of(node, path);
  const std::string pp = path + "/params";
  auto num = [&](std::string_view key) { return js::number(js::field(params, pp, key), pp + "/" + std::string(key)); };
  auto integer = [&](std::string_view key) {
    return js::integer(js::field(params, pp, key), pp + "/" + std::string(key));
  };

  return with_path(path, [&]() -> OffspringSpec {
    if (family == "finite") {
      js::allow_only(params, pp, {"probs", "offset"});
      const json& probs = js::field(params, pp, "probs");
      if (!probs.is_array()) fail(ErrorCode::SchemaViolation, pp + "/probs: expected an array");
      std::vector<double> values;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        values.push_back(js::number(probs[i], pp + "/probs/" + std::to_string(i)));
      }
      const std::int64_t offset = params.contains("offset") ? integer("offset") : 0;
      return OffspringSpec::finite(std::move(values), offset);
    }
    if (family == "poisson") {
      js::allow_only(params, pp, {"lambda"});
      return OffspringSpec::poisson(num("lambda"));
    }
    if (family == "binomial") {
      js::allow_only(params, pp, {"n", "p"});
      return OffspringSpec::binomial(integer("n"), num("p"));
    }
    if (family == "geometric") {
      js::allow_only(params, pp, {"p", "starts_at_one"});
      const bool shifted =
          params.contains("starts_at_one") && js::boolean(params["starts_at_one"], pp + "/starts_at_one");
      return OffspringSpec::geometric(num("p"), shifted);
    }
    if (family == "deterministic") {
      js::allow_only(params, pp, {"k"});
      return OffspringSpec::deterministic(integer("k"));
    }
    fail(ErrorCode::SchemaViolation, path + "/family: unknown offspring family '" + family + "'");
  });
}

json control_to_json(const ControlSpec& control) {
  json params = json::object();
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ScaledControl> || std::is_same_v<T, PoissonLinearControl>) {
          params["alpha"] = c.alpha;
        } else if constexpr (std::is_same_v<T, PoissonDriftControl>) {
          params["a"] = c.a;
          params["q"] = c.q;
        } else if constexpr (std::is_same_v<T, BinomialLinearControl>) {
          params["c"] = c.trials_per_individual;
          params["p"] = c.p;
        } else if constexpr (std::is_same_v<T, IidSumControl>) {
          params["increment"] = offspring_to_json(c.increment);
        }
      },
      control.family());
  return json{{"family", std::string(control.family_name())}, {"params", params}};
}

ControlSpec control_from_json(const json& node, const std::string& path) {
  js::allow_only(node, path, {"family", "params"});
  const std::string family = js::string(js::field(node, path, "family"), path + "/family");
  const json& params = params_of(node, path);
  const std::string pp = path + "/params";
  auto num = [&](std::string_view key) { return js::number(js::field(params, pp, key), pp + "/" + std::string(key)); };

  return with_path(path, [&]() -> ControlSpec {
    if (family == "identity") {
      js::allow_only(params, pp, {});
      return ControlSpec::identity();
    }
    if (family == "scaled") {
      js::allow_only(params, pp, {"alpha"});
      return ControlSpec::scaled(num("alpha"));
    }
    if (family == "poisson-linear") {
      js::allow_only(params, pp, {"alpha"});
      return ControlSpec::poisson_linear(num("alpha"));
    }
    if (family == "poisson-drift") {
      js::allow_only(params, pp, {"a", "q"});
      return ControlSpec::poisson_drift(num("a"), num("q"));
    }
    if (family == "binomial-linear") {
      js::allow_only(params, pp, {"c", "p"});
      return ControlSpec::binomial_linear(js::integer(js::field(params, pp, "c"), pp + "/c"), num("p"));
    }
    if (family == "iid-sum") {
      js::allow_only(params, pp, {"increment"});
      return ControlSpec::iid_sum(offspring_from_json(js::field(params, pp, "increment"), pp + "/increment"));
    }
    fail(ErrorCode::SchemaViolation, path + "/family: unknown control family '" + family + "'");
  });
}

json model_to_json(const CbpModel& model) {
  json out{{"schema", std::string(kModelSchema)},
           {"offspring", offspring_to_json(model.offspring)},
           {"control", control_to_json(model.control)},
           {"z0", model.z0}};
  if (!model.id.empty()) out["id"] = model.id;
  return out;
}

CbpModel model_from_json(const json& node) {
  js::allow_only(node, "", {"schema", "id", "offspring", "control", "z0"});
  const std::string schema = js::string(js::field(node, "", "schema"), "/schema");
  if (schema != kModelSchema) {
    fail(ErrorCode::SchemaViolation, "/schema: expected '" + std::string(kModelSchema) + "', got '" + schema + "'");
  }
  CbpModel model;
  model.offspring = offspring_from_json(js::field(node, "", "offspring"), "/offspring");
  if (node.contains("control")) model.control = control_from_json(node["control"], "/control");
  model.z0 = js::integer(js::field(node, "", "z0"), "/z0");
  if (model.z0 < 1) fail(ErrorCode::SchemaViolation, "/z0: must be a positive integer");
  if (node.contains("id")) model.id = js::string(node["id"], "/id");
  return model;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, path.string() + ": not valid JSON (" + e.what() + ")");
  }
}

CbpModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void save_model(const CbpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << model_to_json(model).dump(2) << "\n";
}

}  // namespace cbp
