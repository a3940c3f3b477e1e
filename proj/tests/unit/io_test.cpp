#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cbp/model_json.hpp"
#include "cbp/numeric_format.hpp"
#include "cbp/simulate.hpp"
#include "cbp/trajectory_io.hpp"
#include "expect_error.hpp"

namespace cbp {
namespace {

using nlohmann::json;

TEST(NumericFormat, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0, 1.0433}) {
    EXPECT_EQ(parse_real(format_real(x)), x) << format_real(x);
  }
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(NumericFormat, StrictParsing) {
  EXPECT_CBP_ERROR(parse_real("1.5x"), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(parse_real(""), ErrorCode::InvalidArgument);
  EXPECT_CBP_ERROR(parse_int("3.0"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_int("-42"), -42);
}

TEST(ModelJson, RoundTripsEveryFamily) {
  const std::vector<CbpModel> models = {
      {OffspringSpec::finite({0.1538, 0.6491, 0.1971}), ControlSpec::identity(), 10, "a"},
      {OffspringSpec::poisson(2.0), ControlSpec::poisson_drift(1.0, 0.25), 10, "b"},
      {OffspringSpec::binomial(4, 0.3), ControlSpec::binomial_linear(2, 0.6), 3, "c"},
      {OffspringSpec::geometric(0.4, true), ControlSpec::scaled(1.5), 2, "d"},
      {OffspringSpec::deterministic(1), ControlSpec::poisson_linear(2.0), 1, "e"},
      {OffspringSpec::poisson(1.0), ControlSpec::iid_sum(OffspringSpec::finite({0.5, 0.5}, 1)), 5, "f"}};
  for (const auto& m : models) {
    const json j = model_to_json(m);
    EXPECT_EQ(j.at("schema"), std::string(kModelSchema));
    EXPECT_EQ(model_from_json(j), m) << j.dump();
    EXPECT_EQ(model_from_json(json::parse(j.dump())), m);
  }
}

TEST(ModelJson, RejectsUnknownFields) {
  json j = model_to_json({OffspringSpec::poisson(2.0), ControlSpec::identity(), 1, "x"});
  j["colour"] = "blue";
  EXPECT_CBP_ERROR(model_from_json(j), ErrorCode::SchemaViolation);
  j.erase("colour");
  j["offspring"]["params"]["mu"] = 1.0;
  EXPECT_CBP_ERROR(model_from_json(j), ErrorCode::SchemaViolation);
}

TEST(ModelJson, RejectsWrongTypesAndSchema) {
  json j = model_to_json({OffspringSpec::poisson(2.0), ControlSpec::identity(), 1, "x"});
  json bad = j;
  bad["schema"] = "cbp-model/v0";
  EXPECT_CBP_ERROR(model_from_json(bad), ErrorCode::SchemaViolation);
  bad = j;
  bad["z0"] = "ten";
  EXPECT_CBP_ERROR(model_from_json(bad), ErrorCode::SchemaViolation);
  bad = j;
  bad["offspring"]["family"] = "zipf";
  EXPECT_CBP_ERROR(model_from_json(bad), ErrorCode::SchemaViolation);
}

TEST(ModelJson, ParameterRangeErrorsCarryThePointer) {
  json j = model_to_json({OffspringSpec::poisson(2.0), ControlSpec::identity(), 1, "x"});
  j["offspring"]["params"]["lambda"] = -1.0;
  EXPECT_CBP_ERROR(model_from_json(j), ErrorCode::SchemaViolation);
  try {
    model_from_json(j);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/offspring"), std::string::npos);
  }
}

TEST(ModelJson, ShippedModelsLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(CBP_DATA_DIR "/models")) {
    EXPECT_NO_THROW(load_model(entry.path())) << entry.path();
  }
}

TEST(TrajectoryCsv, RoundTripWithProgenitors) {
  const Trajectory t = make_trajectory({3, 5, 0}, std::vector<std::int64_t>{4, 2});
  std::stringstream ss;
  write_trajectory_csv(ss, t);
  EXPECT_EQ(ss.str(), "generation,size,progenitors\n0,3,4\n1,5,2\n2,0,\n");
  const Trajectory back = read_trajectory_csv(ss);
  EXPECT_EQ(back.sizes, t.sizes);
  EXPECT_EQ(back.progenitors, t.progenitors);
  EXPECT_TRUE(back.extinct);
}

TEST(TrajectoryCsv, AcceptsSingleColumnAndComments) {
  std::stringstream a("# census counts\nsize\n21\n22\n25\n");
  EXPECT_EQ(read_trajectory_csv(a).sizes, (std::vector<std::int64_t>{21, 22, 25}));
  std::stringstream b("21\n22\n");
  EXPECT_EQ(read_trajectory_csv(b).sizes, (std::vector<std::int64_t>{21, 22}));
  std::stringstream c("generation,size\n0,4\n1,6\n");
  EXPECT_EQ(read_trajectory_csv(c).sizes, (std::vector<std::int64_t>{4, 6}));
}

TEST(TrajectoryCsv, RejectsMalformedInput) {
  std::stringstream neg("generation,size\n0,4\n1,-6\n");
  EXPECT_THROW(read_trajectory_csv(neg), Error);
  std::stringstream junk("generation,size\n0,4\n1,six\n");
  EXPECT_THROW(read_trajectory_csv(junk), Error);
}

TEST(TrajectoryFiles, SidecarRestoresProvenance) {
  const auto dir = std::filesystem::temp_directory_path() / "cbp_io_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "t.csv";
  const CbpModel model{OffspringSpec::poisson(1.2), ControlSpec::identity(), 5, "io-model"};
  const Trajectory t = simulate_trajectory(model, 12, 99);
  save_trajectory(t, csv, &model, "2026-01-01T00:00:00Z");
  EXPECT_EQ(meta_path_for(csv), dir / "t.csv.meta.json");
  ASSERT_TRUE(std::filesystem::exists(meta_path_for(csv)));
  const Trajectory back = load_trajectory(csv);
  EXPECT_EQ(back, t);
  std::filesystem::remove_all(dir);
}

TEST(TrajectoryFiles, ShippedCraneLikeData) {
  const Trajectory t = load_trajectory(CBP_DATA_DIR "/crane_like.csv");
  EXPECT_EQ(t.generations(), 70);
  EXPECT_EQ(t.sizes.front(), 10);
  EXPECT_EQ(t.seed, 1941u);
  const CbpModel m = load_model(CBP_DATA_DIR "/models/crane_model_i.json");
  EXPECT_EQ(simulate_trajectory(m, 70, 1941).sizes, t.sizes);
}

}  // namespace
}  // namespace cbp
