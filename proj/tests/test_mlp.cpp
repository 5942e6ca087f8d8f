#include "helios/mlp.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace helios;

namespace {

MlpModel tiny_model() {
  MlpModel m;
  m.w_hidden = {{{0.3, -0.2}, {-0.1, 0.4}}};
  m.b_hidden = {0.05, -0.15};
  m.w_out = {0.7, -0.6};
  m.b_out = 0.1;
  m.norm.t = {15.0, 40.0};
  m.norm.g = {200.0, 1090.0};
  m.norm.imp = {1.0, 9.0};
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / name).string();
}

}  // namespace

TEST(NormSpec, UnitIntervalMapRoundTrips) {
  NormSpec::Range r{200.0, 1090.0};
  EXPECT_DOUBLE_EQ(NormSpec::to_unit(200.0, r), -1.0);
  EXPECT_DOUBLE_EQ(NormSpec::to_unit(1090.0, r), 1.0);
  EXPECT_DOUBLE_EQ(NormSpec::to_unit(645.0, r), 0.0);
  for (double x : {250.0, 500.0, 777.7, 1000.0})
    EXPECT_NEAR(NormSpec::from_unit(NormSpec::to_unit(x, r), r), x, 1e-12);
}

TEST(NormSpec, FromTrainingUsesObservedExtremes) {
  Dataset train = {{15.0, 200.0, 2.0}, {40.0, 1090.0, 8.0}, {25.0, 600.0, 5.0}};
  const NormSpec spec = NormSpec::from_training(train);
  EXPECT_DOUBLE_EQ(spec.t.min, 15.0);
  EXPECT_DOUBLE_EQ(spec.t.max, 40.0);
  EXPECT_DOUBLE_EQ(spec.g.min, 200.0);
  EXPECT_DOUBLE_EQ(spec.g.max, 1090.0);
  EXPECT_DOUBLE_EQ(spec.imp.min, 2.0);
  EXPECT_DOUBLE_EQ(spec.imp.max, 8.0);
  EXPECT_THROW(NormSpec::from_training({}), EmptyDataset);
}

TEST(NormSpec, ConstantFeatureGetsWidened) {
  Dataset train = {{25.0, 400.0, 5.0}, {25.0, 800.0, 6.0}};
  const NormSpec spec = NormSpec::from_training(train);
  EXPECT_DOUBLE_EQ(spec.t.min, 24.5);
  EXPECT_DOUBLE_EQ(spec.t.max, 25.5);
  EXPECT_NO_THROW(spec.validate());
}

TEST(MlpModel, ZeroNetworkPredictsRangeMidpoint) {
  MlpModel m = tiny_model();
  for (auto& row : m.w_hidden) row = {0.0, 0.0};
  m.b_hidden = {0.0, 0.0};
  m.w_out = {0.0, 0.0};
  m.b_out = 0.0;
  EXPECT_DOUBLE_EQ(m.forward(25.0, 1000.0), 5.0);  // midpoint of [1, 9]
}

TEST(MlpModel, ForwardIsPure) {
  const MlpModel m = tiny_model();
  const double a = m.forward(25.0, 1000.0);
  const double b = m.forward(25.0, 1000.0);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::isfinite(a));
}

TEST(MlpModel, ValidateCatchesStructuralDefects) {
  MlpModel m = tiny_model();
  EXPECT_NO_THROW(m.validate());
  m.w_out.pop_back();
  EXPECT_THROW(m.validate(), InvalidArgument);

  m = tiny_model();
  m.b_hidden[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(m.validate(), InvalidArgument);

  m = tiny_model();
  m.w_hidden.clear();
  m.b_hidden.clear();
  m.w_out.clear();
  EXPECT_THROW(m.validate(), InvalidArgument);

  m = tiny_model();
  m.norm.imp = {5.0, 5.0};
  EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(PublishedWeights, SpotValuesMatchTranscription) {
  const MlpModel m = load_paper_weights();
  EXPECT_EQ(m.width(), 15);
  EXPECT_DOUBLE_EQ(m.b_hidden[2], 0.476703785811994);
  EXPECT_DOUBLE_EQ(m.w_hidden[0][0], 0.330659943126136);
  EXPECT_DOUBLE_EQ(m.w_hidden[0][1], 0.375354867765757);
  EXPECT_DOUBLE_EQ(m.w_out[0], 0.526055556926590);
  EXPECT_DOUBLE_EQ(m.b_out, 0.1528);
  EXPECT_DOUBLE_EQ(m.b_hidden[14], 0.199252475098178);
  EXPECT_DOUBLE_EQ(m.w_hidden[14][1], 0.302898505989682);
  EXPECT_DOUBLE_EQ(m.w_out[14], 0.526712952341475);
}

TEST(PublishedWeights, InferenceIsFiniteAndPlausible) {
  // The scaling that produced these weights was never published; the
  // reconstructed ranges make this a diagnostic, not a reference point.
  const MlpModel m = load_paper_weights();
  const double pred = m.forward(25.0, 1000.0);
  EXPECT_TRUE(std::isfinite(pred));
  EXPECT_GT(pred, 0.0);
  EXPECT_LT(pred, 10.0);
}

TEST(ModelFiles, JsonRoundTripIsExact) {
  const MlpModel m = load_paper_weights();
  const std::string path = temp_path("model_roundtrip.json");
  save_model(m, path);
  const MlpModel back = load_model(path);
  ASSERT_EQ(back.width(), m.width());
  for (int k = 0; k < m.width(); ++k) {
    EXPECT_EQ(back.w_hidden[k][0], m.w_hidden[k][0]);
    EXPECT_EQ(back.w_hidden[k][1], m.w_hidden[k][1]);
    EXPECT_EQ(back.b_hidden[k], m.b_hidden[k]);
    EXPECT_EQ(back.w_out[k], m.w_out[k]);
  }
  EXPECT_EQ(back.b_out, m.b_out);
  EXPECT_EQ(back.b_hidden[2], 0.476703785811994);
  EXPECT_EQ(back.norm.imp.min, m.norm.imp.min);
  std::remove(path.c_str());
}

TEST(ModelFiles, SchemaDefectsAreReported) {
  const std::string path = temp_path("model_defect.json");

  {
    std::ofstream out(path);
    out << "{\"version\": 1, \"w_hidden\": [[0.1, 0.2]";  // truncated
  }
  EXPECT_THROW(load_model(path), SchemaError);

  {
    std::ofstream out(path);
    out << "{\"version\": 1, \"b_hidden\": [0.0], \"w_out\": [1.0], \"b_out\": 0.0,"
           " \"norm\": {\"t\": [0, 1], \"g\": [0, 1], \"imp\": [0, 1]}}";
  }
  EXPECT_THROW(load_model(path), SchemaError);  // missing w_hidden

  {
    std::ofstream out(path);
    nlohmann::json j = tiny_model();
    j["version"] = 2;
    out << j.dump();
  }
  EXPECT_THROW(load_model(path), SchemaError);

  std::remove(path.c_str());
  EXPECT_THROW(load_model(path), IoError);
}
