#include "helios/pv_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helios/rng.hpp"

using namespace helios;

namespace {

// High-precision reference values computed with a 50-digit arbitrary
// precision implementation of the same equations, rounded to double.
constexpr double kIrsAt298 = 1.0051747446294536e-7;
constexpr double kIrsAt323 = 4.11480338574877e-7;
constexpr double kI0At308 = 5.8285463591089566e-7;
constexpr double kI0At323 = 6.6742051464241066e-6;
constexpr double kCurrentStc26p4 = 7.5751752722527386;
constexpr double kCurrentStc0 = 8.2056343389867914;
constexpr double kVocStc = 32.88250393176307;

}  // namespace

TEST(ModuleParams, DefaultsMatchCalibratedModule) {
  ModuleParams p = ModuleParams::table1();
  EXPECT_EQ(p.ns, 54);
  EXPECT_DOUBLE_EQ(p.isc_ref, 8.21);
  EXPECT_DOUBLE_EQ(p.voc_ref, 32.9);
  EXPECT_DOUBLE_EQ(p.rs, 0.2210);
  EXPECT_DOUBLE_EQ(p.rsh, 415.4050);
  EXPECT_DOUBLE_EQ(p.ki, 0.0032);
  EXPECT_DOUBLE_EQ(p.ideality, 1.3);
  EXPECT_DOUBLE_EQ(p.eg0, 1.1);
  EXPECT_DOUBLE_EQ(p.t_ref, 298.15);
  EXPECT_DOUBLE_EQ(p.g_ref, 1000.0);
  EXPECT_DOUBLE_EQ(p.q, 1.6e-19);
  EXPECT_DOUBLE_EQ(p.k_b, 1.3805e-23);
  EXPECT_NO_THROW(p.validate());
}

TEST(ModuleParams, ValidateRejectsNonPhysicalValues) {
  ModuleParams p;
  p.ns = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = ModuleParams{};
  p.rsh = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = ModuleParams{};
  p.ideality = 3.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = ModuleParams{};
  p.isc_ref = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(ModuleParams, JsonRoundTripPreservesEveryField) {
  ModuleParams p;
  p.ns = 60;
  p.isc_ref = 9.1;
  p.rs = 0.3;
  nlohmann::json j = p;
  ModuleParams q = j.get<ModuleParams>();
  EXPECT_EQ(q.ns, 60);
  EXPECT_DOUBLE_EQ(q.isc_ref, 9.1);
  EXPECT_DOUBLE_EQ(q.rs, 0.3);
  EXPECT_DOUBLE_EQ(q.rsh, p.rsh);
}

TEST(ModuleParams, JsonMissingFieldIsSchemaError) {
  nlohmann::json j = ModuleParams{};
  j.erase("rsh");
  EXPECT_THROW(j.get<ModuleParams>(), SchemaError);
}

TEST(EnvConditions, CelsiusConversionAddsIceOffset) {
  EnvConditions env = EnvConditions::from_celsius(25.0, 1000.0);
  EXPECT_DOUBLE_EQ(env.t_k, 298.15);
  EXPECT_DOUBLE_EQ(env.g, 1000.0);
  EXPECT_THROW((EnvConditions{-1.0, 1000.0}.validate()), InvalidArgument);
  EXPECT_THROW((EnvConditions{298.15, -5.0}.validate()), InvalidArgument);
}

TEST(PhotoCurrent, LinearInIrradianceWithTemperatureTerm) {
  ModuleParams p;
  EXPECT_DOUBLE_EQ(photo_current(p, {298.15, 1000.0}), 8.21);
  EXPECT_DOUBLE_EQ(photo_current(p, {298.15, 500.0}), 4.105);
  EXPECT_NEAR(photo_current(p, {318.15, 1000.0}), 8.274, 1e-12);
}

TEST(ReverseSaturationCurrent, MatchesHighPrecisionReference) {
  ModuleParams p;
  EXPECT_NEAR(reverse_saturation_current(p, 298.15), kIrsAt298, kIrsAt298 * 1e-10);
  EXPECT_NEAR(reverse_saturation_current(p, 323.15), kIrsAt323, kIrsAt323 * 1e-10);
}

TEST(ReverseSaturationCurrent, OverflowGuardTrips) {
  ModuleParams p;
  EXPECT_THROW(reverse_saturation_current(p, 1.0), NumericOverflow);
  EXPECT_THROW(reverse_saturation_current(p, -5.0), InvalidArgument);
}

TEST(SaturationCurrent, ReducesToReverseSaturationAtReference) {
  ModuleParams p;
  EXPECT_DOUBLE_EQ(saturation_current(p, 298.15), reverse_saturation_current(p, 298.15));
}

TEST(SaturationCurrent, MatchesHighPrecisionReference) {
  ModuleParams p;
  EXPECT_NEAR(saturation_current(p, 308.15), kI0At308, kI0At308 * 1e-10);
  EXPECT_NEAR(saturation_current(p, 323.15), kI0At323, kI0At323 * 1e-10);
}

TEST(SaturationCurrent, GrowsRapidlyWithTemperature) {
  ModuleParams p;
  double prev = saturation_current(p, 288.15);
  for (double t = 293.15; t <= 348.15; t += 5.0) {
    double cur = saturation_current(p, t);
    EXPECT_GT(cur, prev) << "t=" << t;
    prev = cur;
  }
}

TEST(ThermalVoltage, StringLevelValueAtReference) {
  ModuleParams p;
  EXPECT_NEAR(thermal_voltage(p, 298.15), 1.80588, 1e-5);
}

TEST(SolveOutputCurrent, ReproducesReferenceOperatingPoints) {
  ModuleParams p;
  EnvConditions stc{298.15, 1000.0};
  EXPECT_NEAR(solve_output_current(p, stc, 26.4), kCurrentStc26p4, 1e-8);
  EXPECT_NEAR(solve_output_current(p, stc, 0.0), kCurrentStc0, 1e-8);
}

TEST(SolveOutputCurrent, ShortCircuitSitsJustBelowPhotoCurrent) {
  ModuleParams p;
  EnvConditions stc{298.15, 1000.0};
  const double isc = solve_output_current(p, stc, 0.0);
  const double iph = photo_current(p, stc);
  EXPECT_LT(isc, iph);
  EXPECT_NEAR(isc, iph, iph * 1e-3);  // shunt loss is a fraction of a percent
}

TEST(SolveOutputCurrent, ResidualMeetsToleranceEverywhere) {
  ModuleParams p;
  std::mt19937_64 gen(7u);
  for (int trial = 0; trial < 50; ++trial) {
    const double t_c = rng::uniform(gen, 0.0, 75.0);
    const double g = rng::uniform(gen, 100.0, 1200.0);
    EnvConditions env = EnvConditions::from_celsius(t_c, g);
    const double v = rng::uniform(gen, 0.0, 0.95 * p.voc_ref);
    const double i = solve_output_current(p, env, v);

    const double iph = photo_current(p, env);
    const double i0 = saturation_current(p, env.t_k);
    const double vt = thermal_voltage(p, env.t_k);
    const double res =
        iph - i0 * std::expm1((v + i * p.rs) / vt) - (v + i * p.rs) / p.rsh - i;
    EXPECT_LE(std::abs(res), 1e-9) << "t_c=" << t_c << " g=" << g << " v=" << v;
  }
}

TEST(SolveOutputCurrent, CurrentDecreasesWithVoltage) {
  ModuleParams p;
  EnvConditions env = EnvConditions::from_celsius(40.0, 800.0);
  double prev = solve_output_current(p, env, 0.0);
  for (double v = 2.0; v <= 32.0; v += 2.0) {
    double cur = solve_output_current(p, env, v);
    EXPECT_LT(cur, prev) << "v=" << v;
    prev = cur;
  }
}

TEST(SolveOutputCurrent, HandlesVoltagesBeyondOpenCircuit) {
  ModuleParams p;
  EnvConditions stc{298.15, 1000.0};
  const double i = solve_output_current(p, stc, 36.0);
  EXPECT_LT(i, 0.0);  // sink region: the module absorbs current
}

TEST(SolveOutputCurrent, NegativeVoltageRejected) {
  ModuleParams p;
  EXPECT_THROW(solve_output_current(p, {298.15, 1000.0}, -1.0), InvalidArgument);
}

TEST(SweepIv, ProducesValidatedMonotonicGrid) {
  ModuleParams p;
  IVCurve curve = sweep_iv(p, {298.15, 1000.0}, 33.0, 100);
  ASSERT_EQ(curve.points.size(), 100u);
  EXPECT_DOUBLE_EQ(curve.points.front().v, 0.0);
  EXPECT_DOUBLE_EQ(curve.points.back().v, 33.0);
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    EXPECT_GT(curve.points[k].v, curve.points[k - 1].v);
  for (const OperatingPoint& pt : curve.points)
    EXPECT_DOUBLE_EQ(pt.p, pt.v * pt.i);
  EXPECT_NO_THROW(curve.validate_full(32.88));
  EXPECT_LT(curve.points.back().i, 0.0);
}

TEST(SweepIv, RejectsDegenerateRequests) {
  ModuleParams p;
  EXPECT_THROW(sweep_iv(p, {298.15, 1000.0}, 33.0, 1), InvalidArgument);
  EXPECT_THROW(sweep_iv(p, {298.15, 1000.0}, 0.0, 10), InvalidArgument);
}

TEST(IvCurveValidation, CatchesStructuralDefects) {
  IVCurve c;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.points = {{1.0, 8.0, 8.0}};
  EXPECT_THROW(c.validate(), InvalidArgument);  // must start at v = 0
  c.points = {{0.0, 8.0, 0.0}, {0.0, 7.0, 0.0}};
  EXPECT_THROW(c.validate(), InvalidArgument);  // non-increasing voltages
  c.points = {{0.0, 8.0, 0.0}, {5.0, 7.9, 39.5}};
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(c.validate_full(32.9), InvalidArgument);  // stops short of voc
}

TEST(IvCsv, HeaderAndFullPrecisionRows) {
  ModuleParams p;
  IVCurve curve = sweep_iv(p, {298.15, 1000.0}, 33.0, 5);
  std::ostringstream out;
  write_iv_csv(curve, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "v_V,i_A,p_W");
  int rows = 0;
  while (std::getline(in, line)) {
    auto fields = io::split_csv_line(line);
    ASSERT_EQ(fields.size(), 3u);
    const double v = io::parse_double(fields[0], rows + 2);
    const double i = io::parse_double(fields[1], rows + 2);
    // round-trip through text must be exact
    EXPECT_DOUBLE_EQ(v, curve.points[rows].v);
    EXPECT_DOUBLE_EQ(i, curve.points[rows].i);
    ++rows;
  }
  EXPECT_EQ(rows, 5);
}
