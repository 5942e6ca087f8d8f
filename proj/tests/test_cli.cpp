// End-to-end checks of the batch tool: exit-code contract (0 success,
// 1 domain error, 2 usage error), artifact formats, seeded determinism, and
// the dataset -> split -> train -> predict pipeline.
#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "helios/pv_model.hpp"

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int code = -1;
  std::string output;  // stdout and stderr merged
};

CmdResult run_shell(const std::string& cmd) {
  CmdResult result;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

CmdResult run_cli(const std::string& args) {
  return run_shell(std::string(HELIOS_CLI_PATH) + " " + args);
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    const fs::path d =
        fs::temp_directory_path() / ("helios_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_in_scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(text.substr(pos + key.size() + 1));
}

// Default-grid dataset CSV, generated once and reused across tests.
const std::string& default_dataset() {
  static std::once_flag flag;
  static std::string path = path_in_scratch("default.csv");
  std::call_once(flag, [] {
    const CmdResult r = run_cli("dataset gen --out " + path);
    ASSERT_EQ(r.code, 0) << r.output;
  });
  return path;
}

std::string bundled_weights() {
  return std::string(HELIOS_DATA_DIR) + "/paper_weights.json";
}

TEST(CliUsage, HelpExitsZero) {
  const CmdResult r = run_cli("--help");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("sweep"), std::string::npos);
  EXPECT_NE(r.output.find("reproduce"), std::string::npos);
}

TEST(CliUsage, SubcommandHelpDocumentsFlags) {
  const CmdResult r = run_cli("sweep --help");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("--out"), std::string::npos);
  EXPECT_NE(r.output.find("--gnuplot"), std::string::npos);
}

TEST(CliUsage, UnknownSubcommandExitsTwo) {
  EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST(CliUsage, MissingRequiredFlagExitsTwo) {
  EXPECT_EQ(run_cli("sweep").code, 2);
}

TEST(CliUsage, MissingInputFileExitsTwo) {
  EXPECT_EQ(run_cli("predict --model " + path_in_scratch("absent.json") +
                    " --t 25 --g 1000")
                .code,
            2);
}

TEST(CliMpp, SinglePointMatchesRatedOperatingPoint) {
  const CmdResult r = run_cli("mpp --t 25 --g 1000");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NEAR(value_after(r.output, "v_mp_V"), 26.4, 0.3);
  EXPECT_NEAR(value_after(r.output, "i_mp_A"), 7.5764, 0.01 * 7.5764);
  EXPECT_NEAR(value_after(r.output, "p_max_W"), 200.017, 0.01 * 200.017);
}

TEST(CliMpp, DarknessIsDomainErrorExitOne) {
  const CmdResult r = run_cli("mpp --t 25 --g 0");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
}

TEST(CliMpp, BatchModeWritesOneRowPerInput) {
  const std::string in = path_in_scratch("env.csv");
  {
    std::ofstream out(in);
    out << "T_degC,G_Wm2\n25,1000\n25,500\n40,800\n";
  }
  const std::string out = path_in_scratch("env_mpp.csv");
  const CmdResult r = run_cli("mpp --in " + in + " --out " + out);
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string text = slurp(out);
  EXPECT_EQ(first_line(text), "T_degC,G_Wm2,v_mp_V,i_mp_A,p_max_W");
  EXPECT_EQ(line_count(text), 4u);
}

TEST(CliSweep, WritesCurveCsvAndGnuplotScript) {
  const std::string csv = path_in_scratch("curve.csv");
  const std::string gp = path_in_scratch("curve.gp");
  const CmdResult r =
      run_cli("sweep --t 25 --g 1000 --points 100 --out " + csv + " --gnuplot " + gp);
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string text = slurp(csv);
  EXPECT_EQ(first_line(text), "v_V,i_A,p_W");
  EXPECT_EQ(line_count(text), 101u);
  EXPECT_NE(slurp(gp).find("plot"), std::string::npos);
}

TEST(CliDataset, DefaultGenerationHas1300Rows) {
  const std::string text = slurp(default_dataset());
  EXPECT_EQ(first_line(text), "T_degC,G_Wm2,Imp_A");
  EXPECT_EQ(line_count(text), 1301u);
}

TEST(CliDataset, SplitIsSeedDeterministicWithManifest) {
  const std::string base_a = path_in_scratch("split_a");
  const std::string base_b = path_in_scratch("split_b");
  ASSERT_EQ(run_cli("dataset split --in " + default_dataset() + " --base " + base_a +
                    " --seed 7")
                .code,
            0);
  ASSERT_EQ(run_cli("dataset split --in " + default_dataset() + " --base " + base_b +
                    " --seed 7")
                .code,
            0);
  const std::string train_a = slurp(base_a + ".train.csv");
  EXPECT_FALSE(train_a.empty());
  EXPECT_EQ(train_a, slurp(base_b + ".train.csv"));
  EXPECT_EQ(slurp(base_a + ".val.csv"), slurp(base_b + ".val.csv"));
  EXPECT_EQ(slurp(base_a + ".test.csv"), slurp(base_b + ".test.csv"));

  const nlohmann::json manifest = nlohmann::json::parse(slurp(base_a + ".manifest.json"));
  EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 7u);
  EXPECT_FALSE(manifest.at("params_hash").get<std::string>().empty());
  EXPECT_EQ(manifest.at("sizes").at("train").get<std::size_t>(), 1105u);
  EXPECT_EQ(manifest.at("sizes").at("val").get<std::size_t>(), 130u);
  EXPECT_EQ(manifest.at("sizes").at("test").get<std::size_t>(), 65u);
}

TEST(CliDataset, ZeroSigmaNoiseIsIdentity) {
  const std::string out = path_in_scratch("noise0.csv");
  ASSERT_EQ(run_cli("dataset noise --in " + default_dataset() + " --out " + out +
                    " --sigma-t 0 --sigma-g 0")
                .code,
            0);
  EXPECT_EQ(slurp(out), slurp(default_dataset()));
}

TEST(CliPredict, BundledWeightsGivePlausibleStcCurrent) {
  const CmdResult r =
      run_cli("predict --model " + bundled_weights() + " --t 25 --g 1000");
  ASSERT_EQ(r.code, 0) << r.output;
  const double i = std::stod(r.output);
  EXPECT_TRUE(std::isfinite(i));
  EXPECT_GT(i, 5.0);
  EXPECT_LT(i, 9.0);
}

TEST(CliParams, FlagAndEnvironmentOverrideBuiltins) {
  helios::ModuleParams p;
  p.isc_ref = 0.5 * p.isc_ref;
  const std::string path = path_in_scratch("half_isc.json");
  {
    std::ofstream out(path);
    out << nlohmann::json(p).dump(2) << "\n";
  }
  const CmdResult via_flag = run_cli("--params " + path + " mpp --t 25 --g 1000");
  ASSERT_EQ(via_flag.code, 0) << via_flag.output;
  EXPECT_LT(value_after(via_flag.output, "i_mp_A"), 4.2);

  const CmdResult via_env = run_shell("HELIOS_PARAMS=" + path + " " +
                                      std::string(HELIOS_CLI_PATH) + " mpp --t 25 --g 1000");
  ASSERT_EQ(via_env.code, 0) << via_env.output;
  EXPECT_EQ(via_env.output, via_flag.output);
}

TEST(CliSimulate, PerfectControllerScoresUnity) {
  const CmdResult r = run_cli("simulate --controller perfect --builtin constant-stc");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NEAR(value_after(r.output, "efficiency"), 1.0, 1e-6);
}

TEST(CliSimulate, TraceCsvHasOneRowPerStep) {
  const std::string trace = path_in_scratch("trace.csv");
  const CmdResult r =
      run_cli("simulate --controller po --builtin step-irradiance --trace " + trace);
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string text = slurp(trace);
  EXPECT_EQ(first_line(text), "t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V");
  EXPECT_EQ(line_count(text), 3001u);  // 300 s at 0.1 s per step, plus header
}

TEST(CliSimulate, NnWithoutModelIsDomainError) {
  const CmdResult r = run_cli("simulate --controller nn --builtin constant-stc");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
}

TEST(CliSimulate, ScenarioFileFromCsvRuns) {
  const std::string scenario = path_in_scratch("ramp.csv");
  {
    std::ofstream out(scenario);
    out << "t_s,T_degC,G_Wm2\n0,25,1000\n5,25,800\n10,25,600\n";
  }
  const CmdResult r = run_cli("simulate --controller perfect --scenario " + scenario);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NEAR(value_after(r.output, "efficiency"), 1.0, 1e-6);
}

TEST(CliCompare, RanksControllersAndLabelsSources) {
  const std::string out = path_in_scratch("compare.json");
  const CmdResult r = run_cli(
      "compare --controllers perfect,po,ic,focv --builtin constant-stc --out " + out);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("perfect"), std::string::npos);
  EXPECT_NE(r.output.find("measured"), std::string::npos);
  EXPECT_NE(r.output.find("literature-reported"), std::string::npos);

  const nlohmann::json report = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(report.at("measured").size(), 4u);
  EXPECT_EQ(report.at("measured").at(0).at("controller").get<std::string>(), "perfect");
  EXPECT_FALSE(report.at("literature").empty());
}

// dataset gen -> split -> train -> predict, all through the tool. The trained
// network must land within 0.5% of the rated MPP current at STC.
TEST(CliPipeline, TrainThenPredictHitsRatedCurrent) {
  const std::string base = path_in_scratch("pipeline");
  ASSERT_EQ(run_cli("dataset split --in " + default_dataset() + " --base " + base +
                    " --seed 1")
                .code,
            0);

  const std::string model = path_in_scratch("pipeline_model.json");
  const std::string history = path_in_scratch("pipeline_history.csv");
  const std::string report = path_in_scratch("pipeline_report.json");
  const CmdResult trained =
      run_cli("train --split-base " + base + " --seed 1 --out " + model + " --history " +
              history + " --report " + report);
  ASSERT_EQ(trained.code, 0) << trained.output;

  const std::string hist_text = slurp(history);
  EXPECT_EQ(first_line(hist_text), "epoch,mse_train,mse_val,alpha,beta,gamma");
  EXPECT_GT(line_count(hist_text), 1u);
  EXPECT_LE(nlohmann::json::parse(slurp(report)).at("mse_test").at("a2").get<double>(),
            5e-3);

  const CmdResult predicted = run_cli("predict --model " + model + " --t 25 --g 1000");
  ASSERT_EQ(predicted.code, 0) << predicted.output;
  EXPECT_NEAR(std::stod(predicted.output), 7.5764, 0.005 * 7.5764);
}

TEST(CliEval, WritesHistogramAndReport) {
  const std::string hist = path_in_scratch("eval_hist.csv");
  const std::string report = path_in_scratch("eval_report.json");
  const CmdResult r = run_cli("eval --model " + bundled_weights() + " --in " +
                              default_dataset() + " --histogram " + hist + " --report " +
                              report);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(std::isfinite(value_after(r.output, "mse_A2")));
  EXPECT_TRUE(std::isfinite(value_after(r.output, "r")));

  const std::string text = slurp(hist);
  EXPECT_EQ(first_line(text), "bin_lo,bin_hi,count");
  EXPECT_EQ(line_count(text), 21u);
  EXPECT_TRUE(nlohmann::json::parse(slurp(report)).contains("mse_A2"));
}

}  // namespace
