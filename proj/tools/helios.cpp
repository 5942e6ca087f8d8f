// helios: batch toolkit for PV module simulation, MPPT dataset/training
// workflows, and closed-loop tracker comparison. One subcommand per process;
// every artifact write is atomic, and fixed seeds give byte-identical output.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "helios/acceptance.hpp"
#include "helios/controllers.hpp"
#include "helios/dataset.hpp"
#include "helios/errors.hpp"
#include "helios/io.hpp"
#include "helios/mlp.hpp"
#include "helios/mpp.hpp"
#include "helios/pv_model.hpp"
#include "helios/sim.hpp"
#include "helios/trainer.hpp"

#ifndef HELIOS_DATA_DIR
#define HELIOS_DATA_DIR "data"
#endif

namespace {

using helios::ModuleParams;

ModuleParams load_params(const std::string& path) {
  if (path.empty()) return ModuleParams{};
  std::ifstream in(path);
  if (!in) throw helios::IoError("cannot open module-params file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw helios::SchemaError("module-params file " + path + ": " + e.what());
  }
  ModuleParams p = j.get<ModuleParams>();
  p.validate();
  return p;
}

// Writes through a stream callback, temp file + rename underneath.
template <typename Fn>
void write_artifact(const std::string& path, Fn fn) {
  helios::io::atomic_write(path, [&](std::ostream& out) { fn(out); });
}

struct EnvPoint {
  double t_c = 0.0;
  double g = 0.0;
};

// Two-column environment list used by batch mpp.
std::vector<EnvPoint> read_env_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw helios::IoError("cannot open environment file: " + path);
  std::string line;
  if (!std::getline(in, line) || helios::io::strip_cr(line) != "T_degC,G_Wm2")
    throw helios::SchemaError("environment file " + path +
                              ": expected header T_degC,G_Wm2");
  std::vector<EnvPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = helios::io::strip_cr(line);
    if (line.empty()) continue;
    const auto cells = helios::io::split_csv_line(line);
    if (cells.size() != 2)
      throw helios::ParseError("environment file " + path + ": expected 2 columns",
                               line_no);
    points.push_back({helios::io::parse_double(cells[0], line_no),
                      helios::io::parse_double(cells[1], line_no)});
  }
  return points;
}

struct ScenarioFlags {
  std::string builtin;
  std::string file;
  double control_period = 0.1;
  double duration = 0.0;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& flags) {
  auto* builtin =
      cmd->add_option("--builtin", flags.builtin,
                      "Bundled scenario: constant-stc (300 s at 25 degC / 1000 W/m2) or "
                      "step-irradiance (1000 -> 600 W/m2 at t = 150 s)")
          ->check(CLI::IsMember({"constant-stc", "step-irradiance"}));
  auto* file =
      cmd->add_option("--scenario", flags.file,
                      "Scenario file: .json ({control_period_s, duration_s, samples:[{t_s, "
                      "T_degC, G_Wm2}]}) or CSV with header t_s,T_degC,G_Wm2")
          ->check(CLI::ExistingFile);
  builtin->excludes(file);
  file->excludes(builtin);
  cmd->add_option("--control-period", flags.control_period,
                  "Controller period in seconds for CSV scenarios")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--duration", flags.duration,
                  "Simulated seconds for CSV scenarios (default: last sample + period)");
}

helios::Scenario resolve_scenario(const ScenarioFlags& flags) {
  if (!flags.builtin.empty()) {
    if (flags.builtin == "constant-stc") return helios::Scenario::constant_stc();
    return helios::Scenario::step_irradiance();
  }
  if (flags.file.empty())
    throw CLI::ValidationError("scenario", "pass either --builtin or --scenario");
  if (flags.file.size() >= 5 && flags.file.substr(flags.file.size() - 5) == ".json")
    return helios::load_scenario_json(flags.file);
  return helios::load_scenario_csv(flags.file, flags.control_period, flags.duration);
}

std::string gnuplot_script(const std::string& csv_path) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set xlabel 'Voltage (V)'\n"
      << "set ylabel 'Current (A)'\n"
      << "set y2label 'Power (W)'\n"
      << "set y2tics\n"
      << "set key left bottom\n"
      << "plot '" << csv_path << "' skip 1 using 1:2 with lines title 'I-V', \\\n"
      << "     '" << csv_path << "' skip 1 using 1:3 axes x1y2 with lines title 'P-V'\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PV module simulator and MPPT toolkit"};
  app.require_subcommand(1);

  std::string params_path;
  app.add_option("--params", params_path,
                 "Module-parameter JSON file (default: built-in 200 W module)")
      ->envname("HELIOS_PARAMS")
      ->check(CLI::ExistingFile);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress informational output");

  int exit_code = 0;

  // sweep: I-V / P-V curve CSV
  {
    auto* cmd = app.add_subcommand("sweep", "Sample the I-V and P-V curves to CSV "
                                            "(header v_V,i_A,p_W)");
    auto t_c = std::make_shared<double>(25.0);
    auto g = std::make_shared<double>(1000.0);
    auto v_max = std::make_shared<double>(0.0);
    auto points = std::make_shared<int>(200);
    auto out_path = std::make_shared<std::string>();
    auto plot_path = std::make_shared<std::string>();
    cmd->add_option("--t", *t_c, "Cell temperature, degC")->capture_default_str();
    cmd->add_option("--g", *g, "Irradiance, W/m2")->capture_default_str();
    cmd->add_option("--v-max", *v_max, "Sweep end voltage (default: open-circuit voltage)");
    cmd->add_option("--points", *points, "Sample count")
        ->check(CLI::Range(2, 1000000))
        ->capture_default_str();
    cmd->add_option("--out", *out_path, "Output CSV path")->required();
    cmd->add_option("--gnuplot", *plot_path, "Also write a gnuplot script plotting the CSV");
    cmd->callback([=, &params_path, &quiet] {
      const ModuleParams params = load_params(params_path);
      const auto env = helios::EnvConditions::from_celsius(*t_c, *g);
      const double stop =
          *v_max > 0.0 ? *v_max : helios::open_circuit_voltage(params, env);
      const helios::IVCurve curve = helios::sweep_iv(params, env, stop, *points);
      write_artifact(*out_path, [&](std::ostream& out) { helios::write_iv_csv(curve, out); });
      if (!plot_path->empty())
        write_artifact(*plot_path,
                       [&](std::ostream& out) { out << gnuplot_script(*out_path); });
      if (!quiet)
        std::cout << "points=" << curve.points.size() << " v_max_V="
                  << helios::io::format_double(stop) << " out=" << *out_path << "\n";
    });
  }

  // mpp: maximum power point, single or batch
  {
    auto* cmd = app.add_subcommand(
        "mpp", "Locate the maximum power point for one (T, G) pair or a batch CSV");
    auto t_c = std::make_shared<double>(25.0);
    auto g = std::make_shared<double>(1000.0);
    auto in_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--t", *t_c, "Cell temperature, degC")->capture_default_str();
    cmd->add_option("--g", *g, "Irradiance, W/m2")->capture_default_str();
    auto* in_opt = cmd->add_option("--in", *in_path,
                                   "Batch input CSV with header T_degC,G_Wm2")
                       ->check(CLI::ExistingFile);
    cmd->add_option("--out", *out_path,
                    "Batch output CSV (T_degC,G_Wm2,v_mp_V,i_mp_A,p_max_W)")
        ->needs(in_opt);
    cmd->callback([=, &params_path, &quiet] {
      const ModuleParams params = load_params(params_path);
      if (in_path->empty()) {
        const auto mpp =
            helios::find_mpp(params, helios::EnvConditions::from_celsius(*t_c, *g));
        std::cout << "v_mp_V=" << helios::io::format_double(mpp.v_mp) << "\n"
                  << "i_mp_A=" << helios::io::format_double(mpp.i_mp) << "\n"
                  << "p_max_W=" << helios::io::format_double(mpp.p_max) << "\n";
        return;
      }
      if (out_path->empty())
        throw CLI::ValidationError("mpp", "--in requires --out");
      const auto points = read_env_csv(*in_path);
      std::ostringstream body;
      body << "T_degC,G_Wm2,v_mp_V,i_mp_A,p_max_W\n";
      for (const EnvPoint& pt : points) {
        const auto mpp =
            helios::find_mpp(params, helios::EnvConditions::from_celsius(pt.t_c, pt.g));
        body << helios::io::format_double(pt.t_c) << ','
             << helios::io::format_double(pt.g) << ','
             << helios::io::format_double(mpp.v_mp) << ','
             << helios::io::format_double(mpp.i_mp) << ','
             << helios::io::format_double(mpp.p_max) << '\n';
      }
      write_artifact(*out_path, [&](std::ostream& out) { out << body.str(); });
      if (!quiet) std::cout << "rows=" << points.size() << " out=" << *out_path << "\n";
    });
  }

  // dataset gen | split | noise
  {
    auto* cmd = app.add_subcommand("dataset",
                                   "Generate, split, or perturb training datasets "
                                   "(CSV header T_degC,G_Wm2,Imp_A)");
    cmd->require_subcommand(1);

    auto* gen = cmd->add_subcommand("gen", "Sweep a (T, G) grid through the MPP oracle");
    auto grid = std::make_shared<helios::GridSpec>();
    auto gen_out = std::make_shared<std::string>();
    gen->add_option("--t-start", grid->t_start, "First temperature, degC")
        ->capture_default_str();
    gen->add_option("--t-stop", grid->t_stop, "Last temperature, degC")
        ->capture_default_str();
    gen->add_option("--t-step", grid->t_step, "Temperature step, degC")
        ->capture_default_str();
    gen->add_option("--g-lo", grid->g_lo, "Lowest irradiance, W/m2")->capture_default_str();
    gen->add_option("--g-hi", grid->g_hi, "Highest irradiance, W/m2")
        ->capture_default_str();
    gen->add_option("--g-count", grid->g_count, "Irradiance levels per temperature")
        ->check(CLI::Range(2, 1000000))
        ->capture_default_str();
    gen->add_option("--out", *gen_out, "Output dataset CSV")->required();
    gen->callback([=, &params_path, &quiet] {
      const ModuleParams params = load_params(params_path);
      const helios::Dataset data =
          helios::generate_grid(params, grid->t_values(), grid->g_values());
      helios::export_dataset(data, *gen_out);
      if (!quiet) std::cout << "rows=" << data.size() << " out=" << *gen_out << "\n";
    });

    auto* split = cmd->add_subcommand(
        "split", "Shuffle and partition a dataset into <base>.train/.val/.test.csv "
                 "plus <base>.manifest.json");
    auto split_in = std::make_shared<std::string>();
    auto split_base = std::make_shared<std::string>();
    auto split_seed = std::make_shared<std::uint64_t>(1);
    auto fracs = std::make_shared<helios::SplitFractions>();
    split->add_option("--in", *split_in, "Input dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    split->add_option("--base", *split_base, "Output path prefix")->required();
    split->add_option("--seed", *split_seed, "Shuffle seed")->capture_default_str();
    split->add_option("--train-frac", fracs->train, "Training fraction")
        ->capture_default_str();
    split->add_option("--val-frac", fracs->val, "Validation fraction")
        ->capture_default_str();
    split->add_option("--test-frac", fracs->test, "Test fraction")->capture_default_str();
    split->callback([=, &params_path, &quiet] {
      const ModuleParams params = load_params(params_path);
      const helios::Dataset data = helios::import_dataset(*split_in);
      const helios::DataSplit parts = helios::shuffle_split(data, *split_seed, *fracs);
      helios::SplitProvenance prov;
      prov.seed = *split_seed;
      prov.fractions = *fracs;
      prov.grid = nullptr;
      prov.params_hash = helios::params_hash(params);
      helios::export_split(parts, *split_base, prov);
      if (!quiet)
        std::cout << "train=" << parts.train.size() << " val=" << parts.val.size()
                  << " test=" << parts.test.size() << " base=" << *split_base << "\n";
    });

    auto* noise = cmd->add_subcommand(
        "noise", "Add Gaussian measurement noise to the (T, G) inputs of a dataset");
    auto noise_in = std::make_shared<std::string>();
    auto noise_out = std::make_shared<std::string>();
    auto sigma_t = std::make_shared<double>(0.0);
    auto sigma_g = std::make_shared<double>(10.0);
    auto noise_seed = std::make_shared<std::uint64_t>(1);
    noise->add_option("--in", *noise_in, "Input dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    noise->add_option("--out", *noise_out, "Output dataset CSV")->required();
    noise->add_option("--sigma-t", *sigma_t, "Temperature noise stddev, degC")
        ->capture_default_str();
    noise->add_option("--sigma-g", *sigma_g, "Irradiance noise stddev, W/m2")
        ->capture_default_str();
    noise->add_option("--seed", *noise_seed, "Noise seed")->capture_default_str();
    noise->callback([=, &quiet] {
      const helios::Dataset data = helios::import_dataset(*noise_in);
      const helios::Dataset noisy =
          helios::add_awgn(data, *sigma_t, *sigma_g, *noise_seed);
      helios::export_dataset(noisy, *noise_out);
      if (!quiet) std::cout << "rows=" << noisy.size() << " out=" << *noise_out << "\n";
    });
  }

  // train
  {
    auto* cmd = app.add_subcommand(
        "train", "Fit the 2-H-1 current predictor on a <base>.train/.val/.test.csv split");
    auto base = std::make_shared<std::string>();
    auto algorithm = std::make_shared<std::string>("bayesian_lm");
    auto cfg = std::make_shared<helios::TrainConfig>();
    auto model_out = std::make_shared<std::string>();
    auto history_out = std::make_shared<std::string>();
    auto report_out = std::make_shared<std::string>();
    cmd->add_option("--split-base", *base, "Path prefix written by dataset split")
        ->required();
    cmd->add_option("--algorithm", *algorithm,
                    "bayesian_lm (regularized Levenberg-Marquardt) or adam")
        ->check(CLI::IsMember({"bayesian_lm", "adam"}))
        ->capture_default_str();
    cmd->add_option("--epochs", cfg->max_epochs, "Epoch cap")->capture_default_str();
    cmd->add_option("--lr", cfg->learning_rate, "Adam learning rate")
        ->capture_default_str();
    cmd->add_option("--seed", cfg->seed, "Weight-init seed")->capture_default_str();
    cmd->add_option("--hidden", cfg->hidden_width, "Hidden-layer width")
        ->capture_default_str();
    cmd->add_option("--patience", cfg->patience, "Adam early-stopping window")
        ->capture_default_str();
    cmd->add_option("--out", *model_out, "Model JSON output path")->required();
    cmd->add_option("--history", *history_out,
                    "Per-epoch CSV (epoch,mse_train,mse_val,alpha,beta,gamma)");
    cmd->add_option("--report", *report_out, "Training-report JSON output path");
    cmd->callback([=, &quiet] {
      cfg->algorithm = *algorithm == "adam" ? helios::TrainAlgorithm::adam
                                            : helios::TrainAlgorithm::bayesian_lm;
      const helios::DataSplit split = helios::import_split(*base);
      auto [model, report] = helios::train(split, *cfg);
      helios::save_model(model, *model_out);
      if (!history_out->empty())
        write_artifact(*history_out,
                       [&](std::ostream& out) { helios::write_history_csv(report, out); });
      if (!report_out->empty())
        write_artifact(*report_out, [&](std::ostream& out) {
          out << nlohmann::json(report).dump(2) << '\n';
        });
      if (!quiet) {
        std::cout << "epochs=" << report.epochs_run
                  << " mse_train_A2=" << helios::io::format_double(report.mse_train.a2)
                  << " mse_val_A2=" << helios::io::format_double(report.mse_validation.a2)
                  << " mse_test_A2=" << helios::io::format_double(report.mse_test.a2)
                  << "\n";
        if (cfg->algorithm == helios::TrainAlgorithm::bayesian_lm)
          std::cout << "alpha=" << helios::io::format_double(report.alpha)
                    << " beta=" << helios::io::format_double(report.beta)
                    << " gamma=" << helios::io::format_double(report.gamma) << "\n";
        std::cout << "model=" << *model_out << "\n";
      }
    });
  }

  // eval
  {
    auto* cmd = app.add_subcommand(
        "eval", "Score a saved model against a dataset CSV: MSE, error histogram, "
                "correlation coefficient");
    auto model_path = std::make_shared<std::string>();
    auto in_path = std::make_shared<std::string>();
    auto hist_out = std::make_shared<std::string>();
    auto report_out = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--in", *in_path, "Dataset CSV to score")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--histogram", *hist_out,
                    "Error-histogram CSV output (bin_lo,bin_hi,count)");
    cmd->add_option("--report", *report_out, "Evaluation-report JSON output");
    cmd->callback([=] {
      const helios::MlpModel model = helios::load_model(*model_path);
      const helios::Dataset data = helios::import_dataset(*in_path);
      const helios::EvalReport report = helios::evaluate(model, data);
      if (!hist_out->empty())
        write_artifact(*hist_out, [&](std::ostream& out) {
          helios::write_histogram_csv(report.histogram, out);
        });
      if (!report_out->empty())
        write_artifact(*report_out, [&](std::ostream& out) {
          nlohmann::json j{{"n", data.size()},
                           {"mse_A2", report.mse},
                           {"r", report.r},
                           {"error_min_A", report.histogram.min_error},
                           {"error_max_A", report.histogram.max_error}};
          out << j.dump(2) << '\n';
        });
      std::cout << "n=" << data.size()
                << " mse_A2=" << helios::io::format_double(report.mse)
                << " r=" << helios::io::format_double(report.r) << "\n";
    });
  }

  // predict
  {
    auto* cmd = app.add_subcommand(
        "predict", "Print the model's MPP current estimate for one (T, G) pair");
    auto model_path = std::make_shared<std::string>();
    auto t_c = std::make_shared<double>(25.0);
    auto g = std::make_shared<double>(1000.0);
    cmd->add_option("--model", *model_path, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--t", *t_c, "Cell temperature, degC")->capture_default_str();
    cmd->add_option("--g", *g, "Irradiance, W/m2")->capture_default_str();
    cmd->callback([=] {
      const helios::MlpModel model = helios::load_model(*model_path);
      std::cout << helios::io::format_double(model.forward(*t_c, *g)) << "\n";
    });
  }

  // simulate
  {
    auto* cmd = app.add_subcommand(
        "simulate", "Run one controller through a scenario and report tracking efficiency");
    auto controller = std::make_shared<std::string>();
    auto scenario_flags = std::make_shared<ScenarioFlags>();
    auto model_path = std::make_shared<std::string>();
    auto spec = std::make_shared<helios::ControllerSpec>();
    auto trace_out = std::make_shared<std::string>();
    cmd->add_option("--controller", *controller, "nn, po, ic, focv, or perfect")
        ->required()
        ->check(CLI::IsMember({"nn", "po", "ic", "focv", "perfect"}));
    add_scenario_flags(cmd, *scenario_flags);
    cmd->add_option("--model", *model_path, "Model JSON (required for nn)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--step-v", spec->step_v, "Hill-climber voltage step, V")
        ->capture_default_str();
    cmd->add_option("--epsilon", spec->ic_epsilon,
                    "Incremental-conductance tolerance band, A/V")
        ->capture_default_str();
    cmd->add_option("--focv-k", spec->focv_k, "Fractional open-circuit-voltage ratio")
        ->capture_default_str();
    cmd->add_option("--v-init", spec->v_ref_init, "Initial reference voltage, V")
        ->capture_default_str();
    cmd->add_option("--trace", *trace_out,
                    "Per-step trace CSV (t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V)");
    cmd->callback([=, &params_path] {
      const ModuleParams params = load_params(params_path);
      const helios::Scenario scenario = resolve_scenario(*scenario_flags);
      spec->kind = helios::controller_from_name(*controller);
      helios::MlpModel model;
      const helios::MlpModel* model_ptr = nullptr;
      if (!model_path->empty()) {
        model = helios::load_model(*model_path);
        model_ptr = &model;
      }
      const helios::SimResult result =
          helios::run_simulation(params, scenario, *spec, model_ptr);
      if (!trace_out->empty())
        write_artifact(*trace_out,
                       [&](std::ostream& out) { helios::write_trace_csv(result, out); });
      std::cout << "controller=" << result.controller_id
                << " scenario=" << result.scenario_id
                << " efficiency=" << helios::io::format_double(result.efficiency) << "\n";
    });
  }

  // compare
  {
    auto* cmd = app.add_subcommand(
        "compare", "Rank several controllers on one scenario and print the table "
                   "alongside literature-reported figures");
    auto names = std::make_shared<std::vector<std::string>>(
        std::vector<std::string>{"perfect", "po", "ic", "focv"});
    auto scenario_flags = std::make_shared<ScenarioFlags>();
    auto model_path = std::make_shared<std::string>();
    auto spec = std::make_shared<helios::ControllerSpec>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--controllers", *names, "Controllers to run (repeat or comma-separate)")
        ->delimiter(',')
        ->check(CLI::IsMember({"nn", "po", "ic", "focv", "perfect"}))
        ->capture_default_str();
    add_scenario_flags(cmd, *scenario_flags);
    cmd->add_option("--model", *model_path, "Model JSON (required when nn is listed)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--step-v", spec->step_v, "Hill-climber voltage step, V")
        ->capture_default_str();
    cmd->add_option("--epsilon", spec->ic_epsilon,
                    "Incremental-conductance tolerance band, A/V")
        ->capture_default_str();
    cmd->add_option("--focv-k", spec->focv_k, "Fractional open-circuit-voltage ratio")
        ->capture_default_str();
    cmd->add_option("--out", *out_path, "Comparison-report JSON output");
    cmd->callback([=, &params_path] {
      const ModuleParams params = load_params(params_path);
      const helios::Scenario scenario = resolve_scenario(*scenario_flags);
      std::vector<helios::ControllerSpec> specs;
      for (const std::string& name : *names) {
        helios::ControllerSpec s = *spec;
        s.kind = helios::controller_from_name(name);
        specs.push_back(s);
      }
      helios::MlpModel model;
      const helios::MlpModel* model_ptr = nullptr;
      if (!model_path->empty()) {
        model = helios::load_model(*model_path);
        model_ptr = &model;
      }
      const helios::ComparisonReport report =
          helios::compare(params, scenario, specs, model_ptr);
      helios::write_comparison_table(report, std::cout);
      if (!out_path->empty())
        write_artifact(*out_path, [&](std::ostream& out) {
          out << nlohmann::json(report).dump(2) << '\n';
        });
    });
  }

  // reproduce
  {
    auto* cmd = app.add_subcommand(
        "reproduce", "Run the full pipeline end-to-end and print the release-gate table");
    auto weights = std::make_shared<std::string>(std::string(HELIOS_DATA_DIR) +
                                                 "/paper_weights.json");
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--weights", *weights, "Published-weights JSON to verify")
        ->capture_default_str();
    cmd->add_option("--seed", *seed, "Pipeline seed")->capture_default_str();
    cmd->callback([=, &params_path, &exit_code] {
      helios::acceptance::Context ctx(load_params(params_path), *weights, *seed);
      const auto results = helios::acceptance::run_all(ctx);
      helios::acceptance::print_table(results, std::cout);
      for (const auto& r : results)
        if (!r.pass) exit_code = 1;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const helios::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
