#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helios/controllers.hpp"
#include "helios/errors.hpp"
#include "helios/io.hpp"
#include "helios/mlp.hpp"
#include "helios/mpp.hpp"
#include "helios/pv_model.hpp"

namespace helios {

struct ScenarioSample {
  double t_s = 0.0;  // sample time, s
  double t_c = 25.0; // cell temperature, °C
  double g = 1000.0; // irradiance, W/m^2
};

/// Environment profile driving a closed-loop run. Samples are held
/// zero-order between their timestamps.
struct Scenario {
  std::vector<ScenarioSample> samples;
  double control_period = 0.1;  // s
  double duration = 0.0;        // s
  std::string id = "scenario";

  void validate() const {
    if (samples.empty()) throw InvalidArgument("Scenario: no samples");
    if (samples.front().t_s != 0.0)
      throw InvalidArgument("Scenario: first sample must be at t = 0");
    for (std::size_t k = 1; k < samples.size(); ++k)
      if (!(samples[k].t_s > samples[k - 1].t_s))
        throw InvalidArgument("Scenario: sample times must be strictly increasing");
    if (control_period <= 0.0)
      throw InvalidArgument("Scenario: control_period must be > 0");
    if (duration <= 0.0) throw InvalidArgument("Scenario: duration must be > 0");
  }

  /// Index of the sample active at time t (zero-order hold).
  std::size_t index_at(double t) const {
    std::size_t idx = 0;
    while (idx + 1 < samples.size() && samples[idx + 1].t_s <= t) ++idx;
    return idx;
  }

  static Scenario constant_stc(double duration_s = 300.0) {
    Scenario s;
    s.samples = {{0.0, 25.0, 1000.0}};
    s.duration = duration_s;
    s.id = "constant-stc";
    return s;
  }

  /// Irradiance drop 1000 to 600 W/m^2 halfway through a 300 s run.
  static Scenario step_irradiance() {
    Scenario s;
    s.samples = {{0.0, 25.0, 1000.0}, {150.0, 25.0, 600.0}};
    s.duration = 300.0;
    s.id = "step-irradiance";
    return s;
  }
};

inline Scenario load_scenario_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("scenario: unparseable JSON in " + path + ": " + e.what());
  }
  if (!j.contains("control_period_s") || !j.contains("samples"))
    throw SchemaError("scenario: control_period_s and samples are required");
  Scenario s;
  try {
    s.control_period = j.at("control_period_s").get<double>();
    for (const auto& row : j.at("samples")) {
      ScenarioSample smp;
      smp.t_s = row.at("t_s").get<double>();
      smp.t_c = row.at("T_degC").get<double>();
      smp.g = row.at("G_Wm2").get<double>();
      s.samples.push_back(smp);
    }
    if (j.contains("duration_s"))
      s.duration = j.at("duration_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario: malformed field: ") + e.what());
  }
  if (s.duration <= 0.0 && !s.samples.empty())
    s.duration = s.samples.back().t_s + s.control_period;
  s.validate();
  return s;
}

inline Scenario load_scenario_csv(const std::string& path, double control_period = 0.1,
                                  double duration = 0.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("scenario: empty file");
  io::strip_cr(line);
  if (line != "t_s,T_degC,G_Wm2")
    throw SchemaError("scenario: expected header 't_s,T_degC,G_Wm2', got '" + line + "'");
  Scenario s;
  s.control_period = control_period;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    io::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError("scenario: expected 3 columns, got " + std::to_string(fields.size()),
                       line_no);
    s.samples.push_back({io::parse_double(fields[0], line_no),
                         io::parse_double(fields[1], line_no),
                         io::parse_double(fields[2], line_no)});
  }
  s.duration = duration > 0.0
                   ? duration
                   : (s.samples.empty() ? 0.0 : s.samples.back().t_s + control_period);
  s.validate();
  return s;
}

enum class ControllerKind { nn, po, ic, focv, perfect };

inline const char* controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::nn: return "nn";
    case ControllerKind::po: return "po";
    case ControllerKind::ic: return "ic";
    case ControllerKind::focv: return "focv";
    case ControllerKind::perfect: return "perfect";
  }
  return "unknown";
}

inline ControllerKind controller_from_name(const std::string& name) {
  if (name == "nn") return ControllerKind::nn;
  if (name == "po") return ControllerKind::po;
  if (name == "ic") return ControllerKind::ic;
  if (name == "focv") return ControllerKind::focv;
  if (name == "perfect") return ControllerKind::perfect;
  throw InvalidController("unknown controller '" + name + "'");
}

struct ControllerSpec {
  ControllerKind kind = ControllerKind::po;
  double step_v = 0.2;
  double ic_epsilon = 0.01;
  double focv_k = 0.80;
  double v_ref_init = 15.0;
};

struct TraceRow {
  double t_s = 0.0;
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;
  double p_mpp = 0.0;
  double v_ref = 0.0;
};

struct SimResult {
  std::vector<TraceRow> trace;
  double efficiency = 0.0;
  std::string controller_id;
  std::string scenario_id;
};

namespace detail {

struct EnvCache {
  const ModuleParams& params;
  const Scenario& scenario;
  std::map<std::size_t, MppResult> mpp;
  std::map<std::size_t, double> voc;

  const MppResult& mpp_at(std::size_t idx) {
    auto it = mpp.find(idx);
    if (it == mpp.end()) {
      const ScenarioSample& s = scenario.samples[idx];
      it = mpp.emplace(idx, find_mpp(params, EnvConditions::from_celsius(s.t_c, s.g))).first;
    }
    return it->second;
  }

  double voc_at(std::size_t idx) {
    auto it = voc.find(idx);
    if (it == voc.end()) {
      const ScenarioSample& s = scenario.samples[idx];
      it = voc.emplace(idx, open_circuit_voltage(
                                params, EnvConditions::from_celsius(s.t_c, s.g)))
               .first;
    }
    return it->second;
  }
};

/// Voltage on the curve where the current equals i_target, by bisection.
/// The current is strictly decreasing in voltage, so the bracket [0, voc]
/// contains exactly one crossing for targets inside (I(voc), I(0)).
inline double voltage_at_current(const ModuleParams& params, const EnvConditions& env,
                                 double i_target, double voc) {
  double lo = 0.0;
  double hi = voc;
  for (int iter = 0; iter < 60 && hi - lo > 1e-6; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (solve_output_current(params, env, mid) > i_target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Closed-loop quasi-static run: each control period the environment is read
/// (zero-order hold), the controller picks a reference voltage, the module
/// answers with its curve current, and the ideal maximum tracks alongside.
inline SimResult run_simulation(const ModuleParams& params, const Scenario& scenario,
                                const ControllerSpec& spec,
                                const MlpModel* model = nullptr) {
  scenario.validate();
  params.validate();
  if (spec.kind == ControllerKind::nn && model == nullptr)
    throw InvalidController("run_simulation: nn controller needs a model");
  if (spec.kind == ControllerKind::po || spec.kind == ControllerKind::ic)
    if (spec.step_v <= 0.0)
      throw InvalidArgument("run_simulation: step_v must be > 0");

  SimResult result;
  result.controller_id = controller_name(spec.kind);
  result.scenario_id = scenario.id;

  detail::EnvCache cache{params, scenario, {}, {}};
  ControllerState state;
  state.v_ref = spec.v_ref_init;
  state.ic_epsilon = spec.ic_epsilon;
  state.focv_k = spec.focv_k;

  const int n_steps = static_cast<int>(std::ceil(scenario.duration / scenario.control_period - 1e-9));
  result.trace.reserve(static_cast<std::size_t>(n_steps));

  double energy = 0.0;
  double energy_ideal = 0.0;

  for (int step = 0; step < n_steps; ++step) {
    const double t = step * scenario.control_period;
    const std::size_t env_idx = scenario.index_at(t);
    const ScenarioSample& smp = scenario.samples[env_idx];
    const EnvConditions env = EnvConditions::from_celsius(smp.t_c, smp.g);

    try {
      const MppResult& mpp = cache.mpp_at(env_idx);

      // choose the commanded voltage for this period
      double v_cmd = state.v_ref;
      switch (spec.kind) {
        case ControllerKind::perfect:
          v_cmd = mpp.v_mp;
          break;
        case ControllerKind::focv:
          v_cmd = focv_reference(cache.voc_at(env_idx), spec.focv_k);
          break;
        case ControllerKind::nn: {
          const double i_pred = model->forward(smp.t_c, smp.g);
          const double i_sc = solve_output_current(params, env, 0.0);
          if (i_pred <= 0.0 || i_pred >= i_sc)
            v_cmd = mpp.v_mp;  // prediction off the curve: oracle fallback
          else
            v_cmd = detail::voltage_at_current(params, env, i_pred, cache.voc_at(env_idx));
          break;
        }
        case ControllerKind::po:
        case ControllerKind::ic:
          v_cmd = state.v_ref;
          break;
      }

      const double i = solve_output_current(params, env, v_cmd);
      const double p = v_cmd * i;
      result.trace.push_back({t, v_cmd, i, p, mpp.p_max, v_cmd});
      energy += p * scenario.control_period;
      energy_ideal += mpp.p_max * scenario.control_period;

      const OperatingPoint measured{v_cmd, i, p};
      if (spec.kind == ControllerKind::po)
        state = po_step(state, measured, spec.step_v);
      else if (spec.kind == ControllerKind::ic)
        state = ic_step(state, measured, spec.step_v, spec.ic_epsilon);
    } catch (const NoConvergence& e) {
      throw NoConvergence("run_simulation: step " + std::to_string(step) + " (t=" +
                              std::to_string(t) + "): " + e.what(),
                          e.last_residual);
    } catch (const DegenerateCurve& e) {
      throw DegenerateCurve("run_simulation: step " + std::to_string(step) + " (t=" +
                            std::to_string(t) + "): " + e.what());
    }
  }

  result.efficiency = energy_ideal > 0.0 ? energy / energy_ideal : 0.0;
  return result;
}

struct ComparisonEntry {
  std::string controller;
  double efficiency = 0.0;
  bool ok = false;
  std::string error;
};

struct LiteratureFigure {
  std::string controller;
  std::string reported;
};

/// Reference efficiencies quoted in the MPPT literature, reported alongside
/// measured runs for context. The fuzzy controller is never simulated here;
/// its figure exists only as a quoted constant.
inline std::vector<LiteratureFigure> literature_figures() {
  return {{"po", "67.4%"}, {"ic", ">80%"}, {"fuzzy", "<=96%"}, {"nn", "~99.8%"}};
}

struct ComparisonReport {
  std::vector<ComparisonEntry> measured;  // ranked best-first, failures last
  std::vector<LiteratureFigure> literature;
  std::string scenario_id;
};

/// Runs every controller on the identical scenario. A controller that throws
/// is reported as failed without aborting the others.
inline ComparisonReport compare(const ModuleParams& params, const Scenario& scenario,
                                const std::vector<ControllerSpec>& controllers,
                                const MlpModel* model = nullptr) {
  if (controllers.size() < 2)
    throw InvalidArgument("compare: need at least two controllers");
  ComparisonReport report;
  report.scenario_id = scenario.id;
  report.literature = literature_figures();
  for (const ControllerSpec& spec : controllers) {
    ComparisonEntry entry;
    entry.controller = controller_name(spec.kind);
    try {
      const SimResult run = run_simulation(params, scenario, spec, model);
      entry.efficiency = run.efficiency;
      entry.ok = true;
    } catch (const Error& e) {
      entry.error = e.what();
    }
    report.measured.push_back(entry);
  }
  std::stable_sort(report.measured.begin(), report.measured.end(),
                   [](const ComparisonEntry& a, const ComparisonEntry& b) {
                     if (a.ok != b.ok) return a.ok;
                     return a.efficiency > b.efficiency;
                   });
  return report;
}

inline void write_trace_csv(const SimResult& result, std::ostream& out) {
  out << "t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V\n";
  for (const TraceRow& row : result.trace)
    out << io::format_double(row.t_s) << ',' << io::format_double(row.v) << ','
        << io::format_double(row.i) << ',' << io::format_double(row.p) << ','
        << io::format_double(row.p_mpp) << ',' << io::format_double(row.v_ref) << '\n';
}

inline void to_json(nlohmann::json& j, const ComparisonReport& report) {
  nlohmann::json measured = nlohmann::json::array();
  for (const ComparisonEntry& e : report.measured) {
    nlohmann::json row{{"controller", e.controller}, {"source", "measured"}};
    if (e.ok)
      row["efficiency"] = e.efficiency;
    else
      row["error"] = e.error;
    measured.push_back(row);
  }
  nlohmann::json literature = nlohmann::json::array();
  for (const LiteratureFigure& f : report.literature)
    literature.push_back({{"controller", f.controller},
                          {"efficiency", f.reported},
                          {"source", "literature-reported"}});
  j = nlohmann::json{{"scenario", report.scenario_id},
                     {"measured", measured},
                     {"literature", literature}};
}

inline void write_comparison_table(const ComparisonReport& report, std::ostream& out) {
  out << "scenario: " << report.scenario_id << "\n";
  out << "measured (ranked):\n";
  for (const ComparisonEntry& e : report.measured) {
    if (e.ok) {
      out << "  " << e.controller << "  efficiency " << e.efficiency * 100.0 << "%\n";
    } else {
      out << "  " << e.controller << "  FAILED: " << e.error << "\n";
    }
  }
  out << "literature-reported (not measured here):\n";
  for (const LiteratureFigure& f : report.literature)
    out << "  " << f.controller << "  " << f.reported << "\n";
}

}  // namespace helios
