#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helios/controllers.hpp"
#include "helios/dataset.hpp"
#include "helios/mlp.hpp"
#include "helios/mpp.hpp"
#include "helios/pv_model.hpp"
#include "helios/rng.hpp"
#include "helios/sim.hpp"
#include "helios/trainer.hpp"

// Release gate: every shipped build must reproduce the calibrated module's
// headline numbers, the documented dataset/>training pipeline, and the
// controller ordering. Each criterion reports one pass/fail line; the checks
// are also runnable end-to-end through the batch tool.
namespace helios::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Memoizes the expensive pipeline stages so criteria can share them.
class Context {
 public:
  explicit Context(ModuleParams params = {}, std::string weights_path = {},
                   std::uint64_t seed = 1)
      : params_(std::move(params)), weights_path_(std::move(weights_path)), seed_(seed) {}

  const ModuleParams& params() const { return params_; }
  const std::string& weights_path() const { return weights_path_; }
  std::uint64_t seed() const { return seed_; }

  const Dataset& dataset() {
    if (dataset_.empty()) {
      GridSpec grid;
      dataset_ = generate_grid(params_, grid.t_values(), grid.g_values());
    }
    return dataset_;
  }

  const DataSplit& split() {
    if (split_.train.empty()) split_ = shuffle_split(dataset(), seed_);
    return split_;
  }

  const MlpModel& model() {
    ensure_trained();
    return model_;
  }

  const TrainReport& report() {
    ensure_trained();
    return report_;
  }

 private:
  void ensure_trained() {
    if (!trained_) {
      TrainConfig cfg;
      cfg.seed = seed_;
      auto [m, r] = train(split(), cfg);
      model_ = std::move(m);
      report_ = std::move(r);
      trained_ = true;
    }
  }

  ModuleParams params_;
  std::string weights_path_;
  std::uint64_t seed_;
  Dataset dataset_;
  DataSplit split_;
  MlpModel model_;
  TrainReport report_;
  bool trained_ = false;
};

namespace detail {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  bool pass() const { return pass_; }
  const std::string& failures() const { return failures_; }

 private:
  bool pass_ = true;
  std::string failures_;
};

inline std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

template <typename F>
CriterionResult timed(int id, const std::string& name, double budget_s, F body) {
  CriterionResult result;
  result.id = id;
  result.name = name;
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0)
    check.expect(result.seconds < budget_s,
                 "runtime " + fmt(result.seconds) + " s exceeds " + fmt(budget_s) + " s");
  result.pass = check.pass();
  result.detail = check.pass() ? "ok" : check.failures();
  return result;
}

}  // namespace detail

/// 1: the calibrated module reproduces the published STC operating point.
inline CriterionResult criterion_stc_operating_point(Context& ctx) {
  return detail::timed(1, "STC operating point", 1.0, [&](detail::Check& check) {
    const MppResult mpp = find_mpp(ctx.params(), EnvConditions::from_celsius(25.0, 1000.0));
    check.expect(std::abs(mpp.p_max - 200.0170) <= 0.01 * 200.0170,
                 "p_max " + detail::fmt(mpp.p_max) + " outside 200.017 W +-1%");
    check.expect(std::abs(mpp.v_mp - 26.4) <= 0.3,
                 "v_mp " + detail::fmt(mpp.v_mp) + " outside 26.4 V +-0.3 V");
    check.expect(std::abs(mpp.i_mp - 7.5764) <= 0.01 * 7.5764,
                 "i_mp " + detail::fmt(mpp.i_mp) + " outside 7.5764 A +-1%");
  });
}

/// 2: solver residuals, curve endpoints, and P-V unimodality.
inline CriterionResult criterion_solver_properties(Context& ctx) {
  return detail::timed(2, "solver property suite", 10.0, [&](detail::Check& check) {
    const ModuleParams& p = ctx.params();
    std::mt19937_64 gen(2024u);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double t_c = rng::uniform(gen, 15.0, 40.0);
      const double g = rng::uniform(gen, 200.0, 1090.0);
      const double v = rng::uniform(gen, 0.0, p.voc_ref);
      const EnvConditions env = EnvConditions::from_celsius(t_c, g);
      const double i = solve_output_current(p, env, v);
      const double res = photo_current(p, env) -
                         saturation_current(p, env.t_k) *
                             std::expm1((v + i * p.rs) / thermal_voltage(p, env.t_k)) -
                         (v + i * p.rs) / p.rsh - i;
      worst = std::max(worst, std::abs(res));
    }
    check.expect(worst <= 1e-9, "worst residual " + detail::fmt(worst) + " above 1e-9 A");

    const EnvConditions stc{298.15, 1000.0};
    const double isc = solve_output_current(p, stc, 0.0);
    const double iph = photo_current(p, stc);
    check.expect(std::abs(isc - iph) <= 0.005 * iph,
                 "I(0) deviates from photo-current by more than 0.5%");
    const double voc = open_circuit_voltage(p, stc);
    check.expect(std::abs(voc - p.voc_ref) <= 0.02 * p.voc_ref,
                 "open-circuit voltage " + detail::fmt(voc) + " outside voc_ref +-2%");

    const IVCurve curve = sweep_iv(p, stc, voc, 1000);
    int peak = 0;
    for (int k = 1; k < 1000; ++k)
      if (curve.points[k].p > curve.points[peak].p) peak = k;
    bool unimodal = true;
    for (int k = 1; k <= peak; ++k)
      if (curve.points[k].p <= curve.points[k - 1].p) unimodal = false;
    for (int k = peak + 1; k < 1000; ++k)
      if (curve.points[k].p >= curve.points[k - 1].p) unimodal = false;
    check.expect(unimodal, "P-V sweep is not unimodal");
  });
}

/// 3: dataset dimensions, split sizes, and byte-exact determinism.
inline CriterionResult criterion_dataset_reproduction(Context& ctx) {
  return detail::timed(3, "dataset reproduction", 0.0, [&](detail::Check& check) {
    const Dataset& data = ctx.dataset();
    check.expect(data.size() == 1300, "row count " + std::to_string(data.size()));
    double t_lo = data.front().t_c, t_hi = t_lo, g_lo = data.front().g, g_hi = g_lo;
    for (const Sample& s : data) {
      t_lo = std::min(t_lo, s.t_c);
      t_hi = std::max(t_hi, s.t_c);
      g_lo = std::min(g_lo, s.g);
      g_hi = std::max(g_hi, s.g);
    }
    check.expect(t_lo == 15.0 && t_hi == 40.0, "temperature span not [15, 40]");
    check.expect(g_lo == 200.0 && g_hi == 1090.0, "irradiance span not [200, 1090]");

    const DataSplit& split = ctx.split();
    check.expect(split.train.size() == 1105 && split.val.size() == 130 &&
                     split.test.size() == 65,
                 "split sizes (" + std::to_string(split.train.size()) + ", " +
                     std::to_string(split.val.size()) + ", " +
                     std::to_string(split.test.size()) + ") != (1105, 130, 65)");

    // regenerate from scratch: identical bytes
    GridSpec grid;
    const Dataset again = generate_grid(ctx.params(), grid.t_values(), grid.g_values());
    const DataSplit split_again = shuffle_split(again, ctx.seed());
    std::ostringstream a, b;
    write_dataset_csv(split.train, a);
    write_dataset_csv(split_again.train, b);
    check.expect(a.str() == b.str(), "same-seed regeneration is not byte-identical");
  });
}

/// 4: training quality on the default split.
inline CriterionResult criterion_training_quality(Context& ctx) {
  return detail::timed(4, "training quality", 300.0, [&](detail::Check& check) {
    const TrainReport& report = ctx.report();
    check.expect(report.mse_test.a2 <= 5e-3,
                 "test MSE " + detail::fmt(report.mse_test.a2) + " A^2 above 5e-3");
    const MppResult oracle = find_mpp(ctx.params(), EnvConditions::from_celsius(25.0, 1000.0));
    const double pred = ctx.model().forward(25.0, 1000.0);
    const double rel = std::abs(pred - oracle.i_mp) / oracle.i_mp;
    check.expect(rel <= 0.005, "prediction " + detail::fmt(pred) + " deviates " +
                                   detail::fmt(rel * 100.0) + "% from the oracle");
  });
}

/// 5: analytic gradients against central finite differences.
inline CriterionResult criterion_gradient_oracle(Context&) {
  return detail::timed(5, "gradient oracle", 0.0, [&](detail::Check& check) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 gen(seed);
      MlpModel model;
      const int width = 15;
      model.w_hidden.resize(width);
      model.b_hidden.resize(width);
      model.w_out.resize(width);
      for (int k = 0; k < width; ++k) {
        model.w_hidden[k] = {rng::uniform(gen, -0.5, 0.5), rng::uniform(gen, -0.5, 0.5)};
        model.b_hidden[k] = rng::uniform(gen, -0.5, 0.5);
        model.w_out[k] = rng::uniform(gen, -0.5, 0.5);
      }
      model.b_out = rng::uniform(gen, -0.5, 0.5);
      model.norm.t = {15.0, 40.0};
      model.norm.g = {200.0, 1090.0};
      model.norm.imp = {1.0, 9.0};

      Dataset batch;
      for (int k = 0; k < 8; ++k)
        batch.push_back({rng::uniform(gen, 15.0, 40.0), rng::uniform(gen, 200.0, 1090.0),
                         rng::uniform(gen, 1.0, 9.0)});

      const std::vector<double> analytic = gradient(model, batch);

      auto mse = [&](const MlpModel& m) {
        double acc = 0.0;
        for (const Sample& s : batch) {
          const double e = m.norm.norm_imp(m.forward(s.t_c, s.g)) - m.norm.norm_imp(s.i_mp);
          acc += e * e;
        }
        return acc / static_cast<double>(batch.size());
      };
      std::vector<double*> refs;
      for (auto& row : model.w_hidden) {
        refs.push_back(&row[0]);
        refs.push_back(&row[1]);
      }
      for (double& b : model.b_hidden) refs.push_back(&b);
      for (double& w : model.w_out) refs.push_back(&w);
      refs.push_back(&model.b_out);

      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t k = 0; k < refs.size(); ++k) {
        const double saved = *refs[k];
        *refs[k] = saved + h;
        const double up = mse(model);
        *refs[k] = saved - h;
        const double down = mse(model);
        *refs[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[k]), std::abs(fd), 1e-6});
        worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
      }
      check.expect(worst <= 1e-5, "seed " + std::to_string(seed) + ": worst relative error " +
                                      detail::fmt(worst));
    }
  });
}

/// 6: histogram bin arithmetic on an injected error list.
inline CriterionResult criterion_histogram_arithmetic(Context&) {
  return detail::timed(6, "histogram arithmetic", 0.0, [&](detail::Check& check) {
    std::vector<double> errors = {-0.2222, 0.1968};
    std::mt19937_64 gen(6u);
    for (int k = 0; k < 300; ++k) errors.push_back(rng::uniform(gen, -0.2222, 0.1968));
    const ErrorHistogram hist = ErrorHistogram::from_errors(errors);
    check.expect(std::abs(hist.bin_width() - 0.02095) <= 1e-12,
                 "bin width " + detail::fmt(hist.bin_width()) + " != 0.02095");

    std::vector<std::size_t> independent(20, 0);
    for (double e : errors) {
      for (int b = 0; b < 20; ++b) {
        const bool last = b == 19;
        if (e >= hist.bin_edges[static_cast<std::size_t>(b)] &&
            (last ? e <= hist.bin_edges[static_cast<std::size_t>(b) + 1]
                  : e < hist.bin_edges[static_cast<std::size_t>(b) + 1])) {
          ++independent[static_cast<std::size_t>(b)];
          break;
        }
      }
    }
    std::size_t total = 0;
    for (int b = 0; b < 20; ++b) {
      total += hist.counts[static_cast<std::size_t>(b)];
      const double diff =
          std::abs(static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) -
                   static_cast<double>(independent[static_cast<std::size_t>(b)]));
      check.expect(diff <= 1.0, "bin " + std::to_string(b) + " disagrees with oracle by " +
                                    detail::fmt(diff));
    }
    check.expect(total == errors.size(), "histogram loses samples");
  });
}

/// 7: controller ordering on both bundled scenarios.
inline CriterionResult criterion_controller_ordering(Context& ctx) {
  return detail::timed(7, "controller ordering", 30.0, [&](detail::Check& check) {
    const MlpModel& model = ctx.model();
    for (const Scenario& scenario :
         {Scenario::constant_stc(300.0), Scenario::step_irradiance()}) {
      const double nn =
          run_simulation(ctx.params(), scenario, {ControllerKind::nn}, &model).efficiency;
      const double po = run_simulation(ctx.params(), scenario, {ControllerKind::po}).efficiency;
      const double ic = run_simulation(ctx.params(), scenario, {ControllerKind::ic}).efficiency;
      const double perfect =
          run_simulation(ctx.params(), scenario, {ControllerKind::perfect}).efficiency;
      const std::string tag = " (" + scenario.id + ")";
      check.expect(nn >= 0.99, "nn efficiency " + detail::fmt(nn) + " below 0.99" + tag);
      check.expect(nn > po, "nn " + detail::fmt(nn) + " not above po " + detail::fmt(po) + tag);
      check.expect(ic >= po, "ic " + detail::fmt(ic) + " below po " + detail::fmt(po) + tag);
      check.expect(std::abs(perfect - 1.0) <= 1e-6,
                   "perfect controller scored " + detail::fmt(perfect) + tag);
    }
  });
}

/// 8: the bundled weight file matches the published tables.
inline CriterionResult criterion_published_weights(Context& ctx) {
  return detail::timed(8, "published weight transcription", 0.0, [&](detail::Check& check) {
    const MlpModel reference = load_paper_weights();
    const MlpModel file = ctx.weights_path().empty() ? reference
                                                     : load_model(ctx.weights_path());
    check.expect(file.width() == 15, "width != 15");

    // spot fixtures transcribed independently of the loader
    check.expect(file.b_hidden[2] == 0.476703785811994, "hidden bias row 3 mismatch");
    check.expect(file.w_hidden[0][0] == 0.330659943126136 &&
                     file.w_hidden[0][1] == 0.375354867765757,
                 "hidden weight row 1 mismatch");
    check.expect(file.w_out[0] == 0.526055556926590, "output weight row 1 mismatch");
    check.expect(file.b_out == 0.1528, "output bias != 0.1528");

    bool all_equal = true;
    for (int k = 0; k < 15; ++k)
      if (file.w_hidden[k][0] != reference.w_hidden[k][0] ||
          file.w_hidden[k][1] != reference.w_hidden[k][1] ||
          file.b_hidden[k] != reference.b_hidden[k] || file.w_out[k] != reference.w_out[k])
        all_equal = false;
    check.expect(all_equal, "file disagrees with the embedded transcription");
  });
}

/// 9: one network control decision (inference plus operating-point solve)
/// stays under a millisecond on average.
inline CriterionResult criterion_decision_latency(Context& ctx) {
  return detail::timed(9, "decision latency", 0.0, [&](detail::Check& check) {
    const MlpModel& model = ctx.model();
    const ModuleParams& p = ctx.params();
    const EnvConditions stc{298.15, 1000.0};
    const double voc = open_circuit_voltage(p, stc);
    volatile double sink = 0.0;

    const auto start = std::chrono::steady_clock::now();
    const int steps = 1000;
    for (int k = 0; k < steps; ++k) {
      const double i_pred = model.forward(25.0, 1000.0);
      double lo = 0.0;
      double hi = voc;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (solve_output_current(p, stc, mid) > i_pred)
          lo = mid;
        else
          hi = mid;
      }
      sink = sink + lo;
    }
    const double mean_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count() /
                           steps;
    check.expect(mean_ms < 1.0,
                 "mean decision time " + detail::fmt(mean_ms) + " ms not under 1 ms");
  });
}

inline std::vector<CriterionResult> run_all(Context& ctx) {
  return {criterion_stc_operating_point(ctx), criterion_solver_properties(ctx),
          criterion_dataset_reproduction(ctx), criterion_training_quality(ctx),
          criterion_gradient_oracle(ctx),      criterion_histogram_arithmetic(ctx),
          criterion_controller_ordering(ctx),  criterion_published_weights(ctx),
          criterion_decision_latency(ctx)};
}

inline void print_row(const CriterionResult& r, std::ostream& out) {
  out << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.name
      << "): " << r.detail << "  [" << detail::fmt(r.seconds) << " s]\n";
}

inline void print_table(const std::vector<CriterionResult>& results, std::ostream& out) {
  bool all = true;
  for (const CriterionResult& r : results) {
    print_row(r, out);
    all = all && r.pass;
  }
  out << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
}

}  // namespace helios::acceptance
