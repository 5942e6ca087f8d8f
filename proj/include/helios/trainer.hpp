#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "helios/dataset.hpp"
#include "helios/errors.hpp"
#include "helios/io.hpp"
#include "helios/mlp.hpp"
#include "helios/rng.hpp"

namespace helios {

enum class TrainAlgorithm { bayesian_lm, adam };

struct ConvergenceConfig {
  double gradient_tol = 1e-7;  // stop when the objective gradient inf-norm falls below
  double mu_max = 1e10;        // damping cap; reaching it ends training
  int no_progress_epochs = 10; // consecutive rejected epochs tolerated
};

struct TrainConfig {
  TrainAlgorithm algorithm = TrainAlgorithm::bayesian_lm;
  int max_epochs = 1000;
  double learning_rate = 0.001;  // adam only
  std::uint64_t seed = 1;
  double mu_init = 0.005;
  double mu_factor = 10.0;
  ConvergenceConfig convergence;
  int hidden_width = 15;
  int patience = 50;  // adam early-stopping window on validation MSE

  void validate() const {
    if (max_epochs < 1) throw InvalidArgument("TrainConfig: max_epochs must be >= 1");
    if (learning_rate <= 0.0) throw InvalidArgument("TrainConfig: learning_rate must be > 0");
    if (mu_init <= 0.0) throw InvalidArgument("TrainConfig: mu_init must be > 0");
    if (mu_factor <= 1.0) throw InvalidArgument("TrainConfig: mu_factor must be > 1");
    if (hidden_width < 1) throw InvalidArgument("TrainConfig: hidden_width must be >= 1");
    if (patience < 1) throw InvalidArgument("TrainConfig: patience must be >= 1");
  }
};

/// MSE in the two unit systems the reports use: the trainer's normalized
/// target units and physical amperes squared.
struct MseValue {
  double norm = 0.0;
  double a2 = 0.0;
};

struct EpochStats {
  int epoch = 0;
  double mse_train = 0.0;  // normalized units
  double mse_val = 0.0;    // normalized units; 0 when there is no validation set
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct TrainReport {
  MseValue mse_train;
  MseValue mse_validation;
  MseValue mse_test;
  int epochs_run = 0;
  double alpha = 0.0;  // final hyperparameters, bayesian_lm only
  double beta = 0.0;
  double gamma = 0.0;
  std::vector<EpochStats> history;
};

namespace detail {

/// Packed parameter order: hidden rows [w_T, w_G] per neuron, hidden biases,
/// output weights, output bias. Total count 4*width + 1.
inline Eigen::VectorXd pack_weights(const MlpModel& m) {
  const int h = m.width();
  Eigen::VectorXd v(4 * h + 1);
  int idx = 0;
  for (int k = 0; k < h; ++k) {
    v[idx++] = m.w_hidden[k][0];
    v[idx++] = m.w_hidden[k][1];
  }
  for (int k = 0; k < h; ++k) v[idx++] = m.b_hidden[k];
  for (int k = 0; k < h; ++k) v[idx++] = m.w_out[k];
  v[idx] = m.b_out;
  return v;
}

inline void unpack_weights(const Eigen::VectorXd& v, MlpModel& m) {
  const int h = m.width();
  int idx = 0;
  for (int k = 0; k < h; ++k) {
    m.w_hidden[k][0] = v[idx++];
    m.w_hidden[k][1] = v[idx++];
  }
  for (int k = 0; k < h; ++k) m.b_hidden[k] = v[idx++];
  for (int k = 0; k < h; ++k) m.w_out[k] = v[idx++];
  m.b_out = v[idx];
}

struct NormalizedBatch {
  Eigen::MatrixX2d x;  // normalized (t, g) rows
  Eigen::VectorXd y;   // normalized targets
};

inline NormalizedBatch normalize_batch(const Dataset& data, const NormSpec& norm) {
  NormalizedBatch b;
  const auto n = static_cast<Eigen::Index>(data.size());
  b.x.resize(n, 2);
  b.y.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    b.x(j, 0) = norm.norm_t(data[static_cast<std::size_t>(j)].t_c);
    b.x(j, 1) = norm.norm_g(data[static_cast<std::size_t>(j)].g);
    b.y[j] = norm.norm_imp(data[static_cast<std::size_t>(j)].i_mp);
  }
  return b;
}

/// Residuals e_j = prediction_j - target_j in normalized units; optionally
/// the Jacobian de_j/dw in packed order.
inline void residuals(const Eigen::VectorXd& w, int h, const NormalizedBatch& batch,
                      Eigen::VectorXd& e, Eigen::MatrixXd* jac = nullptr) {
  const Eigen::Index n = batch.y.size();
  e.resize(n);
  if (jac) jac->resize(n, 4 * h + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xt = batch.x(j, 0);
    const double xg = batch.x(j, 1);
    double acc = w[4 * h];  // output bias
    for (int k = 0; k < h; ++k) {
      const double hk = std::tanh(w[2 * k] * xt + w[2 * k + 1] * xg + w[2 * h + k]);
      acc += w[3 * h + k] * hk;
      if (jac) {
        const double wo = w[3 * h + k];
        const double d = wo * (1.0 - hk * hk);  // de/d(pre-activation_k)
        (*jac)(j, 2 * k) = d * xt;
        (*jac)(j, 2 * k + 1) = d * xg;
        (*jac)(j, 2 * h + k) = d;
        (*jac)(j, 3 * h + k) = hk;
      }
    }
    e[j] = acc - batch.y[j];
    if (jac) (*jac)(j, 4 * h) = 1.0;
  }
}

inline double mse_of(const Eigen::VectorXd& w, int h, const NormalizedBatch& batch) {
  if (batch.y.size() == 0) return 0.0;
  Eigen::VectorXd e;
  residuals(w, h, batch, e);
  return e.squaredNorm() / static_cast<double>(e.size());
}

inline Eigen::VectorXd random_init(int h, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd w(4 * h + 1);
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = rng::uniform(gen, -0.5, 0.5);
  return w;
}

}  // namespace detail

/// Exact analytic gradient of the batch MSE (normalized units, mean over the
/// batch) with respect to the packed parameter vector. Exposed so the
/// backpropagation can be checked against finite differences.
inline std::vector<double> gradient(const MlpModel& model, const Dataset& batch) {
  if (batch.empty()) throw EmptyDataset("gradient: empty batch");
  model.validate();
  const int h = model.width();
  const detail::NormalizedBatch nb = detail::normalize_batch(batch, model.norm);
  const Eigen::VectorXd w = detail::pack_weights(model);
  Eigen::VectorXd e;
  Eigen::MatrixXd jac;
  detail::residuals(w, h, nb, e, &jac);
  const Eigen::VectorXd g = 2.0 / static_cast<double>(e.size()) * (jac.transpose() * e);
  return {g.data(), g.data() + g.size()};
}

namespace detail {

struct TrainContext {
  NormalizedBatch train;
  NormalizedBatch val;
  NormalizedBatch test;
  double a2_scale = 1.0;  // (imp range / 2)^2, converts normalized MSE to A^2
};

inline void finish_report(TrainReport& rep, const Eigen::VectorXd& w, int h,
                          const TrainContext& ctx) {
  rep.mse_train.norm = mse_of(w, h, ctx.train);
  rep.mse_validation.norm = mse_of(w, h, ctx.val);
  rep.mse_test.norm = mse_of(w, h, ctx.test);
  rep.mse_train.a2 = rep.mse_train.norm * ctx.a2_scale;
  rep.mse_validation.a2 = rep.mse_validation.norm * ctx.a2_scale;
  rep.mse_test.a2 = rep.mse_test.norm * ctx.a2_scale;
}

inline void train_bayesian_lm(Eigen::VectorXd& w, int h, const TrainContext& ctx,
                              const TrainConfig& cfg, TrainReport& rep) {
  const Eigen::Index n = ctx.train.y.size();
  const Eigen::Index nw = w.size();
  const double dbl_n = static_cast<double>(n);
  const double dbl_nw = static_cast<double>(nw);

  double alpha = 0.0;
  double beta = 1.0;
  double gamma = dbl_nw;
  double mu = cfg.mu_init;
  int consecutive_rejects = 0;

  Eigen::VectorXd e;
  Eigen::MatrixXd jac;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nw, nw);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    residuals(w, h, ctx.train, e, &jac);
    double ed = e.squaredNorm();
    double ew = w.squaredNorm();
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    // hyperparameter re-estimation from the fresh curvature (skipped on the
    // first epoch, which runs with the plain least-squares setting)
    if (epoch > 1) {
      Eigen::MatrixXd hs = beta * jtj;
      hs.diagonal().array() += alpha;
      const double tr = hs.ldlt().solve(eye).trace();
      if (std::isfinite(tr)) gamma = dbl_nw - alpha * tr;
      gamma = std::clamp(gamma, 0.0, dbl_nw);
      alpha = gamma / (2.0 * std::max(ew, 1e-12));
      beta = (dbl_n - gamma) / (2.0 * std::max(ed, 1e-12));
      if (beta <= 0.0) beta = dbl_n / (2.0 * std::max(ed, 1e-12));
    }

    const Eigen::VectorXd grad = 2.0 * beta * (jac.transpose() * e) + 2.0 * alpha * w;
    const double objective = beta * ed + alpha * ew;

    auto record = [&](int ep) {
      EpochStats st;
      st.epoch = ep;
      st.mse_train = e.squaredNorm() / dbl_n;
      st.mse_val = mse_of(w, h, ctx.val);
      st.alpha = alpha;
      st.beta = beta;
      st.gamma = gamma;
      rep.history.push_back(st);
      rep.epochs_run = ep;
    };

    if (grad.lpNorm<Eigen::Infinity>() <= cfg.convergence.gradient_tol) {
      record(epoch);
      break;
    }

    Eigen::MatrixXd a0 = 2.0 * beta * jtj;
    a0.diagonal().array() += 2.0 * alpha;

    bool accepted = false;
    bool mu_capped = false;
    for (int escalation = 0; escalation < 60; ++escalation) {
      Eigen::MatrixXd a = a0;
      a.diagonal().array() += mu;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      Eigen::VectorXd delta;
      bool solved = ldlt.info() == Eigen::Success;
      if (solved) {
        delta = ldlt.solve(-grad);
        solved = delta.allFinite();
      }
      if (!solved) {
        if (mu >= cfg.convergence.mu_max)
          throw SingularHessian("bayesian_lm: normal equations unsolvable at damping cap");
        mu *= cfg.mu_factor;
        continue;
      }

      const Eigen::VectorXd w_try = w + delta;
      Eigen::VectorXd e_try;
      residuals(w_try, h, ctx.train, e_try);
      const double objective_try = beta * e_try.squaredNorm() + alpha * w_try.squaredNorm();
      if (objective_try < objective) {
        w = w_try;
        e = e_try;
        mu = std::max(mu / cfg.mu_factor, 1e-20);
        accepted = true;
        break;
      }
      if (mu >= cfg.convergence.mu_max) {
        mu_capped = true;
        break;
      }
      mu *= cfg.mu_factor;
    }

    record(epoch);

    if (accepted) {
      consecutive_rejects = 0;
      continue;
    }
    if (mu_capped) break;  // damping cap reached: treat as converged
    if (++consecutive_rejects >= cfg.convergence.no_progress_epochs)
      throw NoProgress("bayesian_lm: no accepted step for " +
                       std::to_string(consecutive_rejects) + " consecutive epochs");
  }

  rep.alpha = alpha;
  rep.beta = beta;
  rep.gamma = gamma;
}

inline void train_adam(Eigen::VectorXd& w, int h, const TrainContext& ctx,
                       const TrainConfig& cfg, TrainReport& rep) {
  const double n = static_cast<double>(ctx.train.y.size());
  const double b1 = 0.9;
  const double b2 = 0.999;
  const double eps = 1e-8;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(w.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(w.size());

  const bool has_val = ctx.val.y.size() > 0;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w = w;
  int since_best = 0;

  Eigen::VectorXd e;
  Eigen::MatrixXd jac;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    residuals(w, h, ctx.train, e, &jac);
    const Eigen::VectorXd grad = 2.0 / n * (jac.transpose() * e);
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.convergence.gradient_tol) {
      rep.epochs_run = epoch;
      break;
    }

    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, epoch);
    const double c2 = 1.0 - std::pow(b2, epoch);
    w -= (cfg.learning_rate / c1) *
         m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());

    EpochStats st;
    st.epoch = epoch;
    st.mse_train = mse_of(w, h, ctx.train);
    st.mse_val = mse_of(w, h, ctx.val);
    rep.history.push_back(st);
    rep.epochs_run = epoch;

    if (has_val) {
      if (st.mse_val < best_val) {
        best_val = st.mse_val;
        best_w = w;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (has_val) w = best_w;
}

}  // namespace detail

/// Fits a fresh model to the split. Normalization ranges come from the
/// training set alone. bayesian_lm runs to convergence and returns the final
/// weights; adam early-stops on validation and returns the best-on-validation
/// weights.
inline std::pair<MlpModel, TrainReport> train(const DataSplit& split, const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.empty()) throw EmptyDataset("train: empty training set");

  MlpModel model;
  const int h = cfg.hidden_width;
  model.w_hidden.assign(static_cast<std::size_t>(h), {0.0, 0.0});
  model.b_hidden.assign(static_cast<std::size_t>(h), 0.0);
  model.w_out.assign(static_cast<std::size_t>(h), 0.0);
  model.norm = NormSpec::from_training(split.train);

  detail::TrainContext ctx;
  ctx.train = detail::normalize_batch(split.train, model.norm);
  ctx.val = detail::normalize_batch(split.val, model.norm);
  ctx.test = detail::normalize_batch(split.test, model.norm);
  const double half_range = (model.norm.imp.max - model.norm.imp.min) / 2.0;
  ctx.a2_scale = half_range * half_range;

  Eigen::VectorXd w = detail::random_init(h, cfg.seed);
  TrainReport rep;
  if (cfg.algorithm == TrainAlgorithm::bayesian_lm)
    detail::train_bayesian_lm(w, h, ctx, cfg, rep);
  else
    detail::train_adam(w, h, ctx, cfg, rep);

  detail::unpack_weights(w, model);
  detail::finish_report(rep, w, h, ctx);
  model.validate();
  return {model, rep};
}

/// Fixed-width 20-bin histogram over an error list; the bin width rule keeps
/// the two extreme samples exactly on the outer edges.
struct ErrorHistogram {
  std::vector<double> bin_edges;  // 21 ascending values
  std::vector<std::size_t> counts;  // 20 bins
  double min_error = 0.0;
  double max_error = 0.0;

  static constexpr int kBins = 20;

  static ErrorHistogram from_errors(const std::vector<double>& errors) {
    if (errors.empty()) throw EmptyDataset("ErrorHistogram: no errors");
    ErrorHistogram hist;
    hist.min_error = *std::min_element(errors.begin(), errors.end());
    hist.max_error = *std::max_element(errors.begin(), errors.end());
    const double width = (hist.max_error - hist.min_error) / kBins;
    hist.bin_edges.resize(kBins + 1);
    for (int k = 0; k <= kBins; ++k) hist.bin_edges[k] = hist.min_error + k * width;
    hist.bin_edges[kBins] = hist.max_error;
    hist.counts.assign(kBins, 0);
    for (double e : errors) {
      int bin = 0;
      if (width > 0.0)
        bin = std::min(static_cast<int>((e - hist.min_error) / width), kBins - 1);
      ++hist.counts[static_cast<std::size_t>(bin)];
    }
    return hist;
  }

  double bin_width() const { return (max_error - min_error) / kBins; }
};

inline void write_histogram_csv(const ErrorHistogram& hist, std::ostream& out) {
  out << "bin_lo,bin_hi,count\n";
  for (int k = 0; k < ErrorHistogram::kBins; ++k)
    out << io::format_double(hist.bin_edges[static_cast<std::size_t>(k)]) << ','
        << io::format_double(hist.bin_edges[static_cast<std::size_t>(k) + 1]) << ','
        << hist.counts[static_cast<std::size_t>(k)] << '\n';
}

struct EvalReport {
  double mse = 0.0;  // A^2
  ErrorHistogram histogram;
  double r = 0.0;  // Pearson correlation, targets vs predictions
};

/// Errors are (target - prediction) in amperes. Throws DegenerateVariance
/// when the correlation is undefined instead of inventing a number.
inline EvalReport evaluate(const MlpModel& model, const Dataset& samples) {
  if (samples.empty()) throw EmptyDataset("evaluate: no samples");
  model.validate();

  std::vector<double> errors;
  std::vector<double> targets;
  std::vector<double> preds;
  errors.reserve(samples.size());
  targets.reserve(samples.size());
  preds.reserve(samples.size());
  for (const Sample& s : samples) {
    const double p = model.forward(s.t_c, s.g);
    targets.push_back(s.i_mp);
    preds.push_back(p);
    errors.push_back(s.i_mp - p);
  }

  EvalReport rep;
  const double n = static_cast<double>(samples.size());
  for (double e : errors) rep.mse += e * e;
  rep.mse /= n;
  rep.histogram = ErrorHistogram::from_errors(errors);

  double mean_t = 0.0;
  double mean_p = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    mean_t += targets[k];
    mean_p += preds[k];
  }
  mean_t /= n;
  mean_p /= n;
  double cov = 0.0;
  double var_t = 0.0;
  double var_p = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double dt = targets[k] - mean_t;
    const double dp = preds[k] - mean_p;
    cov += dt * dp;
    var_t += dt * dt;
    var_p += dp * dp;
  }
  if (var_t <= 0.0)
    throw DegenerateVariance("evaluate: all targets equal, correlation undefined");
  if (var_p <= 0.0)
    throw DegenerateVariance("evaluate: constant predictions, correlation undefined");
  rep.r = cov / std::sqrt(var_t * var_p);
  return rep;
}

inline void write_history_csv(const TrainReport& rep, std::ostream& out) {
  out << "epoch,mse_train,mse_val,alpha,beta,gamma\n";
  for (const EpochStats& st : rep.history)
    out << st.epoch << ',' << io::format_double(st.mse_train) << ','
        << io::format_double(st.mse_val) << ',' << io::format_double(st.alpha) << ','
        << io::format_double(st.beta) << ',' << io::format_double(st.gamma) << '\n';
}

inline void to_json(nlohmann::json& j, const TrainReport& rep) {
  j = nlohmann::json{
      {"mse_train", {{"norm", rep.mse_train.norm}, {"a2", rep.mse_train.a2}}},
      {"mse_validation",
       {{"norm", rep.mse_validation.norm}, {"a2", rep.mse_validation.a2}}},
      {"mse_test", {{"norm", rep.mse_test.norm}, {"a2", rep.mse_test.a2}}},
      {"epochs_run", rep.epochs_run},
      {"alpha", rep.alpha},
      {"beta", rep.beta},
      {"gamma", rep.gamma}};
}

}  // namespace helios
