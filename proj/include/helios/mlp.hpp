#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helios/dataset.hpp"
#include "helios/errors.hpp"
#include "helios/io.hpp"

namespace helios {

/// Min-max scaling to [-1, 1] per feature. Ranges come from the training
/// split only; out-of-range inputs extrapolate rather than clamp.
struct NormSpec {
  struct Range {
    double min = -1.0;
    double max = 1.0;
  };
  Range t;
  Range g;
  Range imp;

  void validate() const {
    for (const Range* r : {&t, &g, &imp})
      if (!(r->max > r->min))
        throw InvalidArgument("NormSpec: max must exceed min");
  }

  static double to_unit(double x, const Range& r) {
    return 2.0 * (x - r.min) / (r.max - r.min) - 1.0;
  }
  static double from_unit(double u, const Range& r) {
    return r.min + (u + 1.0) * (r.max - r.min) / 2.0;
  }

  double norm_t(double t_c) const { return to_unit(t_c, t); }
  double norm_g(double gg) const { return to_unit(gg, g); }
  double norm_imp(double i) const { return to_unit(i, imp); }
  double denorm_imp(double u) const { return from_unit(u, imp); }

  /// A feature with no spread in the data gets an arbitrary half-unit pad so
  /// the affine map stays invertible.
  static NormSpec from_training(const Dataset& train) {
    if (train.empty()) throw EmptyDataset("NormSpec: empty training set");
    NormSpec spec;
    auto fit = [&](auto field) {
      Range r{field(train.front()), field(train.front())};
      for (const Sample& s : train) {
        r.min = std::min(r.min, field(s));
        r.max = std::max(r.max, field(s));
      }
      if (r.max - r.min < 1e-12) {
        r.min -= 0.5;
        r.max += 0.5;
      }
      return r;
    };
    spec.t = fit([](const Sample& s) { return s.t_c; });
    spec.g = fit([](const Sample& s) { return s.g; });
    spec.imp = fit([](const Sample& s) { return s.i_mp; });
    return spec;
  }
};

/// One-hidden-layer perceptron, 2 inputs (T, G) to 1 output (I_mp).
/// Hidden activation tanh, output linear; all math in normalized units.
struct MlpModel {
  std::vector<std::array<double, 2>> w_hidden;  // per-neuron [w_T, w_G]
  std::vector<double> b_hidden;
  std::vector<double> w_out;
  double b_out = 0.0;
  NormSpec norm;

  int width() const { return static_cast<int>(w_hidden.size()); }

  void validate() const {
    const std::size_t h = w_hidden.size();
    if (h == 0) throw InvalidArgument("MlpModel: zero hidden neurons");
    if (b_hidden.size() != h || w_out.size() != h)
      throw InvalidArgument("MlpModel: layer size mismatch");
    auto check_finite = [](double x) {
      if (!std::isfinite(x)) throw InvalidArgument("MlpModel: non-finite parameter");
    };
    for (const auto& row : w_hidden) {
      check_finite(row[0]);
      check_finite(row[1]);
    }
    for (double x : b_hidden) check_finite(x);
    for (double x : w_out) check_finite(x);
    check_finite(b_out);
    norm.validate();
  }

  /// Prediction in physical units: normalize, one tanh layer, linear
  /// read-out, denormalize.
  double forward(double t_c, double g) const {
    const double xt = norm.norm_t(t_c);
    const double xg = norm.norm_g(g);
    double acc = b_out;
    for (std::size_t k = 0; k < w_hidden.size(); ++k)
      acc += w_out[k] * std::tanh(w_hidden[k][0] * xt + w_hidden[k][1] * xg + b_hidden[k]);
    return norm.denorm_imp(acc);
  }
};

/// The published 2-15-1 weight set, transcribed row-for-row. The scaling the
/// authors used was never published; the ranges here are reconstructed from
/// the default dataset and make this model diagnostic, not authoritative.
inline MlpModel load_paper_weights() {
  MlpModel m;
  m.b_hidden = {-0.0788662358905827, -0.199252461268044, 0.476703785811994,
                0.0788437136945187,  0.0788437137489292, -0.0843897428619086,
                0.0788437137616096,  -0.0788437136323596, 0.0788437137854139,
                -0.0511645156192877, 0.0521386721602554, 0.0788437137594562,
                0.0788437137550028,  0.325165283314198,  0.199252475098178};
  m.w_hidden = {{{0.330659943126136, 0.375354867765757},
                 {-0.243061055602675, -0.302898742825237},
                 {-0.413686729890811, 0.124969405112560},
                 {0.0503908825102565, -0.242889973645394},
                 {0.0503908825336595, -0.242889973660344},
                 {0.286942170255656, -0.871006037765083},
                 {0.0503908825390176, -0.242889973663920},
                 {-0.0503908824834618, 0.242889973628136},
                 {0.0503908825490957, -0.242889973670382},
                 {-0.194105547886448, -0.882406133751217},
                 {-0.685142210229390, 0.629560967118233},
                 {0.0503908825379756, -0.242889973663218},
                 {0.0503908825362639, -0.242889973662112},
                 {0.796782784260382, -0.181097405343480},
                 {0.243060836205972, 0.302898505989682}}};
  m.w_out = {0.526055556926590,  -0.526712907336645, 0.560221719680131,
             -0.357268781908311, -0.357268781972241, -0.335049187325717,
             -0.357268781987367, 0.357268781834757,  -0.357268782015078,
             0.371791504344763,  -0.318328545469931, -0.357268781984634,
             -0.357268781979911, -0.244907095063019, 0.526712952341475};
  m.b_out = 0.1528;
  m.norm.t = {15.0, 40.0};
  m.norm.g = {200.0, 1090.0};
  m.norm.imp = {1.471480127064, 8.301564328938};
  m.validate();
  return m;
}

inline void to_json(nlohmann::json& j, const MlpModel& m) {
  j = nlohmann::json{{"version", 1},
                     {"w_hidden", m.w_hidden},
                     {"b_hidden", m.b_hidden},
                     {"w_out", m.w_out},
                     {"b_out", m.b_out},
                     {"norm",
                      {{"t", {m.norm.t.min, m.norm.t.max}},
                       {"g", {m.norm.g.min, m.norm.g.max}},
                       {"imp", {m.norm.imp.min, m.norm.imp.max}}}}};
}

inline void from_json(const nlohmann::json& j, MlpModel& m) {
  for (const char* key : {"version", "w_hidden", "b_hidden", "w_out", "b_out", "norm"})
    if (!j.contains(key))
      throw SchemaError(std::string("model: missing field '") + key + "'");
  if (j.at("version").get<int>() != 1)
    throw SchemaError("model: unsupported schema version");
  try {
    j.at("w_hidden").get_to(m.w_hidden);
    j.at("b_hidden").get_to(m.b_hidden);
    j.at("w_out").get_to(m.w_out);
    j.at("b_out").get_to(m.b_out);
    const nlohmann::json& n = j.at("norm");
    for (const char* key : {"t", "g", "imp"})
      if (!n.contains(key) || !n.at(key).is_array() || n.at(key).size() != 2)
        throw SchemaError(std::string("model: norm field '") + key +
                          "' must be a [min, max] pair");
    m.norm.t = {n.at("t")[0].get<double>(), n.at("t")[1].get<double>()};
    m.norm.g = {n.at("g")[0].get<double>(), n.at("g")[1].get<double>()};
    m.norm.imp = {n.at("imp")[0].get<double>(), n.at("imp")[1].get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model: malformed field: ") + e.what());
  }
  m.validate();
}

inline void save_model(const MlpModel& m, const std::string& path) {
  m.validate();
  const nlohmann::json j = m;
  io::atomic_write(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("model: unparseable JSON in " + path + ": " + e.what());
  }
  return j.get<MlpModel>();
}

}  // namespace helios
