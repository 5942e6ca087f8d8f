#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "helios/errors.hpp"
#include "helios/io.hpp"
#include "helios/mpp.hpp"
#include "helios/pv_model.hpp"
#include "helios/rng.hpp"

namespace helios {

/// One training sample: ambient inputs in user units, MPP current target.
struct Sample {
  double t_c = 0.0;   // °C
  double g = 0.0;     // W/m^2
  double i_mp = 0.0;  // A
};

using Dataset = std::vector<Sample>;

/// Rectangular sweep definition. Temperature runs on a fixed step,
/// irradiance as a fixed count of evenly spaced values (endpoints included).
struct GridSpec {
  double t_start = 15.0;
  double t_stop = 40.0;
  double t_step = 1.0;
  double g_lo = 200.0;
  double g_hi = 1090.0;
  int g_count = 50;

  void validate() const {
    if (t_step <= 0.0) throw InvalidArgument("GridSpec: t_step must be > 0");
    if (t_stop < t_start) throw InvalidArgument("GridSpec: t_stop below t_start");
    if (g_count < 1) throw InvalidArgument("GridSpec: g_count must be >= 1");
    if (g_count > 1 && !(g_hi > g_lo))
      throw InvalidArgument("GridSpec: g_hi must exceed g_lo");
  }

  std::vector<double> t_values() const {
    validate();
    const int n = static_cast<int>(std::round((t_stop - t_start) / t_step)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out.push_back(t_start + k * t_step);
    return out;
  }

  std::vector<double> g_values() const {
    validate();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g_count));
    if (g_count == 1) {
      out.push_back(g_lo);
      return out;
    }
    for (int j = 0; j < g_count; ++j)
      out.push_back(g_lo + (g_hi - g_lo) * static_cast<double>(j) /
                               static_cast<double>(g_count - 1));
    return out;
  }
};

inline void to_json(nlohmann::json& j, const GridSpec& s) {
  j = nlohmann::json{{"t_start", s.t_start}, {"t_stop", s.t_stop},
                     {"t_step", s.t_step},   {"g_lo", s.g_lo},
                     {"g_hi", s.g_hi},       {"g_count", s.g_count}};
}

inline void from_json(const nlohmann::json& j, GridSpec& s) {
  for (const char* key : {"t_start", "t_stop", "t_step", "g_lo", "g_hi", "g_count"})
    if (!j.contains(key))
      throw SchemaError(std::string("grid spec: missing field '") + key + "'");
  j.at("t_start").get_to(s.t_start);
  j.at("t_stop").get_to(s.t_stop);
  j.at("t_step").get_to(s.t_step);
  j.at("g_lo").get_to(s.g_lo);
  j.at("g_hi").get_to(s.g_hi);
  j.at("g_count").get_to(s.g_count);
}

/// Cartesian sweep through the MPP oracle: temperature outer, irradiance
/// inner, so row index = t_index * |g| + g_index.
inline Dataset generate_grid(const ModuleParams& params, const std::vector<double>& t_values,
                             const std::vector<double>& g_values, const MppConfig& mcfg = {},
                             const SolverConfig& scfg = {}) {
  if (t_values.empty() || g_values.empty())
    throw InvalidArgument("generate_grid: empty value list");
  for (std::size_t k = 1; k < t_values.size(); ++k)
    if (!(t_values[k] > t_values[k - 1]))
      throw InvalidArgument("generate_grid: t_values must be strictly increasing");
  for (std::size_t k = 1; k < g_values.size(); ++k)
    if (!(g_values[k] > g_values[k - 1]))
      throw InvalidArgument("generate_grid: g_values must be strictly increasing");

  Dataset out;
  out.reserve(t_values.size() * g_values.size());
  for (double t_c : t_values) {
    for (double g : g_values) {
      auto annotate = [&](const std::string& what) {
        return what + " (at t_c=" + std::to_string(t_c) + ", g=" + std::to_string(g) + ")";
      };
      try {
        MppResult mpp = find_mpp(params, EnvConditions::from_celsius(t_c, g), mcfg, scfg);
        out.push_back({t_c, g, mpp.i_mp});
      } catch (const NoConvergence& e) {
        throw NoConvergence(annotate(e.what()), e.last_residual);
      } catch (const DegenerateCurve& e) {
        throw DegenerateCurve(annotate(e.what()));
      } catch (const NumericOverflow& e) {
        throw NumericOverflow(annotate(e.what()));
      }
    }
  }
  return out;
}

struct SplitFractions {
  double train = 0.85;
  double val = 0.10;
  double test = 0.05;

  void validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0)
      throw InvalidArgument("SplitFractions: negative fraction");
    if (std::abs(train + val + test - 1.0) > 1e-9)
      throw InvalidArgument("SplitFractions: fractions must sum to 1");
  }
};

struct DataSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded Fisher-Yates shuffle, then contiguous assignment. Validation and
/// test sizes are floored; the remainder goes to train, so 1300 rows at the
/// default fractions give (1105, 130, 65).
inline DataSplit shuffle_split(const Dataset& data, std::uint64_t seed,
                               const SplitFractions& fractions = {}) {
  fractions.validate();
  if (data.empty()) throw EmptyDataset("shuffle_split: no samples");

  Dataset shuffled = data;
  std::mt19937_64 gen(seed);
  for (std::size_t k = shuffled.size() - 1; k > 0; --k) {
    const std::uint64_t j = rng::bounded(gen, k + 1);
    std::swap(shuffled[k], shuffled[j]);
  }

  const std::size_t n = shuffled.size();
  const std::size_t n_val = static_cast<std::size_t>(n * fractions.val);
  const std::size_t n_test = static_cast<std::size_t>(n * fractions.test);
  const std::size_t n_train = n - n_val - n_test;

  DataSplit split;
  split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.val.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  split.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return split;
}

/// Perturbs inputs only; targets stay clean. Per sample the temperature draw
/// comes first, then the irradiance draw, so the stream layout is fixed.
inline Dataset add_awgn(const Dataset& data, double sigma_t, double sigma_g,
                        std::uint64_t seed) {
  if (sigma_t < 0.0 || sigma_g < 0.0)
    throw InvalidArgument("add_awgn: sigmas must be >= 0");
  std::mt19937_64 gen(seed);
  Dataset out = data;
  for (Sample& s : out) {
    s.t_c += sigma_t * rng::gaussian(gen);
    s.g += sigma_g * rng::gaussian(gen);
  }
  return out;
}

inline const char* dataset_csv_header() { return "T_degC,G_Wm2,Imp_A"; }

inline void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << dataset_csv_header() << '\n';
  for (const Sample& s : data)
    out << io::format_double(s.t_c) << ',' << io::format_double(s.g) << ','
        << io::format_double(s.i_mp) << '\n';
}

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset: empty file");
  io::strip_cr(line);
  if (line != dataset_csv_header())
    throw SchemaError("dataset: expected header '" + std::string(dataset_csv_header()) +
                      "', got '" + line + "'");
  Dataset out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    io::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError("dataset: expected 3 columns, got " + std::to_string(fields.size()),
                       line_no);
    out.push_back({io::parse_double(fields[0], line_no), io::parse_double(fields[1], line_no),
                   io::parse_double(fields[2], line_no)});
  }
  return out;
}

inline void export_dataset(const Dataset& data, const std::string& path) {
  io::atomic_write(path, [&](std::ostream& out) { write_dataset_csv(data, out); });
}

inline Dataset import_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

/// Everything needed to regenerate a split byte-for-byte, written beside it.
struct SplitProvenance {
  std::uint64_t seed = 0;
  SplitFractions fractions;
  nlohmann::json grid;      // GridSpec JSON, or null when unknown
  std::string params_hash;  // hash of the module-parameter JSON
};

inline std::string params_hash(const ModuleParams& params) {
  return io::fnv1a_hex(nlohmann::json(params).dump());
}

inline void export_split(const DataSplit& split, const std::string& base,
                         const SplitProvenance& prov) {
  export_dataset(split.train, base + ".train.csv");
  export_dataset(split.val, base + ".val.csv");
  export_dataset(split.test, base + ".test.csv");
  nlohmann::json manifest{
      {"seed", prov.seed},
      {"fractions",
       {{"train", prov.fractions.train}, {"val", prov.fractions.val},
        {"test", prov.fractions.test}}},
      {"grid", prov.grid},
      {"params_hash", prov.params_hash},
      {"sizes",
       {{"train", split.train.size()}, {"val", split.val.size()},
        {"test", split.test.size()}}}};
  io::atomic_write(base + ".manifest.json",
                   [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

inline DataSplit import_split(const std::string& base) {
  DataSplit split;
  split.train = import_dataset(base + ".train.csv");
  split.val = import_dataset(base + ".val.csv");
  split.test = import_dataset(base + ".test.csv");
  return split;
}

}  // namespace helios
