#pragma once

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "functest/config.hpp"
#include "functest/curves.hpp"
#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/io.hpp"
#include "functest/lan.hpp"
#include "functest/mc.hpp"
#include "functest/testing.hpp"

namespace functest::cli {

/// Process exit codes.
enum Exit : int {
  kOk = 0,
  kConfig = 2,
  kDegenerate = 3,
  kData = 4,
  kGate = 5,
};

/// Bad observation data (empty file, unknown label, unparsable value).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<double> alpha;
  std::optional<std::size_t> n;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<double> t;

  void apply(ExperimentConfig& cfg) const {
    if (alpha) cfg.test.alpha = *alpha;
    if (n) cfg.n = *n;
    if (replicates) cfg.replicates = *replicates;
    if (seed) cfg.master_seed = *seed;
    if (t) {
      cfg.t = *t;
      cfg.t_grid.clear();
    }
    try {
      cfg.test.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (cfg.n == 0) throw ConfigError("n must be at least 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  if (out.empty()) throw DataError("NoObservations: data file '" + path + "' holds no observations");
  return out;
}

inline Sample<std::size_t> finite_sample(const FiniteMeasure& base, const std::vector<std::string>& lines) {
  Sample<std::size_t> s;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto idx = base.index_of(lines[i]);
    if (!idx) throw DataError("line " + std::to_string(i + 1) + ": unknown atom label '" + lines[i] + "'");
    s.values.push_back(*idx);
  }
  return s;
}

inline Sample<double> real_sample(const std::vector<std::string>& lines) {
  Sample<double> s;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    double v = 0.0;
    const auto* first = lines[i].data();
    const auto* last = first + lines[i].size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw DataError("line " + std::to_string(i + 1) + ": not a real number '" + lines[i] + "'");
    }
    s.values.push_back(v);
  }
  return s;
}

inline void emit_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  out << j.dump(2) << '\n';
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
  }
}

template <class M>
void print_gradient(const Model<M>& model, const CanonicalGradient<M>& grad, bool as_json, std::ostream& out) {
  nlohmann::json j;
  if constexpr (std::is_same_v<M, FiniteMeasure>) {
    if (as_json) {
      j["atoms"] = model.base.atoms();
      j["gradient"] = grad.evaluate.values;
      j["norm_sq"] = grad.norm_sq;
      out << j.dump(2) << '\n';
      return;
    }
    out << "atom\tgradient\n";
    for (std::size_t i = 0; i < model.base.size(); ++i) {
      out << model.base.atoms()[i] << '\t' << format_real(grad.evaluate(i)) << '\n';
    }
  } else {
    if (std::holds_alternative<Median>(model.functional)) {
      const double med = median_value(model.base);
      const double scale = grad.evaluate.bound;
      if (as_json) {
        j = {{"kind", "median"}, {"median", med}, {"scale", scale}, {"norm_sq", grad.norm_sq}};
        out << j.dump(2) << '\n';
        return;
      }
      out << "kind\tmedian\n"
          << "median\t" << format_real(med) << '\n'
          << "scale\t" << format_real(scale) << '\n';
    } else {
      const double mean = model.base.expect(std::get<VonMises<M>>(model.functional).kernel);
      if (as_json) {
        j = {{"kind", "von_mises"}, {"kernel_mean", mean}, {"norm_sq", grad.norm_sq}};
        out << j.dump(2) << '\n';
        return;
      }
      out << "kind\tvon_mises\n"
          << "kernel_mean\t" << format_real(mean) << '\n';
    }
  }
  out << "norm_sq\t" << format_real(grad.norm_sq) << '\n';
}

}  // namespace detail

inline int cmd_gradient(const ExperimentConfig& cfg, bool as_json, std::ostream& out) {
  std::visit(
      [&](const auto& model) {
        const auto grad = canonical_gradient(model.functional, model.base);
        detail::print_gradient(model, grad, as_json, out);
      },
      cfg.model);
  return kOk;
}

inline int cmd_test(const ExperimentConfig& cfg, const std::string& data_path, std::ostream& out) {
  const auto lines = detail::read_lines(data_path);
  const TestOutcome outcome = std::visit(
      [&](const auto& model) {
        const auto grad = canonical_gradient(model.functional, model.base);
        using M = std::decay_t<decltype(model.base)>;
        if constexpr (std::is_same_v<M, FiniteMeasure>) {
          return run_test(detail::finite_sample(model.base, lines), grad, cfg.test);
        } else {
          return run_test(detail::real_sample(lines), grad, cfg.test);
        }
      },
      cfg.model);
  detail::emit_json(nlohmann::json(outcome), cfg.json_path, out);
  return kOk;
}

inline int cmd_power(const ExperimentConfig& cfg, const std::string& csv_override, std::ostream& out,
                     std::ostream& err) {
  if (cfg.replicates < kMinReplicates) throw ConfigError("replicates must be at least 100");
  const auto grid = cfg.grid();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("t_grid must be strictly increasing");
  }
  const PowerSweep sweep = std::visit(
      [&](const auto& model) {
        const auto grad = canonical_gradient(model.functional, model.base);
        return power_sweep(model.curve(), grad, cfg.test, grid, cfg.n, cfg.replicates, cfg.master_seed);
      },
      cfg.model);
  const std::string path = csv_override.empty() ? cfg.csv_path : csv_override;
  std::ostream* summary = &out;
  if (path.empty()) {
    write_csv(out, sweep);
    summary = &err;
  } else {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    write_csv(f, sweep);
  }
  if (!cfg.json_path.empty()) {
    std::ofstream f(cfg.json_path);
    if (!f) throw ConfigError("cannot write '" + cfg.json_path + "'");
    f << nlohmann::json(sweep).dump(2) << '\n';
  }
  *summary << "power: " << sweep.rows.size() << " rows, n=" << cfg.n << ", replicates=" << cfg.replicates
           << ", seed=" << cfg.master_seed << ", sidedness=" << to_string(cfg.test.sidedness)
           << (path.empty() ? "" : ", csv=" + path) << '\n';
  return kOk;
}

inline int cmd_lan_check(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.replicates < kMinReplicates) throw ConfigError("replicates must be at least 100");
  const double t = cfg.t.value_or(0.0);
  const LanReport report = std::visit(
      [&](const auto& model) {
        const auto grad = canonical_gradient(model.functional, model.base);
        return third_lemma_check(model.curve(), grad, t, cfg.n, cfg.replicates, cfg.master_seed, cfg.ks_level);
      },
      cfg.model);
  detail::emit_json(nlohmann::json(report), cfg.json_path, out);
  return report.ks_passes() ? kOk : kGate;
}

inline int cmd_verify_curve(const ExperimentConfig& cfg, std::ostream& out) {
  const auto* model = std::get_if<Model<FiniteMeasure>>(&cfg.model);
  if (model == nullptr) throw ConfigError("verify-curve needs a finite base measure");
  const auto grad = canonical_gradient(model->functional, model->base);
  const auto curve = model->curve();
  const auto l2 = verify_l2_differentiability(curve, cfg.verify_ts);
  const auto deriv = verify_functional_derivative(
      curve, [&](const FiniteMeasure& p) { return functional_value(model->functional, p); }, grad, cfg.verify_ts);
  nlohmann::json j{{"l2_differentiability", l2}, {"functional_derivative", deriv}};
  detail::emit_json(j, cfg.json_path, out);
  // A zero tangent gives identically zero errors; there is nothing to decrease.
  const bool flat = curve.direction().norm_sq == 0.0;
  return flat || (l2.monotone && deriv.rate.monotone) ? kOk : kGate;
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Efficient score tests for differentiable functionals"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::string config_path;
  app.add_option("--alpha", ov.alpha, "override test.alpha");
  app.add_option("--n", ov.n, "override simulation.n");
  app.add_option("--replicates", ov.replicates, "override simulation.replicates");
  app.add_option("--seed", ov.seed, "override simulation.master_seed");
  app.add_option("--t", ov.t, "override simulation.t (clears t_grid)");

  bool gradient_json = false;
  auto* gradient = app.add_subcommand("gradient", "print the canonical gradient and its squared norm");
  gradient->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  gradient->add_flag("--json", gradient_json, "emit JSON instead of a table");

  std::string data_path;
  auto* test = app.add_subcommand("test", "run the score test on observed data");
  test->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  test->add_option("-d,--data", data_path, "one observation per line")->required();

  std::string csv_path;
  auto* power = app.add_subcommand("power", "Monte Carlo power sweep against the limit power");
  power->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  power->add_option("--csv", csv_path, "CSV output path (default: config output.csv, else stdout)");

  auto* lan = app.add_subcommand("lan-check", "LAN and limit-law diagnostics");
  lan->add_option("-c,--config", config_path, "experiment config (JSON)")->required();

  auto* verify = app.add_subcommand("verify-curve", "finite-difference checks of differentiability");
  verify->add_option("-c,--config", config_path, "experiment config (JSON)")->required();

  std::vector<std::string> argv_storage(args);
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    auto cfg = load_config(config_path);
    ov.apply(cfg);
    if (*gradient) return cmd_gradient(cfg, gradient_json, out);
    if (*test) return cmd_test(cfg, data_path, out);
    if (*power) return cmd_power(cfg, csv_path, out, err);
    if (*lan) return cmd_lan_check(cfg, out);
    if (*verify) return cmd_verify_curve(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::DegenerateGradient:
      case ErrorCode::NonpositiveDensity:
        return kDegenerate;
      case ErrorCode::ZeroNormEstimate:
        return kData;
      default:
        return kConfig;
    }
  }
  return kConfig;
}

}  // namespace functest::cli
