#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "functest/curves.hpp"
#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/functions.hpp"
#include "functest/io.hpp"
#include "functest/measures.hpp"
#include "functest/testing.hpp"

namespace functest {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One base measure with its functional and tangent direction.
template <class M>
struct Model {
  M base;
  FunctionalSpec<M> functional;
  TangentFunction<M> tangent;

  LocalCurve<M> curve() const { return LocalCurve<M>(tangent); }
};

using AnyModel = std::variant<Model<FiniteMeasure>, Model<ContinuousMeasure>>;

struct ExperimentConfig {
  explicit ExperimentConfig(AnyModel m) : model(std::move(m)) {}

  AnyModel model;
  TestConfig test;
  std::optional<double> t;
  std::vector<double> t_grid;
  std::size_t n = 2000;
  std::size_t replicates = 10000;
  std::uint64_t master_seed = 1;
  double ks_level = 0.01;
  std::vector<double> verify_ts{0.4, 0.2, 0.1, 0.05, 0.025};
  std::string csv_path;
  std::string json_path;

  /// t_grid when given, otherwise the single value t (default 0).
  std::vector<double> grid() const {
    if (!t_grid.empty()) return t_grid;
    return {t.value_or(0.0)};
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline RealFunction real_function_from_json(const nlohmann::json& j, double radius) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sign") return sign_function(j.at("center").get<double>(), j.value("scale", 1.0));
  if (kind == "polynomial") return polynomial(j.at("coefficients").get<std::vector<double>>(), radius);
  throw ConfigError("unknown function kind '" + kind + "'");
}

inline std::function<double(std::span<const double>)> monomials_from_json(const nlohmann::json& j, std::size_t m) {
  struct Term {
    double coef;
    std::vector<double> powers;
  };
  std::vector<Term> terms;
  for (const auto& t : j) {
    Term term{t.at("coef").get<double>(), t.at("powers").get<std::vector<double>>()};
    if (term.powers.size() != m) throw ConfigError("monomial power list length differs from atom count");
    terms.push_back(std::move(term));
  }
  return [terms](std::span<const double> p) {
    double acc = 0.0;
    for (const auto& t : terms) {
      double v = t.coef;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (t.powers[i] != 0.0) v *= std::pow(p[i], t.powers[i]);
      }
      acc += v;
    }
    return acc;
  };
}

inline Model<FiniteMeasure> finite_model(const nlohmann::json& j) {
  auto base = finite_measure_from_json(j.at("measure"));
  const std::size_t m = base.size();
  const auto& fj = j.at("functional");
  const auto kind = fj.at("kind").get<std::string>();
  FunctionalSpec<FiniteMeasure> spec;
  if (kind == "von_mises") {
    auto h = fj.at("h").get<std::vector<double>>();
    if (h.size() != m) throw ConfigError("von_mises kernel length differs from atom count");
    spec = VonMises<FiniteMeasure>{AtomFunction{std::move(h)}};
  } else if (kind == "multinomial") {
    auto w = fj.at("weights").get<std::vector<double>>();
    if (w.size() != m) throw ConfigError("multinomial weight count differs from atom count");
    std::function<double(std::span<const double>)> f;
    if (fj.contains("f")) {
      f = monomials_from_json(fj.at("f"), m);
    } else {
      f = [w](std::span<const double> p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) acc += w[i] * p[i];
        return acc;
      };
    }
    spec = MultinomialSmooth{std::move(f), std::move(w)};
  } else if (kind == "median") {
    throw ConfigError("the median functional needs a continuous base measure");
  } else {
    throw ConfigError("unknown functional kind '" + kind + "'");
  }
  auto raw = j.at("tangent").get<std::vector<double>>();
  if (raw.size() != m) throw ConfigError("tangent length differs from atom count");
  auto tangent = make_tangent(base, AtomFunction{std::move(raw)});
  return Model<FiniteMeasure>{std::move(base), std::move(spec), std::move(tangent)};
}

inline ContinuousMeasure continuous_measure_from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "uniform") return ContinuousMeasure::uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
  if (family == "exponential") return ContinuousMeasure::exponential(j.at("rate").get<double>());
  throw ConfigError("unknown measure family '" + family + "'");
}

inline Model<ContinuousMeasure> continuous_model(const nlohmann::json& j) {
  auto base = continuous_measure_from_json(j.at("measure"));
  const auto& fj = j.at("functional");
  const auto kind = fj.at("kind").get<std::string>();
  FunctionalSpec<ContinuousMeasure> spec;
  if (kind == "median") {
    spec = Median{fj.at("f_at_median").get<double>()};
  } else if (kind == "von_mises") {
    spec = VonMises<ContinuousMeasure>{real_function_from_json(fj.at("h"), base.radius())};
  } else if (kind == "multinomial") {
    throw ConfigError("the multinomial functional needs a finite base measure");
  } else {
    throw ConfigError("unknown functional kind '" + kind + "'");
  }
  auto raw = real_function_from_json(j.at("tangent"), base.radius());
  auto tangent = make_tangent(base, raw);
  return Model<ContinuousMeasure>{std::move(base), std::move(spec), std::move(tangent)};
}

inline Sidedness sidedness_from(const std::string& s) {
  if (s == "one_sided") return Sidedness::one_sided;
  if (s == "two_sided") return Sidedness::two_sided;
  throw ConfigError("sidedness must be one_sided or two_sided, got '" + s + "'");
}

inline NormSource norm_source_from(const std::string& s) {
  if (s == "exact") return NormSource::exact;
  if (s == "plug_in") return NormSource::plug_in;
  throw ConfigError("norm_source must be exact or plug_in, got '" + s + "'");
}

}  // namespace detail

/// Builds and validates a configuration. Library errors raised while building
/// the model (bad masses, duplicate atoms, ...) surface as ConfigError.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg{j.at("measure").contains("atoms") ? AnyModel(detail::finite_model(j))
                                                            : AnyModel(detail::continuous_model(j))};
    if (j.contains("test")) {
      const auto& tj = j.at("test");
      cfg.test.alpha = tj.value("alpha", cfg.test.alpha);
      cfg.test.sidedness = detail::sidedness_from(tj.value("sidedness", std::string("one_sided")));
      cfg.test.norm_source = detail::norm_source_from(tj.value("norm_source", std::string("exact")));
    }
    if (j.contains("simulation")) {
      const auto& sj = j.at("simulation");
      if (sj.contains("t")) cfg.t = sj.at("t").get<double>();
      if (sj.contains("t_grid")) cfg.t_grid = sj.at("t_grid").get<std::vector<double>>();
      cfg.n = sj.value("n", cfg.n);
      cfg.replicates = sj.value("replicates", cfg.replicates);
      cfg.master_seed = sj.value("master_seed", cfg.master_seed);
    }
    if (j.contains("lan")) cfg.ks_level = j.at("lan").value("ks_level", cfg.ks_level);
    if (j.contains("verify")) cfg.verify_ts = j.at("verify").at("ts").get<std::vector<double>>();
    if (j.contains("output")) {
      cfg.csv_path = j.at("output").value("csv", std::string());
      cfg.json_path = j.at("output").value("json", std::string());
    }
    cfg.test.validate();
    if (cfg.n == 0) throw ConfigError("simulation.n must be at least 1");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config schema: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateGradient) throw;
    throw ConfigError(e.what());
  }
}

/// Reads and parses a JSON config file; syntax errors report line and column.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON: " +
                      e.what());
  }
  return parse_config(j);
}

}  // namespace functest
