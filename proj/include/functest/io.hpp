#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "functest/curves.hpp"
#include "functest/lan.hpp"
#include "functest/mc.hpp"
#include "functest/measures.hpp"
#include "functest/testing.hpp"

namespace functest {

/// Shortest-form-free rendering with 17 significant digits, '.' decimal point.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// nlohmann ADL hooks -------------------------------------------------------

inline void to_json(nlohmann::json& j, const FiniteMeasure& p) {
  j = nlohmann::json{{"atoms", p.atoms()}, {"probs", p.probs()}};
}

inline FiniteMeasure finite_measure_from_json(const nlohmann::json& j) {
  std::vector<std::string> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back(a.is_string() ? a.get<std::string>() : a.dump());
  return make_finite_measure(std::move(atoms), j.at("probs").get<std::vector<double>>());
}

inline void to_json(nlohmann::json& j, const TestOutcome& o) {
  j = nlohmann::json{{"statistic", o.statistic}, {"critical_value", o.critical_value},
                     {"reject", o.reject},       {"p_value", o.p_value},
                     {"n", o.n},                 {"alpha", o.alpha},
                     {"sidedness", to_string(o.sidedness)}, {"norm", o.norm}};
}

inline void to_json(nlohmann::json& j, const LanStats& s) {
  j = nlohmann::json{{"n", s.n},
                     {"replicates", s.replicates},
                     {"loglr_mean", s.loglr_mean},
                     {"loglr_var", s.loglr_var},
                     {"lr_mean", s.lr_mean},
                     {"lr_mean_se", s.lr_mean_se},
                     {"remainder_quantiles", {{"median", s.remainder_median}, {"p90", s.remainder_p90}}},
                     {"degenerate_replicates", s.degenerate_replicates}};
}

inline void to_json(nlohmann::json& j, const LanReport& r) {
  j = nlohmann::json{{"n", r.n},
                     {"t", r.t},
                     {"theta", r.theta},
                     {"norm", r.norm},
                     {"replicates", r.replicates},
                     {"seed", r.seed},
                     {"statistic_mean", r.statistic_mean},
                     {"statistic_var", r.statistic_var},
                     {"ks_to_limit", r.ks_to_limit},
                     {"ks_level", r.ks_level},
                     {"ks_critical", r.ks_critical},
                     {"ks_passes", r.ks_passes()},
                     {"loglr_mean", r.lan.loglr_mean},
                     {"loglr_var", r.lan.loglr_var},
                     {"lr_mean", r.lan.lr_mean},
                     {"remainder_quantiles", {{"median", r.lan.remainder_median}, {"p90", r.lan.remainder_p90}}},
                     {"degenerate_replicates", r.lan.degenerate_replicates}};
}

inline void to_json(nlohmann::json& j, const MCReport& r) {
  j = nlohmann::json{{"t", r.t},
                     {"theta", r.theta},
                     {"theoretical_power", r.theoretical_power},
                     {"empirical_rate", r.empirical_rate},
                     {"ci_low", r.ci_low},
                     {"ci_high", r.ci_high},
                     {"rejections", r.rejections},
                     {"n", r.n},
                     {"replicates", r.replicates},
                     {"seed", r.master_seed}};
}

inline void to_json(nlohmann::json& j, const PowerSweep& s) {
  j = nlohmann::json{{"grid", s.grid}, {"rows", s.rows}};
}

inline void to_json(nlohmann::json& j, const RateReport& r) {
  j = nlohmann::json{{"ts", r.ts},
                     {"errors", r.errors},
                     {"rate_constant", r.rate_constant},
                     {"order", std::isnan(r.order) ? nlohmann::json(nullptr) : nlohmann::json(r.order)},
                     {"monotone", r.monotone},
                     {"within_linear_bound", r.within_linear_bound()}};
}

inline void to_json(nlohmann::json& j, const DerivativeReport& r) {
  j = nlohmann::json{{"target", r.target},
                     {"forward_slopes", r.forward_slopes},
                     {"backward_slopes", r.backward_slopes},
                     {"rate", r.rate}};
}

// CSV ---------------------------------------------------------------------

inline constexpr const char* kPowerCsvHeader =
    "t,theta,theoretical_power,empirical_rate,ci_low,ci_high,n,replicates,seed";

inline void write_csv(std::ostream& os, const PowerSweep& sweep) {
  os << kPowerCsvHeader << '\n';
  for (const auto& r : sweep.rows) {
    os << format_real(r.t) << ',' << format_real(r.theta) << ',' << format_real(r.theoretical_power) << ','
       << format_real(r.empirical_rate) << ',' << format_real(r.ci_low) << ',' << format_real(r.ci_high) << ','
       << r.n << ',' << r.replicates << ',' << r.master_seed << '\n';
  }
}

}  // namespace functest
