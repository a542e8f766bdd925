#pragma once

#include <algorithm>
#include <charconv>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasefuse/montecarlo.hpp"
#include "phasefuse/phase_opt.hpp"
#include "phasefuse/sdp.hpp"

namespace phasefuse {

inline constexpr const char* kCsvHeader =
    "sweep_param,value,strategy,mean_variance,std_err,lower_bound_mean,eq11,eq12,eq17,trials,"
    "failures";

// Shortest round-trip representation; independent of the global locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// One row per (point, strategy); absent quantities are empty fields.
inline void write_csv(const SweepResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  const char* param = sweep_param_name(result.sweep);
  for (const auto& p : result.points) {
    for (const auto& s : p.strategies) {
      out << param << ',' << p.value << ',' << s.strategy.name() << ','
          << format_double(s.mean_variance) << ',' << format_double(s.std_err) << ','
          << format_double(p.lower_bound_mean) << ',' << format_optional(p.eq11) << ','
          << format_optional(p.eq12) << ',' << format_optional(p.eq17) << ',' << p.trials << ','
          << s.failures << '\n';
    }
  }
  if (!out) throw Error("write_csv: output stream failed");
}

// Same records as the CSV, keyed by header name; empty fields become null.
inline nlohmann::json to_json(const SweepResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  for (const auto& p : result.points) {
    for (const auto& s : p.strategies) {
      rows.push_back({{"sweep_param", sweep_param_name(result.sweep)},
                      {"value", p.value},
                      {"strategy", std::string(s.strategy.name())},
                      {"mean_variance", s.mean_variance},
                      {"std_err", s.std_err},
                      {"lower_bound_mean", p.lower_bound_mean},
                      {"eq11", opt(p.eq11)},
                      {"eq12", opt(p.eq12)},
                      {"eq17", opt(p.eq17)},
                      {"trials", p.trials},
                      {"failures", s.failures}});
    }
  }
  return rows;
}

inline void write_json(const SweepResult& result, std::ostream& out) {
  out << to_json(result).dump(2) << '\n';
  if (!out) throw Error("write_json: output stream failed");
}

inline nlohmann::json to_json(const SdpSolution& sol) {
  nlohmann::json gram_re = nlohmann::json::array();
  nlohmann::json gram_im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < sol.gram.rows(); ++i) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index j = 0; j < sol.gram.cols(); ++j) {
      re.push_back(sol.gram(i, j).real());
      im.push_back(sol.gram(i, j).imag());
    }
    gram_re.push_back(std::move(re));
    gram_im.push_back(std::move(im));
  }
  return {{"objective_value", sol.objective_value},
          {"dual_value", sol.dual_value},
          {"duality_gap", sol.duality_gap},
          {"relative_gap", sol.relative_gap()},
          {"diag_residual", sol.diag_residual},
          {"min_eigenvalue", sol.min_eigenvalue},
          {"max_eigenvalue", sol.max_eigenvalue},
          {"dual_min_eigenvalue", sol.dual_min_eigenvalue},
          {"iterations", sol.iterations},
          {"gram_real", std::move(gram_re)},
          {"gram_imag", std::move(gram_im)}};
}

inline nlohmann::json to_json(const OptimizationReport& r) {
  nlohmann::json phases = nlohmann::json::array();
  const Eigen::VectorXd ph = r.phases.phases();
  for (Eigen::Index i = 0; i < ph.size(); ++i) phases.push_back(ph(i));
  nlohmann::json j = {{"strategy", std::string(r.strategy.name())},
                      {"achieved_variance", r.achieved_variance},
                      {"lower_bound", r.lower_bound},
                      {"relaxation_value",
                       r.relaxation_value ? nlohmann::json(*r.relaxation_value) : nlohmann::json()},
                      {"phases_rad", std::move(phases)},
                      {"fallback", r.fallback}};
  if (r.sdp) j["sdp"] = to_json(*r.sdp);
  return j;
}

/// gnuplot script drawing the sibling CSV on a log-y axis: one curve per
/// strategy, plus the mean lower bound and whichever asymptotes are present.
inline std::string plot_script(const SweepResult& result, const std::string& csv_path) {
  const bool sensors = result.sweep == SweepKind::SensorSweep;
  std::string first_strategy;
  std::vector<std::string> names;
  bool has_eq11 = false, has_eq12 = false, has_eq17 = false;
  for (const auto& p : result.points) {
    has_eq11 |= p.eq11.has_value();
    has_eq12 |= p.eq12.has_value();
    has_eq17 |= p.eq17.has_value();
    for (const auto& s : p.strategies) {
      const std::string n(s.strategy.name());
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
  }
  if (!names.empty()) first_strategy = names.front();

  std::string stem = csv_path;
  if (const auto dot = stem.rfind('.'); dot != std::string::npos && stem.find('/', dot) == std::string::npos) {
    stem.resize(dot);
  }

  std::ostringstream os;
  os << "# Estimator variance vs " << (sensors ? "number of sensors N" : "number of FC antennas M")
     << "\n";
  os << "# Render with: gnuplot <this script>\n";
  os << "set terminal pngcairo size 800,600\n";
  os << "set output \"" << stem << ".png\"\n";
  os << "set datafile separator \",\"\n";
  os << "set key autotitle columnhead\n";
  os << "set logscale y\n";
  if (!sensors) os << "set logscale x 2\n";
  os << "set grid\n";
  os << "set xlabel \"" << (sensors ? "N (sensors)" : "M (FC antennas)") << "\"\n";
  os << "set ylabel \"estimator variance\"\n";
  os << "csv = \"" << csv_path << "\"\n";

  std::vector<std::string> curves;
  auto column_for = [&](const std::string& strategy, const char* col) {
    return "csv using \"value\":(strcol(\"strategy\") eq \"" + strategy + "\" ? column(\"" + col +
           "\") : NaN)";
  };
  for (const auto& n : names) {
    curves.push_back(column_for(n, "mean_variance") + " with linespoints title \"" + n + "\"");
  }
  if (!first_strategy.empty()) {
    curves.push_back(column_for(first_strategy, "lower_bound_mean") +
                     " with lines dashtype 2 title \"lower bound 1/(N lambda_max)\"");
    if (has_eq11 && sensors) {
      curves.push_back(column_for(first_strategy, "eq11") +
                       " with lines dashtype 3 title \"large-N lower bound\"");
    }
    if (has_eq12 && sensors) {
      curves.push_back(column_for(first_strategy, "eq12") +
                       " with lines dashtype 4 title \"single-antenna bound\"");
    }
    if (has_eq17 && !sensors) {
      curves.push_back(column_for(first_strategy, "eq17") +
                       " with lines dashtype 5 title \"large-M variance\"");
    }
  }
  if (curves.empty()) {
    os << "# no data\n";
    return os.str();
  }
  os << "plot ";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    os << curves[i] << (i + 1 < curves.size() ? ", \\\n     " : "\n");
  }
  return os.str();
}

}  // namespace phasefuse
