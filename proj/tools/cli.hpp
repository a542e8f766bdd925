#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phasefuse/phasefuse.hpp"

namespace phasefuse::cli {

enum class Subcommand { Fig1, Fig2, Run, Oracle, Selftest };
enum class Format { Csv, Json };

struct Options {
  std::optional<int> sensors;
  std::optional<int> antennas;
  int trials = 300;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  double fc_noise = 0.1;
  Interval dist_range{2.0, 7.0};
  Interval sensor_noise_range{0.001, 0.01};
  std::vector<std::string> strategies;  // empty: subcommand default
  bool resample_per_trial = true;
  std::string output;                   // empty: stdout
  Format format = Format::Csv;
  std::string plot_script;              // empty: none
  std::vector<int> sweep;               // empty: subcommand default grid
  int candidates = 100;
};

struct CliCommand {
  Subcommand subcommand = Subcommand::Selftest;
  Options options;
};

// Bad command line; maps to exit status 2.
class CliUsageError : public Error {
 public:
  using Error::Error;
};

// --help was requested; carries the help text.
struct HelpRequested {
  std::string text;
};

namespace detail {

inline Interval parse_interval(const std::string& flag, const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw CliUsageError(flag + ": expected <lo,hi>, got '" + text + "'");
  }
  Interval out;
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(0, comma), hi = text.substr(comma + 1);
    out.lo = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    out.hi = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
  } catch (const std::logic_error&) {
    throw CliUsageError(flag + ": expected two numbers <lo,hi>, got '" + text + "'");
  }
  try {
    out.validate(flag);
  } catch (const ConfigError& e) {
    throw CliUsageError(e.what());
  }
  return out;
}

inline std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Parses argv. Throws CliUsageError on malformed input (message names the
/// offending flag) and HelpRequested for --help.
inline CliCommand parse_args(int argc, const char* const* argv) {
  CLI::App app{"Phase-only analog encoding simulator for multi-antenna sensor fusion", "phasefuse"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  CliCommand cmd;
  Options& o = cmd.options;
  std::string dist_text, noise_text, strategies_text, sweep_text, format_text = "csv";
  int sensors = 0, antennas = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--sensors", sensors, "Number of sensors N")->check(CLI::PositiveNumber);
    sub->add_option("--antennas", antennas, "Number of FC antennas M")->check(CLI::PositiveNumber);
    sub->add_option("--trials", o.trials, "Realizations per point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    sub->add_option("--alpha", o.alpha, "Path-loss exponent")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--fc-noise", o.fc_noise, "FC noise power sigma_n^2")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--dist-range", dist_text, "Sensor distance range lo,hi (default 2,7)");
    sub->add_option("--sensor-noise-range", noise_text,
                    "Sensor noise power range lo,hi (default 0.001,0.01)");
    sub->add_option("--strategies", strategies_text,
                    "Comma list of: sdp, all-ones, closed-form-n2, grid");
    sub->add_option("--resample-per-trial", o.resample_per_trial,
                    "Redraw distances and sensor noise every trial")
        ->capture_default_str();
    sub->add_option("--output", o.output, "Output path (default stdout)");
    sub->add_option("--format", format_text, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--emit-plot-script", o.plot_script, "Write a gnuplot script here");
    sub->add_option("--sweep", sweep_text, "Comma list of sweep values (fig1/fig2)");
    sub->add_option("--candidates", o.candidates, "Random rounding candidates for sdp")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  };

  struct Entry {
    const char* name;
    const char* help;
    Subcommand kind;
  };
  const Entry entries[] = {
      {"fig1", "Variance vs number of sensors (M fixed, default 4)", Subcommand::Fig1},
      {"fig2", "Variance vs number of FC antennas (N fixed, default 4)", Subcommand::Fig2},
      {"run", "Optimize one channel realization with every strategy", Subcommand::Run},
      {"oracle", "Compare SDP rounding against the phase-grid oracle", Subcommand::Oracle},
      {"selftest", "Closed-form, oracle and identity smoke checks", Subcommand::Selftest},
  };
  std::vector<std::pair<CLI::App*, Subcommand>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw CliUsageError(e.what() + std::string("\n\n") + app.help());
  }

  for (const auto& [sub, kind] : subs) {
    if (sub->parsed()) {
      cmd.subcommand = kind;
      if (sub->count("--sensors") > 0) o.sensors = sensors;
      if (sub->count("--antennas") > 0) o.antennas = antennas;
    }
  }
  if (!dist_text.empty()) o.dist_range = detail::parse_interval("--dist-range", dist_text);
  if (!noise_text.empty()) {
    o.sensor_noise_range = detail::parse_interval("--sensor-noise-range", noise_text);
  }
  if (!strategies_text.empty()) {
    o.strategies = detail::split_csv(strategies_text);
    for (const auto& s : o.strategies) {
      try {
        PhaseStrategy::parse(s);
      } catch (const UsageError& e) {
        throw CliUsageError(std::string("--strategies: ") + e.what());
      }
    }
    if (o.strategies.empty()) throw CliUsageError("--strategies: empty list");
  }
  if (!sweep_text.empty()) {
    for (const auto& item : detail::split_csv(sweep_text)) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(item, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != item.size() || v < 1) {
        throw CliUsageError("--sweep: '" + item + "' is not a positive integer");
      }
      o.sweep.push_back(v);
    }
  }
  o.format = format_text == "json" ? Format::Json : Format::Csv;
  return cmd;
}

// PHASEFUSE_THREADS overrides the worker count; results do not depend on it.
inline unsigned threads_from_env() {
  const char* env = std::getenv("PHASEFUSE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw CliUsageError(std::string("PHASEFUSE_THREADS: expected a positive integer, got '") + env +
                        "'");
  }
  return static_cast<unsigned>(v);
}

inline ScenarioTemplate scenario_template(const Options& o, int n_sensors, int n_antennas) {
  ScenarioTemplate t;
  t.n_sensors = n_sensors;
  t.n_antennas = n_antennas;
  t.path_loss_exp = o.alpha;
  t.fc_noise_power = o.fc_noise;
  t.distance_range = o.dist_range;
  t.sensor_noise_range = o.sensor_noise_range;
  return t;
}

inline std::vector<PhaseStrategy> strategies(const Options& o,
                                             const std::vector<std::string>& defaults) {
  std::vector<PhaseStrategy> out;
  for (const auto& name : o.strategies.empty() ? defaults : o.strategies) {
    PhaseStrategy s = PhaseStrategy::parse(name);
    if (s.kind == StrategyKind::SdpRelaxation) s.num_candidates = o.candidates;
    out.push_back(s);
  }
  return out;
}

// Writes through `out` unless an output path is set.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error("write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw Error("write to '" + path + "' failed");
}

inline ExperimentConfig sweep_config(const CliCommand& cmd) {
  const Options& o = cmd.options;
  const bool fig1 = cmd.subcommand == Subcommand::Fig1;
  ExperimentConfig c = fig1 ? ExperimentConfig::fig1_defaults() : ExperimentConfig::fig2_defaults();
  if (fig1 && o.antennas) c.fixed_count = *o.antennas;
  if (!fig1 && o.sensors) c.fixed_count = *o.sensors;
  if (!o.sweep.empty()) c.sweep_values = o.sweep;
  c.trials = o.trials;
  c.master_seed = o.seed;
  c.strategies = strategies(o, {"sdp", "all-ones"});
  c.scenario_template = scenario_template(o, 1, 1);
  c.resample_scenario_per_trial = o.resample_per_trial;
  c.include_asymptotics = true;
  c.threads = threads_from_env();
  return c;
}

inline int run_sweep_command(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = sweep_config(cmd);
  const SweepResult result = run_sweep(config);
  Sink sink(cmd.options.output, out);
  if (cmd.options.format == Format::Json) {
    write_json(result, sink.stream());
  } else {
    write_csv(result, sink.stream());
  }
  sink.finish();
  if (!cmd.options.plot_script.empty()) {
    const std::string csv = cmd.options.output.empty()
                                ? std::string(cmd.subcommand == Subcommand::Fig1 ? "fig1" : "fig2") + ".csv"
                                : cmd.options.output;
    write_text_file(cmd.options.plot_script, plot_script(result, csv));
  }
  if (result.degraded()) err << "warning: more than 1% of SDP solves failed at some point\n";
  return 0;
}

inline int run_instance_command(const CliCommand& cmd, std::ostream& out) {
  const Options& o = cmd.options;
  const int n = o.sensors.value_or(4);
  const int m = o.antennas.value_or(4);
  RngStream rng(o.seed, 0);
  const Scenario scenario = sample_scenario(scenario_template(o, n, m), rng);
  const ChannelRealization channel = generate_channel(scenario, rng);
  std::vector<std::string> defaults;
  if (n == 2) defaults.push_back("closed-form-n2");
  defaults.push_back("sdp");
  defaults.push_back("all-ones");
  if (n <= 4) defaults.push_back("grid");
  const auto strats = strategies(o, defaults);

  std::vector<OptimizationReport> reports;
  for (std::size_t k = 0; k < strats.size(); ++k) {
    RngStream srng = rng.substream(k);
    try {
      reports.push_back(feedback_round(channel, scenario, strats[k], srng));
    } catch (const PhaseOptimizationError& e) {
      reports.push_back(e.partial_report());
    }
  }

  Sink sink(o.output, out);
  std::ostream& os = sink.stream();
  if (o.format == Format::Json) {
    nlohmann::json j;
    j["scenario"] = {{"n_sensors", n},
                     {"n_antennas", m},
                     {"seed", o.seed},
                     {"distances", scenario.distances},
                     {"sensor_noise_powers", scenario.sensor_noise_powers},
                     {"fc_noise_power", scenario.fc_noise_power},
                     {"path_loss_exp", scenario.path_loss_exp}};
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    os << j.dump(2) << '\n';
  } else {
    os << "strategy,achieved_variance,lower_bound,relaxation_value,duality_gap,diag_residual,"
          "min_eigenvalue,iterations,fallback,phases_rad\n";
    for (const auto& r : reports) {
      os << r.strategy.name() << ',' << format_double(r.achieved_variance) << ','
         << format_double(r.lower_bound) << ',' << format_optional(r.relaxation_value) << ',';
      if (r.sdp) {
        os << format_double(r.sdp->duality_gap) << ',' << format_double(r.sdp->diag_residual) << ','
           << format_double(r.sdp->min_eigenvalue) << ',' << r.sdp->iterations;
      } else {
        os << ",,,";
      }
      os << ',' << (r.fallback ? 1 : 0) << ',';
      const Eigen::VectorXd ph = r.phases.phases();
      for (Eigen::Index i = 0; i < ph.size(); ++i) os << (i ? ";" : "") << format_double(ph(i));
      os << '\n';
    }
  }
  sink.finish();
  return 0;
}

inline int run_oracle_command(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
  const Options& o = cmd.options;
  const int n = o.sensors.value_or(3);
  const int m = o.antennas.value_or(4);
  if (n > 4) throw CliUsageError("--sensors: the grid oracle supports at most 4 sensors");
  const PhaseStrategy sdp = strategies(o, {"sdp"}).front();
  const PhaseStrategy grid = PhaseStrategy::grid_oracle();

  Sink sink(o.output, out);
  std::ostream& os = sink.stream();
  nlohmann::json rows = nlohmann::json::array();
  if (o.format == Format::Csv) os << "instance,sdp_variance,grid_variance,ratio,within_1pct\n";
  int within = 0;
  for (int t = 0; t < o.trials; ++t) {
    RngStream rng(o.seed, static_cast<std::uint64_t>(t));
    const Scenario scenario = sample_scenario(scenario_template(o, n, m), rng);
    const ChannelRealization channel = generate_channel(scenario, rng);
    const FisherMatrix b = fisher_matrix(channel, scenario);
    RngStream srng = rng.substream(0);
    double v_sdp = 0.0;
    try {
      v_sdp = optimize_phases(b, sdp, srng).achieved_variance;
    } catch (const PhaseOptimizationError& e) {
      v_sdp = e.partial_report().achieved_variance;
    }
    const double v_grid = optimize_phases(b, grid, srng).achieved_variance;
    const double ratio = v_sdp / v_grid;
    const bool ok = ratio <= 1.01;
    within += ok ? 1 : 0;
    if (o.format == Format::Csv) {
      os << t << ',' << format_double(v_sdp) << ',' << format_double(v_grid) << ','
         << format_double(ratio) << ',' << (ok ? 1 : 0) << '\n';
    } else {
      rows.push_back({{"instance", t},
                      {"sdp_variance", v_sdp},
                      {"grid_variance", v_grid},
                      {"ratio", ratio},
                      {"within_1pct", ok}});
    }
  }
  if (o.format == Format::Json) os << rows.dump(2) << '\n';
  sink.finish();
  err << "sdp within 1% of grid oracle on " << within << " / " << o.trials << " instances\n";
  return 0;
}

inline int run_selftest(const CliCommand& cmd, std::ostream& out) {
  const std::uint64_t seed = cmd.options.seed;
  int failed = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    failed += ok ? 0 : 1;
  };

  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      RngStream rng(seed, static_cast<std::uint64_t>(t));
      ScenarioTemplate tpl;
      tpl.n_sensors = 2;
      tpl.n_antennas = 1 + t % 4;
      const Scenario s = sample_scenario(tpl, rng);
      const FisherMatrix b = fisher_matrix(generate_channel(s, rng), s);
      const Eigen::MatrixXcd& bm = b.matrix();
      const double closed = bm(0, 0).real() + bm(1, 1).real() + 2.0 * std::abs(bm(0, 1));
      const auto r = optimize_phases(b, PhaseStrategy::sdp_relaxation(), rng);
      worst = std::max(worst, std::abs(1.0 / r.achieved_variance - closed) / closed);
    }
    report("closed-form-n2", worst <= 1e-6, "max rel err " + format_double(worst));
  }
  {
    int within = 0;
    for (int t = 0; t < 20; ++t) {
      RngStream rng(seed, 1000 + static_cast<std::uint64_t>(t));
      ScenarioTemplate tpl;
      tpl.n_sensors = 3;
      tpl.n_antennas = 2 + 2 * (t % 2);
      const Scenario s = sample_scenario(tpl, rng);
      const FisherMatrix b = fisher_matrix(generate_channel(s, rng), s);
      const double v_sdp = optimize_phases(b, PhaseStrategy::sdp_relaxation(), rng).achieved_variance;
      const double v_grid = optimize_phases(b, PhaseStrategy::grid_oracle(), rng).achieved_variance;
      within += v_sdp <= 1.01 * v_grid ? 1 : 0;
    }
    report("grid-oracle", within >= 19, std::to_string(within) + "/20 within 1%");
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      RngStream rng(seed, 2000 + static_cast<std::uint64_t>(t));
      ScenarioTemplate tpl;
      tpl.n_sensors = 1 + t % 8;
      tpl.n_antennas = 1 + (t * 3) % 8;
      const Scenario s = sample_scenario(tpl, rng);
      const ChannelRealization ch = generate_channel(s, rng);
      const Eigen::VectorXd v = sensor_noise_vector(s);
      const Eigen::MatrixXcd d = fisher_matrix_direct(ch.matrix, v, s.fc_noise_power);
      const Eigen::MatrixXcd w = fisher_matrix_woodbury(ch.matrix, v, s.fc_noise_power);
      worst = std::max(worst, (d - w).norm() / d.norm());
    }
    report("dual-formula", worst <= 1e-10, "max rel err " + format_double(worst));
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      RngStream rng(seed, 3000 + static_cast<std::uint64_t>(t));
      ScenarioTemplate tpl;
      tpl.n_sensors = 1 + t;
      const AsymptoticInputs in = AsymptoticInputs::from(sample_scenario(tpl, rng));
      const double r = bound_ratio(in).ratio;
      worst = std::max(worst, std::abs(r - large_n_lower_bound(in) / single_antenna_upper_bound(in)));
    }
    report("ratio-identity", worst <= 1e-12, "max abs err " + format_double(worst));
  }
  return failed == 0 ? 0 : 1;
}

/// Full CLI behavior. Exit status: 0 success, 1 runtime or I/O failure, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliCommand cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const CliUsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    switch (cmd.subcommand) {
      case Subcommand::Fig1:
      case Subcommand::Fig2: return run_sweep_command(cmd, out, err);
      case Subcommand::Run: return run_instance_command(cmd, out);
      case Subcommand::Oracle: return run_oracle_command(cmd, out, err);
      case Subcommand::Selftest: return run_selftest(cmd, out);
    }
  } catch (const CliUsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace phasefuse::cli
