#include "tvf/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "tvf/config.hpp"
#include "tvf/csv.hpp"
#include "tvf/sim.hpp"

namespace tvf::app {

namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string message;
};

// Loads and builds a scenario; diagnostics other than errors go to `err`.
sim::Scenario load(const std::string& path, bool deep_checks, std::ostream& err) {
  if (!fs::exists(path)) throw Failure{path + ": file not found"};
  config::ConfigFile file;
  try {
    file = config::ConfigFile::load(path);
  } catch (const config::ConfigError& e) {
    throw Failure{e.what()};
  }
  config::BuildResult built = config::build_scenario(file, deep_checks);
  for (const auto& d : built.diagnostics) err << config::format(d) << '\n';
  if (!built.ok()) throw Failure{"invalid configuration"};
  return std::move(*built.scenario);
}

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string settling(const std::optional<double>& t) {
  return t ? num(*t) + " s" : "not reached";
}

void print_summary(std::ostream& out, const sim::Trace& trace) {
  for (std::size_t i = 0; i < trace.follower_count(); ++i) {
    const sim::ControllerSummary s = sim::summarize(trace, i);
    out << "follower " << trace.names()[i] << " (" << sim::to_string(trace.kinds()[i]) << ")\n"
        << "  settling time (1%):  " << settling(s.settling_time) << '\n'
        << "  max |v|:             " << num(s.max_v) << " m/s\n"
        << "  max |w|:             " << num(s.max_omega) << " rad/s\n"
        << "  max |wheel| L / R:   " << num(s.max_left) << " / " << num(s.max_right)
        << " rad/s\n"
        << "  initial error norm:  " << num(s.initial_error_norm) << '\n'
        << "  final error norm:    " << num(s.final_error_norm) << '\n';
    if (trace.kinds()[i] == sim::ControllerKind::FuzzyAdaptive) {
      bool equal = true;
      for (std::size_t k = 0; k < trace.rows() && equal; ++k) {
        const Gains& g = trace.sample(k, i).gains;
        equal = g.k2 == g.k3;
      }
      out << "  k2 == k3 at every step: " << (equal ? "yes" : "no") << '\n';
    }
  }
}

sim::Trace run_checked(const sim::Scenario& scenario) {
  try {
    return sim::run(scenario);
  } catch (const sim::SimulationError& e) {
    throw Failure{std::string("run aborted: ") + e.what()};
  } catch (const expr::EvalError& e) {
    throw Failure{std::string("run aborted: ") + e.what()};
  }
}

nlohmann::json summary_json(const sim::ControllerSummary& s) {
  nlohmann::json j = {{"max_left", s.max_left},
                      {"max_right", s.max_right},
                      {"peak_left", s.peak_left},
                      {"peak_right", s.peak_right},
                      {"max_v", s.max_v},
                      {"max_omega", s.max_omega},
                      {"initial_error_norm", s.initial_error_norm},
                      {"final_error_norm", s.final_error_norm}};
  j["settling_time"] = s.settling_time ? nlohmann::json(*s.settling_time) : nlohmann::json();
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Failure{"failed to write " + path.string()};
}

std::string report_text(const sim::ComparisonReport& report) {
  std::ostringstream s;
  for (const auto& f : report.followers) {
    s << "follower " << f.name << '\n'
      << "                        bc            fabc          decrease (%)\n";
    auto line = [&s](const char* label, double bc, double fabc, double dec) {
      s << "  " << std::left << std::setw(22) << label << std::setw(14) << num(bc)
        << std::setw(14) << num(fabc) << num(dec, 4) << '\n';
    };
    line("max |wheel left|", f.bc.max_left, f.fabc.max_left, f.left_decrease);
    line("max |wheel right|", f.bc.max_right, f.fabc.max_right, f.right_decrease);
    line("max |v|", f.bc.max_v, f.fabc.max_v, f.v_decrease);
    line("max |w|", f.bc.max_omega, f.fabc.max_omega, f.omega_decrease);
    s << "  settling time bc:     " << settling(f.bc.settling_time) << '\n'
      << "  settling time fabc:   " << settling(f.fabc.settling_time) << '\n';
  }
  return s.str();
}

nlohmann::json report_json(const sim::ComparisonReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : report.followers) {
    arr.push_back({{"name", f.name},
                   {"bc", summary_json(f.bc)},
                   {"fabc", summary_json(f.fabc)},
                   {"left_decrease", f.left_decrease},
                   {"right_decrease", f.right_decrease},
                   {"v_decrease", f.v_decrease},
                   {"omega_decrease", f.omega_decrease}});
  }
  return {{"followers", arr}};
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  load(path, true, err);
  out << path << ": ok\n";
  return 0;
}

int cmd_simulate(const std::string& path, std::string out_path, const std::string& controller,
                 std::ostream& out, std::ostream& err) {
  sim::Scenario scenario = load(path, false, err);
  if (controller == "bc") {
    scenario = sim::with_controller(std::move(scenario), sim::ControllerKind::Backstepping);
  } else if (controller == "fabc") {
    scenario = sim::with_controller(std::move(scenario), sim::ControllerKind::FuzzyAdaptive);
  }
  if (out_path.empty()) {
    out_path = fs::path(path).stem().string() + (controller.empty() ? "" : "_" + controller) + ".csv";
  }
  const sim::Trace trace = run_checked(scenario);
  try {
    csv::write_trace_file(out_path, trace);
  } catch (const std::exception& e) {
    throw Failure{e.what()};
  }
  out << "wrote " << trace.rows() << " rows to " << out_path << '\n';
  print_summary(out, trace);
  return 0;
}

int cmd_compare(const std::string& path, const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  const sim::Scenario scenario = load(path, false, err);
  const sim::Scenario bc = sim::with_controller(scenario, sim::ControllerKind::Backstepping);
  const sim::Scenario fabc = sim::with_controller(scenario, sim::ControllerKind::FuzzyAdaptive);
  auto fut_bc = std::async(std::launch::async, [&bc] { return run_checked(bc); });
  auto fut_fabc = std::async(std::launch::async, [&fabc] { return run_checked(fabc); });
  const sim::Trace trace_bc = fut_bc.get();
  const sim::Trace trace_fabc = fut_fabc.get();

  const sim::ComparisonReport report = sim::compare(trace_bc, trace_fabc);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{"cannot create " + dir.string() + ": " + ec.message()};
  try {
    csv::write_trace_file((dir / "bc.csv").string(), trace_bc);
    csv::write_trace_file((dir / "fabc.csv").string(), trace_fabc);
  } catch (const std::exception& e) {
    throw Failure{e.what()};
  }
  const std::string text = report_text(report);
  write_text(dir / "report.txt", text);
  write_text(dir / "report.json", report_json(report).dump(2) + "\n");
  out << text;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Leader-follower formation simulator", "tvf"};
  cli.require_subcommand(1);

  std::string validate_path;
  auto* validate = cli.add_subcommand("validate", "Check a scenario file");
  validate->add_option("config", validate_path, "Scenario file")->required();

  std::string sim_path;
  std::string sim_out;
  std::string sim_controller;
  auto* simulate = cli.add_subcommand("simulate", "Run a scenario and write its trace");
  simulate->add_option("config", sim_path, "Scenario file")->required();
  simulate->add_option("--out", sim_out, "CSV output path");
  simulate->add_option("--controller", sim_controller, "Override every follower's controller")
      ->check(CLI::IsMember({"bc", "fabc"}));

  std::string cmp_path;
  std::string cmp_out = ".";
  auto* compare = cli.add_subcommand("compare", "Run bc and fabc on the same scenario");
  compare->add_option("config", cmp_path, "Scenario file")->required();
  compare->add_option("--out", cmp_out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_path, out, err);
    if (*simulate) return cmd_simulate(sim_path, sim_out, sim_controller, out, err);
    if (*compare) return cmd_compare(cmp_path, cmp_out, out, err);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace tvf::app
