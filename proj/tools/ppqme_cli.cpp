// ppqme: construct and propagate the partially displacement-transformed
// second-order time-local master equation for N-site systems with harmonic
// baths.  Subcommands: simulate, sweep, dump-correlations, validate.
//
// Exit codes: 0 success, 2 config error, 3 numerical error, 4 validation
// failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppqme/config.hpp"
#include "ppqme/errors.hpp"
#include "ppqme/run.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ppqme::ConfigError("--values: '" + item + "' is not a number");
    }
    if (used != item.size()) {
      throw ppqme::ConfigError("--values: '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ppqme: partially displacement-transformed time-local master equation engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", param, values_csv;
  bool allow_divergent_alpha = false, corrupt_w = false;

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "propagate one configuration and write CSV/JSON");
  cmd_simulate->add_option("--config", config_path, "config file (JSON)")->required();
  cmd_simulate->add_option("--out", out_dir, "output directory (default: .)");
  cmd_simulate->add_flag("--allow-divergent-alpha", allow_divergent_alpha,
                         "override the smooth-weighting low-alpha rejection");

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "run a family of configurations over omega_h or alpha");
  cmd_sweep->add_option("--config", config_path, "base config file (JSON)")->required();
  cmd_sweep->add_option("--param", param, "swept parameter: omega_h | alpha")->required();
  cmd_sweep->add_option("--values", values_csv, "comma-separated values (cm^-1 or exponent)")
      ->required();
  cmd_sweep->add_option("--out", out_dir, "output directory (default: .)");
  cmd_sweep->add_flag("--allow-divergent-alpha", allow_divergent_alpha,
                      "override the smooth-weighting low-alpha rejection");

  CLI::App* cmd_dump = app.add_subcommand(
      "dump-correlations", "tabulate the bath correlation functions, no propagation");
  cmd_dump->add_option("--config", config_path, "config file (JSON)")->required();
  cmd_dump->add_option("--out", out_dir, "output directory (default: .)");
  cmd_dump->add_flag("--allow-divergent-alpha", allow_divergent_alpha,
                     "override the smooth-weighting low-alpha rejection");

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "run the self-contained invariant suite");
  cmd_validate
      ->add_flag("--corrupt-w", corrupt_w,
                 "negative control: perturb a Debye-Waller factor so the consistency "
                 "check must fail")
      ->group("");  // hidden from --help

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad invocation is a config error
  }

  try {
    if (cmd_simulate->parsed()) {
      const ppqme::RunConfig cfg = ppqme::parse_config_file(config_path, allow_divergent_alpha);
      const auto art = ppqme::run::simulate(cfg, out_dir);
      std::cout << "wrote " << art.csv_path << "\n";
      std::cout << "wrote " << art.json_path << "\n";
      return 0;
    }
    if (cmd_sweep->parsed()) {
      const std::vector<double> values = parse_values(values_csv);
      if (values.empty()) {
        std::cerr << "warning: --values is empty; nothing to sweep\n";
        return 0;
      }
      const ppqme::RunConfig cfg = ppqme::parse_config_file(config_path, allow_divergent_alpha);
      const auto result = ppqme::run::sweep(cfg, param, values, out_dir);
      for (const auto& point : result.points) {
        if (point.ok) {
          std::cout << param << "=" << point.value << "  metric=" << point.metric
                    << "  P1_long_time=" << point.p1_long_time << "\n";
        } else {
          std::cout << param << "=" << point.value << "  FAILED: " << point.error << "\n";
        }
      }
      std::cout << "wrote " << result.summary_path << "\n";
      return 0;
    }
    if (cmd_dump->parsed()) {
      const ppqme::RunConfig cfg = ppqme::parse_config_file(config_path, allow_divergent_alpha);
      const std::string path = ppqme::run::dump_correlations(cfg, out_dir);
      std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (cmd_validate->parsed()) {
      const ppqme::run::ValidationReport report = ppqme::run::validate(corrupt_w);
      ppqme::run::print_report(report, std::cout);
      return report.all_pass ? 0 : 4;
    }
  } catch (const ppqme::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ppqme::DivergentIntegral& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ppqme::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ppqme::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
