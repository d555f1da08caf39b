// Copyright 2026 The seqmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: simulate, calibrate, reconstruct, reproduce-paper,
// defaults.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "seqmeas/errors.h"
#include "seqmeas/pipeline.h"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> photons;
  std::optional<std::string> out;
  std::optional<std::string> theta_grid;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Key-value config file");
  cmd->add_option("--seed", flags.seed, "Master RNG seed");
  cmd->add_option("--photons", flags.photons, "Photons per setting");
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--theta-grid", flags.theta_grid, "Comma-separated angles in degrees");
}

seqmeas::PipelineConfig resolve_config(const CommonFlags& flags) {
  seqmeas::PipelineConfig config = seqmeas::default_config();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw seqmeas::IoError("cannot read config '" + flags.config_path + "'");
    config = seqmeas::parse_config(in, config);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.photons) config.photons_per_setting = *flags.photons;
  if (flags.out) config.output_dir = *flags.out;
  if (flags.theta_grid) config.theta_grid_deg = seqmeas::parse_theta_grid(*flags.theta_grid);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential PM/HV polarization measurement: simulation, calibration and "
               "Dirac-distribution reconstruction"};
  app.require_subcommand(1);

  CommonFlags simulate_flags;
  auto* simulate = app.add_subcommand("simulate", "Simulate calibration and experiment counts");
  add_common_flags(simulate, simulate_flags);

  CommonFlags calibrate_flags;
  std::string calibrate_csv;
  auto* calibrate = app.add_subcommand("calibrate", "Fit error parameters from calibration counts");
  calibrate->add_option("counts_csv", calibrate_csv, "Calibration counts CSV")->required();
  add_common_flags(calibrate, calibrate_flags);

  CommonFlags reconstruct_flags;
  std::string reconstruct_csv;
  std::string reconstruct_json;
  bool report_physical = false;
  auto* reconstruct =
      app.add_subcommand("reconstruct", "Reconstruct the Dirac distribution from experiment counts");
  reconstruct->add_option("counts_csv", reconstruct_csv, "Experiment counts CSV")->required();
  reconstruct->add_option("calibration_json", reconstruct_json, "Calibration JSON")->required();
  reconstruct->add_flag("--report-physical", report_physical,
                        "Also report the nearest physical state of the aggregate");
  add_common_flags(reconstruct, reconstruct_flags);

  CommonFlags reproduce_flags;
  auto* reproduce =
      app.add_subcommand("reproduce-paper", "Regenerate the calibration and reconstruction figures");
  add_common_flags(reproduce, reproduce_flags);

  CommonFlags defaults_flags;
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  add_common_flags(defaults, defaults_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (simulate->parsed()) {
      seqmeas::cmd_simulate(resolve_config(simulate_flags));
    } else if (calibrate->parsed()) {
      seqmeas::cmd_calibrate(calibrate_csv, resolve_config(calibrate_flags).output_dir);
    } else if (reconstruct->parsed()) {
      seqmeas::cmd_reconstruct(reconstruct_csv, reconstruct_json,
                               resolve_config(reconstruct_flags).output_dir, std::cerr,
                               report_physical);
    } else if (reproduce->parsed()) {
      seqmeas::cmd_reproduce_paper(resolve_config(reproduce_flags));
    } else if (defaults->parsed()) {
      std::cout << seqmeas::format_config(resolve_config(defaults_flags));
    }
  } catch (const seqmeas::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
