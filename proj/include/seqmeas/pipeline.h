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

#ifndef SEQMEAS_PIPELINE_H_
#define SEQMEAS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqmeas/measurement.h"
#include "seqmeas/polarization.h"
#include "seqmeas/simulator.h"

namespace seqmeas {

inline constexpr std::uint64_t kDefaultSeed = 20170419;

// Settings shared by the CLI subcommands. Angles are in degrees here and
// converted at the boundary.
struct PipelineConfig {
  ApparatusProfile profile = ApparatusProfile::reference();
  std::vector<double> theta_grid_deg;
  std::uint64_t photons_per_setting = kDefaultPhotonsPerSetting;
  std::uint64_t seed = kDefaultSeed;
  // Named label (H, V, P, M, R, L) or a Stokes triple "x,y,z".
  std::string input_state;
  std::filesystem::path output_dir = "out";

  void validate() const;
  PolarizationState state() const;
  // Label written to the experiment CSV: the named label or "custom".
  std::string state_label() const;
  RunPlan plan() const;
};

// Reference apparatus profile, 10-point grid over [0, 22.5] deg, 10^6 photons per setting
// and the pure elliptical input (0.8, sqrt(0.11), 0.5).
PipelineConfig default_config();

// Flat "key = value" text; '#' starts a comment. Keys not present keep their
// value from `base`. Unknown keys and bad values raise ParseError with the
// line number.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = default_config());
std::string format_config(const PipelineConfig& config);

// "a,b,c" in degrees.
std::vector<double> parse_theta_grid(const std::string& text);

// Writes <out>/calibration.csv and <out>/experiment.csv.
void cmd_simulate(const PipelineConfig& config);

// Reads a counts CSV and writes <out_dir>/calibration.json.
void cmd_calibrate(const std::filesystem::path& counts_csv, const std::filesystem::path& out_dir);

// Reads experiment counts and a calibration JSON, writes
// <out_dir>/reconstruction.json. Skipped angles are reported on `warnings`.
void cmd_reconstruct(const std::filesystem::path& counts_csv,
                     const std::filesystem::path& calibration_json,
                     const std::filesystem::path& out_dir, std::ostream& warnings,
                     bool report_physical = false);

// Full simulate -> calibrate -> reconstruct run with the reference profile and
// planted input. Writes fig2.csv, fig3.csv, fig4.csv, fig5.csv, fig6a.csv,
// fig6b.csv and summary.json into config.output_dir.
void cmd_reproduce_paper(const PipelineConfig& config);

}  // namespace seqmeas

#endif  // SEQMEAS_PIPELINE_H_
