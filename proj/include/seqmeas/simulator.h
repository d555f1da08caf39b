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

#ifndef SEQMEAS_SIMULATOR_H_
#define SEQMEAS_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seqmeas/measurement.h"
#include "seqmeas/polarization.h"

namespace seqmeas {

inline constexpr std::uint64_t kDefaultPhotonsPerSetting = 1'000'000;
inline constexpr std::size_t kDefaultGridPoints = 10;

// Calibration inputs, in the order records are emitted for each setting.
inline constexpr std::array<std::string_view, 3> kCalibrationInputs = {"P", "H", "R"};
// Input slot used when deriving seeds for experiment records.
inline constexpr std::uint64_t kExperimentInputIndex = 3;

// Photon counts for one (theta, input) setting, cells in kOutcomes order.
struct CountRecord {
  double theta = 0.0;
  std::string input_label = "custom";
  std::array<std::uint64_t, kNumOutcomes> counts{};
  std::uint64_t n_total = 0;

  std::uint64_t at(int m, int f) const { return counts[outcome_index(m, f)]; }
  // Counts must sum to n_total > 0.
  void validate() const;

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

struct RunPlan {
  std::vector<double> theta_grid;
  std::uint64_t photons_per_setting = kDefaultPhotonsPerSetting;
  std::uint64_t seed = 0;
  ApparatusProfile profile;

  void validate() const;
};

// kDefaultGridPoints equally spaced angles from 0 to pi/8 inclusive.
std::vector<double> default_theta_grid();

// Positional seed for record (setting_index, input_index) of a run. Distinct
// keys map to distinct seeds for a fixed master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t setting_index,
                          std::uint64_t input_index);

// Multinomial draw over the four joint outcomes by sequential conditional
// binomials. `p` need not be exactly normalized.
std::array<std::uint64_t, kNumOutcomes> sample_multinomial(const std::array<double, kNumOutcomes>& p,
                                                           std::uint64_t n, std::mt19937_64& rng);

CountRecord sample_counts(const PolarizationState& state, const ApparatusProfile& a, double theta,
                          std::uint64_t n, std::uint64_t seed, std::string input_label = "custom");

// Three records (P, H, R inputs) per grid angle, grid-major. Records are
// generated in parallel; the result does not depend on the thread count.
std::vector<CountRecord> simulate_calibration_suite(const RunPlan& plan);

// One record per grid angle for `state`.
std::vector<CountRecord> simulate_experiment(const PolarizationState& state, const RunPlan& plan,
                                             const std::string& input_label = "custom");

// Single-threaded reference versions of the two simulations above.
namespace serial {
std::vector<CountRecord> simulate_calibration_suite(const RunPlan& plan);
std::vector<CountRecord> simulate_experiment(const PolarizationState& state, const RunPlan& plan,
                                             const std::string& input_label = "custom");
}  // namespace serial

// CSV with header theta_deg,input_label,n_PH,n_PV,n_MH,n_MV.
void write_counts_csv(std::ostream& out, std::span<const CountRecord> records);
std::vector<CountRecord> read_counts_csv(std::istream& in);

std::string format_theta_deg(double theta);

}  // namespace seqmeas

#endif  // SEQMEAS_SIMULATOR_H_
