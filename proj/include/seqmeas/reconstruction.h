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

#ifndef SEQMEAS_RECONSTRUCTION_H_
#define SEQMEAS_RECONSTRUCTION_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqmeas/calibration.h"
#include "seqmeas/dirac.h"
#include "seqmeas/measurement.h"
#include "seqmeas/simulator.h"

namespace seqmeas {

// Reconstruction refuses |epsilon|, |tau| or |nu| below this value.
inline constexpr double kConditioningFloor = 0.02;
inline constexpr std::size_t kDefaultBootstrapReplicates = 10'000;
// A reduced chi-square above this marks the strengths as inconsistent.
inline constexpr double kChiSquareFlagThreshold = 3.0;

// Normalized joint outcome frequencies P_exp(m, f) at one strength.
struct JointFrequency {
  std::array<double, kNumOutcomes> p_exp{};
  std::uint64_t n_total = 0;
  double theta = 0.0;

  // Entries in [0, 1] summing to 1 within 1e-12, n_total > 0.
  void validate() const;

  static JointFrequency from_record(const CountRecord& record);
  static JointFrequency from_probability(const JointProbability& p, std::uint64_t n_total,
                                         double theta);

  double mean_m() const;
  double mean_f() const;
  double mean_mf() const;
};

// One-sigma errors of the reconstructed quantities: real and imaginary part
// of each Dirac cell (kOutcomes order) and the Stokes triple (x, y, z).
struct ReconstructionSigmas {
  std::array<double, kNumOutcomes> re{};
  std::array<double, kNumOutcomes> im{};
  std::array<double, 3> stokes{};
};

struct ReconstructionResult {
  DiracDistribution dirac;
  ReconstructionSigmas sigma;
  ErrorParameters error_params_used;
  double theta = 0.0;

  PolarizationState state() const;
};

// Throws IllConditionedError naming the first parameter with |value| < floor.
void check_conditioning(const ErrorParameters& e, double floor = kConditioningFloor);

// Inverse of the error kernel: each cell is a weighted sum of the four
// frequencies with weights 1/4 +- 1/(4 eps) +- 1/(4 tau) +- i/(4 nu). No
// conditioning or normalization checks.
DiracDistribution invert_kernel(const std::array<double, kNumOutcomes>& p,
                                const ErrorParameters& e);

// Same inverse assembled from the three estimators x = <f>/tau,
// y = <m>/eps, z = <mf>/nu.
DiracDistribution reconstruct_from_estimators(const JointFrequency& freq,
                                              const ErrorParameters& e);

// First-order error propagation: multinomial covariance of the frequencies
// plus independent Gaussian errors on (eps, tau, nu), pushed through the
// Jacobian of invert_kernel().
ReconstructionSigmas propagate_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e,
                                           double floor = kConditioningFloor);

// Resampling estimate of the same errors: multinomial redraws of the counts
// and Gaussian redraws of (eps, tau, nu), replicates run in parallel.
ReconstructionSigmas bootstrap_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e, std::size_t replicates,
                                           std::uint64_t seed);

// Checks conditioning, inverts the kernel and propagates errors.
ReconstructionResult reconstruct_dirac(const JointFrequency& freq, const ErrorParameters& e,
                                       const ErrorSigmas& sigma_e = {},
                                       double floor = kConditioningFloor);

struct SkippedSetting {
  double theta = 0.0;
  std::string reason;
};

struct ReconstructionSeries {
  std::vector<ReconstructionResult> results;  // input order, skipped ones removed
  std::vector<SkippedSetting> skipped;
};

// Reconstructs every record with the calibration point at its angle.
// Ill-conditioned angles are skipped and listed; an angle without a
// calibration point raises UsageError. Records run in parallel.
ReconstructionSeries reconstruct_series(std::span<const CountRecord> records,
                                        const CalibrationResult& calibration,
                                        double floor = kConditioningFloor);

namespace serial {
ReconstructionSigmas bootstrap_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e, std::size_t replicates,
                                           std::uint64_t seed);
ReconstructionSeries reconstruct_series(std::span<const CountRecord> records,
                                        const CalibrationResult& calibration,
                                        double floor = kConditioningFloor);
}  // namespace serial

struct ComponentConsistency {
  double mean = 0.0;        // inverse-variance weighted
  double sigma_mean = 0.0;
  double reduced_chi_square = 0.0;
};

struct ConsistencyReport {
  std::array<ComponentConsistency, kNumOutcomes> re;
  std::array<ComponentConsistency, kNumOutcomes> im;
  std::array<ComponentConsistency, 3> stokes;
  bool flagged = false;

  double max_reduced_chi_square() const;
  DiracDistribution mean_dirac() const;
};

// Weighted means and reduced chi-squares of every component across strengths.
// Needs at least two results.
ConsistencyReport consistency_across_strengths(std::span<const ReconstructionResult> results);

struct ExpectationSummary {
  double s_pm = 0.0;            // <S_PM>
  double s_hv = 0.0;            // <S_HV>
  double im_correlation = 0.0;  // Im <S_HV S_PM>
};

ExpectationSummary expectation_summary(const DiracDistribution& d);

// Radial rescaling onto the Bloch ball; physical states are returned as is.
PolarizationState nearest_physical_state(const PolarizationState& state);

void to_json(nlohmann::json& j, const ReconstructionResult& r);
void to_json(nlohmann::json& j, const ConsistencyReport& r);

}  // namespace seqmeas

#endif  // SEQMEAS_RECONSTRUCTION_H_
