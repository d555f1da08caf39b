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

#ifndef SEQMEAS_CALIBRATION_H_
#define SEQMEAS_CALIBRATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "seqmeas/measurement.h"
#include "seqmeas/simulator.h"

namespace seqmeas {

// Records with fewer photons are refused by the estimators.
inline constexpr std::uint64_t kMinCalibrationPhotons = 100;

// Bounds and tolerance of the golden-section search for the angle scale k.
inline constexpr double kAngleScaleMin = 0.9;
inline constexpr double kAngleScaleMax = 1.1;
inline constexpr double kAngleScaleTolerance = 1e-6;

// Two calibration angles closer than this (radians) are the same setting.
inline constexpr double kThetaMatchTolerance = 1e-7;

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

// epsilon = P(P|P) - P(M|P) from a P-input record.
Estimate estimate_epsilon(const CountRecord& record);
// tau = P(., H|H) - P(., V|H) from an H-input record.
Estimate estimate_tau(const CountRecord& record);
// nu = sum m f P(m, f|R) from an R-input record.
Estimate estimate_nu(const CountRecord& record);

// Per-angle calibration values with one-sigma binomial errors.
struct CalibrationEstimate {
  double theta = 0.0;
  double epsilon_hat = 0.0;
  double tau_hat = 0.0;
  double nu_hat = 0.0;
  double sigma_epsilon = 0.0;
  double sigma_tau = 0.0;
  double sigma_nu = 0.0;

  ErrorParameters params() const { return {epsilon_hat, tau_hat, nu_hat}; }
  ErrorSigmas sigmas() const { return {sigma_epsilon, sigma_tau, sigma_nu}; }
};

struct FitPoint {
  double theta = 0.0;
  double value = 0.0;
  double sigma = 1.0;
};

enum class FitModel {
  // value = A sin(4 theta); returns A.
  kSin4Theta,
  // value = cos(4 k theta); returns k.
  kCos4ThetaScaled,
};

// Weighted least squares with weights 1/sigma^2. Throws DegenerateFitError
// when no point carries information about the parameter.
Estimate fit_amplitude(std::span<const FitPoint> points, FitModel model);

struct VisibilityPhase {
  double visibility = 0.0;
  double phi_effective = 0.0;
};

// visibility = sqrt(V_eps^2 + V_nu^2), phi_eff = atan2(V_nu, V_eps).
VisibilityPhase derive_visibility_phase(double v_epsilon, double v_nu);

// Fitted strength dependence of the apparatus.
struct CalibrationCurve {
  double v_epsilon = 0.0;
  double v_nu = 0.0;
  double tau_zero = 1.0;
  double angle_scale = 1.0;
  double sigma_v_epsilon = 0.0;
  double sigma_v_nu = 0.0;
  double sigma_tau_zero = 0.0;
  double sigma_angle_scale = 0.0;
  double visibility = 0.0;
  double phi_effective = 0.0;

  ApparatusProfile profile() const { return {visibility, phi_effective, angle_scale}; }
};

struct CalibrationResult {
  std::vector<CalibrationEstimate> points;  // sorted by theta
  CalibrationCurve curve;

  // Point measured at `theta`, if any.
  std::optional<CalibrationEstimate> find(double theta) const;
};

// Groups records by angle, estimates (epsilon, tau, nu) at every angle and
// fits the curve. Every angle needs exactly one P, H and R record; a missing
// input raises UsageError("missing calibration input ...").
CalibrationResult calibrate(std::span<const CountRecord> records);

void to_json(nlohmann::json& j, const CalibrationResult& c);
void from_json(const nlohmann::json& j, CalibrationResult& c);

}  // namespace seqmeas

#endif  // SEQMEAS_CALIBRATION_H_
