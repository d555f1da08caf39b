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

#ifndef SEQMEAS_MEASUREMENT_H_
#define SEQMEAS_MEASUREMENT_H_

#include <array>
#include <numbers>

#include "json.hpp"
#include "seqmeas/dirac.h"
#include "seqmeas/polarization.h"

namespace seqmeas {

inline constexpr double kMaxTheta = std::numbers::pi / 8.0;
inline constexpr double kMaxPhi = std::numbers::pi / 2.0;

// Probabilities below -kNegativityGuard make the forward model throw.
inline constexpr double kNegativityGuard = 1e-9;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Half-wave-plate angle theta (measurement strength) and the phase phi of the
// rotation axis around the HV axis of the Bloch sphere.
struct MeasurementSetting {
  double theta = 0.0;
  double phi = std::numbers::pi / 4.0;

  // theta in [0, pi/8], phi in [0, pi/2]; throws ValidationError.
  void validate() const;
};

// Imperfections of a real interferometer: interference visibility, the
// effective rotation-axis phase, and a multiplicative wave-plate angle scale.
struct ApparatusProfile {
  double visibility = 1.0;
  double phi_effective = std::numbers::pi / 4.0;
  double angle_scale = 1.0;

  void validate() const;

  static ApparatusProfile ideal() { return {}; }
  // V = 0.824, phi_eff = 60.3 deg, k = 0.977.
  static ApparatusProfile reference();
};

// Resolution epsilon, HV transmission tau and correlation fidelity nu.
struct ErrorParameters {
  double epsilon = 0.0;
  double tau = 1.0;
  double nu = 0.0;

  // gamma = -i nu.
  Complex gamma() const { return Complex(0.0, -nu); }
};

// One-sigma uncertainties of (epsilon, tau, nu).
struct ErrorSigmas {
  double epsilon = 0.0;
  double tau = 0.0;
  double nu = 0.0;
};

struct KrausPair {
  Operator2 m_p;
  Operator2 m_m;

  // max |M_P^dag M_P + M_M^dag M_M - I|
  double completeness_error() const;
};

// Joint probability of PM outcome m and HV outcome f, in kOutcomes order.
struct JointProbability {
  std::array<double, kNumOutcomes> p{};

  double at(int m, int f) const { return p[outcome_index(m, f)]; }
  double total() const;
  // P(m) summed over f, and P(f) summed over m.
  double port_marginal(int m) const { return at(m, 1) + at(m, -1); }
  double hv_marginal(int f) const { return at(1, f) + at(-1, f); }
  // Averages of m, f and m*f.
  double mean_m() const { return port_marginal(1) - port_marginal(-1); }
  double mean_f() const { return hv_marginal(1) - hv_marginal(-1); }
  double mean_mf() const { return at(1, 1) + at(-1, -1) - at(1, -1) - at(-1, 1); }
};

// M_P = (cos 2theta I + e^{i phi} sin 2theta S_PM) / sqrt 2, M_M with minus.
KrausPair kraus_operators(const MeasurementSetting& s);

// P(m, f) = <f| M_m rho M_m^dag |f>.
JointProbability outcome_probabilities_operator(const PolarizationState& state,
                                                const MeasurementSetting& s);

// tau = cos 4theta, epsilon = cos phi sin 4theta, nu = -sin phi sin 4theta.
ErrorParameters ideal_error_parameters(const MeasurementSetting& s);

// epsilon = V cos(phi_eff) sin(4k theta), nu = -V sin(phi_eff) sin(4k theta),
// tau = cos(4k theta).
ErrorParameters apparatus_error_parameters(const ApparatusProfile& a, double theta);

// The four-coefficient convolution of the Dirac distribution, before any
// reality or positivity check.
std::array<Complex, kNumOutcomes> forward_kernel(const DiracDistribution& d,
                                                 const ErrorParameters& e);

// forward_kernel() as a real joint probability. Throws
// UnphysicalParameterError if an entry is below -kNegativityGuard and
// ValidationError if an entry has an imaginary part above kNegativityGuard.
JointProbability forward_probabilities(const DiracDistribution& d, const ErrorParameters& e);

// Ideal statistics at (k theta, phi_eff) mixed with their port-flipped copy:
// ((1+V)/2) P(m,f) + ((1-V)/2) P(-m,f).
JointProbability apparatus_probabilities(const PolarizationState& state,
                                         const ApparatusProfile& a, double theta);

void to_json(nlohmann::json& j, const JointProbability& p);
void to_json(nlohmann::json& j, const ErrorParameters& e);

}  // namespace seqmeas

#endif  // SEQMEAS_MEASUREMENT_H_
