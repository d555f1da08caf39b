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

#include "seqmeas/measurement.h"

#include <cmath>
#include <string>

#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

KrausPair kraus_at(double theta, double phi) {
  const double c = std::cos(2.0 * theta) / std::numbers::sqrt2;
  const Complex s = std::polar(std::sin(2.0 * theta) / std::numbers::sqrt2, phi);
  const Operator2 id = Operator2::identity();
  return {c * id + s * s_pm(), c * id - s * s_pm()};
}

JointProbability operator_probabilities_at(const PolarizationState& state, double theta,
                                           double phi) {
  const KrausPair k = kraus_at(theta, phi);
  const Operator2 rho = density_matrix(state);
  JointProbability out;
  for (int m : {1, -1}) {
    const Operator2& op = m == 1 ? k.m_p : k.m_m;
    const Operator2 post = op * rho * op.adjoint();
    out.p[outcome_index(m, 1)] = post(0, 0).real();
    out.p[outcome_index(m, -1)] = post(1, 1).real();
  }
  return out;
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= kMaxTheta)) {
    throw ValidationError("theta " + std::to_string(theta) + " rad outside [0, pi/8]");
  }
}

}  // namespace

void MeasurementSetting::validate() const {
  check_theta(theta);
  if (!(phi >= 0.0 && phi <= kMaxPhi)) {
    throw ValidationError("phi " + std::to_string(phi) + " rad outside [0, pi/2]");
  }
}

void ApparatusProfile::validate() const {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw ValidationError("visibility must lie in [0, 1]");
  }
  if (!std::isfinite(phi_effective)) throw ValidationError("phi_effective must be finite");
  if (!(angle_scale >= 0.9 && angle_scale <= 1.1)) {
    throw ValidationError("angle_scale must lie in [0.9, 1.1]");
  }
}

ApparatusProfile ApparatusProfile::reference() { return {0.824, deg_to_rad(60.3), 0.977}; }

double KrausPair::completeness_error() const {
  return (m_p.adjoint() * m_p + m_m.adjoint() * m_m).max_abs_diff(Operator2::identity());
}

double JointProbability::total() const { return p[0] + p[1] + p[2] + p[3]; }

KrausPair kraus_operators(const MeasurementSetting& s) {
  s.validate();
  return kraus_at(s.theta, s.phi);
}

JointProbability outcome_probabilities_operator(const PolarizationState& state,
                                                const MeasurementSetting& s) {
  s.validate();
  return operator_probabilities_at(state, s.theta, s.phi);
}

ErrorParameters ideal_error_parameters(const MeasurementSetting& s) {
  s.validate();
  const double sin4 = std::sin(4.0 * s.theta);
  return {std::cos(s.phi) * sin4, std::cos(4.0 * s.theta), -std::sin(s.phi) * sin4};
}

ErrorParameters apparatus_error_parameters(const ApparatusProfile& a, double theta) {
  a.validate();
  check_theta(theta);
  const double scaled = 4.0 * a.angle_scale * theta;
  const double sin4 = std::sin(scaled);
  return {a.visibility * std::cos(a.phi_effective) * sin4, std::cos(scaled),
          -a.visibility * std::sin(a.phi_effective) * sin4};
}

std::array<Complex, kNumOutcomes> forward_kernel(const DiracDistribution& d,
                                                 const ErrorParameters& e) {
  const Complex i_nu(0.0, e.nu);
  const Complex same = (1.0 + e.epsilon + e.tau - i_nu) / 4.0;          // rho(m, f)
  const Complex port_flip = (1.0 - e.epsilon + e.tau + i_nu) / 4.0;     // rho(-m, f)
  const Complex hv_flip = (1.0 + e.epsilon - e.tau + i_nu) / 4.0;       // rho(m, -f)
  const Complex both_flip = (1.0 - e.epsilon - e.tau - i_nu) / 4.0;     // rho(-m, -f)
  std::array<Complex, kNumOutcomes> out;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const int m = kOutcomes[i].s_pm;
    const int f = kOutcomes[i].s_hv;
    out[i] = same * d.at(m, f) + port_flip * d.at(-m, f) + hv_flip * d.at(m, -f) +
             both_flip * d.at(-m, -f);
  }
  return out;
}

JointProbability forward_probabilities(const DiracDistribution& d, const ErrorParameters& e) {
  const auto raw = forward_kernel(d, e);
  JointProbability out;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    if (std::abs(raw[i].imag()) > kNegativityGuard) {
      throw ValidationError("forward probability " + std::string(outcome_key(i)) +
                            " is not real; Dirac input is invalid");
    }
    if (raw[i].real() < -kNegativityGuard) {
      throw UnphysicalParameterError("forward probability " + std::string(outcome_key(i)) + " = " +
                                     std::to_string(raw[i].real()) +
                                     " is negative for the given error parameters");
    }
    out.p[i] = raw[i].real();
  }
  return out;
}

JointProbability apparatus_probabilities(const PolarizationState& state,
                                         const ApparatusProfile& a, double theta) {
  a.validate();
  check_theta(theta);
  const JointProbability ideal =
      operator_probabilities_at(state, a.angle_scale * theta, a.phi_effective);
  const double keep = 0.5 * (1.0 + a.visibility);
  const double flip = 0.5 * (1.0 - a.visibility);
  JointProbability out;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const int m = kOutcomes[i].s_pm;
    const int f = kOutcomes[i].s_hv;
    out.p[i] = keep * ideal.at(m, f) + flip * ideal.at(-m, f);
  }
  return out;
}

void to_json(nlohmann::json& j, const JointProbability& p) {
  j = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumOutcomes; ++i) j[std::string(outcome_key(i))] = p.p[i];
}

void to_json(nlohmann::json& j, const ErrorParameters& e) {
  j = {{"epsilon", e.epsilon}, {"tau", e.tau}, {"nu", e.nu}};
}

}  // namespace seqmeas
