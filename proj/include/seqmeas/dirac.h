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

#ifndef SEQMEAS_DIRAC_H_
#define SEQMEAS_DIRAC_H_

#include <array>

#include "json.hpp"
#include "seqmeas/polarization.h"

namespace seqmeas {

// Kirkwood-Dirac quasi-probability rho(s_PM, s_HV) = <s_HV|s_PM><s_PM|rho|s_HV>
// over the four joint eigenvalue pairs, stored in kOutcomes order.
// Values are complex and may be negative; nothing is clamped.
class DiracDistribution {
 public:
  DiracDistribution() = default;
  explicit DiracDistribution(const std::array<Complex, kNumOutcomes>& values) : values_(values) {}

  Complex at(int s_pm, int s_hv) const { return values_[outcome_index(s_pm, s_hv)]; }
  Complex at(const EigenvaluePair& p) const { return at(p.s_pm, p.s_hv); }
  Complex operator[](std::size_t i) const { return values_[i]; }
  const std::array<Complex, kNumOutcomes>& values() const { return values_; }

  Complex total() const;
  // Marginal over s_HV at fixed s_PM, and vice versa.
  Complex marginal_pm(int s_pm) const;
  Complex marginal_hv(int s_hv) const;

  // Throws ValidationError unless the sum is 1, both marginals are real and
  // the imaginary parts follow the +,-,-,+ pattern, all within `tol`.
  void validate(double tol = 1e-12) const;

 private:
  std::array<Complex, kNumOutcomes> values_{};
};

// Closed form (1 + s_PM y + s_HV x + i s_PM s_HV z) / 4.
DiracDistribution dirac_from_state(const PolarizationState& state);

// x = sum s_HV Re, y = sum s_PM Re, z = sum s_PM s_HV Im. The result is not
// checked for physicality.
PolarizationState state_from_dirac(const DiracDistribution& d, double tol = 1e-12);

// sum s_PM s_HV rho = <S_HV S_PM> = i <S_RL>.
Complex imaginary_correlation(const DiracDistribution& d);

// {"PH": {"re":..,"im":..}, "PV": .., "MH": .., "MV": ..}
void to_json(nlohmann::json& j, const DiracDistribution& d);
void from_json(const nlohmann::json& j, DiracDistribution& d);

}  // namespace seqmeas

#endif  // SEQMEAS_DIRAC_H_
