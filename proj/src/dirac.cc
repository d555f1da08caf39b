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

#include "seqmeas/dirac.h"

#include <cmath>
#include <string>

#include "seqmeas/errors.h"

namespace seqmeas {

Complex DiracDistribution::total() const {
  Complex sum = 0.0;
  for (const Complex& v : values_) sum += v;
  return sum;
}

Complex DiracDistribution::marginal_pm(int s_pm) const { return at(s_pm, 1) + at(s_pm, -1); }

Complex DiracDistribution::marginal_hv(int s_hv) const { return at(1, s_hv) + at(-1, s_hv); }

void DiracDistribution::validate(double tol) const {
  if (std::abs(total() - 1.0) > tol) {
    throw ValidationError("Dirac distribution does not sum to 1");
  }
  for (int s : {1, -1}) {
    if (std::abs(marginal_pm(s).imag()) > tol || std::abs(marginal_hv(s).imag()) > tol) {
      throw ValidationError("Dirac distribution has a non-real marginal");
    }
  }
  const double im_ph = at(1, 1).imag();
  if (std::abs(at(-1, 1).imag() + im_ph) > tol || std::abs(at(1, -1).imag() + im_ph) > tol ||
      std::abs(at(-1, -1).imag() - im_ph) > tol) {
    throw ValidationError("Dirac imaginary parts violate Im PH = -Im MH = -Im PV = Im MV");
  }
}

DiracDistribution dirac_from_state(const PolarizationState& state) {
  std::array<Complex, kNumOutcomes> values;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const double a = kOutcomes[i].s_pm;
    const double b = kOutcomes[i].s_hv;
    values[i] = Complex(1.0 + a * state.y() + b * state.x(), a * b * state.z()) / 4.0;
  }
  return DiracDistribution(values);
}

PolarizationState state_from_dirac(const DiracDistribution& d, double tol) {
  d.validate(tol);
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const double a = kOutcomes[i].s_pm;
    const double b = kOutcomes[i].s_hv;
    x += b * d[i].real();
    y += a * d[i].real();
    z += a * b * d[i].imag();
  }
  return PolarizationState::unconstrained(x, y, z);
}

Complex imaginary_correlation(const DiracDistribution& d) {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    sum += static_cast<double>(kOutcomes[i].s_pm * kOutcomes[i].s_hv) * d[i];
  }
  return sum;
}

void to_json(nlohmann::json& j, const DiracDistribution& d) {
  j = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    j[std::string(outcome_key(i))] = {{"re", d[i].real()}, {"im", d[i].imag()}};
  }
}

void from_json(const nlohmann::json& j, DiracDistribution& d) {
  std::array<Complex, kNumOutcomes> values;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const std::string key(outcome_key(i));
    if (!j.contains(key)) throw ParseError(0, "Dirac JSON is missing key '" + key + "'");
    const auto& cell = j.at(key);
    values[i] = Complex(cell.at("re").get<double>(), cell.at("im").get<double>());
  }
  d = DiracDistribution(values);
}

}  // namespace seqmeas
