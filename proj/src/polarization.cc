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

#include "seqmeas/polarization.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqmeas/errors.h"

namespace seqmeas {

Operator2 Operator2::adjoint() const {
  return Operator2(std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3]));
}

bool Operator2::is_hermitian(double tol) const { return max_abs_diff(adjoint()) <= tol; }

double Operator2::max_abs_diff(const Operator2& other) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    worst = std::max(worst, std::abs(m_[i] - other.m_[i]));
  }
  return worst;
}

std::array<Complex, 2> Operator2::apply(const std::array<Complex, 2>& v) const {
  return {m_[0] * v[0] + m_[1] * v[1], m_[2] * v[0] + m_[3] * v[1]};
}

Operator2 operator+(const Operator2& a, const Operator2& b) {
  Operator2 out;
  for (std::size_t i = 0; i < 4; ++i) out.m_[i] = a.m_[i] + b.m_[i];
  return out;
}

Operator2 operator-(const Operator2& a, const Operator2& b) {
  Operator2 out;
  for (std::size_t i = 0; i < 4; ++i) out.m_[i] = a.m_[i] - b.m_[i];
  return out;
}

Operator2 operator*(const Operator2& a, const Operator2& b) {
  return Operator2(a.m_[0] * b.m_[0] + a.m_[1] * b.m_[2], a.m_[0] * b.m_[1] + a.m_[1] * b.m_[3],
                   a.m_[2] * b.m_[0] + a.m_[3] * b.m_[2], a.m_[2] * b.m_[1] + a.m_[3] * b.m_[3]);
}

Operator2 operator*(Complex s, const Operator2& a) {
  Operator2 out;
  for (std::size_t i = 0; i < 4; ++i) out.m_[i] = s * a.m_[i];
  return out;
}

Operator2 s_hv() { return Operator2(1.0, 0.0, 0.0, -1.0); }

Operator2 s_pm() { return Operator2(0.0, 1.0, 1.0, 0.0); }

Operator2 s_rl() { return Operator2(0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0); }

PolarizationState PolarizationState::from_stokes(double x, double y, double z, double tol) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
    throw ValidationError("Stokes components must be finite");
  }
  PolarizationState s(x, y, z);
  if (!s.is_physical(tol)) {
    throw ValidationError("Stokes vector norm " + std::to_string(s.norm()) +
                          " exceeds 1 (not a physical state)");
  }
  return s;
}

PolarizationState PolarizationState::unconstrained(double x, double y, double z) {
  return PolarizationState(x, y, z);
}

double PolarizationState::norm() const { return std::sqrt(x_ * x_ + y_ * y_ + z_ * z_); }

PolarizationState named_state(std::string_view label) {
  if (label == "H") return PolarizationState::from_stokes(1.0, 0.0, 0.0);
  if (label == "V") return PolarizationState::from_stokes(-1.0, 0.0, 0.0);
  if (label == "P") return PolarizationState::from_stokes(0.0, 1.0, 0.0);
  if (label == "M") return PolarizationState::from_stokes(0.0, -1.0, 0.0);
  if (label == "R") return PolarizationState::from_stokes(0.0, 0.0, 1.0);
  if (label == "L") return PolarizationState::from_stokes(0.0, 0.0, -1.0);
  throw ValidationError("unknown polarization label '" + std::string(label) + "'");
}

Complex expectation(const PolarizationState& state, const Operator2& obs) {
  const Operator2 rho = density_matrix(state);
  return rho(0, 0) * obs(0, 0) + rho(0, 1) * obs(1, 0) + rho(1, 0) * obs(0, 1) +
         rho(1, 1) * obs(1, 1);
}

Operator2 density_matrix(const PolarizationState& state) {
  const double x = state.x();
  const double y = state.y();
  const double z = state.z();
  return Operator2(0.5 * (1.0 + x), Complex(0.5 * y, -0.5 * z), Complex(0.5 * y, 0.5 * z),
                   0.5 * (1.0 - x));
}

PolarizationState stokes_of(const Operator2& matrix, double tol) {
  if (!matrix.is_hermitian(tol)) throw ValidationError("matrix is not Hermitian");
  if (std::abs(matrix.trace() - 1.0) > tol) throw ValidationError("matrix trace is not 1");
  // Average the two off-diagonal entries so small anti-Hermitian noise cancels.
  const Complex off = 0.5 * (matrix(1, 0) + std::conj(matrix(0, 1)));
  return PolarizationState::unconstrained(matrix(0, 0).real() - matrix(1, 1).real(),
                                          2.0 * off.real(), 2.0 * off.imag());
}

std::size_t outcome_index(int s_pm, int s_hv) {
  if ((s_pm != 1 && s_pm != -1) || (s_hv != 1 && s_hv != -1)) {
    throw ValidationError("eigenvalues must be +1 or -1");
  }
  return (s_pm == 1 ? 0 : 2) + (s_hv == 1 ? 0 : 1);
}

std::string_view outcome_key(std::size_t index) {
  static constexpr std::array<std::string_view, kNumOutcomes> kKeys = {"PH", "PV", "MH", "MV"};
  if (index >= kNumOutcomes) throw ValidationError("outcome index out of range");
  return kKeys[index];
}

}  // namespace seqmeas
