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

#ifndef SEQMEAS_POLARIZATION_H_
#define SEQMEAS_POLARIZATION_H_

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>

namespace seqmeas {

using Complex = std::complex<double>;

// Default tolerance for physicality checks on constructed states.
inline constexpr double kPhysicalityTolerance = 1e-9;

// 2x2 complex matrix in the {H, V} basis.
class Operator2 {
 public:
  Operator2() = default;
  Operator2(Complex hh, Complex hv, Complex vh, Complex vv) : m_{hh, hv, vh, vv} {}

  static Operator2 identity() { return Operator2(1.0, 0.0, 0.0, 1.0); }
  static Operator2 zero() { return Operator2(); }

  Complex operator()(int row, int col) const { return m_[2 * row + col]; }
  Complex& operator()(int row, int col) { return m_[2 * row + col]; }

  Operator2 adjoint() const;
  Complex trace() const { return m_[0] + m_[3]; }
  bool is_hermitian(double tol) const;
  // Largest elementwise modulus of (*this - other).
  double max_abs_diff(const Operator2& other) const;

  std::array<Complex, 2> apply(const std::array<Complex, 2>& v) const;

  friend Operator2 operator+(const Operator2& a, const Operator2& b);
  friend Operator2 operator-(const Operator2& a, const Operator2& b);
  friend Operator2 operator*(const Operator2& a, const Operator2& b);
  friend Operator2 operator*(Complex s, const Operator2& a);
  friend Operator2 operator*(const Operator2& a, Complex s) { return s * a; }

 private:
  std::array<Complex, 4> m_{};
};

// |H><H| - |V><V|
Operator2 s_hv();
// |H><V| + |V><H|
Operator2 s_pm();
// Circular polarization, defined so that s_hv() * s_pm() == i * s_rl().
Operator2 s_rl();

// Qubit polarization state stored as its Stokes triple
//   x = <S_HV>, y = <S_PM>, z = <S_RL>.
// States built with from_stokes() are checked to lie in the Bloch ball;
// unconstrained() skips that check and is used for reconstructed states,
// which may fall outside it.
class PolarizationState {
 public:
  PolarizationState() = default;

  static PolarizationState from_stokes(double x, double y, double z,
                                       double tol = kPhysicalityTolerance);
  static PolarizationState unconstrained(double x, double y, double z);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  std::array<double, 3> stokes() const { return {x_, y_, z_}; }

  double norm() const;
  bool is_physical(double tol = kPhysicalityTolerance) const { return norm() <= 1.0 + tol; }

 private:
  PolarizationState(double x, double y, double z) : x_(x), y_(y), z_(z) {}
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

// One of "H", "V", "P", "M", "R", "L". Throws ValidationError otherwise.
PolarizationState named_state(std::string_view label);

// Tr(rho * obs).
Complex expectation(const PolarizationState& state, const Operator2& obs);

// (I + x S_HV + y S_PM + z S_RL) / 2
Operator2 density_matrix(const PolarizationState& state);

// Inverse of density_matrix(). The matrix must be Hermitian with unit trace
// within `tol`; positivity is not required.
PolarizationState stokes_of(const Operator2& matrix, double tol = kPhysicalityTolerance);

// Joint eigenvalue labels (s_PM, s_HV), each +1 or -1.
struct EigenvaluePair {
  int s_pm = 1;
  int s_hv = 1;

  friend bool operator==(const EigenvaluePair&, const EigenvaluePair&) = default;
};

inline constexpr std::size_t kNumOutcomes = 4;

// Canonical ordering of the four joint cells: PH, PV, MH, MV. The same order
// indexes Dirac values (s_PM, s_HV) and measured outcomes (m, f).
inline constexpr std::array<EigenvaluePair, kNumOutcomes> kOutcomes = {{
    {+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}}};

// Position of (s_pm, s_hv) in kOutcomes. Throws ValidationError if either
// value is not +-1.
std::size_t outcome_index(int s_pm, int s_hv);

// "PH", "PV", "MH" or "MV".
std::string_view outcome_key(std::size_t index);

}  // namespace seqmeas

#endif  // SEQMEAS_POLARIZATION_H_
