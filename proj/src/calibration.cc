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

#include "seqmeas/calibration.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

void require_input(const CountRecord& record, std::string_view label) {
  if (record.input_label != label) {
    throw UsageError("estimator needs a " + std::string(label) + "-input record, got '" +
                     record.input_label + "'");
  }
  record.validate();
  if (record.n_total < kMinCalibrationPhotons) {
    throw UsageError("calibration record has fewer than " +
                     std::to_string(kMinCalibrationPhotons) + " photons");
  }
}

// Mean of a +-1 statistic with its binomial standard deviation. The variance
// numerator is floored at 1/n so a record with no opposite counts still gets a
// nonzero error bar.
Estimate signed_fraction(double signed_sum, std::uint64_t n) {
  const double nd = static_cast<double>(n);
  const double v = signed_sum / nd;
  return {v, std::sqrt(std::max(1.0 - v * v, 1.0 / nd) / nd)};
}

double weight_of(const FitPoint& p) {
  if (!(p.sigma > 0.0) || std::isnan(p.sigma)) {
    throw ValidationError("fit point sigma must be positive");
  }
  if (!std::isfinite(p.value) || !std::isfinite(p.theta)) {
    throw ValidationError("fit point must be finite");
  }
  return 1.0 / (p.sigma * p.sigma);
}

Estimate fit_sine(std::span<const FitPoint> points) {
  double sxy = 0.0;
  double sxx = 0.0;
  for (const FitPoint& p : points) {
    const double w = weight_of(p);
    const double s = std::sin(4.0 * p.theta);
    sxy += w * p.value * s;
    sxx += w * s * s;
  }
  if (!(sxx > 0.0)) throw DegenerateFitError("sine fit has no weighted signal (all sin 4theta = 0)");
  return {sxy / sxx, 1.0 / std::sqrt(sxx)};
}

Estimate fit_angle_scale(std::span<const FitPoint> points) {
  std::vector<double> weights;
  weights.reserve(points.size());
  for (const FitPoint& p : points) weights.push_back(weight_of(p));

  const auto cost = [&](double k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = points[i].value - std::cos(4.0 * k * points[i].theta);
      sum += weights[i] * r * r;
    }
    return sum;
  };

  constexpr double kInvPhi = 0.6180339887498949;
  double lo = kAngleScaleMin;
  double hi = kAngleScaleMax;
  double a = hi - kInvPhi * (hi - lo);
  double b = lo + kInvPhi * (hi - lo);
  double fa = cost(a);
  double fb = cost(b);
  while (hi - lo > kAngleScaleTolerance) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - kInvPhi * (hi - lo);
      fa = cost(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + kInvPhi * (hi - lo);
      fb = cost(b);
    }
  }
  const double k = 0.5 * (lo + hi);

  double info = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = 4.0 * points[i].theta * std::sin(4.0 * k * points[i].theta);
    info += weights[i] * d * d;
  }
  if (!(info > 0.0)) throw DegenerateFitError("angle-scale fit has no weighted signal");
  return {k, 1.0 / std::sqrt(info)};
}

}  // namespace

Estimate estimate_epsilon(const CountRecord& record) {
  require_input(record, "P");
  const double plus = static_cast<double>(record.at(1, 1) + record.at(1, -1));
  const double minus = static_cast<double>(record.at(-1, 1) + record.at(-1, -1));
  return signed_fraction(plus - minus, record.n_total);
}

Estimate estimate_tau(const CountRecord& record) {
  require_input(record, "H");
  const double h = static_cast<double>(record.at(1, 1) + record.at(-1, 1));
  const double v = static_cast<double>(record.at(1, -1) + record.at(-1, -1));
  return signed_fraction(h - v, record.n_total);
}

Estimate estimate_nu(const CountRecord& record) {
  require_input(record, "R");
  const double same = static_cast<double>(record.at(1, 1) + record.at(-1, -1));
  const double opposite = static_cast<double>(record.at(1, -1) + record.at(-1, 1));
  return signed_fraction(same - opposite, record.n_total);
}

Estimate fit_amplitude(std::span<const FitPoint> points, FitModel model) {
  if (points.empty()) throw DegenerateFitError("fit needs at least one point");
  switch (model) {
    case FitModel::kSin4Theta:
      return fit_sine(points);
    case FitModel::kCos4ThetaScaled:
      return fit_angle_scale(points);
  }
  throw ValidationError("unknown fit model");
}

VisibilityPhase derive_visibility_phase(double v_epsilon, double v_nu) {
  if (v_epsilon == 0.0 && v_nu == 0.0) {
    throw DegenerateFitError("visibility undefined: both amplitudes are zero");
  }
  return {std::hypot(v_epsilon, v_nu), std::atan2(v_nu, v_epsilon)};
}

std::optional<CalibrationEstimate> CalibrationResult::find(double theta) const {
  for (const CalibrationEstimate& p : points) {
    if (std::abs(p.theta - theta) <= kThetaMatchTolerance) return p;
  }
  return std::nullopt;
}

CalibrationResult calibrate(std::span<const CountRecord> records) {
  // theta -> one record per calibration input.
  std::vector<std::pair<double, std::array<const CountRecord*, 3>>> groups;
  std::array<bool, 3> seen{};
  for (const CountRecord& r : records) {
    const auto it = std::find(kCalibrationInputs.begin(), kCalibrationInputs.end(), r.input_label);
    if (it == kCalibrationInputs.end()) {
      throw UsageError("unexpected calibration input '" + r.input_label + "'");
    }
    const auto slot = static_cast<std::size_t>(it - kCalibrationInputs.begin());
    seen[slot] = true;
    auto group = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return std::abs(g.first - r.theta) <= kThetaMatchTolerance;
    });
    if (group == groups.end()) {
      groups.push_back({r.theta, {nullptr, nullptr, nullptr}});
      group = groups.end() - 1;
    }
    if (group->second[slot] != nullptr) {
      throw UsageError("duplicate " + r.input_label + " record at theta_deg=" +
                       format_theta_deg(r.theta));
    }
    group->second[slot] = &r;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw UsageError("missing calibration input " + std::string(kCalibrationInputs[i]));
    }
  }

  CalibrationResult out;
  for (const auto& [theta, slots] : groups) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i] == nullptr) {
        throw UsageError("missing calibration input " + std::string(kCalibrationInputs[i]) +
                         " at theta_deg=" + format_theta_deg(theta));
      }
    }
    const Estimate eps = estimate_epsilon(*slots[0]);
    const Estimate tau = estimate_tau(*slots[1]);
    const Estimate nu = estimate_nu(*slots[2]);
    out.points.push_back({theta, eps.value, tau.value, nu.value, eps.sigma, tau.sigma, nu.sigma});
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const auto& a, const auto& b) { return a.theta < b.theta; });

  std::vector<FitPoint> eps_pts;
  std::vector<FitPoint> tau_pts;
  std::vector<FitPoint> nu_pts;
  for (const CalibrationEstimate& p : out.points) {
    eps_pts.push_back({p.theta, p.epsilon_hat, p.sigma_epsilon});
    tau_pts.push_back({p.theta, p.tau_hat, p.sigma_tau});
    nu_pts.push_back({p.theta, p.nu_hat, p.sigma_nu});
  }
  CalibrationCurve& c = out.curve;
  const Estimate v_eps = fit_amplitude(eps_pts, FitModel::kSin4Theta);
  const Estimate nu_amp = fit_amplitude(nu_pts, FitModel::kSin4Theta);
  const Estimate k = fit_amplitude(tau_pts, FitModel::kCos4ThetaScaled);
  c.v_epsilon = v_eps.value;
  c.sigma_v_epsilon = v_eps.sigma;
  c.v_nu = -nu_amp.value;
  c.sigma_v_nu = nu_amp.sigma;
  c.angle_scale = k.value;
  c.sigma_angle_scale = k.sigma;
  if (out.points.front().theta <= kThetaMatchTolerance) {
    c.tau_zero = out.points.front().tau_hat;
    c.sigma_tau_zero = out.points.front().sigma_tau;
  } else {
    c.tau_zero = 1.0;
    c.sigma_tau_zero = 0.0;
  }
  const VisibilityPhase vp = derive_visibility_phase(c.v_epsilon, c.v_nu);
  c.visibility = vp.visibility;
  c.phi_effective = vp.phi_effective;
  return out;
}

void to_json(nlohmann::json& j, const CalibrationResult& c) {
  const CalibrationCurve& k = c.curve;
  j = {{"v_epsilon", k.v_epsilon},
       {"v_nu", k.v_nu},
       {"tau_zero", k.tau_zero},
       {"k", k.angle_scale},
       {"visibility", k.visibility},
       {"phi_effective_deg", rad_to_deg(k.phi_effective)},
       {"sigma_v_epsilon", k.sigma_v_epsilon},
       {"sigma_v_nu", k.sigma_v_nu},
       {"sigma_tau_zero", k.sigma_tau_zero},
       {"sigma_k", k.sigma_angle_scale}};
  nlohmann::json pts = nlohmann::json::array();
  for (const CalibrationEstimate& p : c.points) {
    pts.push_back({{"theta_deg", rad_to_deg(p.theta)},
                   {"epsilon", p.epsilon_hat},
                   {"sigma_epsilon", p.sigma_epsilon},
                   {"tau", p.tau_hat},
                   {"sigma_tau", p.sigma_tau},
                   {"nu", p.nu_hat},
                   {"sigma_nu", p.sigma_nu}});
  }
  j["points"] = std::move(pts);
}

void from_json(const nlohmann::json& j, CalibrationResult& c) {
  try {
    CalibrationCurve& k = c.curve;
    k.v_epsilon = j.at("v_epsilon").get<double>();
    k.v_nu = j.at("v_nu").get<double>();
    k.tau_zero = j.at("tau_zero").get<double>();
    k.angle_scale = j.at("k").get<double>();
    k.visibility = j.at("visibility").get<double>();
    k.phi_effective = deg_to_rad(j.at("phi_effective_deg").get<double>());
    k.sigma_v_epsilon = j.at("sigma_v_epsilon").get<double>();
    k.sigma_v_nu = j.at("sigma_v_nu").get<double>();
    k.sigma_tau_zero = j.value("sigma_tau_zero", 0.0);
    k.sigma_angle_scale = j.value("sigma_k", 0.0);
    c.points.clear();
    for (const auto& p : j.at("points")) {
      c.points.push_back({deg_to_rad(p.at("theta_deg").get<double>()), p.at("epsilon").get<double>(),
                          p.at("tau").get<double>(), p.at("nu").get<double>(),
                          p.at("sigma_epsilon").get<double>(), p.at("sigma_tau").get<double>(),
                          p.at("sigma_nu").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("calibration JSON: ") + e.what());
  }
}

}  // namespace seqmeas
