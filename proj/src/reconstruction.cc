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

#include "seqmeas/reconstruction.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

// Inputs of the propagation: p_PH, p_PV, p_MH, p_MV, eps, tau, nu.
constexpr std::size_t kNumInputs = kNumOutcomes + 3;
using Gradient = std::array<double, kNumInputs>;
using Covariance = std::array<std::array<double, kNumInputs>, kNumInputs>;

// re[4], im[4], x, y, z
constexpr std::size_t kNumComponents = 2 * kNumOutcomes + 3;
using ComponentVector = std::array<double, kNumComponents>;

double quadratic_form(const Gradient& g, const Covariance& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    for (std::size_t j = 0; j < kNumInputs; ++j) sum += g[i] * c[i][j] * g[j];
  }
  return sum;
}

double weighted_mean_of(const std::array<double, kNumOutcomes>& p, auto&& statistic) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    sum += statistic(kOutcomes[i].s_pm, kOutcomes[i].s_hv) * p[i];
  }
  return sum;
}

ComponentVector components_of(const std::array<double, kNumOutcomes>& p, const ErrorParameters& e) {
  const DiracDistribution d = invert_kernel(p, e);
  ComponentVector out;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    out[i] = d[i].real();
    out[kNumOutcomes + i] = d[i].imag();
  }
  out[2 * kNumOutcomes + 0] = weighted_mean_of(p, [](int, int f) { return f; }) / e.tau;
  out[2 * kNumOutcomes + 1] = weighted_mean_of(p, [](int m, int) { return m; }) / e.epsilon;
  out[2 * kNumOutcomes + 2] = weighted_mean_of(p, [](int m, int f) { return m * f; }) / e.nu;
  return out;
}

ComponentVector bootstrap_replicate(const JointFrequency& freq, const ErrorParameters& e,
                                    const ErrorSigmas& sigma_e, std::uint64_t seed,
                                    std::size_t r) {
  std::mt19937_64 rng(derive_seed(seed, r, 0));
  const auto counts = sample_multinomial(freq.p_exp, freq.n_total, rng);
  std::array<double, kNumOutcomes> p;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(freq.n_total);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  ErrorParameters drawn = e;
  drawn.epsilon += sigma_e.epsilon * normal(rng);
  drawn.tau += sigma_e.tau * normal(rng);
  drawn.nu += sigma_e.nu * normal(rng);
  return components_of(p, drawn);
}

ReconstructionSigmas spread_of(const std::vector<ComponentVector>& samples) {
  ComponentVector mean{};
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < kNumComponents; ++k) mean[k] += s[k];
  }
  for (double& m : mean) m /= static_cast<double>(samples.size());
  ComponentVector var{};
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < kNumComponents; ++k) var[k] += (s[k] - mean[k]) * (s[k] - mean[k]);
  }
  ReconstructionSigmas out;
  const double denom = static_cast<double>(samples.size() - 1);
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    out.re[i] = std::sqrt(var[i] / denom);
    out.im[i] = std::sqrt(var[kNumOutcomes + i] / denom);
  }
  for (std::size_t k = 0; k < 3; ++k) out.stokes[k] = std::sqrt(var[2 * kNumOutcomes + k] / denom);
  return out;
}

void check_bootstrap_args(const JointFrequency& freq, std::size_t replicates) {
  freq.validate();
  if (replicates < 2) throw ValidationError("bootstrap needs at least 2 replicates");
}

// Resolved inputs of one record; computed before any parallel work so that
// errors are raised on the calling thread.
struct SeriesJob {
  JointFrequency freq;
  CalibrationEstimate cal;
};

std::vector<SeriesJob> plan_series(std::span<const CountRecord> records,
                                   const CalibrationResult& calibration, double floor,
                                   std::vector<SkippedSetting>& skipped) {
  std::vector<SeriesJob> jobs;
  for (const CountRecord& r : records) {
    const auto cal = calibration.find(r.theta);
    if (!cal) {
      throw UsageError("no calibration point at theta_deg=" + format_theta_deg(r.theta));
    }
    try {
      check_conditioning(cal->params(), floor);
    } catch (const IllConditionedError& e) {
      skipped.push_back({r.theta, e.what()});
      continue;
    }
    jobs.push_back({JointFrequency::from_record(r), *cal});
  }
  return jobs;
}

ComponentConsistency combine(std::span<const double> values, std::span<const double> sigmas) {
  ComponentConsistency out;
  bool exact = false;
  for (double s : sigmas) exact = exact || s == 0.0;
  double wsum = 0.0;
  double wv = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Zero-sigma entries are exact; when present only they define the mean.
    const double w = exact ? (sigmas[i] == 0.0 ? 1.0 : 0.0) : 1.0 / (sigmas[i] * sigmas[i]);
    wsum += w;
    wv += w * values[i];
  }
  out.mean = wv / wsum;
  out.sigma_mean = exact ? 0.0 : 1.0 / std::sqrt(wsum);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = values[i] - out.mean;
    if (sigmas[i] > 0.0) {
      chi2 += dev * dev / (sigmas[i] * sigmas[i]);
    } else if (dev != 0.0) {
      chi2 = std::numeric_limits<double>::infinity();
    }
  }
  out.reduced_chi_square = chi2 / static_cast<double>(values.size() - 1);
  return out;
}

nlohmann::json consistency_json(const ComponentConsistency& c) {
  return {{"mean", c.mean}, {"sigma", c.sigma_mean}, {"reduced_chi_square", c.reduced_chi_square}};
}

}  // namespace

void JointFrequency::validate() const {
  if (n_total == 0) throw ValidationError("joint frequency needs n_total > 0");
  double sum = 0.0;
  for (double p : p_exp) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
      throw ValidationError("joint frequency entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("joint frequencies do not sum to 1");
}

JointFrequency JointFrequency::from_record(const CountRecord& record) {
  record.validate();
  JointFrequency f;
  const double n = static_cast<double>(record.n_total);
  for (std::size_t i = 0; i < kNumOutcomes; ++i) f.p_exp[i] = static_cast<double>(record.counts[i]) / n;
  f.n_total = record.n_total;
  f.theta = record.theta;
  return f;
}

JointFrequency JointFrequency::from_probability(const JointProbability& p, std::uint64_t n_total,
                                                double theta) {
  JointFrequency f;
  f.p_exp = p.p;
  f.n_total = n_total;
  f.theta = theta;
  return f;
}

double JointFrequency::mean_m() const {
  return weighted_mean_of(p_exp, [](int m, int) { return m; });
}

double JointFrequency::mean_f() const {
  return weighted_mean_of(p_exp, [](int, int f) { return f; });
}

double JointFrequency::mean_mf() const {
  return weighted_mean_of(p_exp, [](int m, int f) { return m * f; });
}

PolarizationState ReconstructionResult::state() const {
  return state_from_dirac(dirac, 1e-9);
}

void check_conditioning(const ErrorParameters& e, double floor) {
  const std::array<std::pair<const char*, double>, 3> params = {
      {{"epsilon", e.epsilon}, {"tau", e.tau}, {"nu", e.nu}}};
  for (const auto& [name, value] : params) {
    if (!(std::abs(value) >= floor)) {
      throw IllConditionedError(name, std::string(name) + " = " + std::to_string(value) +
                                          " is below the conditioning floor " +
                                          std::to_string(floor));
    }
  }
}

DiracDistribution invert_kernel(const std::array<double, kNumOutcomes>& p,
                                const ErrorParameters& e) {
  std::array<Complex, kNumOutcomes> values;
  for (std::size_t t = 0; t < kNumOutcomes; ++t) {
    const double a = kOutcomes[t].s_pm;
    const double b = kOutcomes[t].s_hv;
    Complex sum = 0.0;
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
      const double am = a * kOutcomes[i].s_pm;  // +1 when m = s_PM
      const double bf = b * kOutcomes[i].s_hv;  // +1 when f = s_HV
      const Complex weight(0.25 + am / (4.0 * e.epsilon) + bf / (4.0 * e.tau),
                           am * bf / (4.0 * e.nu));
      sum += weight * p[i];
    }
    values[t] = sum;
  }
  return DiracDistribution(values);
}

DiracDistribution reconstruct_from_estimators(const JointFrequency& freq,
                                              const ErrorParameters& e) {
  const double x = freq.mean_f() / e.tau;
  const double y = freq.mean_m() / e.epsilon;
  const double z = freq.mean_mf() / e.nu;
  return dirac_from_state(PolarizationState::unconstrained(x, y, z));
}

ReconstructionSigmas propagate_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e, double floor) {
  freq.validate();
  check_conditioning(e, floor);
  const auto& p = freq.p_exp;
  const double n = static_cast<double>(freq.n_total);

  Covariance cov{};
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    for (std::size_t j = 0; j < kNumOutcomes; ++j) {
      cov[i][j] = ((i == j ? p[i] : 0.0) - p[i] * p[j]) / n;
    }
  }
  cov[4][4] = sigma_e.epsilon * sigma_e.epsilon;
  cov[5][5] = sigma_e.tau * sigma_e.tau;
  cov[6][6] = sigma_e.nu * sigma_e.nu;

  const double mean_m = freq.mean_m();
  const double mean_f = freq.mean_f();
  const double mean_mf = freq.mean_mf();

  ReconstructionSigmas out;
  for (std::size_t t = 0; t < kNumOutcomes; ++t) {
    const double a = kOutcomes[t].s_pm;
    const double b = kOutcomes[t].s_hv;
    Gradient g_re{};
    Gradient g_im{};
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
      const double am = a * kOutcomes[i].s_pm;
      const double bf = b * kOutcomes[i].s_hv;
      g_re[i] = 0.25 + am / (4.0 * e.epsilon) + bf / (4.0 * e.tau);
      g_im[i] = am * bf / (4.0 * e.nu);
    }
    g_re[4] = -a * mean_m / (4.0 * e.epsilon * e.epsilon);
    g_re[5] = -b * mean_f / (4.0 * e.tau * e.tau);
    g_im[6] = -a * b * mean_mf / (4.0 * e.nu * e.nu);
    out.re[t] = std::sqrt(std::max(quadratic_form(g_re, cov), 0.0));
    out.im[t] = std::sqrt(std::max(quadratic_form(g_im, cov), 0.0));
  }

  Gradient gx{};
  Gradient gy{};
  Gradient gz{};
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    const double m = kOutcomes[i].s_pm;
    const double f = kOutcomes[i].s_hv;
    gx[i] = f / e.tau;
    gy[i] = m / e.epsilon;
    gz[i] = m * f / e.nu;
  }
  gx[5] = -mean_f / (e.tau * e.tau);
  gy[4] = -mean_m / (e.epsilon * e.epsilon);
  gz[6] = -mean_mf / (e.nu * e.nu);
  out.stokes = {std::sqrt(std::max(quadratic_form(gx, cov), 0.0)),
                std::sqrt(std::max(quadratic_form(gy, cov), 0.0)),
                std::sqrt(std::max(quadratic_form(gz, cov), 0.0))};
  return out;
}

ReconstructionSigmas bootstrap_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e, std::size_t replicates,
                                           std::uint64_t seed) {
  check_bootstrap_args(freq, replicates);
  std::vector<ComponentVector> samples(replicates);
  const auto total = static_cast<std::int64_t>(replicates);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < total; ++r) {
    samples[static_cast<std::size_t>(r)] =
        bootstrap_replicate(freq, e, sigma_e, seed, static_cast<std::size_t>(r));
  }
  return spread_of(samples);
}

ReconstructionResult reconstruct_dirac(const JointFrequency& freq, const ErrorParameters& e,
                                       const ErrorSigmas& sigma_e, double floor) {
  freq.validate();
  check_conditioning(e, floor);
  ReconstructionResult out;
  out.dirac = invert_kernel(freq.p_exp, e);
  out.sigma = propagate_uncertainty(freq, e, sigma_e, floor);
  out.error_params_used = e;
  out.theta = freq.theta;
  return out;
}

ReconstructionSeries reconstruct_series(std::span<const CountRecord> records,
                                        const CalibrationResult& calibration, double floor) {
  ReconstructionSeries series;
  const std::vector<SeriesJob> jobs = plan_series(records, calibration, floor, series.skipped);
  series.results.resize(jobs.size());
  const auto total = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < total; ++i) {
    const SeriesJob& job = jobs[static_cast<std::size_t>(i)];
    series.results[static_cast<std::size_t>(i)] =
        reconstruct_dirac(job.freq, job.cal.params(), job.cal.sigmas(), floor);
  }
  return series;
}

namespace serial {

ReconstructionSigmas bootstrap_uncertainty(const JointFrequency& freq, const ErrorParameters& e,
                                           const ErrorSigmas& sigma_e, std::size_t replicates,
                                           std::uint64_t seed) {
  check_bootstrap_args(freq, replicates);
  std::vector<ComponentVector> samples;
  samples.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    samples.push_back(bootstrap_replicate(freq, e, sigma_e, seed, r));
  }
  return spread_of(samples);
}

ReconstructionSeries reconstruct_series(std::span<const CountRecord> records,
                                        const CalibrationResult& calibration, double floor) {
  ReconstructionSeries series;
  for (const SeriesJob& job : plan_series(records, calibration, floor, series.skipped)) {
    series.results.push_back(reconstruct_dirac(job.freq, job.cal.params(), job.cal.sigmas(), floor));
  }
  return series;
}

}  // namespace serial

double ConsistencyReport::max_reduced_chi_square() const {
  double worst = 0.0;
  for (const auto& c : re) worst = std::max(worst, c.reduced_chi_square);
  for (const auto& c : im) worst = std::max(worst, c.reduced_chi_square);
  return worst;
}

DiracDistribution ConsistencyReport::mean_dirac() const {
  std::array<Complex, kNumOutcomes> values;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) values[i] = Complex(re[i].mean, im[i].mean);
  return DiracDistribution(values);
}

ConsistencyReport consistency_across_strengths(std::span<const ReconstructionResult> results) {
  if (results.size() < 2) throw ValidationError("consistency check needs at least 2 results");
  const std::size_t n = results.size();
  std::vector<double> values(n);
  std::vector<double> sigmas(n);
  const auto component = [&](auto&& value_of, auto&& sigma_of) {
    for (std::size_t k = 0; k < n; ++k) {
      values[k] = value_of(results[k]);
      sigmas[k] = sigma_of(results[k]);
    }
    return combine(values, sigmas);
  };

  ConsistencyReport report;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    report.re[i] = component([i](const auto& r) { return r.dirac[i].real(); },
                             [i](const auto& r) { return r.sigma.re[i]; });
    report.im[i] = component([i](const auto& r) { return r.dirac[i].imag(); },
                             [i](const auto& r) { return r.sigma.im[i]; });
  }
  for (std::size_t k = 0; k < 3; ++k) {
    report.stokes[k] = component(
        [k](const auto& r) { return state_from_dirac(r.dirac, 1e-9).stokes()[k]; },
        [k](const auto& r) { return r.sigma.stokes[k]; });
  }
  report.flagged = report.max_reduced_chi_square() > kChiSquareFlagThreshold;
  for (const auto& c : report.stokes) {
    report.flagged = report.flagged || c.reduced_chi_square > kChiSquareFlagThreshold;
  }
  return report;
}

ExpectationSummary expectation_summary(const DiracDistribution& d) {
  return {d.marginal_pm(1).real() - d.marginal_pm(-1).real(),
          d.marginal_hv(1).real() - d.marginal_hv(-1).real(), imaginary_correlation(d).imag()};
}

PolarizationState nearest_physical_state(const PolarizationState& state) {
  const double r = state.norm();
  if (r <= 1.0) return state;
  return PolarizationState::unconstrained(state.x() / r, state.y() / r, state.z() / r);
}

void to_json(nlohmann::json& j, const ReconstructionResult& r) {
  nlohmann::json dirac = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    dirac[std::string(outcome_key(i))] = {{"re", r.dirac[i].real()},
                                          {"im", r.dirac[i].imag()},
                                          {"sigma_re", r.sigma.re[i]},
                                          {"sigma_im", r.sigma.im[i]}};
  }
  const ExpectationSummary s = expectation_summary(r.dirac);
  j = {{"theta_deg", rad_to_deg(r.theta)},
       {"dirac", std::move(dirac)},
       {"expectations",
        {{"s_pm", s.s_pm},
         {"s_hv", s.s_hv},
         {"im_correlation", s.im_correlation},
         {"sigma_s_pm", r.sigma.stokes[1]},
         {"sigma_s_hv", r.sigma.stokes[0]},
         {"sigma_im_correlation", r.sigma.stokes[2]}}},
       {"error_parameters", r.error_params_used}};
}

void to_json(nlohmann::json& j, const ConsistencyReport& r) {
  nlohmann::json dirac = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    dirac[std::string(outcome_key(i))] = {{"re", consistency_json(r.re[i])},
                                          {"im", consistency_json(r.im[i])}};
  }
  j = {{"dirac", std::move(dirac)},
       {"expectations",
        {{"s_hv", consistency_json(r.stokes[0])},
         {"s_pm", consistency_json(r.stokes[1])},
         {"im_correlation", consistency_json(r.stokes[2])}}},
       {"max_reduced_chi_square", r.max_reduced_chi_square()},
       {"flagged", r.flagged}};
}

}  // namespace seqmeas
