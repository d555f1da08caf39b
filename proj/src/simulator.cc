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

#include "seqmeas/simulator.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr char kCsvHeader[] = "theta_deg,input_label,n_PH,n_PV,n_MH,n_MV";

CountRecord calibration_record(const RunPlan& plan, std::size_t index) {
  const std::size_t setting = index / kCalibrationInputs.size();
  const std::size_t input = index % kCalibrationInputs.size();
  const std::string label(kCalibrationInputs[input]);
  return sample_counts(named_state(label), plan.profile, plan.theta_grid[setting],
                       plan.photons_per_setting, derive_seed(plan.seed, setting, input), label);
}

CountRecord experiment_record(const PolarizationState& state, const RunPlan& plan,
                              std::size_t setting, const std::string& label) {
  return sample_counts(state, plan.profile, plan.theta_grid[setting], plan.photons_per_setting,
                       derive_seed(plan.seed, setting, kExperimentInputIndex), label);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::uint64_t parse_count(const std::string& text, std::size_t line) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(line, "invalid count '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
      !std::isfinite(value)) {
    throw ParseError(line, "invalid number '" + text + "'");
  }
  return value;
}

}  // namespace

void CountRecord::validate() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  if (n_total == 0) throw ValidationError("count record has n_total = 0");
  if (sum != n_total) throw ValidationError("counts do not sum to n_total");
}

void RunPlan::validate() const {
  if (theta_grid.empty()) throw ValidationError("theta grid is empty");
  for (double t : theta_grid) {
    if (!(t >= 0.0 && t <= kMaxTheta)) throw ValidationError("theta grid value outside [0, pi/8]");
  }
  if (photons_per_setting < 1) throw ValidationError("photons_per_setting must be >= 1");
  profile.validate();
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid(kDefaultGridPoints);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = kMaxTheta * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  return grid;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t setting_index,
                          std::uint64_t input_index) {
  if (input_index >= 256 || setting_index >= (1ULL << 56)) {
    throw ValidationError("seed key out of range");
  }
  // splitmix64 is a bijection, so distinct (setting, input) keys give
  // distinct seeds.
  return splitmix64(splitmix64(master) ^ ((setting_index << 8) | input_index));
}

std::array<std::uint64_t, kNumOutcomes> sample_multinomial(const std::array<double, kNumOutcomes>& p,
                                                           std::uint64_t n, std::mt19937_64& rng) {
  std::array<double, kNumOutcomes> w;
  double remaining_weight = 0.0;
  for (std::size_t i = 0; i < kNumOutcomes; ++i) {
    w[i] = std::max(p[i], 0.0);
    remaining_weight += w[i];
  }
  std::array<std::uint64_t, kNumOutcomes> counts{};
  std::uint64_t remaining = n;
  for (std::size_t i = 0; i + 1 < kNumOutcomes && remaining > 0; ++i) {
    const double q = remaining_weight > 0.0 ? std::clamp(w[i] / remaining_weight, 0.0, 1.0) : 0.0;
    std::uint64_t k = 0;
    if (q >= 1.0) {
      k = remaining;
    } else if (q > 0.0) {
      std::binomial_distribution<std::int64_t> draw(static_cast<std::int64_t>(remaining), q);
      k = static_cast<std::uint64_t>(draw(rng));
    }
    counts[i] = k;
    remaining -= k;
    remaining_weight -= w[i];
  }
  counts[kNumOutcomes - 1] += remaining;
  return counts;
}

CountRecord sample_counts(const PolarizationState& state, const ApparatusProfile& a, double theta,
                          std::uint64_t n, std::uint64_t seed, std::string input_label) {
  if (n < 1) throw ValidationError("photon number must be >= 1");
  const JointProbability probs = apparatus_probabilities(state, a, theta);
  std::mt19937_64 rng(seed);
  CountRecord record;
  record.theta = theta;
  record.input_label = std::move(input_label);
  record.counts = sample_multinomial(probs.p, n, rng);
  record.n_total = n;
  return record;
}

std::vector<CountRecord> simulate_calibration_suite(const RunPlan& plan) {
  plan.validate();
  const std::int64_t total =
      static_cast<std::int64_t>(plan.theta_grid.size() * kCalibrationInputs.size());
  std::vector<CountRecord> records(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < total; ++i) {
    records[static_cast<std::size_t>(i)] = calibration_record(plan, static_cast<std::size_t>(i));
  }
  return records;
}

std::vector<CountRecord> simulate_experiment(const PolarizationState& state, const RunPlan& plan,
                                             const std::string& input_label) {
  plan.validate();
  const std::int64_t total = static_cast<std::int64_t>(plan.theta_grid.size());
  std::vector<CountRecord> records(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < total; ++i) {
    records[static_cast<std::size_t>(i)] =
        experiment_record(state, plan, static_cast<std::size_t>(i), input_label);
  }
  return records;
}

namespace serial {

std::vector<CountRecord> simulate_calibration_suite(const RunPlan& plan) {
  plan.validate();
  std::vector<CountRecord> records;
  records.reserve(plan.theta_grid.size() * kCalibrationInputs.size());
  for (std::size_t i = 0; i < plan.theta_grid.size() * kCalibrationInputs.size(); ++i) {
    records.push_back(calibration_record(plan, i));
  }
  return records;
}

std::vector<CountRecord> simulate_experiment(const PolarizationState& state, const RunPlan& plan,
                                             const std::string& input_label) {
  plan.validate();
  std::vector<CountRecord> records;
  records.reserve(plan.theta_grid.size());
  for (std::size_t i = 0; i < plan.theta_grid.size(); ++i) {
    records.push_back(experiment_record(state, plan, i, input_label));
  }
  return records;
}

}  // namespace serial

std::string format_theta_deg(double theta) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", rad_to_deg(theta));
  return buf;
}

void write_counts_csv(std::ostream& out, std::span<const CountRecord> records) {
  out << kCsvHeader << '\n';
  for (const CountRecord& r : records) {
    out << format_theta_deg(r.theta) << ',' << r.input_label;
    for (auto c : r.counts) out << ',' << c;
    out << '\n';
  }
}

std::vector<CountRecord> read_counts_csv(std::istream& in) {
  std::vector<CountRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError(line_no, std::string("expected header '") + kCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    }
    const double theta_deg = parse_double(fields[0], line_no);
    if (theta_deg < 0.0 || theta_deg > 22.5 + 1e-9) {
      throw ParseError(line_no, "theta_deg " + fields[0] + " outside [0, 22.5]");
    }
    if (fields[1].empty()) throw ParseError(line_no, "empty input_label");
    CountRecord r;
    r.theta = std::min(deg_to_rad(theta_deg), kMaxTheta);
    r.input_label = fields[1];
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
      r.counts[i] = parse_count(fields[2 + i], line_no);
      r.n_total += r.counts[i];
    }
    if (r.n_total == 0) throw ParseError(line_no, "record has zero photons");
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(0, "empty counts CSV");
  return records;
}

}  // namespace seqmeas
