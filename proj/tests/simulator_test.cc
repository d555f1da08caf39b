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

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "seqmeas/errors.h"

namespace seqmeas {
namespace {

using std::numbers::pi;

const PolarizationState kEllipticalInput =
    PolarizationState::from_stokes(0.8, std::sqrt(0.11), 0.5);

double binomial_sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

TEST(SampleCountsTest, HorizontalAtZeroStrengthNeverGivesVertical) {
  const CountRecord r = sample_counts(named_state("H"), ApparatusProfile::ideal(), 0.0,
                                      1'000'000, 17, "H");
  const double p_v = static_cast<double>(r.at(1, -1) + r.at(-1, -1)) / 1e6;
  EXPECT_LT(p_v, 0.002);
  EXPECT_EQ(r.n_total, 1'000'000u);
  EXPECT_NO_THROW(r.validate());
}

TEST(SampleCountsTest, SinglePhotonLandsInOneCell) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const CountRecord r =
        sample_counts(kEllipticalInput, ApparatusProfile::reference(), 0.2, 1, seed);
    int nonzero = 0;
    for (auto c : r.counts) {
      if (c != 0) {
        ++nonzero;
        EXPECT_EQ(c, 1u);
      }
    }
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(SampleCountsTest, FixedSeedIsReproducible) {
  const auto a = sample_counts(kEllipticalInput, ApparatusProfile::reference(), 0.2, 123456, 99);
  const auto b = sample_counts(kEllipticalInput, ApparatusProfile::reference(), 0.2, 123456, 99);
  const auto c = sample_counts(kEllipticalInput, ApparatusProfile::reference(), 0.2, 123456, 100);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SampleCountsTest, RejectsZeroPhotons) {
  EXPECT_THROW(sample_counts(kEllipticalInput, ApparatusProfile::reference(), 0.2, 0, 1),
               ValidationError);
}

TEST(SampleCountsTest, FrequenciesWithinFiveSigmaOfModel) {
  const std::uint64_t n = 1'000'000;
  for (double theta : default_theta_grid()) {
    const JointProbability p =
        apparatus_probabilities(kEllipticalInput, ApparatusProfile::ideal(), theta);
    const CountRecord r =
        sample_counts(kEllipticalInput, ApparatusProfile::ideal(), theta, n, 1234);
    for (std::size_t i = 0; i < kNumOutcomes; ++i) {
      const double freq = static_cast<double>(r.counts[i]) / static_cast<double>(n);
      EXPECT_LE(std::abs(freq - p.p[i]), 5 * binomial_sigma(p.p[i], n) + 1e-12)
          << "theta=" << theta << " cell " << outcome_key(i);
    }
  }
}

TEST(SampleCountsTest, ErrorShrinksAsInverseSquareRoot) {
  const ApparatusProfile profile = ApparatusProfile::reference();
  const JointProbability p = apparatus_probabilities(kEllipticalInput, profile, 0.2);
  const auto mean_abs_error = [&](std::uint64_t n) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const CountRecord r = sample_counts(kEllipticalInput, profile, 0.2, n, seed);
      for (std::size_t i = 0; i < kNumOutcomes; ++i) {
        total += std::abs(static_cast<double>(r.counts[i]) / static_cast<double>(n) - p.p[i]);
      }
    }
    return total / 40.0;
  };
  const double ratio = mean_abs_error(10'000) / mean_abs_error(1'000'000);
  EXPECT_GT(ratio, 6.0);
  EXPECT_LT(ratio, 16.0);
}

TEST(MultinomialTest, HandlesDegenerateProbabilities) {
  std::mt19937_64 rng(1);
  const auto all_last = sample_multinomial({0.0, 0.0, 0.0, 1.0}, 1000, rng);
  EXPECT_EQ(all_last[3], 1000u);
  const auto all_first = sample_multinomial({1.0, 0.0, 0.0, 0.0}, 1000, rng);
  EXPECT_EQ(all_first[0], 1000u);
  const auto tiny_negative = sample_multinomial({-1e-17, 0.5, 0.5, 0.0}, 1000, rng);
  EXPECT_EQ(tiny_negative[0], 0u);
  EXPECT_EQ(tiny_negative[1] + tiny_negative[2], 1000u);
}

TEST(SeedTest, DistinctKeysGiveDistinctSeeds) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    for (std::uint64_t i = 0; i < 4; ++i) seeds.insert(derive_seed(42, s, i));
  }
  EXPECT_EQ(seeds.size(), 8000u);
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
  EXPECT_THROW(derive_seed(1, 0, 256), ValidationError);
}

RunPlan reference_plan(std::uint64_t seed) {
  RunPlan plan;
  plan.theta_grid = default_theta_grid();
  plan.seed = seed;
  plan.profile = ApparatusProfile::reference();
  return plan;
}

TEST(CalibrationSuiteTest, ThreeRecordsPerSetting) {
  const auto records = simulate_calibration_suite(reference_plan(5));
  ASSERT_EQ(records.size(), 30u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].input_label, kCalibrationInputs[i % 3]);
    EXPECT_DOUBLE_EQ(records[i].theta, default_theta_grid()[i / 3]);
    EXPECT_EQ(records[i].n_total, kDefaultPhotonsPerSetting);
  }
}

TEST(CalibrationSuiteTest, DiagonalInputResolvesAtFullStrength) {
  RunPlan plan = reference_plan(6);
  plan.profile = ApparatusProfile::ideal();
  plan.theta_grid = {pi / 8};
  const auto records = simulate_calibration_suite(plan);
  const CountRecord& p = records[0];
  ASSERT_EQ(p.input_label, "P");
  const double n = static_cast<double>(p.n_total);
  const double asym = static_cast<double>(p.at(1, 1) + p.at(1, -1)) / n -
                      static_cast<double>(p.at(-1, 1) + p.at(-1, -1)) / n;
  const double expected = std::sin(4 * pi / 8) * std::cos(pi / 4);
  EXPECT_LE(std::abs(asym - expected), 5 * std::sqrt((1 - expected * expected) / n));
}

TEST(CalibrationSuiteTest, CircularInputShowsNegativeCorrelation) {
  RunPlan plan = reference_plan(7);
  plan.theta_grid = {pi / 8};
  const CountRecord r = simulate_calibration_suite(plan)[2];
  ASSERT_EQ(r.input_label, "R");
  const double n = static_cast<double>(r.n_total);
  const double product =
      static_cast<double>(r.at(1, 1) + r.at(-1, -1)) / n - static_cast<double>(r.at(1, -1) + r.at(-1, 1)) / n;
  EXPECT_LE(std::abs(product - (-0.716)), 5 * std::sqrt((1 - 0.716 * 0.716) / n));
}

TEST(CalibrationSuiteTest, DeterministicForIdenticalPlans) {
  EXPECT_EQ(simulate_calibration_suite(reference_plan(8)), simulate_calibration_suite(reference_plan(8)));
  EXPECT_NE(simulate_calibration_suite(reference_plan(8)), simulate_calibration_suite(reference_plan(9)));
}

TEST(CalibrationSuiteTest, RejectsInvalidPlans) {
  RunPlan plan = reference_plan(1);
  plan.theta_grid = {0.5};
  EXPECT_THROW(simulate_calibration_suite(plan), ValidationError);
  plan = reference_plan(1);
  plan.photons_per_setting = 0;
  EXPECT_THROW(simulate_calibration_suite(plan), ValidationError);
  plan = reference_plan(1);
  plan.theta_grid.clear();
  EXPECT_THROW(simulate_calibration_suite(plan), ValidationError);
}

TEST(ExperimentTest, WeakLimitShowsNinetyPercentHorizontal) {
  RunPlan plan = reference_plan(10);
  plan.theta_grid = {0.0};
  const CountRecord r = simulate_experiment(kEllipticalInput, plan)[0];
  const double n = static_cast<double>(r.n_total);
  const double p_h = static_cast<double>(r.at(1, 1) + r.at(-1, 1)) / n;
  EXPECT_LE(std::abs(p_h - 0.9), 5 * binomial_sigma(0.9, n));
}

TEST(ExperimentTest, StrongLimitFavoursAntiCorrelatedOutcomes) {
  RunPlan plan = reference_plan(11);
  plan.theta_grid = {pi / 8};
  const CountRecord r = simulate_experiment(kEllipticalInput, plan)[0];
  const auto mh = r.at(-1, 1), pv = r.at(1, -1), ph = r.at(1, 1), mv = r.at(-1, -1);
  EXPECT_GT(std::min(mh, pv), std::max(ph, mv));
}

TEST(ExperimentTest, OneRecordPerSettingAndDistinctFromCalibrationSeeds) {
  const RunPlan plan = reference_plan(12);
  const auto records = simulate_experiment(kEllipticalInput, plan, "custom");
  ASSERT_EQ(records.size(), plan.theta_grid.size());
  for (const auto& r : records) EXPECT_EQ(r.input_label, "custom");
  EXPECT_EQ(records, simulate_experiment(kEllipticalInput, plan, "custom"));
}

TEST(CountsCsvTest, WriteThenReadPreservesRecords) {
  const auto records = simulate_calibration_suite(reference_plan(13));
  std::stringstream ss;
  write_counts_csv(ss, records);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "theta_deg,input_label,n_PH,n_PV,n_MH,n_MV");
  const auto back = read_counts_csv(ss);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].counts, records[i].counts);
    EXPECT_EQ(back[i].input_label, records[i].input_label);
    EXPECT_EQ(back[i].n_total, records[i].n_total);
    EXPECT_NEAR(back[i].theta, records[i].theta, 1e-10);
  }
  std::stringstream again;
  write_counts_csv(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(CountsCsvTest, MalformedInputReportsLineNumber) {
  const auto expect_line = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      read_counts_csv(in);
      FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  const std::string header = "theta_deg,input_label,n_PH,n_PV,n_MH,n_MV\n";
  expect_line("bogus\n", 1);
  expect_line(header + "0,P,1,2,3,4\n5,H,1,2,3\n", 3);
  expect_line(header + "0,P,1,2,x,4\n", 2);
  expect_line(header + "30,P,1,2,3,4\n", 2);
  expect_line(header + "10,R,0,0,0,0\n", 2);
  expect_line(header + "10,R,-1,0,0,5\n", 2);
  std::istringstream empty("");
  EXPECT_THROW(read_counts_csv(empty), ParseError);
}

}  // namespace
}  // namespace seqmeas
