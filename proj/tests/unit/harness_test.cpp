#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "auvtune/config.hpp"
#include "auvtune/estimator.hpp"
#include "auvtune/harness.hpp"

namespace auvtune {
namespace {

Trace constant_trace(double t_end, double dt, ThrusterCommand cmd) {
  Trace tr;
  for (double t = 0.0; t < t_end - 1e-12; t += dt) {
    TraceSample row;
    row.t = t;
    row.command = cmd;
    tr.samples.push_back(row);
  }
  tr.t_end = t_end;
  tr.complete = true;
  return tr;
}

TEST(EnergyCost, ZeroCommandsCostOnlyTime) {
  const Trace tr = constant_trace(37.3, 0.1, {});
  EXPECT_EQ(energy_cost(tr, CostVariant::kOriginal), 37.3);
  EXPECT_EQ(energy_cost(tr, CostVariant::kQuadratic), 37.3);
}

TEST(EnergyCost, ConstantFullSurge) {
  const Trace tr = constant_trace(10.0, 0.1, {1.0, 0.0, 0.0});
  EXPECT_NEAR(energy_cost(tr, CostVariant::kOriginal) - 10.0, 20.25, 1e-9);
}

TEST(EnergyCost, ConstantHalfQuadratic) {
  const Trace tr = constant_trace(10.0, 0.1, {0.0, 0.0, 0.5});
  EXPECT_NEAR(energy_cost(tr, CostVariant::kQuadratic) - 10.0, 2.75, 1e-9);
}

TEST(EnergyCost, PowerModel) {
  EXPECT_EQ(command_power(0.0, CostVariant::kOriginal), 0.0);
  EXPECT_NEAR(command_power(0.25, CostVariant::kOriginal), 0.025 + 0.25 + 0.125, 1e-15);
  // Signed u^1.5 keeps the integrand symmetric.
  EXPECT_NEAR(command_power(-0.25, CostVariant::kOriginal), 0.025 + 0.25 + 0.125, 1e-15);
  EXPECT_NEAR(command_power(-0.5, CostVariant::kQuadratic), 0.025 + 0.25, 1e-15);
  EXPECT_GT(command_power(1e-12, CostVariant::kOriginal), 0.025);
}

TEST(EnergyCost, PiecewiseHoldIsIntegratedExactly) {
  Trace tr;
  tr.samples.resize(3);
  tr.samples[0].t = 0.0;
  tr.samples[0].command = {0.5, 0.0, 0.0};
  tr.samples[1].t = 2.0;
  tr.samples[1].command = {0.0, -1.0, 0.0};
  tr.samples[2].t = 2.5;
  tr.samples[2].command = {};
  tr.t_end = 4.0;
  tr.complete = true;
  const double p = command_power(0.5, CostVariant::kOriginal);
  EXPECT_NEAR(energy_cost(tr, CostVariant::kOriginal), 4.0 + 2.0 * p + 0.5 * 2.025, 1e-12);
}

TEST(EnergyCost, IncompleteTraceIsRejected) {
  Trace tr = constant_trace(1.0, 0.1, {});
  tr.complete = false;
  EXPECT_THROW(energy_cost(tr, CostVariant::kOriginal), ConfigError);
}

TEST(MaxDeviation, Examples) {
  Trace tr = constant_trace(1.0, 0.1, {});
  EXPECT_EQ(max_deviation(tr), 0.0);
  tr.samples[4].cross_track = -1.0;
  EXPECT_DOUBLE_EQ(max_deviation(tr), 1.0);
  tr.samples[6].cross_track = 0.6;
  tr.samples[6].depth_error = 0.8;
  EXPECT_DOUBLE_EQ(max_deviation(tr), 1.0);
  tr.samples[7].depth_error = 1.2;
  EXPECT_DOUBLE_EQ(max_deviation(tr), 1.2);
}

EpisodeResult fake(double j, double g, bool l) {
  EpisodeResult r;
  r.j = j;
  r.g = g;
  r.l = l;
  return r;
}

TEST(RobustAggregate, Arithmetic) {
  std::vector<EpisodeResult> rs;
  for (int i = 1; i <= 5; ++i) rs.push_back(fake(i, 0.1 * i, true));
  const Aggregate a = robust_aggregate(rs);
  EXPECT_DOUBLE_EQ(a.j, 3.0);
  EXPECT_DOUBLE_EQ(a.g, 0.5);
  EXPECT_TRUE(a.l);

  const Aggregate same = robust_aggregate({fake(7.0, 0.3, true), fake(7.0, 0.3, true)});
  EXPECT_DOUBLE_EQ(same.j, 7.0);
  EXPECT_DOUBLE_EQ(same.g, 0.3);

  rs[2] = fake(std::nan(""), std::nan(""), false);
  const Aggregate crashed = robust_aggregate(rs);
  EXPECT_FALSE(crashed.l);
  EXPECT_TRUE(std::isnan(crashed.j));
  EXPECT_THROW(robust_aggregate({}), ConfigError);
}

TEST(CurrentProfile, IsCappedDeterministicAndContinuous) {
  const CurrentConfig cfg;
  CurrentProfile a(cfg, 3), b(cfg, 3);
  Vec3 prev = a.at(0.0);
  for (double t = 0.0; t < 2000.0; t += 0.37) {
    const Vec3 c = a.at(t);
    EXPECT_LE(c.head<2>().norm(), cfg.cap + 1e-12);
    EXPECT_EQ(c, b.at(t));
    EXPECT_LT((c - prev).norm(), 0.02);
    prev = c;
  }
  EXPECT_NE(CurrentProfile(cfg, 4).at(10.0), CurrentProfile(cfg, 3).at(10.0));
}

TEST(Waypoints, RespectBoxSpacingAndGlide) {
  const WaypointConfig cfg;
  const double glide = 0.2;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto wps = generate_waypoints(cfg, glide, seed);
    ASSERT_EQ(static_cast<int>(wps.size()), cfg.count);
    for (std::size_t i = 0; i < wps.size(); ++i) {
      EXPECT_GE(wps[i].n, cfg.box_min.x());
      EXPECT_LE(wps[i].n, cfg.box_max.x());
      EXPECT_GE(wps[i].e, cfg.box_min.y());
      EXPECT_LE(wps[i].e, cfg.box_max.y());
      EXPECT_GE(wps[i].d, cfg.box_min.z());
      EXPECT_LE(wps[i].d, cfg.box_max.z());
      if (i == 0) continue;
      const double horiz = std::hypot(wps[i].n - wps[i - 1].n, wps[i].e - wps[i - 1].e);
      EXPECT_GE(horiz, cfg.min_spacing);
      EXPECT_LE(std::atan(std::abs(wps[i].d - wps[i - 1].d) / horiz),
                cfg.glide_margin * glide + 1e-12);
    }
    EXPECT_EQ(wps.front().n, generate_waypoints(cfg, glide, seed).front().n);
  }
}

TEST(Filter, AbsurdProcessNoiseIsACrash) {
  const PlantModel design(default_hydro_params());
  const SensorConfig sensors;
  const auto noise = FilterNoiseConfig::from_sensors(sensors, {1e-6, 1e300, 1e300, 1.0});
  Belief b;
  b.cov *= 1e-2;
  NavigationFilter f(design, noise, sensors, b);
  EXPECT_THROW(
      {
        for (int k = 0; k < 100; ++k) f.predict(ThrusterCommand{0.5, 0.0, 0.0}, 0.01);
      },
      CrashSignal);
}

class EpisodeTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new Config(default_config());
    scenario_ = new ScenarioConfig(config_->scenario_for(config_->tier("med")));
    result_ = new EpisodeResult(run_episode(config_->defaults, *scenario_));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete scenario_;
    delete config_;
  }

  static Config* config_;
  static ScenarioConfig* scenario_;
  static EpisodeResult* result_;
};

Config* EpisodeTest::config_ = nullptr;
ScenarioConfig* EpisodeTest::scenario_ = nullptr;
EpisodeResult* EpisodeTest::result_ = nullptr;

TEST_F(EpisodeTest, DefaultsSucceedOnSeedOne) {
  ASSERT_TRUE(result_->l) << result_->message;
  EXPECT_EQ(result_->reason, CrashReason::kNone);
  EXPECT_LT(result_->g, scenario_->g_max);
  EXPECT_GT(result_->j, result_->t_end);
  EXPECT_TRUE(result_->trace.complete);
  EXPECT_DOUBLE_EQ(result_->j, energy_cost(result_->trace, scenario_->cost));
  EXPECT_GE(result_->g, max_deviation(result_->trace));
}

TEST_F(EpisodeTest, IsBitIdenticalOnRepeat) {
  const EpisodeResult again = run_episode(config_->defaults, *scenario_);
  EXPECT_EQ(again.j, result_->j);
  EXPECT_EQ(again.g, result_->g);
  EXPECT_EQ(again.t_end, result_->t_end);
  std::ostringstream a, b;
  write_trace_csv(result_->trace, a);
  write_trace_csv(again.trace, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(to_json(again).dump(), to_json(*result_).dump());
}

TEST_F(EpisodeTest, RatesMatchConfiguration) {
  const RateCounts& c = result_->counts;
  const long steps = std::lround(result_->t_end * scenario_->base_rate);
  EXPECT_EQ(c.plant, steps);
  EXPECT_EQ(c.predict, steps);
  EXPECT_EQ(c.ahrs, steps);
  EXPECT_EQ(c.pressure, (steps + 9) / 10);
  EXPECT_EQ(c.controller, (steps + 9) / 10);
  EXPECT_EQ(c.usbl_triggered, (steps + 99) / 100);
  EXPECT_LE(c.usbl_applied, c.usbl_triggered);
  EXPECT_GE(c.usbl_applied, c.usbl_triggered - 1);
  EXPECT_EQ(static_cast<long>(result_->trace.samples.size()), c.controller);
}

TEST_F(EpisodeTest, DeviationMatchesDenseReprojection) {
  const GncParams& a = config_->defaults;
  const GuidanceConfig guidance = guidance_config_of(a, scenario_->guidance);
  const ReferencePath path =
      build_reference(generate_waypoints(scenario_->waypoints, guidance.glide_max, scenario_->seed),
                      a.plan_radius(), a.surge_ref(), guidance.glide_max);
  ASSERT_NEAR(path.length(), result_->path_length, 1e-9);

  // Dense grid over the active window [cursor, cursor + 4 r_plan] with a
  // monotone cursor, then golden-section refinement around the best node.
  const double step = 0.05;
  const double window = 4.0 * a.plan_radius();
  auto horiz2 = [&](double s, double n, double e) {
    const PathSample p = path.sample(std::clamp(s, 0.0, path.length()));
    return (p.n - n) * (p.n - n) + (p.e - e) * (p.e - e);
  };
  double cursor = 0.0;
  double g_oracle = 0.0;
  for (const TraceSample& row : result_->trace.samples) {
    const double n = row.truth.eta[0], e = row.truth.eta[1];
    const double end = std::min(cursor + window, path.length());
    double best = cursor;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (double s = cursor; s <= end + 1e-12; s += step) {
      const double d2 = horiz2(std::min(s, end), n, e);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = std::min(s, end);
      }
    }
    double lo = std::max(cursor, best - step), hi = std::min(end, best + step);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
      const double m1 = hi - ratio * (hi - lo), m2 = lo + ratio * (hi - lo);
      if (horiz2(m1, n, e) < horiz2(m2, n, e)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    cursor = std::max(cursor, 0.5 * (lo + hi));
    const double dev =
        std::hypot(std::sqrt(horiz2(cursor, n, e)), row.truth.eta[2] - path.depth_at(cursor));
    EXPECT_NEAR(row.s, cursor, 1e-4);
    g_oracle = std::max(g_oracle, dev);
  }
  EXPECT_NEAR(max_deviation(result_->trace), g_oracle, 1e-6);
}

TEST_F(EpisodeTest, InfeasibleParametersCrashWithAReason) {
  GncParams a = config_->defaults;
  a[kQ1] = 3.0;
  a[kQ2] = -5.0;
  a[kQ3] = 3.0;
  a[kQ4] = 3.0;
  a[kQ5] = 3.0;
  const EpisodeResult r = run_episode(a, *scenario_);
  EXPECT_FALSE(r.l);
  EXPECT_NE(r.reason, CrashReason::kNone);
  EXPECT_TRUE(std::isnan(r.j));
  EXPECT_TRUE(std::isnan(r.g));
  const nlohmann::json rec = to_json(r);
  EXPECT_TRUE(rec.at("j").is_null());
  EXPECT_TRUE(rec.at("g").is_null());
  EXPECT_EQ(rec.at("l"), 0);
}

TEST_F(EpisodeTest, OutOfBoundsParametersAreAConfigError) {
  GncParams a = config_->defaults;
  a[kSurgeRef] = 5.0;
  EXPECT_THROW(run_episode(a, *scenario_), ConfigError);
  ScenarioConfig bad = *scenario_;
  bad.g_max = 0.0;
  EXPECT_THROW(run_episode(config_->defaults, bad), ConfigError);
}

TEST(CostVariant, RoundTrip) {
  EXPECT_EQ(parse_cost_variant(to_string(CostVariant::kQuadratic)), CostVariant::kQuadratic);
  EXPECT_EQ(parse_cost_variant("original"), CostVariant::kOriginal);
  EXPECT_THROW(parse_cost_variant("cubic"), ConfigError);
}

}  // namespace
}  // namespace auvtune
