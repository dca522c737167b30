#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "socnav/json_io.hpp"
#include "socnav/metrics.hpp"
#include "socnav/report.hpp"
#include "support.hpp"

using namespace socnav;
constexpr double kPi = std::numbers::pi;

namespace {

AgentState disc(Vec2 p, Vec2 v, double r) {
  AgentState a;
  a.pose = Pose2D(p.x, p.y, 0);
  a.velocity = v;
  a.radius = r;
  return a;
}

std::vector<Vec2> sample(double duration, double rate, auto&& f) {
  std::vector<Vec2> out;
  const auto n = static_cast<int>(std::llround(duration * rate));
  for (int k = 0; k <= n; ++k) out.push_back(f(k / rate));
  return out;
}

/// Earliest 1 ms step at which the discs overlap, saturated like the metric.
double brute_ttc(const AgentState& a, const AgentState& b) {
  const double r = a.radius + b.radius;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i * 1e-3;
    const Vec2 pa = a.position() + a.velocity * t;
    const Vec2 pb = b.position() + b.velocity * t;
    if (distance(pa, pb) <= r) return t;
  }
  return kTtcSaturation;
}

EpisodeLog outcome(TerminationKind kind, int collisions) {
  EpisodeLog log;
  log.termination = make_termination(kind, collisions);
  return log;
}

}  // namespace

TEST(PathLength, Examples) {
  EXPECT_EQ(path_length(std::vector<Vec2>{{1, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(path_length(std::vector<Vec2>{{0, 0}, {3, 0}, {3, 4}}), 7.0);
  std::vector<Vec2> circle;
  for (int i = 0; i <= 100; ++i) circle.push_back(unit_from_angle(2 * kPi * i / 100));
  EXPECT_NEAR(path_length(circle) / (2 * kPi), 1.0, 0.003);
}

TEST(PathLength, NeverBelowDisplacement) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    std::vector<Vec2> pts(2 + rng() % 20);
    for (auto& p : pts) p = {u(rng), u(rng)};
    EXPECT_GE(path_length(pts) + 1e-12, distance(pts.front(), pts.back()));
  }
}

TEST(PathLengthRatio, Examples) {
  EXPECT_DOUBLE_EQ(path_length_ratio({0, 0}, {4, 0}, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(path_length_ratio({0, 0}, {3, 4}, 7.0), 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(path_length_ratio({0, 0}, {0, 0}, 3.0), 0.0);
  EXPECT_THROW(path_length_ratio({0, 0}, {1, 0}, 0.0), UsageError);
}

TEST(GoalTraversalRatio, Examples) {
  EXPECT_DOUBLE_EQ(goal_traversal_ratio({0, 0}, {0, 0}, {4, 0}), 1.0);
  EXPECT_DOUBLE_EQ(goal_traversal_ratio({0, 0}, {2, 0}, {4, 0}), 0.5);
  EXPECT_NEAR(goal_traversal_ratio({0, 0}, {8.8, 0}, {4, 0}), 1.2, 1e-12);
  EXPECT_THROW(goal_traversal_ratio({1, 1}, {2, 2}, {1, 1}), UsageError);
}

TEST(PathIrregularity, Examples) {
  std::vector<Pose2D> straight;
  for (int i = 0; i < 50; ++i) straight.emplace_back(i * 0.1, 0.0, 0.0);
  EXPECT_EQ(path_irregularity(straight, {10, 0}, 0.3), 0.0);

  std::vector<Pose2D> sideways;
  for (int i = 0; i < 50; ++i) sideways.emplace_back(i * 0.1, 0.0, kPi / 2);
  EXPECT_NEAR(path_irregularity(sideways, {10, 0}, 0.3), kPi / 2, 1e-12);

  EXPECT_THROW(path_irregularity(std::vector<Pose2D>{Pose2D(0, 0, 0)}, {0.1, 0}, 0.3), UsageError);
}

TEST(PathIrregularity, ArcMatchesPerPointOracle) {
  const Vec2 goal{3, 1};
  std::vector<Pose2D> poses;
  double oracle = 0.0;
  for (int i = 0; i <= 78; ++i) {
    const double t = i * 0.02;
    const Pose2D p(std::sin(t), 1.0 - std::cos(t), t);
    poses.push_back(p);
    const Vec2 h = unit_from_angle(t);
    const Vec2 g = goal - p.position();
    oracle += std::acos(std::clamp(dot(h, g) / norm(g), -1.0, 1.0));
  }
  EXPECT_NEAR(path_irregularity(poses, goal, 0.3), oracle / static_cast<double>(poses.size()), 1e-9);
}

TEST(Kinematics, ConstantSpeed) {
  auto one = kinematic_stats(sample(10.0, 25.0, [](double t) { return Vec2{t, 0}; }), 0.04);
  EXPECT_NEAR(one.average_speed, 1.0, 1e-9);
  EXPECT_NEAR(one.energy, 10.0, 1e-9);
  EXPECT_NEAR(one.average_acceleration, 0.0, 1e-9);
  EXPECT_NEAR(one.average_jerk, 0.0, 1e-9);
  auto two = kinematic_stats(sample(1.0, 25.0, [](double t) { return Vec2{2 * t, 0}; }), 0.04);
  EXPECT_NEAR(two.energy, 4.0, 1e-9);
}

TEST(Kinematics, RampEnergy) {
  auto k = kinematic_stats(sample(1.0, 25.0, [](double t) { return Vec2{t * t / 2, 0}; }), 0.04);
  EXPECT_NEAR(k.energy / (1.0 / 3.0), 1.0, 0.02);
  EXPECT_NEAR(k.average_acceleration, 1.0, 1e-9);
}

TEST(Kinematics, EnergyScalesWithSpeed) {
  // Same semicircle at twice the speed: half the duration, four times v^2.
  auto slow = kinematic_stats(sample(4.0, 25.0, [](double t) { return unit_from_angle(kPi * t / 4); }), 0.04);
  auto fast = kinematic_stats(sample(2.0, 25.0, [](double t) { return unit_from_angle(kPi * t / 2); }), 0.04);
  EXPECT_NEAR(fast.energy / slow.energy, 2.0, 1e-3);
  EXPECT_THROW(kinematic_stats(std::vector<Vec2>(3), 0.04), UsageError);
}

TEST(ClosestPedestrianDistance, Examples) {
  const auto robot = disc({0, 0}, {}, 0.23);
  EXPECT_NEAR(closest_pedestrian_distance(robot, std::vector{disc({5.53, 0}, {}, 0.3)}), 5.0, 1e-12);
  EXPECT_EQ(closest_pedestrian_distance(robot, std::vector{disc({30, 0}, {}, 0.3)}), 10.0);
  EXPECT_NEAR(closest_pedestrian_distance(robot, std::vector{disc({0.4, 0}, {}, 0.3)}), -0.13, 1e-12);
  EXPECT_EQ(closest_pedestrian_distance(robot, std::vector<AgentState>{}), 10.0);
}

TEST(TimeToCollision, Examples) {
  const auto robot = disc({0, 0}, {1, 0}, 0.25);
  EXPECT_NEAR(time_to_collision(robot, disc({5, 0}, {-1, 0}, 0.25)), 2.25, 1e-12);
  EXPECT_EQ(time_to_collision(robot, disc({0, 3}, {1, 0}, 0.25)), 10.0);
  EXPECT_EQ(time_to_collision(robot, disc({0.3, 0}, {0, 0}, 0.25)), 0.0);
  EXPECT_EQ(time_to_collision(robot, disc({100, 0}, {-1, 0}, 0.25)), 10.0);
}

TEST(TimeToCollision, MatchesBruteForceSimulation) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> pos(-6, 6);
  std::uniform_real_distribution<double> vel(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const auto a = disc({pos(rng), pos(rng)}, {vel(rng), vel(rng)}, 0.23);
    const auto b = disc({pos(rng), pos(rng)}, {vel(rng), vel(rng)}, 0.3);
    const double fast = time_to_collision(a, b);
    const double slow = brute_ttc(a, b);
    if (slow >= kTtcSaturation) {
      EXPECT_GE(fast, kTtcSaturation - 1e-3);
    } else {
      EXPECT_NEAR(fast, slow, 0.04) << "pair " << i;
    }
    const double cpd = closest_pedestrian_distance(a, std::vector{b});
    if (cpd <= 0.0) {
      EXPECT_EQ(fast, 0.0);
    }
  }
}

TEST(EpisodeMetrics, ComputedFromStraightRun) {
  auto env = fixture::open_room(200, 100, 0.1);
  auto ep = fixture::make_episode("m", "room", Pose2D(2, 5, 0), {8, 5},
                                  {fixture::straight_track(3, {5, 8}, {0, -0.5}, 0, 200, 25.0)});
  RobotSpec hol;
  hol.control_mode = ControlMode::kHolonomic;
  fixture::GoalSeeker client(ep.goal, 1.2);
  auto log = run_episode_synchronous(ep, env, client, {hol, null_wall_clock()});
  auto m = compute_episode_metrics(log);
  EXPECT_EQ(m.termination, TerminationKind::kCompletion);
  // Completion happens at the goal radius, so the path is shorter than the start-goal line.
  EXPECT_NEAR(*m.path_length_ratio, 6.0 / m.path_length, 1e-12);
  EXPECT_NEAR(m.path_length, 6.0 - distance(log.records.back().state.robot.position(), ep.goal), 1e-9);
  EXPECT_FALSE(m.goal_traversal_ratio.has_value());
  EXPECT_NEAR(*m.path_irregularity, 0.0, 1e-12);
  EXPECT_NEAR(*m.average_speed, 1.2, 1e-9);
  EXPECT_EQ(m.cpd_series.size(), log.records.size());
  EXPECT_NEAR(m.traversal_time, static_cast<double>(m.ticks) / 25.0, 1e-12);

  // Recomputing from the serialized log gives identical numbers.
  auto again = compute_episode_metrics(episode_log_from_jsonl(episode_log_to_jsonl(log)));
  EXPECT_EQ(again, m);
  EXPECT_EQ(metrics_to_json(again).dump(), metrics_to_json(m).dump());
}

TEST(EpisodeMetrics, RigidMotionInvariance) {
  auto env = fixture::open_room(300, 300, 0.1);
  auto run = [&](Pose2D start, Vec2 goal, Vec2 ped0, Vec2 pedv) {
    auto ep = fixture::make_episode("r", "room", start, goal,
                                    {fixture::straight_track(1, ped0, pedv, 0, 300, 25.0)}, 8.0);
    RobotSpec hol;
    hol.control_mode = ControlMode::kHolonomic;
    fixture::GoalSeeker client(goal, 1.0);
    return compute_episode_metrics(run_episode_synchronous(ep, env, client, {hol, null_wall_clock()}));
  };
  auto a = run(Pose2D(5, 5, 0), {12, 5}, {9, 9}, {0, -1});
  auto b = run(Pose2D(15, 17, 0), {22, 17}, {19, 21}, {0, -1});
  EXPECT_EQ(a.ticks, b.ticks);
  EXPECT_NEAR(a.path_length, b.path_length, 1e-9);
  EXPECT_NEAR(a.cpd_mean, b.cpd_mean, 1e-9);
  EXPECT_NEAR(a.ttc_mean, b.ttc_mean, 1e-9);
  EXPECT_NEAR(*a.energy, *b.energy, 1e-7);
  EXPECT_NEAR(*a.average_jerk, *b.average_jerk, 1e-4);
}

TEST(Aggregate, HandCount) {
  std::vector<EpisodeLog> logs{outcome(TerminationKind::kCompletion, 0), outcome(TerminationKind::kCompletion, 0),
                               outcome(TerminationKind::kCompletion, 1), outcome(TerminationKind::kTimeout, 0)};
  auto r = aggregate_meta(logs);
  EXPECT_EQ(r.successes, 2);
  EXPECT_DOUBLE_EQ(r.success_rate, 0.5);
  EXPECT_EQ(r.failures.str(), "1/1/0");
  EXPECT_EQ(r.total_pedestrian_collisions, 1);

  std::vector<EpisodeLog> good(3, outcome(TerminationKind::kCompletion, 0));
  EXPECT_EQ(aggregate_meta(good).failures.str(), "0/0/0");
  EXPECT_EQ((FailureTuple{1, 8, 0}.str()), "1/8/0");
  EXPECT_THROW(aggregate_meta(std::vector<EpisodeLog>{}), UsageError);
}

TEST(Aggregate, FailureKindsAreExclusive) {
  std::vector<EpisodeLog> logs{outcome(TerminationKind::kTimeout, 2), outcome(TerminationKind::kEnvironmentCollision, 1),
                               outcome(TerminationKind::kCompletion, 3)};
  auto r = aggregate_meta(logs);
  EXPECT_EQ(r.failures.str(), "1/1/1");
  EXPECT_EQ(r.total_pedestrian_collisions, 6);
  EXPECT_EQ(r.successes, 0);
}
