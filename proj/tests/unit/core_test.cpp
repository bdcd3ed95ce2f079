#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "s3rr/dataset_io.hpp"
#include "s3rr/envs.hpp"
#include "test_util.hpp"

namespace s3rr {
namespace {

Trajectory make_traj(double eta, std::vector<double> rewards) {
  Trajectory t;
  t.eta = eta;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    t.states.push_back(Vector::Constant(1, 0.1 * static_cast<double>(i)));
    t.actions.push_back(Vector::Constant(1, -0.5 + static_cast<double>(i)));
  }
  t.initial_rewards = std::move(rewards);
  t.gt_return = -1.25;
  return t;
}

DegradationDataset grid_dataset(int levels, int per_level) {
  DegradationDataset d;
  d.env_id = "reach1d";
  d.provenance = Provenance::noise;
  d.seed = 7;
  d.scorer_digest = "abc";
  Rng rng(3);
  for (int i = 0; i < levels; ++i)
    for (int j = 0; j < per_level; ++j)
      d.trajectories.push_back(make_traj(static_cast<double>(levels - 1 - i) / (levels - 1),
                                         {rng.uniform(), rng.uniform(), rng.normal()}));
  d.refresh_levels();
  d.controls = d.levels;
  return d;
}

TEST(TrajectoryReturn, SumsInitialRewards) {
  EXPECT_EQ(trajectory_return(make_traj(0.0, {0, 0, 0})), 0.0);
  EXPECT_EQ(trajectory_return(make_traj(0.0, {1, 2, 3})), 6.0);
}

TEST(TrajectoryReturn, EmptyTrajectoryThrows) {
  EXPECT_THROW(trajectory_return(Trajectory{}), Error);
}

TEST(TrajectoryReturn, MatchesIndependentSumOnReachRollout) {
  const Reach1D env;
  Rng rng(11);
  Trajectory t = rollout(env, demonstrator(env, {}), rng);
  ASSERT_EQ(t.length(), 50u);
  double acc = 0.0;
  for (std::size_t k = 0; k < t.length(); ++k) {
    t.initial_rewards.push_back(env.reward(t.states[k], t.actions[k]));
    acc += t.initial_rewards.back();
  }
  EXPECT_NEAR(trajectory_return(t), acc, 1e-12);
}

TEST(Trajectory, ValidateRejectsEtaOutsideUnitInterval) {
  Trajectory t = make_traj(1.5, {1});
  EXPECT_THROW(t.validate(), ValidationError);
  t.eta = -0.1;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Dataset, NeedsTwoLevels) {
  DegradationDataset d;
  d.env_id = "reach1d";
  d.provenance = Provenance::noise;
  try {
    d.validate();
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2 levels required"), std::string::npos);
  }
}

TEST(Dataset, DemoAndTestSetsNeedNoLevels) {
  DegradationDataset d = grid_dataset(2, 1);
  d.trajectories.resize(1);
  d.provenance = Provenance::demo;
  d.refresh_levels();
  d.controls.clear();
  EXPECT_NO_THROW(d.validate());
}

TEST(DatasetIo, RoundTripTwoTrajectories) {
  testing::TempDir tmp;
  const DegradationDataset d = grid_dataset(2, 1);
  save_dataset(d, tmp / "d.jsonl");
  std::ifstream in(tmp / "d.jsonl");
  int lines = 0;
  for (std::string line; std::getline(in, line);) lines += !line.empty();
  EXPECT_EQ(lines, 2);
  EXPECT_TRUE(load_dataset(tmp / "d.jsonl") == d);
}

TEST(DatasetIo, TwentyOneLevelsByFive) {
  testing::TempDir tmp;
  const DegradationDataset d = grid_dataset(21, 5);
  save_dataset(d, tmp / "d.jsonl");
  const DegradationDataset back = load_dataset(tmp / "d.jsonl");
  EXPECT_EQ(back.trajectories.size(), 105u);
  ASSERT_EQ(back.levels.size(), 21u);
  EXPECT_TRUE(std::is_sorted(back.levels.begin(), back.levels.end()));
  EXPECT_TRUE(back == d);
}

TEST(DatasetIo, RoundTripIsBitExact) {
  testing::TempDir tmp;
  DegradationDataset d = grid_dataset(3, 2);
  d.trajectories[0].initial_rewards[0] = 0.1 + 0.2;
  d.trajectories[1].states[0][0] = std::nextafter(1.0, 2.0);
  save_dataset(d, tmp / "d.jsonl");
  const auto back = load_dataset(tmp / "d.jsonl");
  EXPECT_EQ(back.trajectories[0].initial_rewards[0], 0.1 + 0.2);
  EXPECT_EQ(back.trajectories[1].states[0][0], std::nextafter(1.0, 2.0));
}

TEST(DatasetIo, TruncatedFileNamesRecord) {
  testing::TempDir tmp;
  save_dataset(grid_dataset(2, 2), tmp / "d.jsonl");
  std::string body;
  {
    std::ifstream in(tmp / "d.jsonl");
    body.assign(std::istreambuf_iterator<char>(in), {});
  }
  // Cut the third record in half.
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = body.find('\n', pos) + 1;
  const std::size_t end = body.find('\n', pos);
  {
    std::ofstream out(tmp / "d.jsonl", std::ios::trunc);
    out << body.substr(0, pos + (end - pos) / 2);
  }
  try {
    load_dataset(tmp / "d.jsonl");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.record(), 3u);
    EXPECT_NE(std::string(e.what()).find("record 3"), std::string::npos);
  }
}

TEST(DatasetIo, OutOfRangeEtaIsValidationError) {
  testing::TempDir tmp;
  save_dataset(grid_dataset(2, 1), tmp / "d.jsonl");
  std::vector<nlohmann::json> records;
  {
    std::ifstream in(tmp / "d.jsonl");
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) records.push_back(nlohmann::json::parse(line));
  }
  records[1]["eta"] = 1.5;
  {
    std::ofstream out(tmp / "d.jsonl", std::ios::trunc);
    for (const auto& r : records) out << r.dump() << '\n';
  }
  try {
    load_dataset(tmp / "d.jsonl");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("eta out of [0,1]"), std::string::npos);
  }
}

TEST(DatasetIo, NonFiniteValueRefused) {
  testing::TempDir tmp;
  DegradationDataset d = grid_dataset(2, 1);
  d.trajectories[0].initial_rewards[0] = std::nan("");
  EXPECT_THROW(save_dataset(d, tmp / "d.jsonl"), ValidationError);
}

TEST(DatasetIo, UnwritablePathNamed) {
  const std::filesystem::path p = "/nonexistent-dir/sub/d.jsonl";
  try {
    save_dataset(grid_dataset(2, 1), p);
    FAIL() << "expected an io error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
}

TEST(FormatReal, RoundTrips) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    EXPECT_EQ(std::stod(format_real(x)), x);
  }
}

TEST(Digest, DistinguishesInputs) {
  EXPECT_EQ(digest("abc"), digest("abc"));
  EXPECT_NE(digest("abc"), digest("abd"));
  EXPECT_EQ(digest("").size(), 16u);
}

TEST(SpaceSpec, ClipAndContains) {
  const SpaceSpec box = SpaceSpec::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  EXPECT_TRUE(box.contains(Vector::Constant(1, 0.5)));
  EXPECT_FALSE(box.contains(Vector::Constant(1, 1.5)));
  EXPECT_EQ(box.clip(Vector::Constant(1, 3.0))[0], 1.0);
  EXPECT_THROW(SpaceSpec::finite(1).validate(), ValidationError);
}

}  // namespace
}  // namespace s3rr
