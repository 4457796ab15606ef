#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "openrec/nbv.hpp"
#include "openrec/synthgen.hpp"
#include "oracles.hpp"

using namespace openrec;

namespace {

// A dense 0.4 m wall at x = 0.5 hiding a small cube around x = 0.75 from a camera on
// the -x side; labels: wall 1, box 2.
std::pair<PointCloud, std::vector<int>> occlusion_scene() {
  PointCloud c;
  std::vector<int> labels;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      c.push_back({0.5, -0.2 + 0.004 * i, -0.2 + 0.004 * j});
      labels.push_back(1);
    }
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j)
      for (int k = 0; k <= 5; ++k) {
        c.push_back({0.725 + 0.01 * k, -0.025 + 0.01 * i, -0.025 + 0.01 * j});
        labels.push_back(2);
      }
  return {c, labels};
}

}  // namespace

TEST_CASE("viewpoint entropy closed forms and oracle") {
  CHECK(viewpoint_entropy(SegmentedScene::from_areas({42.0})) == 0.0);
  for (int k = 2; k <= 9; ++k)
    CHECK(std::abs(viewpoint_entropy(SegmentedScene::from_areas(std::vector<double>(k, 3.0))) - std::log(k)) <=
          1e-12);
  CHECK_THROWS_AS(viewpoint_entropy(SegmentedScene::from_areas({})), InvalidArgument);
  CHECK_THROWS_AS(viewpoint_entropy(SegmentedScene::from_areas({1.0, 0.0})), InvalidArgument);
  SegmentedScene small{{2.0, 2.0}, 3.0};
  CHECK_THROWS_AS(viewpoint_entropy(small), InvalidArgument);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    oracle::Rng rng(seed);
    std::vector<double> areas;
    for (int i = 0; i < 1 + static_cast<int>(seed % 7); ++i) areas.push_back(oracle::uniform(rng, 1, 100));
    SegmentedScene scene = SegmentedScene::from_areas(areas);
    scene.total_area *= 1.3;
    double h = 0;
    for (double a : areas) h -= a / scene.total_area * std::log(a / scene.total_area);
    CHECK(std::abs(viewpoint_entropy(scene) - h) <= 1e-12);

    auto shuffled = areas;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (double& a : shuffled) a *= 4.0;
    CHECK(std::abs(viewpoint_entropy(SegmentedScene::from_areas(shuffled)) -
                   viewpoint_entropy(SegmentedScene::from_areas(areas))) <= 1e-12);
  }
}

TEST_CASE("render keeps a single point and the nearer of two on one ray") {
  const CameraPose cam = CameraPose::look_at({0, 0, 0}, {1, 0, 0});
  PointCloud one;
  one.push_back({1, 0, 0});
  CHECK(render_virtual(one, cam).size() == 1);

  PointCloud two;
  two.push_back({2, 0, 0});
  two.push_back({1, 0, 0});
  const auto idx = render_virtual_indices(two, cam);
  REQUIRE(idx.size() == 1);
  CHECK(idx[0] == 1);

  PointCloud behind;
  behind.push_back({-1, 0, 0});
  CHECK(render_virtual(behind, cam).empty());
}

TEST_CASE("an occluding wall hides the box") {
  const auto [world, labels] = occlusion_scene();
  RenderParams params;
  params.resolution = 64;
  const auto front = render_virtual_indices(world, CameraPose::look_at({-1, 0, 0}, {0.6, 0, 0}), params);
  for (std::size_t i : front) CHECK(labels[i] == 1);
  const auto back = render_virtual_indices(world, CameraPose::look_at({2, 0, 0}, {0.6, 0, 0}), params);
  std::size_t box = 0;
  for (std::size_t i : back) box += labels[i] == 2;
  CHECK(box > 0);

  // Output is a subset of the input.
  const auto cloud = render_virtual(world, CameraPose::look_at({0.6, 1.5, 0.3}, {0.6, 0, 0}), params);
  std::set<std::tuple<double, double, double>> input;
  for (const auto& p : world.points) input.insert({p.x(), p.y(), p.z()});
  for (const auto& p : cloud.points) CHECK(input.count({p.x(), p.y(), p.z()}) == 1);
}

TEST_CASE("gaussian weighting") {
  CameraPose a, b;
  const double sigma = 0.5;
  CHECK(gaussian_weight(a, a, sigma) == doctest::Approx(1.0 / (sigma * std::sqrt(2 * std::numbers::pi))).epsilon(1e-15));
  b.translation = {1000, 0, 0};
  CHECK(weighted_entropy(2.0, b, a, sigma) == 0.0);
  CHECK_THROWS_AS(gaussian_weight(a, b, 0.0), InvalidArgument);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    oracle::Rng rng(seed);
    CameraPose v, c;
    v.translation = {oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
    c.translation = {oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
    const double s = oracle::uniform(rng, 0.1, 2.0), h = oracle::uniform(rng, 0, 3);
    const double d = (v.translation - c.translation).norm();
    const double want = h / (s * std::sqrt(2 * M_PI)) * std::exp(-d * d / (2 * s * s));
    CHECK(std::abs(weighted_entropy(h, v, c, s) - want) <= 1e-12);
  }
}

TEST_CASE("selection frequencies follow the weights") {
  const std::vector<double> w{3.0, 1.0};
  std::mt19937_64 rng(17);
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) first += select_next_view(w, rng) == 0;
  CHECK(std::abs(first / double(draws) - 0.75) <= 0.02);

  const std::vector<double> scaled{30.0, 10.0};
  for (std::uint64_t s = 0; s < 50; ++s) CHECK(select_next_view(w, s) == select_next_view(scaled, s));

  const std::vector<double> single{0.2};
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(select_next_view(single, s) == 0);

  const auto p = selection_probabilities(std::vector<double>{1, 2, 5});
  CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-12);
  CHECK_THROWS_AS(select_next_view(std::vector<double>{0, 0}, 1), InvalidArgument);
  CHECK_THROWS_AS(selection_probabilities(std::vector<double>{1, -1}), InvalidArgument);
}

TEST_CASE("candidate evaluation favors views that see more objects") {
  const auto [world, labels] = occlusion_scene();
  const std::vector<CameraPose> poses{CameraPose::look_at({-1, 0, 0}, {0.6, 0, 0}),
                                      CameraPose::look_at({0.6, 0, 1.2}, {0.6, 0, 0}, Eigen::Vector3d::UnitX())};
  NbvParams params;
  params.render.resolution = 64;
  const auto scores = evaluate_candidates(world, poses, poses[0], params, labels);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].clusters == 1);
  CHECK(scores[0].entropy == 0.0);
  CHECK(scores[1].clusters == 2);
  CHECK(scores[1].entropy > 0.0);
  CHECK(scores[1].probability == 1.0);

  const auto clustered = evaluate_candidates(world, poses, poses[0], params);
  CHECK(clustered[1].clusters == 2);
}

TEST_CASE("pose list parsing") {
  const auto poses = parse_poses_json(
      R"([{"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [1,2,3]},
          {"rotation": [0,-1,0, 1,0,0, 0,0,1], "translation": [0,0,0]}])");
  REQUIRE(poses.size() == 2);
  CHECK(poses[0].translation == Eigen::Vector3d(1, 2, 3));
  CHECK(poses[1].rotation(0, 1) == -1.0);
  CHECK_THROWS_AS(parse_poses_json("{}"), ParseError);
  CHECK_THROWS_AS(parse_poses_json("[{\"rotation\": [1,0,0], \"translation\": [0,0,0]}]"), ParseError);
  CHECK_THROWS_AS(parse_poses_json("[{\"rotation\": [2,0,0, 0,1,0, 0,0,1], \"translation\": [0,0,0]}]"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_poses_json("not json"), ParseError);
}
