#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "sgvqa/errors.hpp"
#include "sgvqa/geometry.hpp"

namespace sgvqa {
namespace {

using testing::Edge;

ObjectEntity placed(const std::string& id, Vec3 pos, double diag) {
  ObjectEntity o;
  o.object_id = id;
  o.label = "thing";
  o.box2d = Box2d{0, 0, 1, 1};
  o.position3d = pos;
  const double side = diag / std::sqrt(2.0);
  o.extent3d = Extent2{side, side};
  return o;
}

std::set<Edge> edges(const std::vector<SpatialRelation>& rels) {
  std::set<Edge> out;
  for (const auto& r : rels) out.emplace(r.subject_id, r.predicate, r.target_id);
  return out;
}

void expect_rel_near(double got, double want) {
  EXPECT_LE(std::abs(got - want), 1e-9 * std::max(1.0, std::abs(want))) << got << " vs " << want;
}

const CameraModel kCam{1000, 1000, 500, 500};

TEST(Backproject, PrincipalPointMapsToOpticalAxis) {
  const auto p = backproject(Box2d{400, 400, 600, 600}, 2.0, kCam);
  expect_rel_near(p.position.x, 0.0);
  expect_rel_near(p.position.y, 0.0);
  expect_rel_near(p.position.z, 2.0);
}

TEST(Backproject, OffsetBox) {
  const auto p = backproject(Box2d{900, 400, 1100, 600}, 2.0, kCam);
  expect_rel_near(p.position.x, 1.0);
  expect_rel_near(p.position.y, 0.0);
  expect_rel_near(p.position.z, 2.0);
  expect_rel_near(p.extent.width, 0.4);
  expect_rel_near(p.extent.height, 0.4);
}

TEST(Backproject, Errors) {
  EXPECT_THROW(backproject(Box2d{0, 0, 1, 1}, 0.0, kCam), InvalidArgumentError);
  EXPECT_THROW(backproject(Box2d{0, 0, 1, 1}, -1.0, kCam), InvalidArgumentError);
  EXPECT_THROW(backproject(Box2d{1, 0, 1, 1}, 1.0, kCam), ValidationError);
  EXPECT_THROW(backproject(Box2d{0, 0, 1, 1}, 1.0, CameraModel{0, 1, 0, 0}), ValidationError);
}

TEST(SpatialPredicates, CoincidentObjectsAreNextTo) {
  const std::vector<ObjectEntity> objs{placed("a", {0, 0, 5}, 1.0), placed("b", {0, 0, 5}, 1.0)};
  EXPECT_EQ(edges(assign_spatial_predicates(objs, 0)),
            (std::set<Edge>{{"a", Predicate::next_to, "b"}, {"b", Predicate::next_to, "a"}}));
}

TEST(SpatialPredicates, AboveBelow) {
  const std::vector<ObjectEntity> objs{placed("a", {0, -2, 5}, 1.0), placed("b", {0, 0, 5}, 1.0)};
  EXPECT_EQ(edges(assign_spatial_predicates(objs, 0)),
            (std::set<Edge>{{"a", Predicate::above, "b"}, {"b", Predicate::below, "a"}}));
}

TEST(SpatialPredicates, BehindInFront) {
  const std::vector<ObjectEntity> objs{placed("a", {0, 0, 10}, 1.0), placed("b", {0, 0, 5}, 1.0)};
  EXPECT_EQ(edges(assign_spatial_predicates(objs, 0)),
            (std::set<Edge>{{"a", Predicate::behind, "b"}, {"b", Predicate::in_front_of, "a"}}));
}

TEST(SpatialPredicates, OnSuppressesReverseDirection) {
  const std::vector<ObjectEntity> objs{placed("cup", {0, -0.2, 5}, 1.0),
                                       placed("table", {0, 0, 5}, 1.0)};
  EXPECT_EQ(edges(assign_spatial_predicates(objs, 0)),
            (std::set<Edge>{{"cup", Predicate::on, "table"}}));
}

TEST(SpatialPredicates, FarApartGivesNothing) {
  const std::vector<ObjectEntity> objs{placed("a", {0, 0, 5}, 1.0), placed("b", {10, 0, 5}, 1.0)};
  EXPECT_TRUE(assign_spatial_predicates(objs, 0).empty());
}

TEST(SpatialPredicates, FewerThanTwoObjects) {
  const std::vector<ObjectEntity> one{placed("a", {0, 0, 5}, 1.0)};
  EXPECT_TRUE(assign_spatial_predicates(one, 0).empty());
  EXPECT_TRUE(assign_spatial_predicates({}, 0).empty());
}

TEST(SpatialPredicates, MissingPlacementNamesObject) {
  auto b = placed("b", {0, 0, 5}, 1.0);
  b.extent3d.reset();
  const std::vector<ObjectEntity> objs{placed("a", {0, 0, 5}, 1.0), b};
  try {
    assign_spatial_predicates(objs, 0);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos) << e.what();
  }
}

TEST(SpatialPredicates, OutputIsCanonicalAndStamped) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto objs = testing::random_placed_objects(rng, testing::uniform_int(rng, 2, 7));
    const auto rels = assign_spatial_predicates(objs, trial);
    for (std::size_t i = 1; i < rels.size(); ++i) {
      const auto& p = rels[i - 1];
      const auto& q = rels[i];
      ASSERT_LT(std::tie(p.subject_id, p.predicate, p.target_id),
                std::tie(q.subject_id, q.predicate, q.target_id));
    }
    for (const auto& r : rels) ASSERT_EQ(r.frame_index, trial);
  }
}

TEST(SpatialPredicates, PropertiesOnRandomConfigurations) {
  testing::Rng rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto objs = testing::random_placed_objects(rng, testing::uniform_int(rng, 2, 6));
    const auto got = edges(assign_spatial_predicates(objs, 0));
    ASSERT_EQ(got, testing::spatial_oracle(objs)) << "trial " << trial;

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, p, b] : got) {
      ASSERT_TRUE(pairs.emplace(a, b).second) << "two predicates for " << a << "," << b;
      switch (p) {
        case Predicate::above: ASSERT_TRUE(got.count({b, Predicate::below, a})); break;
        case Predicate::below: ASSERT_TRUE(got.count({b, Predicate::above, a})); break;
        case Predicate::behind: ASSERT_TRUE(got.count({b, Predicate::in_front_of, a})); break;
        case Predicate::in_front_of: ASSERT_TRUE(got.count({b, Predicate::behind, a})); break;
        case Predicate::next_to: ASSERT_TRUE(got.count({b, Predicate::next_to, a})); break;
        case Predicate::on: ASSERT_FALSE(pairs.count({b, a})); break;
      }
    }

    auto scaled = objs;
    for (auto& o : scaled) {
      o.position3d = Vec3{o.position3d->x * 10, o.position3d->y * 10, o.position3d->z * 10};
      o.extent3d = Extent2{o.extent3d->width * 10, o.extent3d->height * 10};
    }
    ASSERT_EQ(edges(assign_spatial_predicates(scaled, 0)), got) << "trial " << trial;
  }
}

TEST(SpatialPredicates, ThresholdsAreConfigurable) {
  const std::vector<ObjectEntity> objs{placed("a", {0, 0, 5}, 1.0), placed("b", {2, 0, 5}, 1.0)};
  EXPECT_TRUE(assign_spatial_predicates(objs, 0).empty());
  GeometryThresholds wide;
  wide.proximity = 3.0;
  EXPECT_EQ(assign_spatial_predicates(objs, 0, wide).size(), 2u);
}

TEST(Perception, RoundTripAndValidation) {
  PerceptionFile p;
  p.video_id = "v";
  p.camera = kCam;
  p.frames = {PerceptionFrame{0, {Detection{"o1", "cat", 0.9, Box2d{0, 0, 10, 10}, 2.0}}}};
  EXPECT_EQ(decode<PerceptionFile>(json::parse(json(p).dump())), p);
  ASSERT_NE(p.frame(0), nullptr);
  EXPECT_EQ(p.frame(3), nullptr);

  auto bad_version = json(p);
  bad_version["schema_version"] = 2;
  EXPECT_THROW(decode<PerceptionFile>(bad_version), ValidationError);
  auto bad_depth = p;
  bad_depth.frames[0].detections[0].depth_z = 0;
  EXPECT_THROW(validate(bad_depth), ValidationError);
}

}  // namespace
}  // namespace sgvqa
