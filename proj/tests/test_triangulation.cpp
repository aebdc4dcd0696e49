#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "svim/error.hpp"
#include "svim/triangulation.hpp"

namespace svim {
namespace {

const GeoPoint kAnchor{38.9, -77.0, 0.0};

PanoramaPose cam(const std::string& id, double east, double north, int seq_index = 0, double heading = 90.0) {
  PanoramaPose p;
  p.pano_id = id;
  p.position = local_to_geo({east, north, 0.0}, kAnchor);
  p.heading = heading;
  p.image_width = 16384;
  p.image_height = 8192;
  p.sequence_id = "s";
  p.seq_index = seq_index;
  return p;
}

// Observation of a cylinder from the tangent-line oracle in the camera's own plane.
TrunkObservation observe(const PanoramaPose& p, const GeoPoint& tree, double radius) {
  const LocalPoint rel = geo_to_local(tree, p.position);
  const double center = oracle::deg(std::atan2(rel.east, rel.north));
  const auto tangents = oracle::tangent_azimuths(rel.east, rel.north, radius);
  TrunkObservation o;
  o.pano_id = p.pano_id;
  const bool first_left = wrap180(tangents[0] - center) < 0.0;
  o.az_left = normalize_deg(first_left ? tangents[0] : tangents[1]);
  o.az_right = normalize_deg(first_left ? tangents[1] : tangents[0]);
  o.az_center = normalize_deg(center);
  return o;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

TEST(PlanThumbnails, OffsetsAndWorldHeadings) {
  const auto specs = plan_thumbnails(cam("p", 0, 0, 0, 0.0));
  const std::array<double, 6> offsets{45, 90, 135, -45, -90, -135};
  std::set<double> world;
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(specs[i].heading_offset, offsets[i]);
    EXPECT_DOUBLE_EQ(specs[i].hfov, 90.0);
    EXPECT_DOUBLE_EQ(specs[i].pitch, 0.0);
    world.insert(normalize_deg(0.0 + specs[i].heading_offset));
  }
  EXPECT_EQ(world, (std::set<double>{45, 90, 135, 315, 270, 225}));
  ThumbnailLayout layout;
  layout.pitch = 10.0;
  EXPECT_DOUBLE_EQ(plan_thumbnails(cam("p", 0, 0), layout)[0].pitch, 10.0);
}

TEST(CandidatePairs, ThreePerSide) {
  const PanoramaPose rear = cam("r", 0, 0, 4), fwd = cam("f", 10, 0, 5);
  for (const auto& pairs : {candidate_pairs(rear, fwd), candidate_pairs(fwd, rear)}) {
    ASSERT_EQ(pairs.size(), 6u);
    int right = 0, left = 0;
    std::set<double> rear_offsets;
    for (const auto& p : pairs) {
      EXPECT_EQ(p.rear.pano_id, "r");
      EXPECT_EQ(p.forward.pano_id, "f");
      if (p.side == "right") {
        ++right;
        EXPECT_DOUBLE_EQ(p.forward.heading_offset, 135.0);
        EXPECT_GT(p.rear.heading_offset, 0.0);
      } else {
        ++left;
        EXPECT_DOUBLE_EQ(p.forward.heading_offset, -135.0);
        EXPECT_LT(p.rear.heading_offset, 0.0);
      }
      rear_offsets.insert(p.rear.heading_offset);
    }
    EXPECT_EQ(right, 3);
    EXPECT_EQ(left, 3);
    EXPECT_EQ(rear_offsets.size(), 6u);
  }
}

TEST(CandidatePairs, NonAdjacentRejected) {
  EXPECT_EQ(code_of([] { candidate_pairs(cam("a", 0, 0, 1), cam("b", 20, 0, 3)); }), ErrorCode::PairingRejected);
  PanoramaPose other = cam("b", 10, 0, 2);
  other.sequence_id = "t";
  EXPECT_EQ(code_of([&] { candidate_pairs(cam("a", 0, 0, 1), other); }), ErrorCode::PairingRejected);
  EXPECT_FALSE(adjacent(cam("a", 0, 0, 1), cam("b", 0, 0, 1)));
}

TEST(MatchObservations, OneToOneClosestFirst) {
  auto at = [](double e) {
    TrunkObservation o;
    o.coarse_position = local_to_geo({e, 0.0, 0.0}, kAnchor);
    return o;
  };
  // b[0] is within 3 m of both a[0] and a[1] but only pairs with the closer one.
  const auto m = match_observations({at(0.0), at(2.0), at(20.0)}, {at(1.5), at(0.0), at(40.0)});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(m[1], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_TRUE(match_observations({TrunkObservation{}}, {at(0.0)}).empty());
}

TEST(LocateFromDepth, CardinalAndExact) {
  const PanoramaPose p = cam("p", 0, 0);
  TrunkObservation o;
  o.depth_m = 5.0;
  o.az_center = 0.0;
  LocalPoint l = geo_to_local(locate_from_depth(o, p), p.position);
  EXPECT_NEAR(l.east, 0.0, 1e-9);
  EXPECT_NEAR(l.north, 5.0, 1e-9);
  o.az_center = 90.0;
  l = geo_to_local(locate_from_depth(o, p), p.position);
  EXPECT_NEAR(l.east, 5.0, 1e-9);
  EXPECT_NEAR(l.north, 0.0, 1e-9);
  const GeoPoint tree = local_to_geo({6.0, -8.0, 0.0}, p.position);
  TrunkObservation exact = observe(p, tree, 0.3);
  exact.depth_m = 10.0;
  EXPECT_LT(horizontal_distance(locate_from_depth(exact, p), tree), 1e-3);
  o.depth_m = 0.0;
  EXPECT_EQ(code_of([&] { locate_from_depth(o, p); }), ErrorCode::InvalidDepth);
  o.depth_m.reset();
  EXPECT_EQ(code_of([&] { locate_from_depth(o, p); }), ErrorCode::InvalidDepth);
}

TEST(MatchByDepth, ThreeMetreRule) {
  TrunkObservation a, b;
  a.coarse_position = kAnchor;
  EXPECT_FALSE(match_by_depth(a, b));
  b.coarse_position = kAnchor;
  EXPECT_TRUE(match_by_depth(a, b));
  b.coarse_position = local_to_geo({2.9, 0.0, 0.0}, kAnchor);
  EXPECT_TRUE(match_by_depth(a, b));
  b.coarse_position = local_to_geo({0.0, 3.1, 0.0}, kAnchor);
  EXPECT_FALSE(match_by_depth(a, b));
}

TEST(MatchByDepth, NoFalseMatchesInSpacedForests) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ux(-15.0, 25.0), uy(4.0, 24.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 10, 0, 1);
  int false_matches = 0, true_matches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::array<double, 2>> trees;
    while (trees.size() < 8) {
      const std::array<double, 2> p{ux(rng), uy(rng)};
      bool ok = true;
      for (const auto& q : trees) ok = ok && std::hypot(p[0] - q[0], p[1] - q[1]) >= 7.0;
      if (ok) trees.push_back(p);
    }
    std::vector<TrunkObservation> oa, ob;
    for (const auto& t : trees) {
      const GeoPoint g = local_to_geo({t[0], t[1], 0.0}, kAnchor);
      for (const PanoramaPose* p : {&a, &b}) {
        TrunkObservation o = observe(*p, g, 0.3);
        o.depth_m = horizontal_distance(p->position, g) + noise(rng);
        if (*o.depth_m <= 0.0) o.depth_m = 0.1;
        o.coarse_position = locate_from_depth(o, *p);
        (p == &a ? oa : ob).push_back(o);
      }
    }
    for (const auto& [i, j] : match_observations(oa, ob)) (i == j ? true_matches : false_matches) += 1;
  }
  EXPECT_EQ(false_matches, 0);
  EXPECT_GT(true_matches, 7000);
}

TEST(TriangleApex, IsocelesRightTriangle) {
  const BaselineApex apex = triangle_apex(10.0, 45.0, 45.0, 1);
  EXPECT_NEAR(apex.x, 5.0, 1e-12);
  EXPECT_NEAR(apex.y, 5.0, 1e-12);
  EXPECT_NEAR(apex.s_b, 7.0710678118654755, 1e-12);
  EXPECT_NEAR(apex.s_a, 7.0710678118654755, 1e-12);
  EXPECT_DOUBLE_EQ(apex.theta_c, 90.0);
  EXPECT_NEAR(triangle_apex(10.0, 45.0, 45.0, -1).y, -5.0, 1e-12);
}

TEST(TriangleApex, PerpendicularLimit) {
  for (double tb : {10.0, 1.0, 0.1}) {
    const BaselineApex apex = triangle_apex(10.0, 90.0, tb, 1);
    EXPECT_NEAR(apex.x, 0.0, 1e-9);
    EXPECT_NEAR(apex.s_b, 10.0 * std::tan(oracle::rad(tb)), 1e-9);
  }
}

TEST(Triangulate, IsocelesCaseInGeoFrame) {
  const PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 10, 0, 1);
  const GeoPoint tree = local_to_geo({5.0, 5.0, 0.0}, kAnchor);
  const StereoPair pair = make_stereo_pair(a, observe(a, tree, 0.25), b, observe(b, tree, 0.25));
  EXPECT_NEAR(pair.baseline, 10.0, 1e-8);
  EXPECT_NEAR(pair.baseline_bearing, 90.0, 1e-9);
  const TriangulatedTree t = triangulate(pair);
  EXPECT_LT(horizontal_distance(t.position, tree), 1e-6);
  EXPECT_NEAR(t.theta_a, 45.0, 1e-6);
  EXPECT_NEAR(t.theta_b, 45.0, 1e-6);
  EXPECT_NEAR(t.theta_c, 90.0, 1e-6);
  EXPECT_NEAR(t.s_b, 7.0710678118654755, 1e-6);
}

TEST(Triangulate, RandomPlacementsAreExact) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> base(10.0, 15.0), dir(0.0, 360.0), dist(3.0, 25.0), lat(-60.0, 60.0);
  int done = 0;
  while (done < 200) {
    const GeoPoint origin{lat(rng), dir(rng) - 180.0, 0.0};
    const double s_c = base(rng), bearing = oracle::rad(dir(rng));
    PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 0, 0, 1);
    a.position = origin;
    b.position = local_to_geo({s_c * std::sin(bearing), s_c * std::cos(bearing), 0.0}, origin);
    const double d = dist(rng), az = oracle::rad(dir(rng));
    const GeoPoint tree = local_to_geo({d * std::sin(az), d * std::cos(az), 0.0}, origin);
    if (horizontal_distance(b.position, tree) < 3.0) continue;
    const StereoPair pair = make_stereo_pair(a, observe(a, tree, 0.2), b, observe(b, tree, 0.2));
    TriangulatedTree t;
    try {
      t = triangulate(pair);
    } catch (const Error& e) {
      ASSERT_TRUE(e.code() == ErrorCode::IllConditioned || e.code() == ErrorCode::DivergentRays);
      continue;
    }
    ++done;
    ASSERT_LT(horizontal_distance(t.position, tree), 1e-6);
    ASSERT_DOUBLE_EQ(t.theta_a + t.theta_b + t.theta_c, 180.0);
    const double sc = t.s_c / std::sin(oracle::rad(t.theta_c));
    ASSERT_LT(std::abs(t.s_b / std::sin(oracle::rad(t.theta_b)) - sc), 1e-9 * t.s_c);
    ASSERT_LT(std::abs(t.s_a / std::sin(oracle::rad(t.theta_a)) - sc), 1e-9 * t.s_c);
  }
}

TEST(Triangulate, IllConditionedAndDivergent) {
  const PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 10, 0, 1);
  // Far tree almost along the normal: apex angle well under 2 degrees.
  const GeoPoint far = local_to_geo({5.0, 500.0, 0.0}, kAnchor);
  EXPECT_EQ(code_of([&] { triangulate(make_stereo_pair(a, observe(a, far, 0.2), b, observe(b, far, 0.2))); }),
            ErrorCode::IllConditioned);
  // Both rays point north-east: they never meet in front of both cameras.
  TrunkObservation oa = observe(a, far, 0.2), ob = oa;
  oa.az_center = 30.0;
  ob.az_center = 60.0;
  EXPECT_EQ(code_of([&] { triangulate(make_stereo_pair(a, oa, b, ob)); }), ErrorCode::DivergentRays);
  EXPECT_EQ(code_of([&] { make_stereo_pair(a, oa, a, ob); }), ErrorCode::PairingRejected);
  EXPECT_EQ(code_of([&] { make_stereo_pair(a, oa, cam("c", 0.3, 0, 1), ob); }), ErrorCode::PairingRejected);
  // Looser threshold admits the far tree.
  EXPECT_NO_THROW(triangulate(make_stereo_pair(a, observe(a, far, 0.2), b, observe(b, far, 0.2)), 0.5));
}

TEST(Diameter, ConstructedInverse) {
  const double theta = 4.049736594554681;
  EXPECT_NEAR(diameter_from_angle(theta, 7.0710678118654755, DiameterMode::Tangent), 0.5, 1e-9);
  EXPECT_NEAR(diameter_from_angle(2 * 2.026133972191557, 7.071067811865475, DiameterMode::ExactCylinder), 0.5,
              1e-9);
  EXPECT_EQ(code_of([] { diameter_from_angle(0.0, 5.0, DiameterMode::Tangent); }), ErrorCode::InvalidObservation);
}

TEST(Diameter, MeanOfTwoPairDiameters) {
  TriangulatedTree a, b;
  a.diameter = a.mean_diameter = 0.62;
  a.per_image_diameters = {0.62};
  b.diameter = b.mean_diameter = 0.73;
  b.per_image_diameters = {0.73};
  const TriangulatedTree t = aggregate_tree({a, b});
  EXPECT_NEAR(t.mean_diameter, 0.675, 1e-12);
  EXPECT_EQ(t.n_pairs, 2);
  EXPECT_EQ(t.per_image_diameters.size(), 2u);
}

TEST(Diameter, TangentModeErrorBoundAndExactMode) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> r(0.05, 0.6), s(3.0, 25.0), az(0.0, 360.0);
  const PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 12, 0, 1);
  int done = 0;
  while (done < 300) {
    const double rr = r(rng), ss = s(rng), aa = oracle::rad(az(rng));
    const GeoPoint tree = local_to_geo({ss * std::sin(aa), ss * std::cos(aa), 0.0}, kAnchor);
    if (horizontal_distance(b.position, tree) < 3.0) continue;
    const StereoPair pair = make_stereo_pair(a, observe(a, tree, rr), b, observe(b, tree, rr));
    TriangulatedTree tan_t, exact_t;
    try {
      tan_t = measure_pair(pair, DiameterMode::Tangent);
      exact_t = measure_pair(pair, DiameterMode::ExactCylinder);
    } catch (const Error&) {
      continue;
    }
    ++done;
    const double dist_b = horizontal_distance(b.position, tree);
    ASSERT_LE(std::abs(tan_t.per_image_diameters[0] - 2 * rr) / (2 * rr), (rr / ss) * (rr / ss) + 1e-9);
    ASSERT_LE(std::abs(tan_t.per_image_diameters[1] - 2 * rr) / (2 * rr), (rr / dist_b) * (rr / dist_b) + 1e-9);
    ASSERT_GE(tan_t.diameter, 2 * rr);
    ASSERT_LT(std::abs(exact_t.diameter - 2 * rr) / (2 * rr), 1e-9);
  }
}

TEST(Diameter, ScaleEquivariance) {
  for (double k : {0.5, 2.0, 3.7}) {
    const PanoramaPose a = cam("a", 0, 0, 0), b = cam("b", 10 * k, 0, 1);
    const GeoPoint tree = local_to_geo({4 * k, 7 * k, 0.0}, kAnchor);
    const PanoramaPose a1 = cam("a", 0, 0, 0), b1 = cam("b", 10, 0, 1);
    const GeoPoint tree1 = local_to_geo({4, 7, 0.0}, kAnchor);
    const double d1 = measure_pair(make_stereo_pair(a1, observe(a1, tree1, 0.3), b1, observe(b1, tree1, 0.3)),
                                   DiameterMode::ExactCylinder)
                          .diameter;
    const double dk =
        measure_pair(make_stereo_pair(a, observe(a, tree, 0.3), b, observe(b, tree, 0.3)), DiameterMode::ExactCylinder)
            .diameter;
    EXPECT_NEAR(dk, d1, 1e-9 * d1);
  }
}

TEST(Diameter, InvalidAngularWidth) {
  TrunkObservation o;
  o.az_left = 10.0;
  o.az_right = 9.0;
  EXPECT_EQ(code_of([&] { validate(o); }), ErrorCode::InvalidObservation);
  o.az_left = 359.0;
  o.az_right = 1.0;
  EXPECT_NO_THROW(validate(o));
  EXPECT_DOUBLE_EQ(angular_width(o), 2.0);
}

TEST(AggregateTree, SingleEmptyAndMonteCarlo) {
  EXPECT_EQ(code_of([] { aggregate_tree({}); }), ErrorCode::NoMeasurement);
  TriangulatedTree one;
  one.diameter = one.mean_diameter = 0.4;
  EXPECT_DOUBLE_EQ(aggregate_tree({one}).mean_diameter, 0.4);

  std::mt19937_64 rng(34);
  std::normal_distribution<double> noise(0.0, 0.03);
  int within = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<TriangulatedTree> m(6);
    for (auto& t : m) {
      t.diameter = 0.5 + noise(rng);
      t.position = kAnchor;
    }
    within += std::abs(aggregate_tree(m).mean_diameter - 0.5) <= 0.03;
  }
  EXPECT_GE(within, 950);
}

TEST(AggregateTree, MedianPosition) {
  std::vector<TriangulatedTree> m(3);
  const double easts[] = {0.0, 0.4, 10.0};
  for (int i = 0; i < 3; ++i) {
    m[i].diameter = 0.5;
    m[i].position = local_to_geo({easts[i], 0.0, 0.0}, kAnchor);
    m[i].theta_c_min = 10.0 + i;
  }
  const TriangulatedTree t = aggregate_tree(m);
  EXPECT_NEAR(geo_to_local(t.position, kAnchor).east, 0.4, 1e-6);
  EXPECT_DOUBLE_EQ(t.theta_c_min, 10.0);
  EXPECT_EQ(t.n_pairs, 3);
}

}  // namespace
}  // namespace svim
