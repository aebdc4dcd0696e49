#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "svim/error.hpp"
#include "svim/synthetic.hpp"

namespace svim {
namespace {

const GeoPoint kAnchor{38.9, -77.0, 0.0};

PanoramaPose camera(double east = 0.0, double north = 0.0, double heading = 0.0) {
  PanoramaPose p;
  p.pano_id = "cam";
  p.position = local_to_geo({east, north, 0.0}, kAnchor);
  p.heading = heading;
  p.image_width = 16384;
  p.image_height = 8192;
  return p;
}

SceneSpec scene_with(std::vector<Ribbon> ribbons) {
  SceneSpec s;
  s.anchor = kAnchor;
  s.ribbons = std::move(ribbons);
  return s;
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

TEST(RenderLandcover, TenMetreRibbonIsFortyPixels) {
  const SceneSpec s = scene_with({Ribbon{{{0.0, -50.0}, {0.0, 50.0}}, 10.0, "road"}});
  const LandCoverRaster r = render_landcover(s, {0.25, 40.0, 20.0, 0.0});
  ASSERT_EQ(r.grid.width(), 160);
  ASSERT_EQ(r.grid.height(), 80);
  for (int row = 0; row < r.grid.height(); ++row) {
    int count = 0;
    for (int col = 0; col < r.grid.width(); ++col) count += r.grid(col, row) == 1;
    ASSERT_EQ(count, 40);
    ASSERT_EQ(r.grid(60, row), 1);
    ASSERT_EQ(r.grid(59, row), 0);
    ASSERT_EQ(r.grid(99, row), 1);
    ASSERT_EQ(r.grid(100, row), 0);
  }
}

TEST(RenderLandcover, LaterRibbonWins) {
  const SceneSpec s = scene_with({Ribbon{{{-20.0, 0.0}, {20.0, 0.0}}, 10.0, "road"},
                                  Ribbon{{{0.0, -20.0}, {0.0, 20.0}}, 2.0, "vehicle"}});
  const LandCoverRaster r = render_landcover(s, {0.5, 20.0, 20.0, 0.0});
  EXPECT_EQ(r.grid(20, 20), 2);  // crossing point
  EXPECT_EQ(r.grid(5, 20), 1);
  EXPECT_EQ(r.grid(5, 2), 0);
  EXPECT_EQ(r.center, kAnchor);
}

TEST(RenderLandcover, UnknownClassAndEmptyExtent) {
  const SceneSpec bad = scene_with({Ribbon{{{0.0, 0.0}, {1.0, 0.0}}, 1.0, "river"}});
  EXPECT_EQ(code_of([&] { render_landcover(bad, {0.25, 10.0, 10.0, 0.0}); }), ErrorCode::InvalidScene);
  const SceneSpec ok = scene_with({});
  EXPECT_EQ(code_of([&] { render_landcover(ok, {0.25, 0.0, 10.0, 0.0}); }), ErrorCode::InvalidScene);
}

TEST(RibbonContains, MatchesPolygonOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-20.0, 20.0), w(0.5, 12.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::array<double, 2> a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double width = w(rng);
    const Ribbon ribbon{{a, b}, width, "road"};
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double nx = (b[1] - a[1]) / len * width / 2, ny = -(b[0] - a[0]) / len * width / 2;
    const std::vector<std::array<double, 2>> quad{
        {a[0] + nx, a[1] + ny}, {b[0] + nx, b[1] + ny}, {b[0] - nx, b[1] - ny}, {a[0] - nx, a[1] - ny}};
    for (int i = 0; i < 400; ++i) {
      const double x = u(rng), y = u(rng);
      ASSERT_EQ(ribbon_contains(ribbon, x, y), oracle::point_in_polygon(quad, x, y)) << x << "," << y;
    }
  }
}

TEST(ProjectBillboard, SymmetricCase) {
  const PanoramaPose p = camera();
  const Billboard b{local_to_geo({0.0, 1.0, 0.0}, p.position), 1.5, 2.0, 0.5, "stop_sign"};
  const BillboardProjection proj = project_billboard(p, b);
  EXPECT_NEAR(proj.theta_top, 45.0, 1e-7);
  EXPECT_NEAR(proj.theta_bottom, -45.0, 1e-7);
  EXPECT_NEAR(proj.d_hor, 1.0, 1e-9);
  EXPECT_NEAR(proj.h_b, -1.0, 1e-12);
  EXPECT_NEAR(proj.azimuth, 0.0, 1e-9);
  // 45 degrees above and below the horizon fall on rows 2047.5 and 6143.5.
  EXPECT_NEAR(proj.box.row_min, 2047.5, 0.5);
  EXPECT_NEAR(proj.box.row_max, 6143.5, 0.5);
}

TEST(ProjectBillboard, WorkedStopSign) {
  const PanoramaPose p = camera();
  const Billboard b{local_to_geo({10.0, 0.0, 0.0}, p.position), 2.13, 0.75, 0.75, "stop_sign"};
  const BillboardProjection proj = project_billboard(p, b);
  EXPECT_NEAR(proj.theta_top, 2.1761925505253368, 1e-6);
  EXPECT_NEAR(proj.theta_bottom, -2.118977234791166, 1e-6);
  EXPECT_NEAR(proj.azimuth, 90.0, 1e-9);
}

TEST(ProjectBillboard, SignAtHeadingIsCentred) {
  for (double heading : {0.0, 37.0, 200.0}) {
    const PanoramaPose p = camera(0, 0, heading);
    const double az = oracle::rad(heading);
    const Billboard b{local_to_geo({8 * std::sin(az), 8 * std::cos(az), 0.0}, p.position), 2.0, 0.75, 0.75, "s"};
    const BillboardProjection proj = project_billboard(p, b);
    EXPECT_NEAR(0.5 * (proj.box.col_min + proj.box.col_max), 16384 / 2.0 - 0.5, 1.0);
    EXPECT_LT(proj.box.col_min, proj.box.col_max);
  }
}

TEST(ProjectBillboard, ThumbnailVisibility) {
  const PanoramaPose p = camera();
  const Billboard ahead{local_to_geo({0.0, 8.0, 0.0}, p.position), 2.0, 0.75, 0.75, "s"};
  const ThumbnailSpec front{"cam", 0.0, 0.0, 90.0, 640, 640};
  const ThumbnailSpec back{"cam", 180.0, 0.0, 90.0, 640, 640};
  const BillboardProjection proj = project_billboard(p, ahead, front);
  EXPECT_NEAR(0.5 * (proj.box.col_min + proj.box.col_max), 319.5, 1.0);
  EXPECT_EQ(code_of([&] { project_billboard(p, ahead, back); }), ErrorCode::NotVisible);
  const Billboard on_camera{p.position, 2.0, 0.75, 0.75, "s"};
  EXPECT_EQ(code_of([&] { project_billboard(p, on_camera); }), ErrorCode::NotVisible);
}

TEST(ProjectCylinder, SouthFacingSymmetryAndOracle) {
  const PanoramaPose p = camera();
  const Cylinder c{local_to_geo({0.0, -10.0, 0.0}, p.position), 0.4, 8.0};
  const CylinderProjection proj = project_cylinder(p, c, 1.3);
  EXPECT_NEAR(proj.az_center, 180.0, 1e-9);
  EXPECT_NEAR(proj.az_center - proj.az_left, proj.az_right - proj.az_center, 1e-9);
  EXPECT_NEAR(proj.half_angle, oracle::deg(std::asin(0.04)), 1e-9);
  EXPECT_NEAR(proj.depth, 10.0, 1e-6);
  EXPECT_NEAR(proj.altitude, oracle::deg(std::atan2(1.3 - 2.5, 10.0)), 1e-6);
  const auto t = oracle::tangent_azimuths(0.0, -10.0, 0.4);
  EXPECT_NEAR(std::min(normalize_deg(t[0]), normalize_deg(t[1])), proj.az_left, 1e-9);
  EXPECT_NEAR(std::max(normalize_deg(t[0]), normalize_deg(t[1])), proj.az_right, 1e-9);
}

TEST(ProjectCylinder, VanishingRadiusAndInside) {
  const PanoramaPose p = camera();
  double prev = 1e9;
  for (double r : {0.5, 0.05, 0.005, 1e-6}) {
    const CylinderProjection proj = project_cylinder(p, Cylinder{local_to_geo({3.0, 4.0, 0.0}, p.position), r, 5.0}, 1.3);
    EXPECT_LT(proj.half_angle, prev);
    prev = proj.half_angle;
  }
  EXPECT_LT(prev, 1e-4);
  EXPECT_EQ(code_of([&] { project_cylinder(p, Cylinder{local_to_geo({0.1, 0.0, 0.0}, p.position), 0.3, 5.0}, 1.3); }),
            ErrorCode::InvalidScene);
}

TEST(Perturber, ZeroSigmaIsIdentity) {
  Perturber pert(NoiseSpec{}, 7);
  TrunkObservation o;
  o.az_left = 10.1;
  o.az_right = 12.3;
  o.az_center = 11.2;
  o.depth_m = 5.5;
  const TrunkObservation q = perturb(o, pert);
  EXPECT_EQ(q.az_left, o.az_left);
  EXPECT_EQ(q.az_right, o.az_right);
  EXPECT_EQ(q.az_center, o.az_center);
  EXPECT_EQ(q.depth_m, o.depth_m);
  const PanoramaPose pose = camera(3, 4);
  EXPECT_EQ(perturb(pose, pert).position, pose.position);
}

TEST(Perturber, SameSeedSameDraws) {
  const NoiseSpec noise{0.1, 0.5, 1.0};
  Perturber a(noise, 99), b(noise, 99), c(noise, 100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.angle(10.0);
    ASSERT_EQ(x, b.angle(10.0));
    differs = differs || x != c.angle(10.0);
    ASSERT_EQ(a.position(kAnchor), b.position(kAnchor));
    c.position(kAnchor);
  }
  EXPECT_TRUE(differs);
}

TEST(Perturber, MomentsMatchSigma) {
  Perturber pert(NoiseSpec{0.05, 0.0, 1.0}, 5);
  constexpr int kDraws = 100000;
  for (const auto& [sigma, fn] : std::vector<std::pair<double, std::function<double()>>>{
           {0.05, [&] { return pert.angle(0.0); }}, {1.0, [&] { return pert.depth(0.0); }}}) {
    double sum = 0, sq = 0;
    for (int i = 0; i < kDraws; ++i) {
      const double x = fn();
      sum += x;
      sq += x * x;
    }
    const double mean = sum / kDraws;
    const double sd = std::sqrt(sq / kDraws - mean * mean);
    EXPECT_LT(std::abs(mean), 0.02 * sigma);
    EXPECT_NEAR(sd, sigma, 0.02 * sigma);
  }
}

TEST(SynthesizeTrunkObservations, EdgesInsideThumbnails) {
  SceneSpec s = scene_with({});
  PanoramaPose a = camera(0, 0, 90.0), b = camera(10, 0, 90.0);
  a.pano_id = "a";
  b.pano_id = "b";
  b.seq_index = 1;
  s.cameras = {a, b};
  s.cylinders = {Cylinder{local_to_geo({5.0, -6.0, 0.0}, kAnchor), 0.3, 8.0},
                 Cylinder{local_to_geo({2.0, 8.0, 0.0}, kAnchor), 0.2, 8.0}};
  const auto obs = synthesize_trunk_observations(s);
  ASSERT_FALSE(obs.empty());
  for (const auto& o : obs) {
    const PanoramaPose& cam = o.observation.pano_id == "a" ? a : b;
    const CylinderProjection p = project_cylinder(cam, s.cylinders[o.cylinder_index], s.measure_height_m);
    EXPECT_DOUBLE_EQ(o.observation.az_left, p.az_left);
    EXPECT_DOUBLE_EQ(*o.observation.depth_m, p.depth);
    EXPECT_TRUE(angles_to_thumb_pixel(cam, o.observation.thumbnail, {p.az_left, p.altitude}).has_value());
    EXPECT_TRUE(angles_to_thumb_pixel(cam, o.observation.thumbnail, {p.az_right, p.altitude}).has_value());
  }
  // Thumbnails overlap by 45 degrees, so a trunk may appear in two of them.
  EXPECT_GE(obs.size(), 4u);
}

TEST(SynthesizeDetections, EveryVisibleBillboard) {
  SceneSpec s = scene_with({});
  s.cameras = {camera(0, 0, 0.0)};
  s.billboards = {Billboard{local_to_geo({0.0, 8.0, 0.0}, kAnchor), 2.0, 0.75, 0.75, "stop_sign"},
                  Billboard{local_to_geo({-6.0, -6.0, 0.0}, kAnchor), 2.0, 0.75, 0.75, "stop_sign"}};
  const auto det = synthesize_detections(s);
  ASSERT_EQ(det.size(), 2u);
  EXPECT_EQ(det[1].billboard_index, 1u);
  EXPECT_EQ(det[0].detection.box, project_billboard(s.cameras[0], s.billboards[0]).box);
}

TEST(SceneSpec, ValidationRejectsBadScenes) {
  SceneSpec s = scene_with({Ribbon{{{0.0, 0.0}}, 1.0, "road"}});
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::InvalidScene);
  s = scene_with({});
  s.cylinders = {Cylinder{kAnchor, 0.0, 1.0}};
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::InvalidScene);
  s = scene_with({});
  s.noise.depth_m_sigma = -1.0;
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::InvalidScene);
  s = scene_with({});
  s.anchor.lat = 95.0;
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::InvalidCoordinate);
}

}  // namespace
}  // namespace svim
