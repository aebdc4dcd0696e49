#include "svim/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "svim/error.hpp"
#include "svim/tacheometry.hpp"

namespace svim {

double angular_width(const TrunkObservation& obs) { return wrap180(obs.az_right - obs.az_left); }

void validate(const TrunkObservation& obs) {
  const double w = angular_width(obs);
  if (!(w > 0.0 && w < 90.0)) {
    throw Error(ErrorCode::InvalidObservation,
                "trunk angular width " + std::to_string(w) + " deg not in (0, 90)");
  }
}

std::array<ThumbnailSpec, 6> plan_thumbnails(const PanoramaPose& pose, const ThumbnailLayout& layout) {
  static constexpr std::array<double, 6> kOffsets{45.0, 90.0, 135.0, -45.0, -90.0, -135.0};
  std::array<ThumbnailSpec, 6> specs;
  for (std::size_t i = 0; i < kOffsets.size(); ++i) {
    specs[i] = ThumbnailSpec{pose.pano_id, kOffsets[i], layout.pitch, layout.hfov, layout.width,
                             layout.height};
    validate(specs[i]);
  }
  return specs;
}

bool adjacent(const PanoramaPose& a, const PanoramaPose& b) {
  return a.sequence_id == b.sequence_id && std::abs(a.seq_index - b.seq_index) == 1;
}

std::vector<ThumbnailPair> candidate_pairs(const PanoramaPose& a, const PanoramaPose& b,
                                           const ThumbnailLayout& layout) {
  if (!adjacent(a, b)) {
    throw Error(ErrorCode::PairingRejected,
                "panoramas '" + a.pano_id + "' and '" + b.pano_id + "' are not adjacent");
  }
  const PanoramaPose& rear = a.seq_index < b.seq_index ? a : b;
  const PanoramaPose& forward = a.seq_index < b.seq_index ? b : a;
  const auto rear_specs = plan_thumbnails(rear, layout);
  const auto fwd_specs = plan_thumbnails(forward, layout);
  std::vector<ThumbnailPair> pairs;
  // Index 2 and 5 hold the trailing +/-135 thumbnails.
  for (std::size_t i = 0; i < 3; ++i) pairs.push_back({"right", rear_specs[i], fwd_specs[2]});
  for (std::size_t i = 3; i < 6; ++i) pairs.push_back({"left", rear_specs[i], fwd_specs[5]});
  return pairs;
}

GeoPoint locate_from_depth(const TrunkObservation& obs, const PanoramaPose& pose) {
  if (!obs.depth_m) throw Error(ErrorCode::InvalidDepth, "observation has no depth");
  const double depth = *obs.depth_m;
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw Error(ErrorCode::InvalidDepth, "depth must be positive, got " + std::to_string(depth));
  }
  const double az = deg2rad(obs.az_center);
  return local_to_geo(LocalPoint{depth * std::sin(az), depth * std::cos(az), 0.0}, pose.position);
}

bool match_by_depth(const TrunkObservation& a, const TrunkObservation& b, double max_dist_m) {
  if (!a.coarse_position || !b.coarse_position) return false;
  return horizontal_distance(*a.coarse_position, *b.coarse_position) <= max_dist_m;
}

std::vector<std::pair<std::size_t, std::size_t>> match_observations(
    const std::vector<TrunkObservation>& a, const std::vector<TrunkObservation>& b, double max_dist_m) {
  struct Candidate {
    double dist;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].coarse_position) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!b[j].coarse_position) continue;
      const double d = horizontal_distance(*a[i].coarse_position, *b[j].coarse_position);
      if (d <= max_dist_m) candidates.push_back({d, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.dist, x.i, x.j) < std::tie(y.dist, y.i, y.j);
  });
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Candidate& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    out.emplace_back(c.i, c.j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StereoPair make_stereo_pair(const PanoramaPose& pose_a, const TrunkObservation& obs_a,
                            const PanoramaPose& pose_b, const TrunkObservation& obs_b) {
  if (pose_a.pano_id == pose_b.pano_id) {
    throw Error(ErrorCode::PairingRejected, "stereo pair needs two panoramas");
  }
  StereoPair pair{pose_a, pose_b, obs_a, obs_b, 0.0, 0.0};
  pair.baseline = horizontal_distance(pose_a.position, pose_b.position);
  if (!(pair.baseline > kMinBaselineM)) {
    throw Error(ErrorCode::PairingRejected,
                "baseline " + std::to_string(pair.baseline) + " m is too short");
  }
  pair.baseline_bearing = bearing_between(pose_a.position, pose_b.position);
  return pair;
}

BaselineApex triangle_apex(double s_c, double theta_a_deg, double theta_b_deg, int side) {
  BaselineApex apex;
  apex.theta_c = 180.0 - theta_a_deg - theta_b_deg;
  const double sin_c = std::sin(deg2rad(apex.theta_c));
  apex.s_b = s_c * std::sin(deg2rad(theta_b_deg)) / sin_c;
  apex.s_a = s_c * std::sin(deg2rad(theta_a_deg)) / sin_c;
  apex.x = apex.s_b * std::cos(deg2rad(theta_a_deg));
  apex.y = (side >= 0 ? 1.0 : -1.0) * apex.s_b * std::sin(deg2rad(theta_a_deg));
  return apex;
}

TriangulatedTree triangulate(const StereoPair& pair, double min_theta_c_deg) {
  // Everything is solved in A's local plane. B's plane differs from it only by an
  // east scale factor, so B's azimuth is carried over exactly.
  const double east_scale = meters_per_degree_lon(pair.pose_a.position.lat) /
                            meters_per_degree_lon(pair.pose_b.position.lat);
  const double az_b_rad = deg2rad(pair.obs_b.az_center);
  const double az_b = rad2deg(std::atan2(std::sin(az_b_rad) * east_scale, std::cos(az_b_rad)));
  // Compass-signed ray offsets from the baseline; opposite signs mean the rays meet.
  const double delta_a = wrap180(pair.obs_a.az_center - pair.baseline_bearing);
  const double delta_b = wrap180(az_b - (pair.baseline_bearing + 180.0));
  const double theta_a = std::abs(delta_a);
  const double theta_b = std::abs(delta_b);
  const bool opposite = (delta_a < 0.0 && delta_b > 0.0) || (delta_a > 0.0 && delta_b < 0.0);
  const bool on_baseline = delta_a == 0.0 || delta_b == 0.0;
  if ((!opposite && !on_baseline) || theta_a + theta_b >= 180.0) {
    throw Error(ErrorCode::DivergentRays, "rays from '" + pair.pose_a.pano_id + "' and '" +
                                              pair.pose_b.pano_id + "' do not intersect in front");
  }
  const double theta_c = 180.0 - theta_a - theta_b;
  if (theta_c < min_theta_c_deg || theta_c > 180.0 - min_theta_c_deg) {
    throw Error(ErrorCode::IllConditioned,
                "apex angle " + std::to_string(theta_c) + " deg is ill-conditioned");
  }
  // A counter-clockwise (negative compass) ray offset at A places C at +y.
  const int side = delta_a < 0.0 ? 1 : (delta_a > 0.0 ? -1 : (delta_b > 0.0 ? 1 : -1));
  const BaselineApex apex = triangle_apex(pair.baseline, theta_a, theta_b, side);

  const double beta = deg2rad(pair.baseline_bearing);
  const double east = apex.x * std::sin(beta) - apex.y * std::cos(beta);
  const double north = apex.x * std::cos(beta) + apex.y * std::sin(beta);

  TriangulatedTree tree;
  tree.position = local_to_geo(LocalPoint{east, north, 0.0}, pair.pose_a.position);
  tree.s_a = apex.s_a;
  tree.s_b = apex.s_b;
  tree.s_c = pair.baseline;
  tree.theta_a = theta_a;
  tree.theta_b = theta_b;
  tree.theta_c = theta_c;
  tree.theta_c_min = theta_c;
  return tree;
}

double diameter_from_angle(double theta_deg, double distance_m, DiameterMode mode) {
  if (!(theta_deg > 0.0)) {
    throw Error(ErrorCode::InvalidObservation, "angular size must be positive");
  }
  const double half = deg2rad(theta_deg / 2.0);
  return mode == DiameterMode::Tangent ? 2.0 * distance_m * std::tan(half)
                                       : 2.0 * distance_m * std::sin(half);
}

PairDiameter diameter_from_pair(const StereoPair& pair, const TriangulatedTree& tri, DiameterMode mode) {
  PairDiameter d;
  // Each camera's distance to C is taken in that camera's own local plane.
  d.diameter_a = diameter_from_angle(angular_width(pair.obs_a),
                                     horizontal_distance(pair.pose_a.position, tri.position), mode);
  d.diameter_b = diameter_from_angle(angular_width(pair.obs_b),
                                     horizontal_distance(pair.pose_b.position, tri.position), mode);
  d.mean = 0.5 * (d.diameter_a + d.diameter_b);
  return d;
}

TriangulatedTree measure_pair(const StereoPair& pair, DiameterMode mode, double min_theta_c_deg) {
  validate(pair.obs_a);
  validate(pair.obs_b);
  TriangulatedTree tree = triangulate(pair, min_theta_c_deg);
  const PairDiameter d = diameter_from_pair(pair, tree, mode);
  tree.diameter = d.mean;
  tree.per_image_diameters = {d.diameter_a, d.diameter_b};
  tree.mean_diameter = d.mean;
  tree.n_pairs = 1;
  return tree;
}

TriangulatedTree aggregate_tree(const std::vector<TriangulatedTree>& measurements) {
  if (measurements.empty()) throw Error(ErrorCode::NoMeasurement, "no pair measurements for tree");
  if (measurements.size() == 1) return measurements.front();
  std::vector<double> lat, lon, alt;
  TriangulatedTree out = measurements.front();
  out.per_image_diameters.clear();
  double sum = 0.0;
  int pairs = 0;
  for (const auto& m : measurements) {
    lat.push_back(m.position.lat);
    lon.push_back(m.position.lon);
    alt.push_back(m.position.alt);
    out.per_image_diameters.insert(out.per_image_diameters.end(), m.per_image_diameters.begin(),
                                   m.per_image_diameters.end());
    sum += m.diameter;
    pairs += m.n_pairs;
    out.theta_c_min = std::min(out.theta_c_min, m.theta_c_min);
  }
  out.position = GeoPoint{median(lat), median(lon), median(alt)};
  out.mean_diameter = sum / static_cast<double>(measurements.size());
  out.diameter = out.mean_diameter;
  out.n_pairs = pairs;
  return out;
}

}  // namespace svim
