#include "svim/tacheometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "svim/error.hpp"

namespace svim {

const char* to_string(LocateMethod method) noexcept {
  switch (method) {
    case LocateMethod::Tacheometry: return "tacheometry";
    case LocateMethod::Triangulation: return "triangulation";
    case LocateMethod::Depth: return "depth";
  }
  return "unknown";
}

DimensionRegistry::DimensionRegistry() : heights_{{"stop_sign", 0.75}} {}

DimensionRegistry::DimensionRegistry(std::map<std::string, double> heights) {
  for (const auto& [name, h] : heights) set(name, h);
}

void DimensionRegistry::set(const std::string& class_name, double height_m) {
  if (!(height_m > 0.0) || !std::isfinite(height_m)) {
    throw Error(ErrorCode::Config, "known height for '" + class_name + "' must be positive");
  }
  heights_[class_name] = height_m;
}

double DimensionRegistry::height(const std::string& class_name) const {
  const auto it = heights_.find(class_name);
  if (it == heights_.end()) {
    throw Error(ErrorCode::Config, "class '" + class_name + "' has no known dimension");
  }
  return it->second;
}

namespace {

constexpr double kPoleMarginDeg = 1e-6;

double distance_from_angles(double top_deg, double bottom_deg, double object_height) {
  const double t = deg2rad(top_deg);
  const double b = deg2rad(bottom_deg);
  return object_height * std::cos(t) * std::cos(b) / std::sin(t - b);
}

}  // namespace

TachResult tacheometric_distance(const TachInput& in, double min_angular_height_deg) {
  if (!(in.object_height > 0.0)) {
    throw Error(ErrorCode::Config, "object height must be positive");
  }
  if (std::abs(in.theta_top) >= 90.0 - kPoleMarginDeg ||
      std::abs(in.theta_bottom) >= 90.0 - kPoleMarginDeg) {
    throw Error(ErrorCode::Pole, "edge altitude at or beyond +/-90 degrees");
  }
  if (!(in.theta_top - in.theta_bottom >= min_angular_height_deg)) {
    throw Error(ErrorCode::DegenerateObject, "angular height " +
                                                 std::to_string(in.theta_top - in.theta_bottom) +
                                                 " deg below threshold (object at infinity)");
  }
  TachResult r;
  r.d_hor = distance_from_angles(in.theta_top, in.theta_bottom, in.object_height);
  r.h_b = std::tan(deg2rad(in.theta_bottom)) * r.d_hor;
  return r;
}

double distance_uncertainty(const TachInput& in, double angle_error_deg) {
  // d = h / (tan t - tan b): decreasing in t, increasing in b.
  const double d0 = distance_from_angles(in.theta_top, in.theta_bottom, in.object_height);
  const double t_lo = std::max(in.theta_top - angle_error_deg, -90.0 + kPoleMarginDeg);
  const double b_hi = std::min(in.theta_bottom + angle_error_deg, 90.0 - kPoleMarginDeg);
  if (t_lo <= b_hi) return std::numeric_limits<double>::infinity();
  const double t_hi = std::min(in.theta_top + angle_error_deg, 90.0 - kPoleMarginDeg);
  const double b_lo = std::max(in.theta_bottom - angle_error_deg, -90.0 + kPoleMarginDeg);
  const double d_far = distance_from_angles(t_lo, b_hi, in.object_height);
  const double d_near = distance_from_angles(t_hi, b_lo, in.object_height);
  return std::max(d_far - d0, d0 - d_near);
}

LocatedObject place_object(const PanoramaPose& pose, double d_hor, double h_b, double azimuth) {
  if (!(d_hor > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "horizontal distance must be positive");
  const double az = deg2rad(azimuth);
  const LocalPoint local{d_hor * std::sin(az), d_hor * std::cos(az), pose.camera_height + h_b};
  LocatedObject obj;
  obj.position = local_to_geo(local, pose.position);
  obj.d_hor = d_hor;
  obj.h_b = h_b;
  obj.azimuth = normalize_deg(azimuth);
  obj.source_pano = pose.pano_id;
  obj.bottom_above_ground = pose.camera_height + h_b;
  return obj;
}

LocatedObject localize_detection(const PanoramaPose& pose, const Detection& detection,
                                 const DimensionRegistry& registry, double min_angular_height_deg) {
  const double h_o = registry.height(detection.class_name);
  const AngularExtents ext = box_to_angular_extents(pose, detection.image, detection.box);
  const TachInput in{ext.theta_top, ext.theta_bottom, h_o};
  const TachResult r = tacheometric_distance(in, min_angular_height_deg);
  LocatedObject obj = place_object(pose, r.d_hor, r.h_b, ext.az_center);
  obj.class_name = detection.class_name;
  obj.method = LocateMethod::Tacheometry;
  obj.d_hor_uncertainty = distance_uncertainty(in, vertical_pixel_angle(pose, detection.image));
  return obj;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::NoMeasurement, "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<LocatedObject> merge_observations(const std::vector<LocatedObject>& objects,
                                              double radius_m) {
  if (!(radius_m > 0.0)) throw Error(ErrorCode::Config, "merge radius must be positive");
  const std::size_t n = objects.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (objects[i].class_name != objects[j].class_name) continue;
      if (horizontal_distance(objects[i].position, objects[j].position) <= radius_m) {
        const std::size_t a = find(i);
        const std::size_t b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Clusters are emitted in order of their first member.
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[root])].push_back(i);
  }

  std::vector<LocatedObject> merged;
  merged.reserve(clusters.size());
  for (const auto& members : clusters) {
    std::vector<double> lat, lon, alt, d, hb, az, unc, above;
    int count = 0;
    for (std::size_t i : members) {
      const LocatedObject& o = objects[i];
      lat.push_back(o.position.lat);
      lon.push_back(o.position.lon);
      alt.push_back(o.position.alt);
      d.push_back(o.d_hor);
      hb.push_back(o.h_b);
      unc.push_back(o.d_hor_uncertainty);
      above.push_back(o.bottom_above_ground);
      count += o.n_observations;
    }
    LocatedObject out = objects[members.front()];
    out.position = GeoPoint{median(lat), median(lon), median(alt)};
    out.d_hor = median(d);
    out.h_b = median(hb);
    out.d_hor_uncertainty = median(unc);
    out.bottom_above_ground = median(above);
    out.n_observations = count;
    merged.push_back(std::move(out));
  }
  return merged;
}

}  // namespace svim
