#include "svim/geo.hpp"

#include <cmath>

#include "svim/error.hpp"

namespace svim {

double normalize_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value can round up to exactly 360.
  return r >= 360.0 ? 0.0 : r;
}

double wrap180(double deg) {
  double r = normalize_deg(deg + 180.0) - 180.0;
  return r;
}

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || !std::isfinite(p.alt)) {
    throw Error(ErrorCode::InvalidCoordinate, "non-finite coordinate");
  }
  if (p.lat < -90.0 || p.lat > 90.0) {
    throw Error(ErrorCode::InvalidCoordinate, "latitude " + std::to_string(p.lat) + " out of [-90, 90]");
  }
  if (p.lon < -180.0 || p.lon > 180.0) {
    throw Error(ErrorCode::InvalidCoordinate, "longitude " + std::to_string(p.lon) + " out of [-180, 180]");
  }
}

double meters_per_degree_lat() { return kEarthRadiusM * kPi / 180.0; }

double meters_per_degree_lon(double lat_deg) {
  return meters_per_degree_lat() * std::cos(deg2rad(lat_deg));
}

LocalPoint geo_to_local(const GeoPoint& p, const GeoPoint& anchor) {
  validate(p);
  validate(anchor);
  const double dlon = wrap180(p.lon - anchor.lon);
  return LocalPoint{dlon * meters_per_degree_lon(anchor.lat),
                    (p.lat - anchor.lat) * meters_per_degree_lat(), p.alt - anchor.alt};
}

GeoPoint local_to_geo(const LocalPoint& p, const GeoPoint& anchor) {
  if (!std::isfinite(p.east) || !std::isfinite(p.north) || !std::isfinite(p.up)) {
    throw Error(ErrorCode::InvalidCoordinate, "non-finite local offset");
  }
  validate(anchor);
  const double mlon = meters_per_degree_lon(anchor.lat);
  if (mlon <= 0.0) throw Error(ErrorCode::InvalidCoordinate, "anchor at a pole");
  GeoPoint g;
  g.lat = anchor.lat + p.north / meters_per_degree_lat();
  g.lon = wrap180(anchor.lon + p.east / mlon);
  g.alt = anchor.alt + p.up;
  return g;
}

double bearing_between(const GeoPoint& a, const GeoPoint& b) {
  const LocalPoint d = geo_to_local(b, a);
  if (std::hypot(d.east, d.north) < 1e-9) {
    throw Error(ErrorCode::DegenerateGeometry, "bearing between coincident points");
  }
  return normalize_deg(rad2deg(std::atan2(d.east, d.north)));
}

double horizontal_distance(const GeoPoint& a, const GeoPoint& b) {
  const LocalPoint d = geo_to_local(b, a);
  return std::hypot(d.east, d.north);
}

}  // namespace svim
