#pragma once

#include <cmath>

namespace bridgegraph {

struct GeoCoord {
  double lat = 0.0;  // degrees, WGS84/GRS80
  double lon = 0.0;
};

struct PlanarCoord {
  double x = 0.0;  // meters east
  double y = 0.0;  // meters north
};

inline double planar_distance(PlanarCoord a, PlanarCoord b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double planar_distance_sq(PlanarCoord a, PlanarCoord b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct ProjectionParams {
  // Defaults match a Japan plane rectangular zone IX setup.
  double lat0 = 36.0;
  double lon0 = 139.0 + 50.0 / 60.0;
  double k0 = 0.9999;
  double false_easting = 0.0;
  double false_northing = 0.0;
};

// Gauss-Krueger transverse Mercator on GRS80 with 6th-order series
// coefficients. Accurate to well below a millimeter within a few degrees of
// the central meridian; project() refuses input beyond 4 degrees of it.
class TransverseMercator {
 public:
  explicit TransverseMercator(const ProjectionParams& params = {});

  // Throws std::domain_error when |lon - lon0| > 4 degrees.
  PlanarCoord project(const GeoCoord& g) const;
  GeoCoord inverse(const PlanarCoord& p) const;

  const ProjectionParams& params() const { return p_; }

 private:
  ProjectionParams p_;
  double rect_radius_ = 0.0;  // rectifying radius A
  double m0_ = 0.0;           // meridian arc at lat0
  double alpha_[7] = {0};     // forward series, 1-based
  double beta_[7] = {0};      // inverse series, 1-based

  double xi_of_phi(double phi) const;  // series latitude on the central meridian
};

}  // namespace bridgegraph
