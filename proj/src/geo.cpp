#include "bridgegraph/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgegraph {
namespace {

constexpr double kA = 6378137.0;              // GRS80 semi-major axis
constexpr double kF = 1.0 / 298.257222101;    // GRS80 flattening
constexpr double kDeg2Rad = M_PI / 180.0;
constexpr double kRad2Deg = 180.0 / M_PI;
constexpr double kLonDomainDeg = 4.0;

const double kE2 = kF * (2.0 - kF);
const double kE = std::sqrt(kE2);

double hyp(double x) { return std::sqrt(1.0 + x * x); }

// tau' = conformal-latitude tangent from geodetic tangent tau.
double taupf(double tau) {
  const double t = tau / hyp(tau);
  const double sigma = std::sinh(kE * std::atanh(kE * t));
  return tau * hyp(sigma) - sigma * hyp(tau);
}

// Invert taupf by Newton iteration; converges in a handful of steps.
double tauf(double taup) {
  const double e2m = 1.0 - kE2;
  double tau = taup / e2m;
  const double stol = 1e-14 * std::max(1.0, std::fabs(taup));
  for (int i = 0; i < 8; ++i) {
    const double taupa = taupf(tau);
    const double dtau =
        (taup - taupa) * (1.0 + e2m * tau * tau) / (e2m * hyp(tau) * hyp(taupa));
    tau += dtau;
    if (std::fabs(dtau) < stol) break;
  }
  return tau;
}

}  // namespace

TransverseMercator::TransverseMercator(const ProjectionParams& params) : p_(params) {
  const double n = kF / (2.0 - kF);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;

  rect_radius_ = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);

  alpha_[1] = n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 +
              7891 * n6 / 37800;
  alpha_[2] = 13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 -
              1983433 * n6 / 1935360;
  alpha_[3] = 61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440;
  alpha_[4] = 49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600;
  alpha_[5] = 34729 * n5 / 80640 - 3418889 * n6 / 1995840;
  alpha_[6] = 212378941 * n6 / 319334400;

  beta_[1] = n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 +
             96199 * n6 / 604800;
  beta_[2] = n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 -
             1118711 * n6 / 3870720;
  beta_[3] = 17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720;
  beta_[4] = 4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600;
  beta_[5] = 4583 * n5 / 161280 - 108847 * n6 / 3991680;
  beta_[6] = 20648693 * n6 / 638668800;

  m0_ = rect_radius_ * xi_of_phi(p_.lat0 * kDeg2Rad);
}

double TransverseMercator::xi_of_phi(double phi) const {
  const double taup = taupf(std::tan(phi));
  const double xi_prime = std::atan(taup);
  double xi = xi_prime;
  for (int j = 1; j <= 6; ++j) xi += alpha_[j] * std::sin(2.0 * j * xi_prime);
  return xi;
}

PlanarCoord TransverseMercator::project(const GeoCoord& g) const {
  double dlon = g.lon - p_.lon0;
  if (std::fabs(dlon) > kLonDomainDeg) {
    throw std::domain_error("longitude out of projection domain");
  }
  const double phi = g.lat * kDeg2Rad;
  const double lam = dlon * kDeg2Rad;

  const double taup = taupf(std::tan(phi));
  const double coslam = std::cos(lam);
  const double xi_p = std::atan2(taup, coslam);
  const double eta_p = std::asinh(std::sin(lam) / std::hypot(taup, coslam));

  double xi = xi_p, eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    xi += alpha_[j] * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
    eta += alpha_[j] * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
  }

  PlanarCoord out;
  out.x = p_.false_easting + p_.k0 * rect_radius_ * eta;
  out.y = p_.false_northing + p_.k0 * (rect_radius_ * xi - m0_);
  return out;
}

GeoCoord TransverseMercator::inverse(const PlanarCoord& p) const {
  const double xi = ((p.y - p_.false_northing) / p_.k0 + m0_) / rect_radius_;
  const double eta = (p.x - p_.false_easting) / (p_.k0 * rect_radius_);

  double xi_p = xi, eta_p = eta;
  for (int j = 1; j <= 6; ++j) {
    xi_p -= beta_[j] * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    eta_p -= beta_[j] * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  const double sh = std::sinh(eta_p);
  const double cx = std::cos(xi_p);
  const double taup = std::sin(xi_p) / std::sqrt(sh * sh + cx * cx);
  const double tau = tauf(taup);

  GeoCoord g;
  g.lat = std::atan(tau) * kRad2Deg;
  g.lon = p_.lon0 + std::atan2(sh, cx) * kRad2Deg;
  return g;
}

}  // namespace bridgegraph
