#include "lifi/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

// Placement rule for a handheld UE relative to the user.
constexpr double kChestOffset = 0.35;     // m in front of the chest
constexpr double kUeHeightWalking = 1.4;  // m
constexpr double kUeHeightSitting = 0.9;  // m
constexpr double kBodyHeightWalking = 1.75;
constexpr double kBodyHeightSitting = 1.25;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;  // (-pi, pi]
}

}  // namespace

std::string to_string(Activity a) {
  return a == Activity::sitting ? "sitting" : "walking";
}

Activity activity_from_string(const std::string& s) {
  if (s == "sitting") return Activity::sitting;
  if (s == "walking") return Activity::walking;
  throw std::invalid_argument("unknown activity: " + s);
}

double activity_mean_polar_deg(Activity a) {
  return a == Activity::sitting ? 41.13 : 27.75;
}

void Room::validate() const {
  if (length <= 0.0 || width <= 0.0 || height <= 0.0)
    throw std::invalid_argument("room dimensions must be positive");
  for (double rho : {rho_wall, rho_ceiling, rho_floor})
    if (rho < 0.0 || rho > 1.0)
      throw std::invalid_argument("room reflectivity outside [0, 1]");
}

bool Room::contains(const Vec3& p, double tol) const {
  return contains_xy({p.x(), p.y()}, tol) && p.z() >= -tol && p.z() <= height + tol;
}

bool Room::contains_xy(const Vec2& p, double tol) const {
  return std::abs(p.x()) <= 0.5 * length + tol && std::abs(p.y()) <= 0.5 * width + tol;
}

void AccessPoint::validate() const {
  if (lambertian_m < 1.0)
    throw std::invalid_argument("Lambertian index must be >= 1");
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("AP normal must be a unit vector");
}

std::array<Vec2, 4> BodyPrism::footprint() const {
  const Vec2 f = facing();
  const Vec2 l = lateral();
  return {anchor, anchor + length * l, anchor + length * l - width * f, anchor - width * f};
}

void BodyPrism::validate() const {
  if (length <= 0.0 || width <= 0.0 || height <= 0.0)
    throw std::invalid_argument("body dimensions must be positive");
  for (double rho : {rho_body, rho_hair})
    if (rho < 0.0 || rho > 1.0)
      throw std::invalid_argument("body reflectivity outside [0, 1]");
}

Vec3 UePose::normal() const { return orientation_to_normal(polar, azimuth); }

void UePose::validate() const {
  if (polar < 0.0 || polar > 0.5 * kPi)
    throw std::invalid_argument("UE polar angle outside [0, pi/2]");
  if (area <= 0.0) throw std::invalid_argument("receiver area must be positive");
  if (fov <= 0.0 || fov > 0.5 * kPi + 1e-12)
    throw std::invalid_argument("FoV outside (0, pi/2]");
}

void Scene::validate() const {
  room.validate();
  ap.validate();
  ue.validate();
  if (body) body->validate();
  if (!room.contains(ue.position))
    throw std::invalid_argument("UE lies outside the room");
  if (body) {
    for (const Vec2& v : body->footprint())
      if (!room.contains_xy(v))
        throw std::invalid_argument("body prism lies outside the room");
    if (body->height > room.height + 1e-9)
      throw std::invalid_argument("body prism taller than the room");
  }
}

Vec3 orientation_to_normal(double polar, double azimuth) {
  if (!(polar >= 0.0 && polar <= 0.5 * kPi))
    throw std::domain_error("polar angle outside [0, pi/2]");
  const double st = std::sin(polar);
  return {st * std::cos(azimuth), st * std::sin(azimuth), std::cos(polar)};
}

Scene build_scene(Activity activity, const Vec2& anchor, double direction,
                  const Room& room, const AccessPoint& ap,
                  std::optional<double> polar_rad) {
  room.validate();
  ap.validate();

  BodyPrism body;
  body.anchor = anchor;
  body.direction = direction;
  body.height = activity == Activity::walking ? kBodyHeightWalking : kBodyHeightSitting;

  for (const Vec2& v : body.footprint())
    if (!room.contains_xy(v))
      throw std::invalid_argument("body placement puts the prism outside the room");

  const double ue_height =
      activity == Activity::walking ? kUeHeightWalking : kUeHeightSitting;
  const Vec2 ue_xy = body.chest_xy() + kChestOffset * body.facing();
  if (!room.contains_xy(ue_xy))
    throw std::invalid_argument("UE placement falls outside the room");

  Scene scene;
  scene.room = room;
  scene.ap = ap;
  scene.body = body;
  scene.activity = activity;
  scene.ue.position = {ue_xy.x(), ue_xy.y(), ue_height};
  scene.ue.azimuth = wrap_angle(direction - kPi);
  scene.ue.polar = polar_rad ? *polar_rad
                             : activity_mean_polar_deg(activity) * kPi / 180.0;
  scene.validate();
  return scene;
}

bool segment_blocked(const Vec3& p, const Vec3& q, const BodyPrism& body) {
  // Slab test in the prism frame, with the box shrunk by a small tolerance so
  // endpoints and rays grazing a face are not flagged.
  constexpr double kTol = 1e-9;

  const Vec2 f = body.facing();
  const Vec2 l = body.lateral();
  const Vec2 c2 = body.center_xy();
  const Vec3 center{c2.x(), c2.y(), 0.5 * body.height};
  const Vec3 axis_f{f.x(), f.y(), 0.0};
  const Vec3 axis_l{l.x(), l.y(), 0.0};
  const Vec3 axis_z{0.0, 0.0, 1.0};
  const double half[3] = {0.5 * body.width - kTol, 0.5 * body.length - kTol,
                          0.5 * body.height - kTol};

  const Vec3 d = q - p;
  const Vec3 rel = p - center;
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& axis = i == 0 ? axis_f : (i == 1 ? axis_l : axis_z);
    const double o = rel.dot(axis);
    const double s = d.dot(axis);
    if (std::abs(s) < 1e-15) {
      if (std::abs(o) > half[i]) return false;  // parallel and outside the slab
      continue;
    }
    double ta = (-half[i] - o) / s;
    double tb = (half[i] - o) / s;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return false;
  }
  // Interior crossing only: an interval pinched to the boundary is a graze.
  return t1 - t0 > kTol && t1 > kTol && t0 < 1.0 - kTol;
}

LinkAngles link_angles(const Vec3& tx_pos, const Vec3& tx_normal,
                       const Vec3& rx_pos, const Vec3& rx_normal) {
  const Vec3 d = rx_pos - tx_pos;
  const double dist = d.norm();
  if (dist < 1e-15) throw std::invalid_argument("coincident link endpoints");
  const double cos_phi = tx_normal.dot(d) / (dist * tx_normal.norm());
  const double cos_psi = rx_normal.dot(-d) / (dist * rx_normal.norm());
  return {std::acos(std::clamp(cos_phi, -1.0, 1.0)),
          std::acos(std::clamp(cos_psi, -1.0, 1.0)), dist};
}

}  // namespace lifi
