#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>

namespace lifi {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

enum class Activity { sitting, walking };

std::string to_string(Activity a);
Activity activity_from_string(const std::string& s);

/// Mean polar angle of a handheld terminal for the given activity, degrees.
double activity_mean_polar_deg(Activity a);

/// Shoebox room: x in [-L/2, L/2], y in [-W/2, W/2], z in [0, H].
struct Room {
  double length = 5.0;   // L, along x (m)
  double width = 3.5;    // W, along y (m)
  double height = 3.0;   // H, along z (m)
  double rho_wall = 0.3;
  double rho_ceiling = 0.69;
  double rho_floor = 0.09;

  void validate() const;
  bool contains(const Vec3& p, double tol = 1e-9) const;
  bool contains_xy(const Vec2& p, double tol = 1e-9) const;
};

struct AccessPoint {
  Vec3 position{0.0, 0.0, 3.0};
  double lambertian_m = 1.0;
  Vec3 normal{0.0, 0.0, -1.0};  // ceiling luminaire faces down

  void validate() const;
};

/// Human body as a vertical rectangular prism standing on the floor.
///
/// `anchor` is the footprint vertex at the left end of the chest (front)
/// face when looking along `direction`.  The footprint spans `length`
/// laterally and `width` behind the chest plane, so the prism occupies
///   anchor + s*lateral() - t*facing(),  s in [0, length], t in [0, width]
/// over z in [0, height].
struct BodyPrism {
  Vec2 anchor{0.0, 0.0};
  double length = 0.66;   // L_b, shoulder span (m)
  double width = 0.2;     // W_b, chest depth (m)
  double height = 1.75;   // H_b (m)
  double direction = 0.0; // Omega, rad
  double rho_body = 0.6;
  double rho_hair = 0.9;

  Vec2 facing() const { return {std::cos(direction), std::sin(direction)}; }
  Vec2 lateral() const { return {-std::sin(direction), std::cos(direction)}; }
  Vec2 chest_xy() const { return anchor + 0.5 * length * lateral(); }
  Vec2 center_xy() const { return chest_xy() - 0.5 * width * facing(); }
  std::array<Vec2, 4> footprint() const;

  void validate() const;
};

struct UePose {
  Vec3 position{0.0, 0.0, 1.0};
  double polar = 0.0;         // theta, rad, from the upward vertical
  double azimuth = 0.0;       // omega, rad
  double area = 1e-4;         // A_Rx (m^2)
  double fov = 1.5707963267948966;  // rad
  double responsivity = 0.6;  // R (A/W)

  Vec3 normal() const;
  void validate() const;
};

struct Scene {
  Room room;
  AccessPoint ap;
  std::optional<BodyPrism> body;
  UePose ue;
  Activity activity = Activity::walking;

  void validate() const;
};

/// n_u = (sin t cos w, sin t sin w, cos t).  Polar angle measured from +z.
/// Throws std::domain_error outside [0, pi/2].
Vec3 orientation_to_normal(double polar, double azimuth);

/// Places a user (body prism + handheld UE) in the room.
///
/// The UE sits 0.35 m in front of the chest at height 1.4 m (walking) or
/// 0.9 m (sitting); body dims are 0.66 x 0.2 x 1.75 m when walking and
/// 1.25 m tall when sitting.  The UE faces back at the user: its azimuth is
/// direction - pi, and its polar angle defaults to the activity mean.
/// Throws std::invalid_argument when the body does not fit in the room.
Scene build_scene(Activity activity, const Vec2& anchor, double direction,
                  const Room& room = Room{}, const AccessPoint& ap = AccessPoint{},
                  std::optional<double> polar_rad = std::nullopt);

/// True iff the open segment (p, q) crosses the prism interior.  Endpoints
/// lying on a face do not count as blockage.
bool segment_blocked(const Vec3& p, const Vec3& q, const BodyPrism& body);

struct LinkAngles {
  double radiant;    // phi, angle at the Tx normal (rad)
  double incidence;  // psi, angle at the Rx normal (rad)
  double distance;   // d (m)
};

LinkAngles link_angles(const Vec3& tx_pos, const Vec3& tx_normal,
                       const Vec3& rx_pos, const Vec3& rx_normal);

}  // namespace lifi
