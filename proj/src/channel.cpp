#include "lifi/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "lifi/parallel.hpp"

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

struct Face {
  Vec3 origin;  // corner of the face
  Vec3 u_axis;  // unit
  Vec3 v_axis;  // unit
  double u_len;
  double v_len;
  Vec3 normal;
  double reflectivity;
};

int tile_count(double span, double resolution) {
  return std::max(1, static_cast<int>(std::lround(span * resolution)));
}

void tile_face(const Face& face, double resolution, std::vector<SurfaceElement>& out) {
  const int nu = tile_count(face.u_len, resolution);
  const int nv = tile_count(face.v_len, resolution);
  const double du = face.u_len / nu;
  const double dv = face.v_len / nv;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      SurfaceElement e;
      e.center = face.origin + (i + 0.5) * du * face.u_axis + (j + 0.5) * dv * face.v_axis;
      e.normal = face.normal;
      e.area = du * dv;
      e.reflectivity = face.reflectivity;
      e.span_u = du * face.u_axis;
      e.span_v = dv * face.v_axis;
      out.push_back(e);
    }
}

// Sub-tiles needed for the patch kernel to stay accurate at distance d.
int patch_subdivisions(double span, double d) {
  if (d <= 0.0) return 6;
  return std::clamp(static_cast<int>(std::ceil(3.0 * span / d)), 1, 6);
}

// Average of cos_src cos_dst / d^2 over the source patch, seen from a point.
// `dst_normal` may be null for a bare point probe.  Blockage is evaluated per
// sub-patch, so shadow edges grade smoothly.  Returns the kernel sum times
// the sub-patch weight; multiply by (m+1)/(2 pi) and the receiver area.
double patch_point_kernel(const SurfaceElement& patch, const Vec3& point,
                          const Vec3* point_normal, double lambertian_m,
                          bool patch_is_source, const BodyPrism* blocker,
                          double point_fov = 0.5 * kPi) {
  const double d0 = (point - patch.center).norm();
  const int nu = patch_subdivisions(patch.span_u.norm(), d0);
  const int nv = patch_subdivisions(patch.span_v.norm(), d0);
  const double cos_fov = std::cos(point_fov);
  double sum = 0.0;
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nv; ++b) {
      const Vec3 p = patch.center + ((a + 0.5) / nu - 0.5) * patch.span_u +
                     ((b + 0.5) / nv - 0.5) * patch.span_v;
      const Vec3 d = point - p;
      const double dist2 = d.squaredNorm();
      if (dist2 < 1e-24) continue;
      const double dist = std::sqrt(dist2);
      const double cos_patch = patch.normal.dot(d) / dist;
      if (cos_patch <= 0.0) continue;
      double cos_point = 1.0;
      if (point_normal) {
        cos_point = point_normal->dot(-d) / dist;
        if (cos_point <= 0.0 || cos_point < cos_fov - 1e-12) continue;
      }
      const double cos_src = patch_is_source ? cos_patch : cos_point;
      const double cos_dst = patch_is_source ? cos_point : cos_patch;
      if (blocker && segment_blocked(p, point, *blocker)) continue;
      const double pattern =
          lambertian_m == 1.0 ? cos_src : std::pow(cos_src, lambertian_m);
      sum += pattern * cos_dst / dist2;
    }
  return sum / (nu * nv);
}

// Same averaged kernel between two patches.
double patch_patch_kernel(const SurfaceElement& src, const SurfaceElement& dst,
                          const BodyPrism* blocker) {
  const double d0 = (dst.center - src.center).norm();
  const int nsu = patch_subdivisions(src.span_u.norm(), d0);
  const int nsv = patch_subdivisions(src.span_v.norm(), d0);
  double sum = 0.0;
  for (int a = 0; a < nsu; ++a)
    for (int b = 0; b < nsv; ++b) {
      SurfaceElement sub = src;
      sub.center = src.center + ((a + 0.5) / nsu - 0.5) * src.span_u +
                   ((b + 0.5) / nsv - 0.5) * src.span_v;
      sub.span_u = src.span_u / nsu;
      sub.span_v = src.span_v / nsv;
      sum += patch_point_kernel(dst, sub.center, &sub.normal, 1.0, false, blocker);
    }
  return sum / (nsu * nsv);
}

std::vector<Face> room_faces(const Room& room) {
  const double hx = 0.5 * room.length;
  const double hy = 0.5 * room.width;
  const double H = room.height;
  const Vec3 ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
  return {
      {{-hx, -hy, 0.0}, ex, ey, room.length, room.width, ez, room.rho_floor},
      {{-hx, -hy, H}, ex, ey, room.length, room.width, -ez, room.rho_ceiling},
      {{-hx, -hy, 0.0}, ey, ez, room.width, H, ex, room.rho_wall},
      {{hx, -hy, 0.0}, ey, ez, room.width, H, -ex, room.rho_wall},
      {{-hx, -hy, 0.0}, ex, ez, room.length, H, ey, room.rho_wall},
      {{-hx, hy, 0.0}, ex, ez, room.length, H, -ey, room.rho_wall},
  };
}

std::vector<Face> body_faces(const BodyPrism& body) {
  const Vec2 f2 = body.facing();
  const Vec2 l2 = body.lateral();
  const Vec3 f{f2.x(), f2.y(), 0.0};
  const Vec3 l{l2.x(), l2.y(), 0.0};
  const Vec3 ez{0, 0, 1};
  const Vec3 a{body.anchor.x(), body.anchor.y(), 0.0};  // front-left, floor level
  const Vec3 back = a - body.width * f;
  return {
      // chest (front) face, outward normal along the facing direction
      {a, l, ez, body.length, body.height, f, body.rho_body},
      {back, l, ez, body.length, body.height, -f, body.rho_body},
      {a, -f, ez, body.width, body.height, -l, body.rho_body},   // left side
      {a + body.length * l, -f, ez, body.width, body.height, l, body.rho_body},
      {a + body.height * ez, l, -f, body.length, body.width, ez, body.rho_hair},  // hair
      {a, l, -f, body.length, body.width, -ez, body.rho_body},   // underside
  };
}

}  // namespace

double ChannelResponse::dc_los() const {
  return los.empty() ? 0.0 : los.front().real();
}

double ChannelResponse::dc_diffuse() const {
  return diffuse.empty() ? 0.0 : diffuse.front().real();
}

std::complex<double> ChannelResponse::cir_at(double f) const {
  if (frequencies.empty()) throw std::runtime_error("empty channel response");
  if (f < frequencies.front() - 1e-9 || f > frequencies.back() + 1e-9)
    throw std::out_of_range("frequency outside the channel grid");
  auto it = std::lower_bound(frequencies.begin(), frequencies.end(), f);
  std::size_t hi = std::min<std::size_t>(it - frequencies.begin(), frequencies.size() - 1);
  if (hi == 0) return cir(0);
  const std::size_t lo = hi - 1;
  const double span = frequencies[hi] - frequencies[lo];
  const double w = span > 0.0 ? (f - frequencies[lo]) / span : 0.0;
  return (1.0 - w) * cir(lo) + w * cir(hi);
}

ChannelResponse ChannelResponse::los_only() const {
  ChannelResponse r;
  r.frequencies = frequencies;
  r.los = los;
  r.diffuse.assign(los.size(), {0.0, 0.0});
  return r;
}

double los_gain(const Vec3& tx_pos, const Vec3& tx_normal, double lambertian_m,
                const Vec3& rx_pos, const Vec3& rx_normal, double rx_area,
                double rx_fov, const BodyPrism* blocker) {
  const Vec3 d = rx_pos - tx_pos;
  const double dist2 = d.squaredNorm();
  if (dist2 < 1e-24) throw std::invalid_argument("degenerate link geometry");
  const double dist = std::sqrt(dist2);
  const double cos_phi = tx_normal.dot(d) / dist;
  const double cos_psi = rx_normal.dot(-d) / dist;
  if (cos_phi <= 0.0 || cos_psi <= 0.0) return 0.0;
  if (std::acos(std::clamp(cos_psi, -1.0, 1.0)) > rx_fov) return 0.0;
  if (blocker && segment_blocked(tx_pos, rx_pos, *blocker)) return 0.0;
  const double pattern =
      lambertian_m == 1.0 ? cos_phi : std::pow(cos_phi, lambertian_m);
  return (lambertian_m + 1.0) / (2.0 * kPi) * pattern * rx_area * cos_psi / dist2;
}

double los_gain(const Scene& scene) {
  return los_gain(scene.ap.position, scene.ap.normal, scene.ap.lambertian_m,
                  scene.ue.position, scene.ue.normal(), scene.ue.area, scene.ue.fov,
                  scene.body ? &*scene.body : nullptr);
}

std::complex<double> los_transfer(double gain, double distance, double f) {
  if (!std::isfinite(f)) throw std::invalid_argument("non-finite frequency");
  return std::polar(gain, -2.0 * kPi * f * distance / kSpeedOfLight);
}

std::vector<SurfaceElement> partition_surfaces(const Scene& scene, double resolution,
                                               std::size_t max_elements) {
  if (resolution < 1.0) throw std::invalid_argument("resolution must be >= 1");
  std::vector<Face> faces = room_faces(scene.room);
  if (scene.body) {
    auto bf = body_faces(*scene.body);
    faces.insert(faces.end(), bf.begin(), bf.end());
  }
  std::size_t expected = 0;
  for (const Face& face : faces)
    expected += static_cast<std::size_t>(tile_count(face.u_len, resolution)) *
                tile_count(face.v_len, resolution);
  if (expected > max_elements)
    throw std::runtime_error("partition would produce " + std::to_string(expected) +
                             " elements, above the cap of " + std::to_string(max_elements));
  std::vector<SurfaceElement> elements;
  elements.reserve(expected);
  for (const Face& face : faces) tile_face(face, resolution, elements);
  return elements;
}

DiffuseSolver::DiffuseSolver(const Scene& scene, std::vector<SurfaceElement> elements)
    : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("no surface elements");
  const auto n = static_cast<Eigen::Index>(elements_.size());
  const BodyPrism* blocker = scene.body ? &*scene.body : nullptr;

  gain_.setZero(n, n);
  distance_.setZero(n, n);
  rho_.resize(n);
  tx_gain_.resize(n);
  tx_dist_.resize(n);
  rx_gain_.resize(n);
  rx_dist_.resize(n);

  const Vec3 ue_normal = scene.ue.normal();
  for (Eigen::Index p = 0; p < n; ++p) {
    const SurfaceElement& e = elements_[p];
    rho_(p) = e.reflectivity;
    tx_dist_(p) = (e.center - scene.ap.position).norm();
    tx_gain_(p) = (scene.ap.lambertian_m + 1.0) / (2.0 * kPi) * e.area *
                  patch_point_kernel(e, scene.ap.position, &scene.ap.normal,
                                     scene.ap.lambertian_m, false, blocker);
    rx_dist_(p) = (scene.ue.position - e.center).norm();
    rx_gain_(p) = scene.ue.area / kPi *
                  patch_point_kernel(e, scene.ue.position, &ue_normal, 1.0, true,
                                     blocker, scene.ue.fov);
  }

  // Element-to-element gains; the two directions share the averaged kernel,
  // which keeps the reciprocity relation G_ij A_j = G_ji A_i exact.
  for (Eigen::Index i = 0; i < n; ++i) {
    const SurfaceElement& ei = elements_[i];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const SurfaceElement& ej = elements_[j];
      const Vec3 d = ei.center - ej.center;
      const double dist = d.norm();
      distance_(i, j) = distance_(j, i) = dist;
      const double cos_j = ej.normal.dot(d) / dist;
      const double cos_i = ei.normal.dot(-d) / dist;
      if (cos_j <= 0.0 && cos_i <= 0.0) continue;  // mutually back to back
      const double kernel = patch_patch_kernel(ej, ei, blocker);
      if (kernel <= 0.0) continue;
      gain_(i, j) = kernel / kPi * ei.area;
      gain_(j, i) = kernel / kPi * ej.area;
    }
  }
}

double DiffuseSolver::transfer_dc() const {
  const auto n = gain_.rows();
  Eigen::MatrixXd m = -gain_ * rho_.asDiagonal();
  m.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(std::move(m));
  const Eigen::VectorXd x = lu.solve(tx_gain_);
  if (!x.allFinite()) throw std::runtime_error("ill-conditioned scene at DC");
  double h = 0.0;
  for (Eigen::Index p = 0; p < n; ++p) h += rx_gain_(p) * rho_(p) * x(p);
  return h;
}

std::complex<double> DiffuseSolver::transfer(double f) const {
  if (f == 0.0) return transfer_dc();
  const auto n = gain_.rows();
  const double k = -2.0 * kPi * f / kSpeedOfLight;

  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double rho_j = rho_(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = gain_(i, j);
      m(i, j) = g == 0.0 ? std::complex<double>{0.0, 0.0}
                         : -rho_j * std::polar(g, k * distance_(i, j));
    }
    m(j, j) += 1.0;
  }
  Eigen::VectorXcd t(n);
  for (Eigen::Index p = 0; p < n; ++p)
    t(p) = std::polar(tx_gain_(p), k * tx_dist_(p));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(std::move(m));
  const Eigen::VectorXcd x = lu.solve(t);
  if (!x.allFinite()) throw std::runtime_error("ill-conditioned scene");
  std::complex<double> h{0.0, 0.0};
  for (Eigen::Index p = 0; p < n; ++p)
    h += std::polar(rx_gain_(p) * rho_(p), k * rx_dist_(p)) * x(p);
  return h;
}

std::complex<double> diffuse_transfer(const Scene& scene,
                                      const std::vector<SurfaceElement>& elements,
                                      double f) {
  return DiffuseSolver(scene, elements).transfer(f);
}

ChannelResponse cir_response(const Scene& scene, const std::vector<double>& freq_grid,
                             double resolution, unsigned workers) {
  if (freq_grid.empty() || freq_grid.front() != 0.0)
    throw std::invalid_argument("frequency grid must start at DC");
  for (std::size_t k = 1; k < freq_grid.size(); ++k)
    if (freq_grid[k] <= freq_grid[k - 1])
      throw std::invalid_argument("frequency grid must be strictly increasing");

  ChannelResponse response;
  response.frequencies = freq_grid;
  response.los.resize(freq_grid.size());
  response.diffuse.resize(freq_grid.size());

  const double gain = los_gain(scene);
  const double dist = (scene.ue.position - scene.ap.position).norm();
  for (std::size_t k = 0; k < freq_grid.size(); ++k)
    response.los[k] = los_transfer(gain, dist, freq_grid[k]);

  const DiffuseSolver solver(scene, partition_surfaces(scene, resolution));
  parallel_for(
      freq_grid.size(),
      [&](std::size_t k) { response.diffuse[k] = solver.transfer(freq_grid[k]); },
      workers);
  return response;
}

double los_power_ratio(const ChannelResponse& response, PowerConvention convention) {
  const double dc_total = response.dc_cir();
  if (dc_total <= 0.0) throw std::runtime_error("undefined LOS ratio: zero DC gain");
  const double ratio = response.dc_los() / dc_total;
  return convention == PowerConvention::optical ? ratio : ratio * ratio;
}

void write_channel_csv(const ChannelResponse& response, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "frequency_hz,re_los,im_los,re_diff,im_diff\n";
  char line[256];
  for (std::size_t k = 0; k < response.frequencies.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  response.frequencies[k], response.los[k].real(),
                  response.los[k].imag(), response.diffuse[k].real(),
                  response.diffuse[k].imag());
    out << line;
  }
}

}  // namespace lifi
