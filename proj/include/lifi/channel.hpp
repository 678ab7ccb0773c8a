#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lifi/geometry.hpp"

namespace lifi {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Lambertian radiator/receiver patch on a room or body surface.
struct SurfaceElement {
  Vec3 center;
  Vec3 normal;         // points into the room interior
  double area;         // m^2
  double reflectivity; // rho
  Vec3 span_u{0, 0, 0};  // edge vectors of the rectangular patch; the patch
  Vec3 span_v{0, 0, 0};  // covers center +/- (span_u + span_v) / 2
};

enum class PowerConvention { optical, electrical };

/// Frequency response split into LOS and diffuse parts.
struct ChannelResponse {
  std::vector<double> frequencies;             // Hz, strictly increasing
  std::vector<std::complex<double>> los;
  std::vector<std::complex<double>> diffuse;

  std::complex<double> cir(std::size_t k) const { return los[k] + diffuse[k]; }
  double dc_los() const;
  double dc_diffuse() const;
  double dc_cir() const { return dc_los() + dc_diffuse(); }
  /// H_CIR interpolated at frequency f; throws outside the grid span.
  std::complex<double> cir_at(double f) const;
  /// Copy with the diffuse part zeroed.
  ChannelResponse los_only() const;
};

/// Attenuation factor of one Lambertian link (Eq. of the generalized
/// cosine-power source).  Returns 0 when the radiant angle exceeds pi/2, the
/// incidence exceeds `rx_fov`, or `blocker` occludes the segment.
double los_gain(const Vec3& tx_pos, const Vec3& tx_normal, double lambertian_m,
                const Vec3& rx_pos, const Vec3& rx_normal, double rx_area,
                double rx_fov, const BodyPrism* blocker);

/// AP -> UE attenuation for a scene, body blockage included.
double los_gain(const Scene& scene);

std::complex<double> los_transfer(double gain, double distance, double f);

/// Tiles all room faces and (when present) body faces into roughly square
/// patches, `resolution` elements per meter per axis.  Throws when the
/// element count would exceed `max_elements`.
std::vector<SurfaceElement> partition_surfaces(const Scene& scene, double resolution,
                                               std::size_t max_elements = 20000);

/// Diffuse transfer via a per-frequency dense solve of the room-intrinsic
/// system: H_diff = r^T G_rho (I - G G_rho)^{-1} t.  Geometry (gains,
/// distances, visibility) is computed once at construction; each frequency
/// costs one LU solve.
///
/// Gains between nearby patches are evaluated by sub-tile quadrature rather
/// than the center-point kernel, so coarse partitions stay close to the
/// converged transfer; phases always use center distances.
class DiffuseSolver {
 public:
  DiffuseSolver(const Scene& scene, std::vector<SurfaceElement> elements);

  std::complex<double> transfer(double f) const;
  double transfer_dc() const;  // real-arithmetic fast path
  std::size_t element_count() const { return elements_.size(); }
  const std::vector<SurfaceElement>& elements() const { return elements_; }

  // Assembled system, exposed so independent solution routes (series
  // summation) can run on identical inputs.
  const Eigen::MatrixXd& gain_matrix() const { return gain_; }
  const Eigen::MatrixXd& distance_matrix() const { return distance_; }
  const Eigen::VectorXd& tx_gains() const { return tx_gain_; }
  const Eigen::VectorXd& tx_distances() const { return tx_dist_; }
  const Eigen::VectorXd& rx_gains() const { return rx_gain_; }
  const Eigen::VectorXd& rx_distances() const { return rx_dist_; }
  const Eigen::VectorXd& reflectivities() const { return rho_; }

 private:
  std::vector<SurfaceElement> elements_;
  Eigen::MatrixXd gain_;      // element-to-element LOS gains, zero diagonal
  Eigen::MatrixXd distance_;  // element-to-element distances
  Eigen::VectorXd tx_gain_, tx_dist_;  // AP -> element
  Eigen::VectorXd rx_gain_, rx_dist_;  // element -> UE
  Eigen::VectorXd rho_;
};

std::complex<double> diffuse_transfer(const Scene& scene,
                                      const std::vector<SurfaceElement>& elements,
                                      double f);

/// Full channel on a frequency grid (must include DC).  Per-frequency solves
/// run on `workers` threads.
ChannelResponse cir_response(const Scene& scene, const std::vector<double>& freq_grid,
                             double resolution = 2.0, unsigned workers = 0);

/// LOS share of the received power at DC.  Optical convention uses the gain
/// ratio H_los(0)/H_cir(0); electrical squares the gains.
double los_power_ratio(const ChannelResponse& response,
                       PowerConvention convention = PowerConvention::optical);

void write_channel_csv(const ChannelResponse& response, const std::string& path);

}  // namespace lifi
