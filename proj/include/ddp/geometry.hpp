#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ddp/imaging.hpp"
#include "ddp/raster.hpp"

namespace ddp {

struct Intrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;

  void validate() const;
};

/// World-from-camera transform: X_world = rotation * X_cam + translation.
/// Points are column vectors; the camera center is `translation`.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  void validate() const;  // orthonormal, det +1 within 1e-6
};

struct ViewCalibration {
  int view_id = 0;
  Intrinsics intrinsics;
  Pose pose;
  int width = 0, height = 0;

  void validate() const;
  Eigen::Vector3d camera_center() const { return pose.translation; }
  Eigen::Vector3d optical_axis() const { return pose.rotation.col(2); }
};

/// Continuous pixel coordinates in a neighbor view plus the transferred
/// camera-frame depth there. `behind` marks points with depth <= 0 in the
/// neighbor frame; their (u, v) are meaningless.
struct PixelTransfer {
  double u = 0.0, v = 0.0;
  double depth = 0.0;
  bool behind = false;
};

/// Back-projects (u, v, depth) through `ref`, transforms into `nbr`'s
/// camera frame and projects. depth must be > 0.
PixelTransfer reproject_pixel(double u, double v, double depth,
                              const ViewCalibration& ref,
                              const ViewCalibration& nbr);

/// Camera-frame ray direction with unit z for pixel (u, v).
Eigen::Vector3d pixel_ray(double u, double v, const Intrinsics& k);

/// World point for pixel (u, v) at camera-frame depth d.
Eigen::Vector3d backproject(double u, double v, double depth,
                            const ViewCalibration& view);

/// One bilinear tap: value per channel, optionally d(value)/d(u,v).
/// Valid only if all four taps land inside the image.
bool bilinear_sample_at(const GridD& image, double u, double v, double* value,
                        double* dv_du = nullptr, double* dv_dv = nullptr);

/// Raster form: `coords` is a 2-channel (u, v) grid; the output has the
/// coords grid's extent and the image's channel count.
void bilinear_sample(const GridD& image, const GridD& coords, GridD& values,
                     Mask& validity);

struct WarpResult {
  RgbImage warped;
  Mask validity;
};

/// Backward-warps `i_nbr` into the reference view through `d_ref`.
/// A pixel is valid when its depth is valid, the transferred point lies in
/// front of the neighbor camera and all bilinear taps are in bounds.
/// If `dwarp_ddepth` is non-null it receives d(warped_c)/d(depth) per
/// pixel and channel (same shape as the warped image).
WarpResult warp_image(const DepthMap& d_ref, const RgbImage& i_nbr,
                      const ViewCalibration& ref, const ViewCalibration& nbr,
                      GridD* dwarp_ddepth = nullptr);

/// Ranks candidate views for photoconsistency against `ref_id` and returns
/// the n best view ids. The score prefers baseline angles near 10 degrees
/// (piecewise Gaussian, sigma 5 below / 15 above), with the angle measured
/// between the two view rays toward the midpoint of the frustum centers at
/// `mean_depth`. Ties break by ascending view id.
std::vector<int> select_neighbors(int ref_id,
                                  const std::vector<ViewCalibration>& views,
                                  int n, double mean_depth);

double neighbor_score(const ViewCalibration& ref, const ViewCalibration& cand,
                      double mean_depth);

// Text camera file, one view per file:
//   fx fy cx cy
//   r00 r01 r02
//   r10 r11 r12
//   r20 r21 r22
//   tx ty tz
//   width height
ViewCalibration read_camera(const std::string& path, int view_id = 0);
void write_camera(const ViewCalibration& view, const std::string& path);

}  // namespace ddp
