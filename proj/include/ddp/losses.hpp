#pragma once

#include <vector>

#include "ddp/geometry.hpp"
#include "ddp/imaging.hpp"
#include "ddp/raster.hpp"

namespace ddp {

/// Mixing coefficients of the total loss and its two-term components:
/// total = gamma1 * disp + gamma2 * rgb + (1 - gamma1 - gamma2) * warp.
struct LossWeights {
  double gamma1 = 0.96;
  double gamma2 = 0.02;
  double lambda_z = 0.8;
  double lambda_i = 0.5;
  double lambda_w = 0.5;

  void validate() const;
  double warp_weight() const noexcept { return 1.0 - gamma1 - gamma2; }

  static LossWeights tnt();       // gamma1 0.96, gamma2 0.02
  static LossWeights standard();  // gamma1 0.98, gamma2 0.01
  static LossWeights depth_only();
};

struct SsimParams {
  int window = 11;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  double sigma = 1.5;  // Gaussian window weighting

  void validate() const;
  double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

struct LossBreakdown {
  double disp = 0.0;
  double rgb = 0.0;
  double warp = 0.0;
  double total = 0.0;
};

/// Mean |a - b| over mask-true pixels (all channels); 0 on an empty mask.
/// grad_b, when given, receives dL/db (sign(b - a) / count on masked
/// pixels, 0 elsewhere) and must match b's shape or be empty.
double masked_l1(const GridD& a, const GridD& b, const Mask& mask,
                 GridD* grad_b = nullptr);

/// Gaussian-windowed SSIM averaged over windows whose center pixel is
/// mask-true. Taps at mask-false or out-of-image positions are excluded
/// with weight renormalization, so mask-false values never influence the
/// result. Multi-channel rasters average across channels.
double ssim_index(const GridD& a, const GridD& b, const SsimParams& params,
                  const Mask& mask, GridD* grad_b = nullptr);

/// 1 - ssim_index, in [0, 2]; 0 on an empty mask.
double ssim_loss(const GridD& a, const GridD& b, const SsimParams& params,
                 const Mask& mask, GridD* grad_b = nullptr);

/// lambda_z * L1 + (1 - lambda_z) * ssim_loss over the hole mask.
double disparity_loss(const GridD& z_in, const GridD& z_out, const Mask& mask,
                      const LossWeights& w, const SsimParams& s,
                      GridD* grad_z_out = nullptr);

/// lambda_i * L1 + (1 - lambda_i) * ssim_loss over the full image.
double rgb_loss(const RgbImage& i_in, const RgbImage& i_out,
                const LossWeights& w, const SsimParams& s,
                GridD* grad_i_out = nullptr);

struct NeighborView {
  RgbImage image;
  ViewCalibration calib;
};

/// Per neighbor: lambda_w * ssim_loss + (1 - lambda_w) * L1 between the
/// reference image and the neighbor image warped through d_out, masked by
/// warp validity; averaged over neighbors. grad_depth receives
/// dL/d(depth) per reference pixel.
double warp_loss(const RgbImage& i_ref, const DepthMap& d_out,
                 const std::vector<NeighborView>& neighbors,
                 const ViewCalibration& ref, const LossWeights& w,
                 const SsimParams& s, GridD* grad_depth = nullptr);

LossBreakdown total_loss(double disp, double rgb, double warp,
                         const LossWeights& w);

}  // namespace ddp
