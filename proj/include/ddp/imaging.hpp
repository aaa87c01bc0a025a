#pragma once

#include <string>

#include "ddp/raster.hpp"

namespace ddp {

/// Depth raster in scene units. Holes carry the 0 sentinel and are
/// marked invalid in `valid`; valid pixels are finite and > 0.
struct DepthMap {
  GridD data;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height)
      : data(width, height, 1, 0.0), valid(width, height, 1, 0) {}

  int width() const noexcept { return data.width(); }
  int height() const noexcept { return data.height(); }
};

/// Inverse-depth raster (1 / scene units), same hole convention.
struct DisparityMap {
  GridD data;
  Mask valid;

  DisparityMap() = default;
  DisparityMap(int width, int height)
      : data(width, height, 1, 0.0), valid(width, height, 1, 0) {}

  int width() const noexcept { return data.width(); }
  int height() const noexcept { return data.height(); }
};

/// Depth clipping range and additive constant applied before inversion.
struct PreprocessParams {
  double d_min = 0.0;
  double d_max = 0.0;
  double d_offset = 0.0;

  void validate() const;
  double max_disparity() const noexcept { return 1.0 / d_min; }
};

/// One view's fitting target: color, disparity and the hole mask
/// (true = observed). The mask always equals disparity.valid.
struct RgbdTarget {
  RgbImage image;
  DisparityMap disparity;
  Mask mask;

  void validate() const;
};

RgbdTarget make_rgbd_target(const RgbImage& image, const DepthMap& depth,
                            const PreprocessParams& params);

/// True wherever the depth value is finite and > 0.
Mask compute_hole_mask(const DepthMap& depth);

/// z = 1 / clamp(d + d_offset, d_min, d_max) on valid pixels.
DisparityMap depth_to_disparity(const DepthMap& depth,
                                const PreprocessParams& params);

/// d = 1/z - d_offset on valid pixels. A valid pixel with z <= 0 is a
/// contract violation and raises.
DepthMap disparity_to_depth(const DisparityMap& disp,
                            const PreprocessParams& params);

/// z / z_max with z_max = 1/d_min; invalid pixels map to 0.
GridD normalize_disparity(const DisparityMap& disp,
                          const PreprocessParams& params);

// --- PFM (portable float map) -------------------------------------------
//
// Header "Pf" (1 channel) or "PF" (3 channels), then "<width> <height>",
// then a scale whose sign encodes endianness (negative = little endian).
// Rows are stored bottom-up. Payload is raw IEEE float32, so write->read
// round-trips are bit exact.

GridF read_pfm(const std::string& path);
void write_pfm(const GridF& raster, const std::string& path);

GridF to_float(const GridD& g);
GridD to_double(const GridF& g);

// --- 16-bit depth PNG -----------------------------------------------------

/// Reads a 16-bit single-channel PNG; depth = raw * scale, raw 0 = hole.
DepthMap read_depth_png16(const std::string& path, double scale);

/// Inverse of read_depth_png16 (values are rounded to raw = d / scale;
/// holes write raw 0). Mainly for producing sensor-style fixtures.
void write_depth_png16(const DepthMap& depth, double scale,
                       const std::string& path);

}  // namespace ddp
