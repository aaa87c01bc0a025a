#include "ddp/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "ddp/common.hpp"

namespace ddp {

void PreprocessParams::validate() const {
  if (!(d_min > 0.0) || !(d_max > d_min)) {
    throw validation_error("PreprocessParams: require 0 < d_min < d_max");
  }
  if (!(d_offset >= 0.0)) {
    throw validation_error("PreprocessParams: require d_offset >= 0");
  }
}

void RgbdTarget::validate() const {
  if (image.channels() != 3) {
    throw validation_error("RgbdTarget: image must have 3 channels");
  }
  if (!image.same_extent(disparity.data) || !image.same_extent(mask)) {
    throw validation_error("RgbdTarget: raster dimensions differ");
  }
  if (!(mask == disparity.valid)) {
    throw validation_error("RgbdTarget: mask must equal disparity validity");
  }
}

RgbdTarget make_rgbd_target(const RgbImage& image, const DepthMap& depth,
                            const PreprocessParams& params) {
  RgbdTarget t;
  t.image = image;
  t.disparity = depth_to_disparity(depth, params);
  t.mask = t.disparity.valid;
  t.validate();
  return t;
}

Mask compute_hole_mask(const DepthMap& depth) {
  Mask m(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const double d = depth.data.data()[i];
    m.data()[i] = (std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
  return m;
}

DisparityMap depth_to_disparity(const DepthMap& depth,
                                const PreprocessParams& params) {
  params.validate();
  DisparityMap z(depth.width(), depth.height());
  z.valid = depth.valid;
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (!depth.valid.data()[i]) continue;
    const double d = std::clamp(depth.data.data()[i] + params.d_offset,
                                params.d_min, params.d_max);
    z.data.data()[i] = 1.0 / d;
  }
  return z;
}

DepthMap disparity_to_depth(const DisparityMap& disp,
                            const PreprocessParams& params) {
  params.validate();
  DepthMap d(disp.width(), disp.height());
  d.valid = disp.valid;
  for (std::size_t i = 0; i < disp.data.size(); ++i) {
    if (!disp.valid.data()[i]) continue;
    const double z = disp.data.data()[i];
    if (!(z > 0.0)) {
      throw std::invalid_argument(
          "disparity_to_depth: non-positive disparity on a valid pixel");
    }
    d.data.data()[i] = 1.0 / z - params.d_offset;
  }
  return d;
}

GridD normalize_disparity(const DisparityMap& disp,
                          const PreprocessParams& params) {
  params.validate();
  GridD out(disp.width(), disp.height(), 1, 0.0);
  const double z_max = params.max_disparity();
  for (std::size_t i = 0; i < disp.data.size(); ++i) {
    if (disp.valid.data()[i]) {
      out.data()[i] = disp.data.data()[i] / z_max;
    }
  }
  return out;
}

GridF to_float(const GridD& g) {
  GridF f(g.width(), g.height(), g.channels());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.data()[i] = static_cast<float>(g.data()[i]);
  }
  return f;
}

GridD to_double(const GridF& g) {
  GridD d(g.width(), g.height(), g.channels());
  for (std::size_t i = 0; i < g.size(); ++i) {
    d.data()[i] = static_cast<double>(g.data()[i]);
  }
  return d;
}

// --- PFM -------------------------------------------------------------------

namespace {

constexpr bool host_is_little_endian() {
  return std::endian::native == std::endian::little;
}

void byteswap_floats(float* data, std::size_t n) {
  auto* bytes = reinterpret_cast<unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(bytes[4 * i + 0], bytes[4 * i + 3]);
    std::swap(bytes[4 * i + 1], bytes[4 * i + 2]);
  }
}

// PFM header tokens are separated by single whitespace characters
// (conventionally newlines); a token never spans whitespace.
std::string next_token(std::istream& in) {
  std::string tok;
  in >> tok;
  return tok;
}

}  // namespace

GridF read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("read_pfm: cannot open " + path);

  const std::string magic = next_token(in);
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw io_error("read_pfm: malformed header (bad magic) in " + path);
  }

  long width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stol(next_token(in));
    height = std::stol(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    throw io_error("read_pfm: malformed header (unparseable fields) in " +
                   path);
  }
  if (width <= 0 || height <= 0 || width > (1 << 24) || height > (1 << 24)) {
    throw io_error("read_pfm: dimension mismatch (invalid size " +
                   std::to_string(width) + "x" + std::to_string(height) +
                   ") in " + path);
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw io_error("read_pfm: malformed header (bad scale) in " + path);
  }
  // Exactly one whitespace byte separates the scale from the payload.
  in.get();

  GridF g(static_cast<int>(width), static_cast<int>(height), channels);
  const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
  std::vector<float> row(row_floats);
  // PFM rows run bottom-up.
  for (long y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row_floats * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != row_floats * sizeof(float)) {
      throw io_error("read_pfm: truncated payload in " + path);
    }
    const bool file_little = scale < 0.0;
    if (file_little != host_is_little_endian()) {
      byteswap_floats(row.data(), row_floats);
    }
    std::memcpy(g.data() + g.index(0, static_cast<int>(y)), row.data(),
                row_floats * sizeof(float));
  }
  return g;
}

void write_pfm(const GridF& raster, const std::string& path) {
  if (raster.channels() != 1 && raster.channels() != 3) {
    throw std::invalid_argument("write_pfm: raster must have 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("write_pfm: cannot open " + path);

  out << (raster.channels() == 1 ? "Pf" : "PF") << "\n"
      << raster.width() << " " << raster.height() << "\n"
      << (host_is_little_endian() ? "-1.0" : "1.0") << "\n";

  const std::size_t row_floats =
      static_cast<std::size_t>(raster.width()) * raster.channels();
  for (int y = raster.height() - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(raster.data() + raster.index(0, y)),
              static_cast<std::streamsize>(row_floats * sizeof(float)));
  }
  if (!out) throw io_error("write_pfm: write failed for " + path);
}

// --- 16-bit depth PNG --------------------------------------------------------

namespace {

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

DepthMap read_depth_png16(const std::string& path, double scale) {
  PngReadCloser c;
  c.fp = std::fopen(path.c_str(), "rb");
  if (!c.fp) throw io_error("read_depth_png16: cannot open " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, c.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw io_error("read_depth_png16: not a PNG file: " + path);
  }
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw io_error("read_depth_png16: libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) {
    throw io_error("read_depth_png16: libpng decode error in " + path);
  }
  png_init_io(c.png, c.fp);
  png_set_sig_bytes(c.png, 8);
  png_read_info(c.png, c.info);

  const int bit_depth = png_get_bit_depth(c.png, c.info);
  const int color_type = png_get_color_type(c.png, c.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    throw io_error(
        "read_depth_png16: wrong bit depth or channel count (need 16-bit "
        "grayscale): " +
        path);
  }
  const int width = static_cast<int>(png_get_image_width(c.png, c.info));
  const int height = static_cast<int>(png_get_image_height(c.png, c.info));
  if (host_is_little_endian()) png_set_swap(c.png);

  std::vector<std::uint16_t> row(width);
  DepthMap depth(width, height);
  for (int y = 0; y < height; ++y) {
    png_read_row(c.png, reinterpret_cast<png_bytep>(row.data()), nullptr);
    for (int x = 0; x < width; ++x) {
      if (row[x] != 0) {
        depth.data(x, y) = static_cast<double>(row[x]) * scale;
        depth.valid(x, y) = 1;
      }
    }
  }
  png_read_end(c.png, nullptr);
  return depth;
}

void write_depth_png16(const DepthMap& depth, double scale,
                       const std::string& path) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("write_depth_png16: scale must be > 0");
  }
  PngWriteCloser c;
  c.fp = std::fopen(path.c_str(), "wb");
  if (!c.fp) throw io_error("write_depth_png16: cannot open " + path);
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw io_error("write_depth_png16: libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) {
    throw io_error("write_depth_png16: libpng encode error for " + path);
  }
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, depth.width(), depth.height(), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  if (host_is_little_endian()) png_set_swap(c.png);

  std::vector<std::uint16_t> row(depth.width());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) {
        row[x] = 0;
        continue;
      }
      const double raw = std::round(depth.data(x, y) / scale);
      row[x] = static_cast<std::uint16_t>(
          std::clamp(raw, 1.0, 65535.0));
    }
    png_write_row(c.png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(c.png, nullptr);
}

}  // namespace ddp
