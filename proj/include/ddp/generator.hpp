#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddp/raster.hpp"

namespace ddp {

/// Planar (channel, row, column) tensor of doubles.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

  std::size_t size() const noexcept { return v.size(); }
  double* data() noexcept { return v.data(); }
  const double* data() const noexcept { return v.data(); }
  double& at(int ci, int y, int x) {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double at(int ci, int y, int x) const {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double* plane(int ci) noexcept {
    return v.data() + static_cast<std::size_t>(ci) * h * w;
  }
  const double* plane(int ci) const noexcept {
    return v.data() + static_cast<std::size_t>(ci) * h * w;
  }
  void resize(int c_, int h_, int w_) {
    c = c_;
    h = h_;
    w = w_;
    v.assign(static_cast<std::size_t>(c_) * h_ * w_, 0.0);
  }
};

struct GeneratorConfig {
  int input_channels = 16;
  std::vector<int> encoder_channels = {32, 64, 128, 256, 512};
  int kernel = 3;
  int output_channels = 4;
  double leaky_slope = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  int levels() const noexcept { return static_cast<int>(encoder_channels.size()); }
  int pad_multiple() const noexcept { return 1 << levels(); }
  /// Architecture hash (seed excluded); checkpoints bind to this.
  std::uint64_t hash() const;
};

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;

  std::size_t size() const noexcept { return value.size(); }
};

/// Every learnable tensor of the network in a fixed order: for each
/// encoder then decoder block, conv weight/bias and per-channel
/// normalization scale/shift for both convolutions, then the 1x1 head.
struct GeneratorParams {
  std::uint64_t config_hash = 0;
  std::vector<ParamTensor> tensors;

  std::size_t total_parameters() const;
  const ParamTensor* find(const std::string& name) const;
};

/// Deterministic parameter initialization: fan-in-scaled zero-mean normal
/// convolution weights, zero biases, unit normalization scales.
GeneratorParams init_generator(const GeneratorConfig& config);

/// Fixed network input, uniform in [0, 0.1], deterministic given seed.
Tensor make_noise(int width, int height, int channels, std::uint64_t seed);

/// The encoder-decoder network. Owns its parameters, gradients and all
/// forward-state buffers; one instance serves one optimization at a time.
class Generator {
 public:
  explicit Generator(const GeneratorConfig& config);
  Generator(const GeneratorConfig& config, GeneratorParams params);
  ~Generator();
  Generator(Generator&&) noexcept;
  Generator& operator=(Generator&&) noexcept;
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  const GeneratorConfig& config() const;
  GeneratorParams& params();
  const GeneratorParams& params() const;
  GeneratorParams& grads();

  void zero_grads();

  /// noise: (input_channels, h, w) -> sigmoid-bounded
  /// (output_channels, h, w). Inputs whose sides are not multiples of
  /// 2^levels are reflection-padded up and cropped back.
  const Tensor& forward(const Tensor& noise);

  /// Accumulates d(loss)/d(params) into grads() from d(loss)/d(output).
  void backward(const Tensor& grad_output);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits a forward output into an RGB image (channels 0..2) and the
/// normalized disparity raster (channel 3 / last channel).
void split_output(const Tensor& out, RgbImage& rgb, GridD& disp_norm);

// Checkpoint blob: magic "DDPC", u32 version (1), u64 config hash,
// u32 tensor count, then per tensor: u32 name length, name bytes,
// u32 rank, u32 dims..., float64 data. All integers and floats are
// little-endian.
void save_checkpoint(const GeneratorParams& params, const std::string& path);
GeneratorParams load_checkpoint(const std::string& path);

}  // namespace ddp
