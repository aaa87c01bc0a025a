#include "ddp/losses.hpp"

#include <cmath>
#include <cstring>

#include "ddp/common.hpp"

namespace ddp {

void LossWeights::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(gamma1) || !unit(gamma2) || !unit(lambda_z) || !unit(lambda_i) ||
      !unit(lambda_w)) {
    throw validation_error("LossWeights: all weights must lie in [0, 1]");
  }
  if (gamma1 + gamma2 > 1.0 + 1e-12) {
    throw validation_error("LossWeights: gamma1 + gamma2 must be <= 1");
  }
}

LossWeights LossWeights::tnt() { return LossWeights{0.96, 0.02, 0.8, 0.5, 0.5}; }
LossWeights LossWeights::standard() {
  return LossWeights{0.98, 0.01, 0.8, 0.5, 0.5};
}
LossWeights LossWeights::depth_only() {
  return LossWeights{1.0, 0.0, 0.8, 0.5, 0.5};
}

void SsimParams::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw validation_error("SsimParams: window must be odd and >= 3");
  }
  if (!(k1 > 0.0) || !(k2 > 0.0)) {
    throw validation_error("SsimParams: k1 and k2 must be positive");
  }
  if (!(sigma > 0.0) || !(dynamic_range > 0.0)) {
    throw validation_error("SsimParams: sigma and dynamic range must be positive");
  }
}

namespace {

void check_same_shape(const GridD& a, const GridD& b, const Mask& mask,
                      const char* who) {
  if (!a.same_shape(b) || !a.same_extent(mask)) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
  }
}

void prepare_grad(GridD* grad, const GridD& like) {
  if (!grad) return;
  if (!grad->same_shape(like)) {
    *grad = GridD(like.width(), like.height(), like.channels(), 0.0);
  } else {
    grad->fill(0.0);
  }
}

/// Zero-padded separable convolution with a normalized Gaussian window.
class SeparableGaussian {
 public:
  SeparableGaussian(int window, double sigma) : radius_(window / 2) {
    kernel_.resize(window);
    double sum = 0.0;
    for (int i = -radius_; i <= radius_; ++i) {
      kernel_[i + radius_] = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
      sum += kernel_[i + radius_];
    }
    for (double& k : kernel_) k /= sum;
  }

  void apply(const double* src, double* dst, double* tmp, int w, int h) const {
    // horizontal
    for (int y = 0; y < h; ++y) {
      const double* row = src + static_cast<std::size_t>(y) * w;
      double* trow = tmp + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        const int lo = std::max(-radius_, -x);
        const int hi = std::min(radius_, w - 1 - x);
        double acc = 0.0;
        for (int i = lo; i <= hi; ++i) acc += kernel_[i + radius_] * row[x + i];
        trow[x] = acc;
      }
    }
    // vertical
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(-radius_, -y);
      const int hi = std::min(radius_, h - 1 - y);
      double* drow = dst + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = lo; i <= hi; ++i) {
          acc += kernel_[i + radius_] * tmp[static_cast<std::size_t>(y + i) * w + x];
        }
        drow[x] = acc;
      }
    }
  }

 private:
  std::vector<double> kernel_;
  int radius_;
};

}  // namespace

double masked_l1(const GridD& a, const GridD& b, const Mask& mask,
                 GridD* grad_b) {
  check_same_shape(a, b, mask, "masked_l1");
  prepare_grad(grad_b, b);

  const int ch = a.channels();
  std::size_t count = 0;
  double sum = 0.0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < ch; ++c) {
        sum += std::abs(a(x, y, c) - b(x, y, c));
        ++count;
      }
    }
  }
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  if (grad_b) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        if (!mask(x, y)) continue;
        for (int c = 0; c < ch; ++c) {
          const double d = b(x, y, c) - a(x, y, c);
          (*grad_b)(x, y, c) = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
        }
      }
    }
  }
  return sum * inv;
}

double ssim_index(const GridD& a, const GridD& b, const SsimParams& params,
                  const Mask& mask, GridD* grad_b) {
  check_same_shape(a, b, mask, "ssim_index");
  params.validate();
  prepare_grad(grad_b, b);

  const int w = a.width(), h = a.height(), ch = a.channels();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const std::size_t centers = count_true(mask);
  if (centers == 0) return 0.0;

  const SeparableGaussian window(params.window, params.sigma);
  const double c1 = params.c1();
  const double c2 = params.c2();

  std::vector<double> m(n), conv_m(n), tmp(n);
  std::vector<double> ma(n), mb(n), maa(n), mbb(n), mab(n);
  std::vector<double> conv_ma(n), conv_mb(n), conv_maa(n), conv_mbb(n), conv_mab(n);
  std::vector<double> alpha, beta, gamma, conv_abg;
  if (grad_b) {
    alpha.resize(n);
    beta.resize(n);
    gamma.resize(n);
    conv_abg.resize(n);
  }

  for (std::size_t i = 0; i < n; ++i) m[i] = mask.data()[i] ? 1.0 : 0.0;
  window.apply(m.data(), conv_m.data(), tmp.data(), w, h);

  // Weight of one window center in the channel-and-center mean.
  const double center_w = 1.0 / (static_cast<double>(centers) * ch);
  double index = 0.0;

  for (int c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a.data()[i * ch + c];
      const double bv = b.data()[i * ch + c];
      const double mav = m[i] * av;   // exact: m is 0 or 1
      const double mbv = m[i] * bv;
      ma[i] = mav;
      mb[i] = mbv;
      maa[i] = mav * av;
      mbb[i] = mbv * bv;
      mab[i] = mav * bv;
    }
    window.apply(ma.data(), conv_ma.data(), tmp.data(), w, h);
    window.apply(mb.data(), conv_mb.data(), tmp.data(), w, h);
    window.apply(maa.data(), conv_maa.data(), tmp.data(), w, h);
    window.apply(mbb.data(), conv_mbb.data(), tmp.data(), w, h);
    window.apply(mab.data(), conv_mab.data(), tmp.data(), w, h);

    double channel_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask.data()[i]) {
        if (grad_b) alpha[i] = beta[i] = gamma[i] = 0.0;
        continue;
      }
      const double inv = 1.0 / conv_m[i];
      const double mu_x = conv_ma[i] * inv;
      const double mu_y = conv_mb[i] * inv;
      const double exx = conv_maa[i] * inv;
      const double eyy = conv_mbb[i] * inv;
      const double exy = conv_mab[i] * inv;

      // Expressions are kept symmetric in (x, y) so that swapping the
      // arguments, and the a == b case, are bit-exact.
      const double num_a = 2.0 * (mu_x * mu_y) + c1;
      const double num_b = 2.0 * (exy - mu_x * mu_y) + c2;
      const double den_c = (mu_x * mu_x + mu_y * mu_y) + c1;
      const double den_d = ((exx - mu_x * mu_x) + (eyy - mu_y * mu_y)) + c2;
      const double s = (num_a * num_b) / (den_c * den_d);
      channel_sum += s;

      if (grad_b) {
        const double inv_cd = 1.0 / (den_c * den_d);
        const double ds_dmuy = 2.0 * mu_x * (num_b - num_a) * inv_cd -
                               2.0 * mu_y * s * (1.0 / den_c - 1.0 / den_d);
        const double ds_deyy = -s / den_d;
        const double ds_dexy = 2.0 * num_a * inv_cd;
        alpha[i] = center_w * ds_dmuy * inv;
        beta[i] = center_w * ds_deyy * inv;
        gamma[i] = center_w * ds_dexy * inv;
      }
    }
    index += channel_sum * center_w;

    if (grad_b) {
      // d mu_y(p)/d b_q = G(p-q) m_q / conv_m(p), and similarly for the
      // second moments, so the adjoint is three more windowed filters.
      window.apply(alpha.data(), conv_abg.data(), tmp.data(), w, h);
      for (std::size_t i = 0; i < n; ++i) {
        grad_b->data()[i * ch + c] += conv_abg[i] * m[i];
      }
      window.apply(beta.data(), conv_abg.data(), tmp.data(), w, h);
      for (std::size_t i = 0; i < n; ++i) {
        grad_b->data()[i * ch + c] += conv_abg[i] * 2.0 * mb[i];
      }
      window.apply(gamma.data(), conv_abg.data(), tmp.data(), w, h);
      for (std::size_t i = 0; i < n; ++i) {
        grad_b->data()[i * ch + c] += conv_abg[i] * ma[i];
      }
    }
  }
  return index;
}

double ssim_loss(const GridD& a, const GridD& b, const SsimParams& params,
                 const Mask& mask, GridD* grad_b) {
  if (count_true(mask) == 0) {
    prepare_grad(grad_b, b);
    return 0.0;
  }
  const double index = ssim_index(a, b, params, mask, grad_b);
  if (grad_b) {
    for (std::size_t i = 0; i < grad_b->size(); ++i) {
      grad_b->data()[i] = -grad_b->data()[i];
    }
  }
  return 1.0 - index;
}

namespace {

double two_term_loss(const GridD& a, const GridD& b, const Mask& mask,
                     double l1_weight, const SsimParams& s, GridD* grad_b) {
  GridD grad_l1, grad_ssim;
  const double l1 =
      masked_l1(a, b, mask, grad_b ? &grad_l1 : nullptr);
  const double sl =
      ssim_loss(a, b, s, mask, grad_b ? &grad_ssim : nullptr);
  if (grad_b) {
    prepare_grad(grad_b, b);
    for (std::size_t i = 0; i < grad_b->size(); ++i) {
      grad_b->data()[i] =
          l1_weight * grad_l1.data()[i] + (1.0 - l1_weight) * grad_ssim.data()[i];
    }
  }
  return l1_weight * l1 + (1.0 - l1_weight) * sl;
}

}  // namespace

double disparity_loss(const GridD& z_in, const GridD& z_out, const Mask& mask,
                      const LossWeights& w, const SsimParams& s,
                      GridD* grad_z_out) {
  return two_term_loss(z_in, z_out, mask, w.lambda_z, s, grad_z_out);
}

double rgb_loss(const RgbImage& i_in, const RgbImage& i_out,
                const LossWeights& w, const SsimParams& s, GridD* grad_i_out) {
  const Mask all(i_in.width(), i_in.height(), 1, 1);
  return two_term_loss(i_in, i_out, all, w.lambda_i, s, grad_i_out);
}

double warp_loss(const RgbImage& i_ref, const DepthMap& d_out,
                 const std::vector<NeighborView>& neighbors,
                 const ViewCalibration& ref, const LossWeights& w,
                 const SsimParams& s, GridD* grad_depth) {
  if (neighbors.empty()) {
    throw std::invalid_argument("warp_loss: neighbor list is empty");
  }
  if (grad_depth) {
    prepare_grad(grad_depth, d_out.data);
  }

  const double inv_n = 1.0 / static_cast<double>(neighbors.size());
  double loss = 0.0;
  GridD grad_warped;
  for (const NeighborView& nbr : neighbors) {
    GridD dwarp_ddepth;
    const WarpResult warped =
        warp_image(d_out, nbr.image, ref, nbr.calib,
                   grad_depth ? &dwarp_ddepth : nullptr);

    // Eq. order: lambda_w weights the SSIM term here.
    GridD grad_l1, grad_ssim;
    const double sl = ssim_loss(i_ref, warped.warped, s, warped.validity,
                                grad_depth ? &grad_ssim : nullptr);
    const double l1 = masked_l1(i_ref, warped.warped, warped.validity,
                                grad_depth ? &grad_l1 : nullptr);
    loss += (w.lambda_w * sl + (1.0 - w.lambda_w) * l1) * inv_n;

    if (grad_depth) {
      for (int y = 0; y < d_out.height(); ++y) {
        for (int x = 0; x < d_out.width(); ++x) {
          if (!warped.validity(x, y)) continue;
          double acc = 0.0;
          for (int c = 0; c < 3; ++c) {
            const double gw = w.lambda_w * grad_ssim(x, y, c) +
                              (1.0 - w.lambda_w) * grad_l1(x, y, c);
            acc += gw * dwarp_ddepth(x, y, c);
          }
          (*grad_depth)(x, y) += acc * inv_n;
        }
      }
    }
  }
  return loss;
}

LossBreakdown total_loss(double disp, double rgb, double warp,
                         const LossWeights& w) {
  LossBreakdown b;
  b.disp = disp;
  b.rgb = rgb;
  b.warp = warp;
  b.total = w.gamma1 * disp + w.gamma2 * rgb + w.warp_weight() * warp;
  return b;
}

}  // namespace ddp
