#include "ddp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ddp/common.hpp"

namespace ddp {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw validation_error("Intrinsics: focal lengths must be positive");
  }
}

void Pose::validate() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw validation_error("Pose: rotation must be orthonormal with det +1");
  }
}

void ViewCalibration::validate() const {
  intrinsics.validate();
  pose.validate();
  if (width <= 0 || height <= 0) {
    throw validation_error("ViewCalibration: image size must be positive");
  }
}

Eigen::Vector3d pixel_ray(double u, double v, const Intrinsics& k) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

Eigen::Vector3d backproject(double u, double v, double depth,
                            const ViewCalibration& view) {
  return view.pose.rotation * (depth * pixel_ray(u, v, view.intrinsics)) +
         view.pose.translation;
}

PixelTransfer reproject_pixel(double u, double v, double depth,
                              const ViewCalibration& ref,
                              const ViewCalibration& nbr) {
  if (!(depth > 0.0)) {
    throw std::invalid_argument("reproject_pixel: depth must be > 0");
  }
  const Eigen::Matrix3d r_rel = nbr.pose.rotation.transpose() * ref.pose.rotation;
  const Eigen::Vector3d t_rel =
      nbr.pose.rotation.transpose() * (ref.pose.translation - nbr.pose.translation);

  // q = p_nbr / depth; dividing out the depth up front keeps the zero-
  // translation case exact.
  const Eigen::Vector3d s = r_rel * pixel_ray(u, v, ref.intrinsics);
  const Eigen::Vector3d q = s + t_rel * (1.0 / depth);

  PixelTransfer out;
  out.depth = depth * q.z();
  if (!(q.z() > 0.0)) {
    out.behind = true;
    return out;
  }
  out.u = nbr.intrinsics.fx * (q.x() / q.z()) + nbr.intrinsics.cx;
  out.v = nbr.intrinsics.fy * (q.y() / q.z()) + nbr.intrinsics.cy;
  return out;
}

bool bilinear_sample_at(const GridD& image, double u, double v, double* value,
                        double* dv_du, double* dv_dv) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = x0 + 1;
  const int y1 = y0 + 1;
  if (x0 < 0 || y0 < 0 || x1 >= image.width() || y1 >= image.height()) {
    return false;
  }
  const double ax = u - x0;
  const double ay = v - y0;
  const int ch = image.channels();
  for (int c = 0; c < ch; ++c) {
    const double p00 = image(x0, y0, c);
    const double p10 = image(x1, y0, c);
    const double p01 = image(x0, y1, c);
    const double p11 = image(x1, y1, c);
    const double top = p00 + ax * (p10 - p00);
    const double bot = p01 + ax * (p11 - p01);
    value[c] = top + ay * (bot - top);
    if (dv_du) {
      dv_du[c] = (1.0 - ay) * (p10 - p00) + ay * (p11 - p01);
    }
    if (dv_dv) {
      dv_dv[c] = bot - top;
    }
  }
  return true;
}

void bilinear_sample(const GridD& image, const GridD& coords, GridD& values,
                     Mask& validity) {
  if (coords.channels() != 2) {
    throw std::invalid_argument("bilinear_sample: coords must be 2-channel");
  }
  values = GridD(coords.width(), coords.height(), image.channels(), 0.0);
  validity = Mask(coords.width(), coords.height(), 1, 0);
  std::vector<double> px(image.channels());
  for (int y = 0; y < coords.height(); ++y) {
    for (int x = 0; x < coords.width(); ++x) {
      if (bilinear_sample_at(image, coords(x, y, 0), coords(x, y, 1),
                             px.data())) {
        validity(x, y) = 1;
        for (int c = 0; c < image.channels(); ++c) values(x, y, c) = px[c];
      }
    }
  }
}

WarpResult warp_image(const DepthMap& d_ref, const RgbImage& i_nbr,
                      const ViewCalibration& ref, const ViewCalibration& nbr,
                      GridD* dwarp_ddepth) {
  if (d_ref.width() != ref.width || d_ref.height() != ref.height) {
    throw std::invalid_argument(
        "warp_image: depth dimensions do not match the reference calibration");
  }
  if (i_nbr.channels() != 3) {
    throw std::invalid_argument("warp_image: neighbor image must be RGB");
  }

  WarpResult result;
  result.warped = RgbImage(d_ref.width(), d_ref.height(), 3, 0.0);
  result.validity = Mask(d_ref.width(), d_ref.height(), 1, 0);
  if (dwarp_ddepth) {
    *dwarp_ddepth = GridD(d_ref.width(), d_ref.height(), 3, 0.0);
  }

  const Eigen::Matrix3d r_rel = nbr.pose.rotation.transpose() * ref.pose.rotation;
  const Eigen::Vector3d t_rel =
      nbr.pose.rotation.transpose() * (ref.pose.translation - nbr.pose.translation);
  const double fx = nbr.intrinsics.fx;
  const double fy = nbr.intrinsics.fy;

  double px[3], gu[3], gv[3];
  for (int y = 0; y < d_ref.height(); ++y) {
    for (int x = 0; x < d_ref.width(); ++x) {
      if (!d_ref.valid(x, y)) continue;
      const double d = d_ref.data(x, y);
      if (!(d > 0.0)) continue;

      const Eigen::Vector3d s =
          r_rel * pixel_ray(static_cast<double>(x), static_cast<double>(y),
                            ref.intrinsics);
      const double inv_d = 1.0 / d;
      const Eigen::Vector3d q = s + t_rel * inv_d;
      if (!(q.z() > 0.0)) continue;  // behind the neighbor camera

      const double inv_qz = 1.0 / q.z();
      const double u = fx * (q.x() * inv_qz) + nbr.intrinsics.cx;
      const double v = fy * (q.y() * inv_qz) + nbr.intrinsics.cy;
      if (!bilinear_sample_at(i_nbr, u, v, px, dwarp_ddepth ? gu : nullptr,
                              dwarp_ddepth ? gv : nullptr)) {
        continue;
      }
      result.validity(x, y) = 1;
      for (int c = 0; c < 3; ++c) result.warped(x, y, c) = px[c];

      if (dwarp_ddepth) {
        // u = fx * (s_x + t_x w) / (s_z + t_z w) + cx with w = 1/d.
        const double du_dw =
            fx * (t_rel.x() * q.z() - q.x() * t_rel.z()) * inv_qz * inv_qz;
        const double dv_dw =
            fy * (t_rel.y() * q.z() - q.y() * t_rel.z()) * inv_qz * inv_qz;
        const double dw_dd = -inv_d * inv_d;
        for (int c = 0; c < 3; ++c) {
          (*dwarp_ddepth)(x, y, c) = (gu[c] * du_dw + gv[c] * dv_dw) * dw_dd;
        }
      }
    }
  }
  return result;
}

double neighbor_score(const ViewCalibration& ref, const ViewCalibration& cand,
                      double mean_depth) {
  const Eigen::Vector3d c_ref = ref.camera_center();
  const Eigen::Vector3d c_cand = cand.camera_center();
  const Eigen::Vector3d p_ref = c_ref + mean_depth * ref.optical_axis();
  const Eigen::Vector3d p_cand = c_cand + mean_depth * cand.optical_axis();
  const Eigen::Vector3d mid = 0.5 * (p_ref + p_cand);

  const Eigen::Vector3d a = mid - c_ref;
  const Eigen::Vector3d b = mid - c_cand;
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  const double cosang = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  const double theta = std::acos(cosang) * (180.0 / M_PI);

  constexpr double kPreferred = 10.0;
  const double sigma = theta < kPreferred ? 5.0 : 15.0;
  const double d = theta - kPreferred;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

std::vector<int> select_neighbors(int ref_id,
                                  const std::vector<ViewCalibration>& views,
                                  int n, double mean_depth) {
  if (n < 1) throw std::invalid_argument("select_neighbors: n must be >= 1");
  const ViewCalibration* ref = nullptr;
  for (const auto& v : views) {
    if (v.view_id == ref_id) ref = &v;
  }
  if (!ref) {
    throw std::invalid_argument("select_neighbors: reference view not found");
  }

  struct Scored {
    double score;
    int id;
  };
  std::vector<Scored> scored;
  for (const auto& v : views) {
    if (v.view_id == ref_id) continue;
    scored.push_back({neighbor_score(*ref, v, mean_depth), v.view_id});
  }
  if (static_cast<int>(scored.size()) < n) {
    throw std::invalid_argument(
        "select_neighbors: fewer candidate views than requested");
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::vector<int> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(scored[i].id);
  return out;
}

ViewCalibration read_camera(const std::string& path, int view_id) {
  std::ifstream in(path);
  if (!in) throw io_error("read_camera: cannot open " + path);
  ViewCalibration v;
  v.view_id = view_id;
  in >> v.intrinsics.fx >> v.intrinsics.fy >> v.intrinsics.cx >> v.intrinsics.cy;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) in >> v.pose.rotation(r, c);
  }
  for (int r = 0; r < 3; ++r) in >> v.pose.translation(r);
  in >> v.width >> v.height;
  if (!in) throw io_error("read_camera: malformed camera file " + path);
  v.validate();
  return v;
}

void write_camera(const ViewCalibration& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_camera: cannot open " + path);
  out.precision(17);
  out << v.intrinsics.fx << " " << v.intrinsics.fy << " " << v.intrinsics.cx
      << " " << v.intrinsics.cy << "\n";
  for (int r = 0; r < 3; ++r) {
    out << v.pose.rotation(r, 0) << " " << v.pose.rotation(r, 1) << " "
        << v.pose.rotation(r, 2) << "\n";
  }
  out << v.pose.translation(0) << " " << v.pose.translation(1) << " "
      << v.pose.translation(2) << "\n";
  out << v.width << " " << v.height << "\n";
  if (!out) throw io_error("write_camera: write failed for " + path);
}

}  // namespace ddp
