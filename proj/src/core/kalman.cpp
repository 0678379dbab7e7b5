#include "kalman.hpp"

namespace rnode::track {

Vec4 bbox_to_measurement(const geom::BBox& b) {
  Vec4 z;
  z << b.x + b.w / 2.0, b.y + b.h / 2.0, b.w / b.h, b.h;
  return z;
}

geom::BBox measurement_to_bbox(const Vec4& z) {
  double h = z(3);
  double w = z(2) * h;
  return {z(0) - w / 2.0, z(1) - h / 2.0, w, h};
}

namespace {

Mat8 motion_matrix() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

Eigen::Matrix<double, 4, 8> observation_matrix() {
  Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

}  // namespace

void BoxKalmanFilter::initiate(const Vec4& z, Vec8& mean, Mat8& cov) const {
  mean.setZero();
  mean.head<4>() = z;
  double h = z(3);
  Vec8 std;
  std << 2 * noise_.std_weight_position * h, 2 * noise_.std_weight_position * h, 1e-2,
      2 * noise_.std_weight_position * h, 10 * noise_.std_weight_velocity * h,
      10 * noise_.std_weight_velocity * h, 1e-5, 10 * noise_.std_weight_velocity * h;
  cov = std.array().square().matrix().asDiagonal();
}

void BoxKalmanFilter::predict(Vec8& mean, Mat8& cov) const {
  const Mat8 f = motion_matrix();
  double h = mean(3);
  Vec8 std;
  std << noise_.std_weight_position * h, noise_.std_weight_position * h, 1e-2,
      noise_.std_weight_position * h, noise_.std_weight_velocity * h,
      noise_.std_weight_velocity * h, 1e-5, noise_.std_weight_velocity * h;
  Mat8 q = (std.array().square() * noise_.q_scale).matrix().asDiagonal();
  mean = f * mean;
  cov = f * cov * f.transpose() + q;
}

void BoxKalmanFilter::update(Vec8& mean, Mat8& cov, const Vec4& z) const {
  const auto hm = observation_matrix();
  double h = mean(3);
  Vec4 std;
  std << noise_.std_weight_position * h, noise_.std_weight_position * h, 1e-1,
      noise_.std_weight_position * h;
  Mat4 r = (std.array().square() * noise_.r_scale).matrix().asDiagonal();
  Mat4 s = hm * cov * hm.transpose() + r;
  Eigen::Matrix<double, 8, 4> k = cov * hm.transpose() * s.inverse();
  mean = mean + k * (z - hm * mean);
  Mat8 ikh = Mat8::Identity() - k * hm;
  // Joseph form keeps the posterior covariance symmetric PSD.
  cov = ikh * cov * ikh.transpose() + k * r * k.transpose();
  cov = ((cov + cov.transpose()) / 2.0).eval();
}

}  // namespace rnode::track
