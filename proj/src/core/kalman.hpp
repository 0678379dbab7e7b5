#pragma once

#include <Eigen/Dense>

#include "geometry.hpp"

namespace rnode::track {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

// Box measurement in (cx, cy, aspect, height) space.
Vec4 bbox_to_measurement(const geom::BBox& b);
geom::BBox measurement_to_bbox(const Vec4& z);

// Constant-velocity filter over (cx, cy, a, h) with per-frame velocities.
// Process/measurement noise scale with box height; scales of 0 give a
// noise-free model (used by the convergence checks).
class BoxKalmanFilter {
public:
  struct Noise {
    double std_weight_position = 1.0 / 20.0;
    double std_weight_velocity = 1.0 / 160.0;
    double q_scale = 1.0;  // 0 turns process noise off
    double r_scale = 1.0;
  };

  BoxKalmanFilter() = default;
  explicit BoxKalmanFilter(Noise noise) : noise_(noise) {}

  // State initialized from a first measurement, zero velocity.
  void initiate(const Vec4& z, Vec8& mean, Mat8& cov) const;
  void predict(Vec8& mean, Mat8& cov) const;
  void update(Vec8& mean, Mat8& cov, const Vec4& z) const;

private:
  Noise noise_{};
};

}  // namespace rnode::track
