#ifndef FASTTRACK_KALMAN_HPP
#define FASTTRACK_KALMAN_HPP

#include <array>

#include "fasttrack/box.hpp"
#include "fasttrack/tensor.hpp"

namespace fasttrack {

// Constant-velocity filter over the 8-dim state (cx, cy, aspect, h) plus
// velocities, measuring (cx, cy, aspect, h). Noise scales follow the usual
// height-proportional convention.
struct KalmanState {
    std::array<double, 8> mean{};
    Matrix cov;  // 8 x 8
};

KalmanState kalman_initiate(const BoundingBox& box);
KalmanState kalman_predict(const KalmanState& state);
KalmanState kalman_update(const KalmanState& state, const BoundingBox& measurement);

// Squared Mahalanobis distance of a measurement under the state's projected
// 4-dim measurement distribution.
double kalman_gating_distance(const KalmanState& state, const BoundingBox& measurement);

BoundingBox state_box(const KalmanState& state);

}  // namespace fasttrack

#endif
