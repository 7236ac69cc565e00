#include "fasttrack/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace fasttrack {

namespace {

constexpr double kStdWeightPosition = 1.0 / 20.0;
constexpr double kStdWeightVelocity = 1.0 / 160.0;

Matrix transition_matrix() {
    Matrix f = Matrix::identity(8);
    for (int i = 0; i < 4; ++i) f.at(i, i + 4) = 1.0;
    return f;
}

std::array<double, 4> measure(const BoundingBox& box) {
    return {box.center_x(), box.center_y(), box.aspect(), box.height};
}

// Cholesky factorization of a symmetric positive-definite 4x4 matrix.
Matrix cholesky4(const Matrix& s) {
    Matrix l(4, 4, 0.0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = s.at(i, j);
            for (int k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (sum <= 0.0) {
                    throw std::runtime_error(
                        "kalman: innovation covariance is not positive definite");
                }
                l.at(i, i) = std::sqrt(sum);
            } else {
                l.at(i, j) = sum / l.at(j, j);
            }
        }
    }
    return l;
}

// Solves S x = b for each column of b, given the Cholesky factor of S.
Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    for (int col = 0; col < b.cols; ++col) {
        for (int i = 0; i < 4; ++i) {  // forward
            double sum = x.at(i, col);
            for (int k = 0; k < i; ++k) sum -= l.at(i, k) * x.at(k, col);
            x.at(i, col) = sum / l.at(i, i);
        }
        for (int i = 3; i >= 0; --i) {  // backward
            double sum = x.at(i, col);
            for (int k = i + 1; k < 4; ++k) sum -= l.at(k, i) * x.at(k, col);
            x.at(i, col) = sum / l.at(i, i);
        }
    }
    return x;
}

Matrix projection_matrix() {
    Matrix h(4, 8, 0.0);
    for (int i = 0; i < 4; ++i) h.at(i, i) = 1.0;
    return h;
}

Matrix measurement_noise(double height) {
    Matrix r(4, 4, 0.0);
    const double sp = kStdWeightPosition * height;
    r.at(0, 0) = sp * sp;
    r.at(1, 1) = sp * sp;
    r.at(2, 2) = 1e-1 * 1e-1;
    r.at(3, 3) = sp * sp;
    return r;
}

Matrix symmetrize(const Matrix& m) {
    Matrix out = m;
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < i; ++j) {
            const double v = 0.5 * (m.at(i, j) + m.at(j, i));
            out.at(i, j) = v;
            out.at(j, i) = v;
        }
    }
    return out;
}

// Projected measurement distribution: mean H x and covariance H P H^T + R.
void project(const KalmanState& state, std::array<double, 4>& mean_out, Matrix& cov_out) {
    for (int i = 0; i < 4; ++i) mean_out[static_cast<std::size_t>(i)] = state.mean[static_cast<std::size_t>(i)];
    cov_out = Matrix(4, 4, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cov_out.at(i, j) = state.cov.at(i, j);
    const Matrix r = measurement_noise(state.mean[3]);
    cov_out = add(cov_out, r);
}

}  // namespace

KalmanState kalman_initiate(const BoundingBox& box) {
    if (box.width <= 0.0 || box.height <= 0.0) {
        throw std::invalid_argument("kalman_initiate: box extents must be positive");
    }
    KalmanState state;
    const auto z = measure(box);
    for (int i = 0; i < 4; ++i) state.mean[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)];
    for (int i = 4; i < 8; ++i) state.mean[static_cast<std::size_t>(i)] = 0.0;

    const double h = box.height;
    const std::array<double, 8> stds = {
        2.0 * kStdWeightPosition * h, 2.0 * kStdWeightPosition * h, 1e-2,
        2.0 * kStdWeightPosition * h, 10.0 * kStdWeightVelocity * h,
        10.0 * kStdWeightVelocity * h, 1e-5, 10.0 * kStdWeightVelocity * h};
    state.cov = Matrix(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) {
        state.cov.at(i, i) = stds[static_cast<std::size_t>(i)] * stds[static_cast<std::size_t>(i)];
    }
    return state;
}

KalmanState kalman_predict(const KalmanState& state) {
    static const Matrix f = transition_matrix();
    static const Matrix ft = transpose(f);

    KalmanState out;
    for (int i = 0; i < 4; ++i) {
        out.mean[static_cast<std::size_t>(i)] =
            state.mean[static_cast<std::size_t>(i)] + state.mean[static_cast<std::size_t>(i + 4)];
        out.mean[static_cast<std::size_t>(i + 4)] = state.mean[static_cast<std::size_t>(i + 4)];
    }

    const double h = state.mean[3];
    const std::array<double, 8> stds = {
        kStdWeightPosition * h, kStdWeightPosition * h, 1e-2, kStdWeightPosition * h,
        kStdWeightVelocity * h, kStdWeightVelocity * h, 1e-5, kStdWeightVelocity * h};
    Matrix q(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) {
        q.at(i, i) = stds[static_cast<std::size_t>(i)] * stds[static_cast<std::size_t>(i)];
    }
    out.cov = symmetrize(add(matmul(matmul(f, state.cov), ft), q));
    return out;
}

KalmanState kalman_update(const KalmanState& state, const BoundingBox& measurement) {
    static const Matrix h = projection_matrix();
    static const Matrix ht = transpose(h);

    std::array<double, 4> projected_mean;
    Matrix s;
    project(state, projected_mean, s);
    const Matrix l = cholesky4(s);

    // Gain K = P H^T S^{-1}; computed as solve(S, H P)^T since S is symmetric.
    const Matrix hp = matmul(h, state.cov);  // 4 x 8
    const Matrix gain = transpose(cholesky_solve(l, hp));  // 8 x 4

    const auto z = measure(measurement);
    std::array<double, 4> innovation;
    for (int i = 0; i < 4; ++i) {
        innovation[static_cast<std::size_t>(i)] =
            z[static_cast<std::size_t>(i)] - projected_mean[static_cast<std::size_t>(i)];
    }

    KalmanState out;
    out.mean = state.mean;
    for (int i = 0; i < 8; ++i) {
        double delta = 0.0;
        for (int j = 0; j < 4; ++j) delta += gain.at(i, j) * innovation[static_cast<std::size_t>(j)];
        out.mean[static_cast<std::size_t>(i)] += delta;
    }

    // Joseph form keeps the covariance symmetric positive semi-definite.
    Matrix ikh = subtract(Matrix::identity(8), matmul(gain, h));
    const Matrix r = measurement_noise(state.mean[3]);
    out.cov = add(matmul(matmul(ikh, state.cov), transpose(ikh)),
                  matmul(matmul(gain, r), transpose(gain)));
    out.cov = symmetrize(out.cov);
    return out;
}

double kalman_gating_distance(const KalmanState& state, const BoundingBox& measurement) {
    std::array<double, 4> projected_mean;
    Matrix s;
    project(state, projected_mean, s);
    const Matrix l = cholesky4(s);

    const auto z = measure(measurement);
    Matrix y(4, 1);
    for (int i = 0; i < 4; ++i) {
        y.at(i, 0) = z[static_cast<std::size_t>(i)] - projected_mean[static_cast<std::size_t>(i)];
    }
    const Matrix solved = cholesky_solve(l, y);
    double d2 = 0.0;
    for (int i = 0; i < 4; ++i) d2 += y.at(i, 0) * solved.at(i, 0);
    return d2;
}

BoundingBox state_box(const KalmanState& state) {
    const double height = state.mean[3];
    const double width = state.mean[2] * height;
    return {state.mean[0] - 0.5 * width, state.mean[1] - 0.5 * height, width, height};
}

}  // namespace fasttrack
