#ifndef FASTTRACK_TENSOR_HPP
#define FASTTRACK_TENSOR_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "fasttrack/rng.hpp"

namespace fasttrack {

class ShapeError : public std::runtime_error {
  public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major matrix of doubles. The substrate for query blocks,
// attention maps and projections; deliberately minimal and deterministic.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major, size == rows * cols

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

    static Matrix identity(int n);

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

std::string shape_string(const Matrix& m);
bool all_finite(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Matrix concat_rows(const Matrix& top, const Matrix& bottom);

// Row-wise softmax with max-subtraction.
Matrix row_softmax(const Matrix& m);

// Per-row normalization to mean 0 / unit variance (up to eps), then the
// per-column affine gain/shift.
Matrix layer_norm(const Matrix& m, const std::vector<double>& gain,
                  const std::vector<double>& shift, double eps = 1e-5);

struct LayerNormParams {
    std::vector<double> gain;
    std::vector<double> shift;

    static LayerNormParams unit(int dim) {
        return {std::vector<double>(static_cast<std::size_t>(dim), 1.0),
                std::vector<double>(static_cast<std::size_t>(dim), 0.0)};
    }
};

inline Matrix layer_norm(const Matrix& m, const LayerNormParams& p, double eps = 1e-5) {
    return layer_norm(m, p.gain, p.shift, eps);
}

// Affine map x -> x W^T + b applied per row.
struct LinearLayer {
    Matrix weight;             // out_dim x in_dim
    std::vector<double> bias;  // out_dim

    int in_dim() const { return weight.cols; }
    int out_dim() const { return weight.rows; }
};

// Xavier-uniform weights, zero bias.
LinearLayer make_linear(Rng& rng, int in_dim, int out_dim);
LinearLayer identity_linear(int dim);
LinearLayer zero_linear(int in_dim, int out_dim);

Matrix linear_forward(const LinearLayer& layer, const Matrix& x);

struct AttentionResult {
    Matrix out;      // q.rows x v.cols
    Matrix weights;  // q.rows x k.rows, row-stochastic
};

// softmax(q k^T / sqrt(q.cols)) v
AttentionResult scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v);

}  // namespace fasttrack

#endif
