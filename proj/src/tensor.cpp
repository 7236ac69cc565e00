#include "fasttrack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fasttrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

}  // namespace

std::string shape_string(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

bool all_finite(const Matrix& m) {
    for (double v : m.values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ, lhs " + shape_string(a) +
                                  ", rhs " + shape_string(b));
    Matrix out(a.rows, b.cols, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add: shapes differ, " + shape_string(a) + " vs " + shape_string(b));
    Matrix out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b),
            "subtract: shapes differ, " + shape_string(a) + " vs " + shape_string(b));
    Matrix out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.values) v *= s;
    return out;
}

Matrix concat_rows(const Matrix& top, const Matrix& bottom) {
    require(top.cols == bottom.cols, "concat_rows: column counts differ, " + shape_string(top) +
                                         " vs " + shape_string(bottom));
    Matrix out(top.rows + bottom.rows, top.cols);
    std::copy(top.values.begin(), top.values.end(), out.values.begin());
    std::copy(bottom.values.begin(), bottom.values.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(top.values.size()));
    return out;
}

Matrix row_softmax(const Matrix& m) {
    Matrix out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m.cols; ++j) row_max = std::max(row_max, m.at(i, j));
        double denom = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            const double e = std::exp(m.at(i, j) - row_max);
            out.at(i, j) = e;
            denom += e;
        }
        for (int j = 0; j < m.cols; ++j) out.at(i, j) /= denom;
    }
    return out;
}

Matrix layer_norm(const Matrix& m, const std::vector<double>& gain,
                  const std::vector<double>& shift, double eps) {
    require(static_cast<int>(gain.size()) == m.cols && static_cast<int>(shift.size()) == m.cols,
            "layer_norm: affine parameter length does not match " + shape_string(m));
    Matrix out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        double mean = 0.0;
        for (int j = 0; j < m.cols; ++j) mean += m.at(i, j);
        mean /= m.cols;
        double var = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            const double d = m.at(i, j) - mean;
            var += d * d;
        }
        var /= m.cols;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < m.cols; ++j) {
            out.at(i, j) = (m.at(i, j) - mean) * inv * gain[j] + shift[j];
        }
    }
    return out;
}

LinearLayer make_linear(Rng& rng, int in_dim, int out_dim) {
    const double limit = std::sqrt(6.0 / (in_dim + out_dim));
    LinearLayer layer;
    layer.weight = Matrix(out_dim, in_dim);
    for (double& w : layer.weight.values) w = rng.uniform(-limit, limit);
    layer.bias.assign(static_cast<std::size_t>(out_dim), 0.0);
    return layer;
}

LinearLayer identity_linear(int dim) {
    LinearLayer layer;
    layer.weight = Matrix::identity(dim);
    layer.bias.assign(static_cast<std::size_t>(dim), 0.0);
    return layer;
}

LinearLayer zero_linear(int in_dim, int out_dim) {
    LinearLayer layer;
    layer.weight = Matrix(out_dim, in_dim, 0.0);
    layer.bias.assign(static_cast<std::size_t>(out_dim), 0.0);
    return layer;
}

Matrix linear_forward(const LinearLayer& layer, const Matrix& x) {
    require(x.cols == layer.weight.cols, "linear_forward: input " + shape_string(x) +
                                             " incompatible with weight " +
                                             shape_string(layer.weight));
    const int out_dim = layer.weight.rows;
    Matrix out(x.rows, out_dim);
    for (int i = 0; i < x.rows; ++i) {
        for (int o = 0; o < out_dim; ++o) {
            double sum = 0.0;
            for (int t = 0; t < x.cols; ++t) sum += x.at(i, t) * layer.weight.at(o, t);
            out.at(i, o) = sum + layer.bias[static_cast<std::size_t>(o)];
        }
    }
    return out;
}

AttentionResult scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    require(q.cols == k.cols, "scaled_dot_attention: query " + shape_string(q) +
                                  " and key " + shape_string(k) + " feature dims differ");
    require(k.rows == v.rows, "scaled_dot_attention: key " + shape_string(k) + " and value " +
                                  shape_string(v) + " row counts differ");
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(q.cols));
    Matrix scores = scale(matmul(q, transpose(k)), inv_scale);
    AttentionResult res;
    res.weights = row_softmax(scores);
    res.out = matmul(res.weights, v);
    return res;
}

}  // namespace fasttrack
