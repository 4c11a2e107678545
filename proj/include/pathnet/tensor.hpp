#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/rng.hpp"

namespace pathnet {

// Dense row-major array of doubles. Rank is dynamic but everything in this
// project is rank 1 or 2.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(checked_numel(shape_), 0.0);
    }

    Tensor(std::vector<int> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (checked_numel(shape_) != data_.size()) {
            throw ContractError("tensor: shape " + shape_str() + " does not match data length " +
                                std::to_string(data_.size()));
        }
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor uniform(std::vector<int> shape, double lo, double hi, Rng& rng) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = rng.uniform(lo, hi);
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::size_t numel() const { return data_.size(); }

    int rows() const { return rank() == 2 ? shape_[0] : (rank() == 1 ? shape_[0] : dim_error()); }
    int cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? 1 : dim_error()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * shape_[1] + c];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor reshaped(std::vector<int> shape) const {
        if (checked_numel(shape) != numel()) {
            throw ContractError("reshape: cannot view " + shape_str() + " as " +
                                shape_str(shape));
        }
        return Tensor(std::move(shape), data_);
    }

    bool has_nonfinite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return true;
        }
        return false;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

    std::string shape_str() const { return shape_str(shape_); }

    static std::string shape_str(const std::vector<int>& shape) {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) os << "x";
            os << shape[i];
        }
        os << "]";
        return os.str();
    }

private:
    static std::size_t checked_numel(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d < 0) throw ContractError("tensor: negative dimension in " + shape_str(shape));
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    [[noreturn]] int dim_error() const {
        throw ContractError("tensor: rows/cols undefined for rank-" + std::to_string(rank()) +
                            " shape " + shape_str());
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

namespace detail {

// out = a * b, shapes [m x k] x [k x n]
inline void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
    const int m = a.rows(), k = a.cols(), n = b.cols();
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    for (int i = 0; i < m; ++i) {
        double* orow = op + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) orow[j] = 0.0;
        for (int p = 0; p < k; ++p) {
            const double av = ap[static_cast<std::size_t>(i) * k + p];
            const double* brow = bp + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

// out += a * b^T, shapes [m x k] x [n x k] -> [m x n]
inline void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const int m = a.rows(), k = a.cols(), n = b.rows();
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    for (int i = 0; i < m; ++i) {
        const double* arow = ap + static_cast<std::size_t>(i) * k;
        double* orow = op + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = bp + static_cast<std::size_t>(j) * k;
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
            orow[j] += s;
        }
    }
}

// out += a^T * b, shapes [k x m] x [k x n] -> [m x n]
inline void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const int k = a.rows(), m = a.cols(), n = b.cols();
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    for (int p = 0; p < k; ++p) {
        const double* arow = ap + static_cast<std::size_t>(p) * m;
        const double* brow = bp + static_cast<std::size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = arow[i];
            double* orow = op + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

}  // namespace detail

}  // namespace pathnet
