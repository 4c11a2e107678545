#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/tensor.hpp"

namespace pathnet {

// Reverse-mode autodiff on a dynamic graph. Each op allocates a Node holding
// its value and a closure that scatters the upstream gradient into the
// parents. Graphs are rebuilt every forward pass and are confined to one
// thread; distinct graphs may run concurrently.

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily on first accumulation
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward_fn;

    void accum(const Tensor& delta) {
        if (!requires_grad) return;
        if (grad.numel() == 0) {
            grad = delta;
            return;
        }
        double* g = grad.data();
        const double* d = delta.data();
        const std::size_t n = grad.numel();
        for (std::size_t i = 0; i < n; ++i) g[i] += d[i];
    }
};

class Var {
public:
    Var() = default;
    explicit Var(NodePtr n) : node_(std::move(n)) {}

    static Var leaf(Tensor value, bool requires_grad = false) {
        auto n = std::make_shared<Node>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        return Var(std::move(n));
    }

    static Var constant(Tensor value) { return leaf(std::move(value), false); }

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    bool requires_grad() const { return node_->requires_grad; }

    const Tensor& grad() const {
        if (node_->grad.numel() == 0) {
            // never touched by backward: report zeros of the right shape
            node_->grad = Tensor::zeros(node_->value.shape());
        }
        return node_->grad;
    }

    NodePtr node() const { return node_; }

private:
    NodePtr node_;
};

namespace detail {

inline NodePtr make_node(Tensor value, std::vector<NodePtr> parents) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    return n;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ContractError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                            b.shape_str());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise ops

inline Var add(const Var& a, const Var& b) {
    detail::check_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    const double* bp = b.value().data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) op[i] += bp[i];
    auto n = detail::make_node(std::move(out), {a.node(), b.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            self.parents[0]->accum(self.grad);
            self.parents[1]->accum(self.grad);
        };
    }
    return Var(n);
}

inline Var sub(const Var& a, const Var& b) {
    detail::check_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    const double* bp = b.value().data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) op[i] -= bp[i];
    auto n = detail::make_node(std::move(out), {a.node(), b.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            self.parents[0]->accum(self.grad);
            if (self.parents[1]->requires_grad) {
                Tensor neg = self.grad;
                for (auto& v : neg.vec()) v = -v;
                self.parents[1]->accum(neg);
            }
        };
    }
    return Var(n);
}

inline Var mul(const Var& a, const Var& b) {
    detail::check_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    const double* bp = b.value().data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) op[i] *= bp[i];
    auto n = detail::make_node(std::move(out), {a.node(), b.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            const std::size_t m = self.grad.numel();
            if (pa.requires_grad) {
                Tensor da(self.grad.shape());
                for (std::size_t i = 0; i < m; ++i) da[i] = self.grad[i] * pb.value[i];
                pa.accum(da);
            }
            if (pb.requires_grad) {
                Tensor db(self.grad.shape());
                for (std::size_t i = 0; i < m; ++i) db[i] = self.grad[i] * pa.value[i];
                pb.accum(db);
            }
        };
    }
    return Var(n);
}

inline Var scale(const Var& a, double c) {
    Tensor out = a.value();
    for (auto& v : out.vec()) v *= c;
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [c](Node& self) {
            Tensor da = self.grad;
            for (auto& v : da.vec()) v *= c;
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

inline Var tanh(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.vec()) v = std::tanh(v);
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            Tensor da(self.grad.shape());
            for (std::size_t i = 0; i < da.numel(); ++i) {
                const double y = self.value[i];
                da[i] = self.grad[i] * (1.0 - y * y);
            }
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

inline Var relu(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.vec()) v = v > 0.0 ? v : 0.0;
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Tensor da(self.grad.shape());
            for (std::size_t i = 0; i < da.numel(); ++i) {
                da[i] = pa.value[i] > 0.0 ? self.grad[i] : 0.0;
            }
            pa.accum(da);
        };
    }
    return Var(n);
}

// Zeroes entries with probability p and scales survivors by 1/(1-p).
// The mask is a pure function of the seed.
inline Var dropout(const Var& a, double p, uint64_t seed) {
    if (p < 0.0 || p >= 1.0) {
        throw ConfigError("dropout: p must be in [0,1), got " + std::to_string(p));
    }
    if (p == 0.0) return a;
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(a.value().numel());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        const double m = rng.uniform() < p ? 0.0 : keep_scale;
        (*mask)[i] = m;
        out[i] *= m;
    }
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [mask](Node& self) {
            Tensor da(self.grad.shape());
            for (std::size_t i = 0; i < da.numel(); ++i) da[i] = self.grad[i] * (*mask)[i];
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// linear algebra

inline Var matmul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
        throw ContractError("matmul: incompatible shapes " + av.shape_str() + " and " +
                            bv.shape_str());
    }
    Tensor out({av.rows(), bv.cols()});
    detail::matmul_into(av, bv, out);
    auto n = detail::make_node(std::move(out), {a.node(), b.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                Tensor da = Tensor::zeros(pa.value.shape());
                detail::matmul_nt_acc(self.grad, pb.value, da);  // dA = dC * B^T
                pa.accum(da);
            }
            if (pb.requires_grad) {
                Tensor db = Tensor::zeros(pb.value.shape());
                detail::matmul_tn_acc(pa.value, self.grad, db);  // dB = A^T * dC
                pb.accum(db);
            }
        };
    }
    return Var(n);
}

inline Var transpose(const Var& a) {
    const Tensor& av = a.value();
    if (av.rank() != 2) throw ContractError("transpose: rank-2 required, got " + av.shape_str());
    const int m = av.rows(), k = av.cols();
    Tensor out({k, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) out(j, i) = av(i, j);
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [m, k](Node& self) {
            Tensor da({m, k});
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) da(i, j) = self.grad(j, i);
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

// X [m x n] + b [n] broadcast over rows
inline Var add_rowvec(const Var& x, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& bv = b.value();
    if (xv.rank() != 2 || static_cast<std::size_t>(xv.cols()) != bv.numel()) {
        throw ContractError("add_rowvec: shapes " + xv.shape_str() + " and " + bv.shape_str());
    }
    Tensor out = xv;
    const int m = xv.rows(), nC = xv.cols();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < nC; ++j) out(i, j) += bv[static_cast<std::size_t>(j)];
    auto n = detail::make_node(std::move(out), {x.node(), b.node()});
    if (n->requires_grad) {
        n->backward_fn = [m, nC](Node& self) {
            Node& px = *self.parents[0];
            Node& pb = *self.parents[1];
            if (px.requires_grad) px.accum(self.grad);
            if (pb.requires_grad) {
                Tensor db = Tensor::zeros(pb.value.shape());
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < nC; ++j) db[static_cast<std::size_t>(j)] += self.grad(i, j);
                pb.accum(db);
            }
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// shape ops

inline Var reshape(const Var& a, std::vector<int> shape) {
    Tensor out = a.value().reshaped(shape);
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            self.parents[0]->accum(self.grad.reshaped(self.parents[0]->value.shape()));
        };
    }
    return Var(n);
}

// stack k vectors (shape [n] or [1 x n]) into [k x n]
inline Var stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: empty input");
    const int n = static_cast<int>(rows[0].value().numel());
    const int k = static_cast<int>(rows.size());
    Tensor out({k, n});
    std::vector<NodePtr> parents;
    parents.reserve(rows.size());
    for (int r = 0; r < k; ++r) {
        if (static_cast<int>(rows[r].value().numel()) != n) {
            throw ContractError("stack_rows: inconsistent row lengths");
        }
        const double* src = rows[r].value().data();
        double* dst = out.data() + static_cast<std::size_t>(r) * n;
        std::copy(src, src + n, dst);
        parents.push_back(rows[r].node());
    }
    auto node = detail::make_node(std::move(out), std::move(parents));
    if (node->requires_grad) {
        node->backward_fn = [n](Node& self) {
            for (std::size_t r = 0; r < self.parents.size(); ++r) {
                Node& p = *self.parents[r];
                if (!p.requires_grad) continue;
                Tensor dr(p.value.shape());
                const double* g = self.grad.data() + r * static_cast<std::size_t>(n);
                std::copy(g, g + n, dr.data());
                p.accum(dr);
            }
        };
    }
    return Var(node);
}

inline Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: empty input");
    const int m = parts[0].value().rows();
    int total = 0;
    std::vector<NodePtr> parents;
    std::vector<int> widths;
    for (const auto& p : parts) {
        if (p.value().rank() != 2 || p.value().rows() != m) {
            throw ContractError("concat_cols: inconsistent shapes");
        }
        widths.push_back(p.value().cols());
        total += p.value().cols();
        parents.push_back(p.node());
    }
    Tensor out({m, total});
    int off = 0;
    for (std::size_t q = 0; q < parts.size(); ++q) {
        const Tensor& pv = parts[q].value();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < widths[q]; ++j) out(i, off + j) = pv(i, j);
        off += widths[q];
    }
    auto node = detail::make_node(std::move(out), std::move(parents));
    if (node->requires_grad) {
        node->backward_fn = [m, widths](Node& self) {
            int off2 = 0;
            for (std::size_t q = 0; q < self.parents.size(); ++q) {
                Node& p = *self.parents[q];
                if (p.requires_grad) {
                    Tensor dp({m, widths[q]});
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < widths[q]; ++j) dp(i, j) = self.grad(i, off2 + j);
                    p.accum(dp);
                }
                off2 += widths[q];
            }
        };
    }
    return Var(node);
}

inline Var col_slice(const Var& a, int start, int len) {
    const Tensor& av = a.value();
    if (av.rank() != 2 || start < 0 || len <= 0 || start + len > av.cols()) {
        throw ContractError("col_slice: invalid range [" + std::to_string(start) + "," +
                            std::to_string(start + len) + ") for " + av.shape_str());
    }
    const int m = av.rows();
    Tensor out({m, len});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < len; ++j) out(i, j) = av(i, start + j);
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [m, start, len](Node& self) {
            Node& p = *self.parents[0];
            Tensor da = Tensor::zeros(p.value.shape());
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < len; ++j) da(i, start + j) = self.grad(i, j);
            p.accum(da);
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// reductions

inline Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().vec()) s += v;
    auto n = detail::make_node(Tensor::scalar(s), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [](Node& self) {
            Node& p = *self.parents[0];
            Tensor da = Tensor::full(p.value.shape(), self.grad[0]);
            p.accum(da);
        };
    }
    return Var(n);
}

// mean over rows: [m x n] -> [n]
inline Var mean_rows(const Var& a) {
    const Tensor& av = a.value();
    if (av.rank() != 2) throw ContractError("mean_rows: rank-2 required, got " + av.shape_str());
    const int m = av.rows(), nC = av.cols();
    Tensor out({nC});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < nC; ++j) out[static_cast<std::size_t>(j)] += av(i, j);
    for (auto& v : out.vec()) v /= m;
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [m, nC](Node& self) {
            Tensor da({m, nC});
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < nC; ++j) da(i, j) = self.grad[static_cast<std::size_t>(j)] / m;
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

// per-block mean over rows: [(B*T) x n] -> [B x n]
inline Var block_mean_rows(const Var& a, int block_len) {
    const Tensor& av = a.value();
    if (av.rank() != 2 || block_len <= 0 || av.rows() % block_len != 0) {
        throw ContractError("block_mean_rows: rows " + av.shape_str() +
                            " not divisible by block length " + std::to_string(block_len));
    }
    const int blocks = av.rows() / block_len, nC = av.cols();
    Tensor out({blocks, nC});
    for (int b = 0; b < blocks; ++b)
        for (int t = 0; t < block_len; ++t)
            for (int j = 0; j < nC; ++j) out(b, j) += av(b * block_len + t, j);
    for (auto& v : out.vec()) v /= block_len;
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [blocks, block_len, nC](Node& self) {
            Tensor da({blocks * block_len, nC});
            for (int b = 0; b < blocks; ++b)
                for (int t = 0; t < block_len; ++t)
                    for (int j = 0; j < nC; ++j)
                        da(b * block_len + t, j) = self.grad(b, j) / block_len;
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

inline Var pick(const Var& a, std::size_t index) {
    if (index >= a.value().numel()) {
        throw ContractError("pick: index " + std::to_string(index) + " out of range for " +
                            a.value().shape_str());
    }
    auto n = detail::make_node(Tensor::scalar(a.value()[index]), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [index](Node& self) {
            Node& p = *self.parents[0];
            Tensor da = Tensor::zeros(p.value.shape());
            da[index] = self.grad[0];
            p.accum(da);
        };
    }
    return Var(n);
}

// log(max(x, floor)); entries at or below the floor get zero gradient
inline Var log_floor(const Var& a, double floor) {
    Tensor out = a.value();
    for (auto& v : out.vec()) v = std::log(std::max(v, floor));
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [floor](Node& self) {
            Node& p = *self.parents[0];
            Tensor da(self.grad.shape());
            for (std::size_t i = 0; i < da.numel(); ++i) {
                const double x = p.value[i];
                da[i] = x > floor ? self.grad[i] / x : 0.0;
            }
            p.accum(da);
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// softmax / layer norm

namespace detail {

// softmax over contiguous stretches of `len` values starting at base
inline void softmax_span(const double* in, double* out, int len) {
    double mx = in[0];
    for (int i = 1; i < len; ++i) mx = std::max(mx, in[i]);
    double denom = 0.0;
    for (int i = 0; i < len; ++i) {
        out[i] = std::exp(in[i] - mx);
        denom += out[i];
    }
    for (int i = 0; i < len; ++i) out[i] /= denom;
}

// dx = y .* (g - dot(g, y)) over a span
inline void softmax_span_backward(const double* y, const double* g, double* dx, int len) {
    double dot = 0.0;
    for (int i = 0; i < len; ++i) dot += g[i] * y[i];
    for (int i = 0; i < len; ++i) dx[i] = y[i] * (g[i] - dot);
}

}  // namespace detail

// softmax along an axis; rank-1 tensors use axis 0
inline Var softmax(const Var& a, int axis) {
    const Tensor& av = a.value();
    Tensor out(av.shape());
    if (av.rank() == 1) {
        if (axis != 0) throw ContractError("softmax: axis must be 0 for rank-1");
        detail::softmax_span(av.data(), out.data(), static_cast<int>(av.numel()));
    } else if (av.rank() == 2) {
        const int m = av.rows(), nC = av.cols();
        if (axis == 1) {
            for (int i = 0; i < m; ++i)
                detail::softmax_span(av.data() + static_cast<std::size_t>(i) * nC,
                                     out.data() + static_cast<std::size_t>(i) * nC, nC);
        } else if (axis == 0) {
            std::vector<double> col(m), sm(m);
            for (int j = 0; j < nC; ++j) {
                for (int i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = av(i, j);
                detail::softmax_span(col.data(), sm.data(), m);
                for (int i = 0; i < m; ++i) out(i, j) = sm[static_cast<std::size_t>(i)];
            }
        } else {
            throw ContractError("softmax: invalid axis " + std::to_string(axis));
        }
    } else {
        throw ContractError("softmax: rank-1 or rank-2 required, got " + av.shape_str());
    }
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [axis](Node& self) {
            const Tensor& y = self.value;
            Tensor da(y.shape());
            if (y.rank() == 1 || (y.rank() == 2 && axis == 1)) {
                const int m = y.rank() == 1 ? 1 : y.rows();
                const int len = y.rank() == 1 ? static_cast<int>(y.numel()) : y.cols();
                for (int i = 0; i < m; ++i) {
                    const std::size_t off = static_cast<std::size_t>(i) * len;
                    detail::softmax_span_backward(y.data() + off, self.grad.data() + off,
                                                  da.data() + off, len);
                }
            } else {
                const int m = y.rows(), nC = y.cols();
                std::vector<double> yc(m), gc(m), dc(m);
                for (int j = 0; j < nC; ++j) {
                    for (int i = 0; i < m; ++i) {
                        yc[static_cast<std::size_t>(i)] = y(i, j);
                        gc[static_cast<std::size_t>(i)] = self.grad(i, j);
                    }
                    detail::softmax_span_backward(yc.data(), gc.data(), dc.data(), m);
                    for (int i = 0; i < m; ++i) da(i, j) = dc[static_cast<std::size_t>(i)];
                }
            }
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

// softmax within consecutive length-`block_len` stretches of a flat vector
inline Var block_softmax(const Var& a, int block_len) {
    const Tensor& av = a.value();
    const int total = static_cast<int>(av.numel());
    if (block_len <= 0 || total % block_len != 0) {
        throw ContractError("block_softmax: length " + std::to_string(total) +
                            " not divisible by block length " + std::to_string(block_len));
    }
    Tensor out(av.shape());
    for (int off = 0; off < total; off += block_len)
        detail::softmax_span(av.data() + off, out.data() + off, block_len);
    auto n = detail::make_node(std::move(out), {a.node()});
    if (n->requires_grad) {
        n->backward_fn = [block_len, total](Node& self) {
            Tensor da(self.value.shape());
            for (int off = 0; off < total; off += block_len)
                detail::softmax_span_backward(self.value.data() + off, self.grad.data() + off,
                                              da.data() + off, block_len);
            self.parents[0]->accum(da);
        };
    }
    return Var(n);
}

// Row-wise layer normalization with learned gain and bias:
//   y = gain .* (x - mean) / sqrt(var + eps) + bias          (population var)
inline Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
    if (eps <= 0.0) throw ContractError("layer_norm: eps must be positive");
    const Tensor& xv = x.value();
    const int m = xv.rank() == 2 ? xv.rows() : 1;
    const int d = xv.rank() == 2 ? xv.cols() : static_cast<int>(xv.numel());
    if (static_cast<std::size_t>(d) != gain.value().numel() ||
        static_cast<std::size_t>(d) != bias.value().numel()) {
        throw ContractError("layer_norm: gain/bias length must match row width " +
                            std::to_string(d));
    }
    Tensor out(xv.shape());
    auto xhat = std::make_shared<std::vector<double>>(xv.numel());
    auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<std::size_t>(m));
    const double* g = gain.value().data();
    const double* b = bias.value().data();
    for (int i = 0; i < m; ++i) {
        const double* row = xv.data() + static_cast<std::size_t>(i) * d;
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += row[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= d;
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_sigma)[static_cast<std::size_t>(i)] = is;
        for (int j = 0; j < d; ++j) {
            const double xh = (row[j] - mean) * is;
            (*xhat)[static_cast<std::size_t>(i) * d + j] = xh;
            out[static_cast<std::size_t>(i) * d + j] = g[j] * xh + b[j];
        }
    }
    auto n = detail::make_node(std::move(out), {x.node(), gain.node(), bias.node()});
    if (n->requires_grad) {
        n->backward_fn = [m, d, xhat, inv_sigma](Node& self) {
            Node& px = *self.parents[0];
            Node& pg = *self.parents[1];
            Node& pb = *self.parents[2];
            const double* gv = pg.value.data();
            if (pg.requires_grad || pb.requires_grad) {
                Tensor dg = Tensor::zeros(pg.value.shape());
                Tensor db = Tensor::zeros(pb.value.shape());
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < d; ++j) {
                        const double up = self.grad[static_cast<std::size_t>(i) * d + j];
                        dg[static_cast<std::size_t>(j)] +=
                            up * (*xhat)[static_cast<std::size_t>(i) * d + j];
                        db[static_cast<std::size_t>(j)] += up;
                    }
                }
                if (pg.requires_grad) pg.accum(dg);
                if (pb.requires_grad) pb.accum(db);
            }
            if (px.requires_grad) {
                Tensor dx(px.value.shape());
                for (int i = 0; i < m; ++i) {
                    const std::size_t off = static_cast<std::size_t>(i) * d;
                    double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                    for (int j = 0; j < d; ++j) {
                        const double dxh = self.grad[off + j] * gv[j];
                        mean_dxh += dxh;
                        mean_dxh_xh += dxh * (*xhat)[off + j];
                    }
                    mean_dxh /= d;
                    mean_dxh_xh /= d;
                    const double is = (*inv_sigma)[static_cast<std::size_t>(i)];
                    for (int j = 0; j < d; ++j) {
                        const double dxh = self.grad[off + j] * gv[j];
                        dx[off + j] = is * (dxh - mean_dxh - (*xhat)[off + j] * mean_dxh_xh);
                    }
                }
                px.accum(dx);
            }
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// blocked attention primitives (B independent sequences of length block_len,
// stacked row-wise; one node instead of per-sequence graphs)

// Q,K,V: [(B*T) x d_h]; per block: softmax(Q K^T * scale) V
inline Var block_attention(const Var& q, const Var& k, const Var& v, int block_len, double scale) {
    const Tensor& qv = q.value();
    const Tensor& kv = k.value();
    const Tensor& vv = v.value();
    if (!qv.same_shape(kv) || !qv.same_shape(vv) || qv.rank() != 2 ||
        qv.rows() % block_len != 0) {
        throw ContractError("block_attention: Q/K/V must share shape [(B*T) x d], got " +
                            qv.shape_str() + ", " + kv.shape_str() + ", " + vv.shape_str() +
                            " with block length " + std::to_string(block_len));
    }
    const int blocks = qv.rows() / block_len;
    const int dh = qv.cols();
    const int T = block_len;
    Tensor out({qv.rows(), dh});
    // P holds the attention probabilities for every block, [T x T] each
    auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(blocks) * T * T);

    for (int b = 0; b < blocks; ++b) {
        const double* qb = qv.data() + static_cast<std::size_t>(b) * T * dh;
        const double* kb = kv.data() + static_cast<std::size_t>(b) * T * dh;
        const double* vb = vv.data() + static_cast<std::size_t>(b) * T * dh;
        double* ob = out.data() + static_cast<std::size_t>(b) * T * dh;
        double* pb = probs->data() + static_cast<std::size_t>(b) * T * T;
        std::vector<double> srow(static_cast<std::size_t>(T));
        for (int i = 0; i < T; ++i) {
            for (int j = 0; j < T; ++j) {
                double s = 0.0;
                const double* qi = qb + static_cast<std::size_t>(i) * dh;
                const double* kj = kb + static_cast<std::size_t>(j) * dh;
                for (int p = 0; p < dh; ++p) s += qi[p] * kj[p];
                srow[static_cast<std::size_t>(j)] = s * scale;
            }
            detail::softmax_span(srow.data(), pb + static_cast<std::size_t>(i) * T, T);
            double* orow = ob + static_cast<std::size_t>(i) * dh;
            for (int p = 0; p < dh; ++p) orow[p] = 0.0;
            for (int j = 0; j < T; ++j) {
                const double w = pb[static_cast<std::size_t>(i) * T + j];
                const double* vrow = vb + static_cast<std::size_t>(j) * dh;
                for (int p = 0; p < dh; ++p) orow[p] += w * vrow[p];
            }
        }
    }

    auto n = detail::make_node(std::move(out), {q.node(), k.node(), v.node()});
    if (n->requires_grad) {
        n->backward_fn = [blocks, T, dh, scale, probs](Node& self) {
            Node& pq = *self.parents[0];
            Node& pk = *self.parents[1];
            Node& pv = *self.parents[2];
            Tensor dq = Tensor::zeros(pq.value.shape());
            Tensor dk = Tensor::zeros(pk.value.shape());
            Tensor dv = Tensor::zeros(pv.value.shape());
            std::vector<double> dprow(static_cast<std::size_t>(T));
            std::vector<double> dsrow(static_cast<std::size_t>(T));
            for (int b = 0; b < blocks; ++b) {
                const std::size_t moff = static_cast<std::size_t>(b) * T * dh;
                const double* qb = pq.value.data() + moff;
                const double* kb = pk.value.data() + moff;
                const double* vb = pv.value.data() + moff;
                const double* gb = self.grad.data() + moff;
                const double* pb = probs->data() + static_cast<std::size_t>(b) * T * T;
                double* dqb = dq.data() + moff;
                double* dkb = dk.data() + moff;
                double* dvb = dv.data() + moff;
                for (int i = 0; i < T; ++i) {
                    const double* grow = gb + static_cast<std::size_t>(i) * dh;
                    const double* prow = pb + static_cast<std::size_t>(i) * T;
                    // dV += P^T dO ; dP = dO V^T
                    for (int j = 0; j < T; ++j) {
                        const double* vrow = vb + static_cast<std::size_t>(j) * dh;
                        double* dvrow = dvb + static_cast<std::size_t>(j) * dh;
                        double s = 0.0;
                        const double w = prow[j];
                        for (int p = 0; p < dh; ++p) {
                            dvrow[p] += w * grow[p];
                            s += grow[p] * vrow[p];
                        }
                        dprow[static_cast<std::size_t>(j)] = s;
                    }
                    detail::softmax_span_backward(prow, dprow.data(), dsrow.data(), T);
                    // dQ_i += scale * sum_j dS_ij K_j ; dK_j += scale * dS_ij Q_i
                    double* dqrow = dqb + static_cast<std::size_t>(i) * dh;
                    const double* qrow = qb + static_cast<std::size_t>(i) * dh;
                    for (int j = 0; j < T; ++j) {
                        const double ds = dsrow[static_cast<std::size_t>(j)] * scale;
                        const double* krow = kb + static_cast<std::size_t>(j) * dh;
                        double* dkrow = dkb + static_cast<std::size_t>(j) * dh;
                        for (int p = 0; p < dh; ++p) {
                            dqrow[p] += ds * krow[p];
                            dkrow[p] += ds * qrow[p];
                        }
                    }
                }
            }
            if (pq.requires_grad) pq.accum(dq);
            if (pk.requires_grad) pk.accum(dk);
            if (pv.requires_grad) pv.accum(dv);
        };
    }
    return Var(n);
}

// weighted per-block row sums: Z [(B*T) x d], w [(B*T)] -> [B x d]
inline Var block_weighted_sum(const Var& z, const Var& w, int block_len) {
    const Tensor& zv = z.value();
    const Tensor& wv = w.value();
    if (zv.rank() != 2 || wv.numel() != static_cast<std::size_t>(zv.rows()) ||
        zv.rows() % block_len != 0) {
        throw ContractError("block_weighted_sum: shapes " + zv.shape_str() + " and " +
                            wv.shape_str() + " with block length " + std::to_string(block_len));
    }
    const int blocks = zv.rows() / block_len, d = zv.cols(), T = block_len;
    Tensor out({blocks, d});
    for (int b = 0; b < blocks; ++b)
        for (int t = 0; t < T; ++t) {
            const double wt = wv[static_cast<std::size_t>(b) * T + t];
            for (int j = 0; j < d; ++j) out(b, j) += wt * zv(b * T + t, j);
        }
    auto n = detail::make_node(std::move(out), {z.node(), w.node()});
    if (n->requires_grad) {
        n->backward_fn = [blocks, T, d](Node& self) {
            Node& pz = *self.parents[0];
            Node& pw = *self.parents[1];
            if (pz.requires_grad) {
                Tensor dz(pz.value.shape());
                for (int b = 0; b < blocks; ++b)
                    for (int t = 0; t < T; ++t) {
                        const double wt = pw.value[static_cast<std::size_t>(b) * T + t];
                        for (int j = 0; j < d; ++j) dz(b * T + t, j) = wt * self.grad(b, j);
                    }
                pz.accum(dz);
            }
            if (pw.requires_grad) {
                Tensor dw(pw.value.shape());
                for (int b = 0; b < blocks; ++b)
                    for (int t = 0; t < T; ++t) {
                        double s = 0.0;
                        for (int j = 0; j < d; ++j) s += self.grad(b, j) * pz.value(b * T + t, j);
                        dw[static_cast<std::size_t>(b) * T + t] = s;
                    }
                pw.accum(dw);
            }
        };
    }
    return Var(n);
}

// ---------------------------------------------------------------------------
// backward

// Populates grads of every node reachable from `root`. Root must be scalar.
inline void backward(const Var& root) {
    if (root.value().numel() != 1) {
        throw ContractError("backward: root must be scalar, got shape " +
                            root.value().shape_str());
    }
    // iterative post-order DFS; creation order is not tracked, so derive a
    // topological order from the parent edges
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx].get();
            ++idx;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root.node()->grad = Tensor::full(root.value().shape(), 1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && n->grad.numel() != 0) n->backward_fn(*n);
    }
}

// convenience operators
inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }

}  // namespace pathnet
