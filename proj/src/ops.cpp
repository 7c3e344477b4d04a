#include "dan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "dan/errors.hpp"

namespace dan {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

ConstMapMat cmap(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return ConstMapMat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MapMat wmap(std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return MapMat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
    if (t.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_str(t.shape()));
    }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

// (outer, extent, inner) around `axis`.
struct AxisSplit {
    std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.extent = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

void accumulate(Node& in, const std::vector<double>& delta) {
    for (std::size_t i = 0; i < delta.size(); ++i) in.grad[i] += delta[i];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " . " +
                             shape_str(b.shape()));
    }
    std::vector<double> out(m * n);
    wmap(out, m, n).noalias() = cmap(a.node()->value, m, k) * cmap(b.node()->value, k, n);
    return make_result({m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node& self) {
        Node& A = *self.inputs[0];
        Node& B = *self.inputs[1];
        auto dout = cmap(self.grad, m, n);
        if (A.requires_grad) wmap(A.grad, m, k).noalias() += dout * cmap(B.value, k, n).transpose();
        if (B.requires_grad) wmap(B.grad, k, n).noalias() += cmap(A.value, m, k).transpose() * dout;
    });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
    require_rank(a, 3, "bmm");
    require_rank(b, 3, "bmm");
    const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2);
    const std::size_t bk = transpose_b ? b.dim(2) : b.dim(1);
    const std::size_t n = transpose_b ? b.dim(1) : b.dim(2);
    if (b.dim(0) != batch || bk != k) {
        throw DimensionError("bmm: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                             (transpose_b ? " (transposed)" : ""));
    }
    const std::size_t sa = m * k, sb = k * n, so = m * n;
    const std::size_t br = transpose_b ? n : k, bc = transpose_b ? k : n;
    std::vector<double> out(batch * so);
    const auto& av = a.node()->value;
    const auto& bv = b.node()->value;
    for (std::size_t i = 0; i < batch; ++i) {
        ConstMapMat A(av.data() + i * sa, m, k);
        ConstMapMat B(bv.data() + i * sb, br, bc);
        MapMat O(out.data() + i * so, m, n);
        if (transpose_b) {
            O.noalias() = A * B.transpose();
        } else {
            O.noalias() = A * B;
        }
    }
    return make_result({batch, m, n}, std::move(out), "bmm", {a, b},
                       [batch, m, k, n, sa, sb, so, br, bc, transpose_b](Node& self) {
                           Node& A = *self.inputs[0];
                           Node& B = *self.inputs[1];
                           for (std::size_t i = 0; i < batch; ++i) {
                               ConstMapMat dO(self.grad.data() + i * so, m, n);
                               ConstMapMat Av(A.value.data() + i * sa, m, k);
                               ConstMapMat Bv(B.value.data() + i * sb, br, bc);
                               if (A.requires_grad) {
                                   MapMat dA(A.grad.data() + i * sa, m, k);
                                   if (transpose_b) {
                                       dA.noalias() += dO * Bv;
                                   } else {
                                       dA.noalias() += dO * Bv.transpose();
                                   }
                               }
                               if (B.requires_grad) {
                                   MapMat dB(B.grad.data() + i * sb, br, bc);
                                   if (transpose_b) {
                                       dB.noalias() += dO.transpose() * Av;
                                   } else {
                                       dB.noalias() += Av.transpose() * dO;
                                   }
                               }
                           }
                       });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    wmap(out, n, m) = cmap(a.node()->value, m, n).transpose();
    return make_result({n, m}, std::move(out), "transpose", {a}, [m, n](Node& self) {
        Node& A = *self.inputs[0];
        if (A.requires_grad) wmap(A.grad, m, n) += cmap(self.grad, n, m).transpose();
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.numel());
    const auto& xv = x.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
    return make_result(x.shape(), std::move(out), "sigmoid", {x}, [](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (std::size_t i = 0; i < self.value.size(); ++i) {
            const double s = self.value[i];
            X.grad[i] += self.grad[i] * s * (1.0 - s);
        }
    });
}

Tensor tanh(const Tensor& x) {
    std::vector<double> out(x.numel());
    const auto& xv = x.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
    return make_result(x.shape(), std::move(out), "tanh", {x}, [](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (std::size_t i = 0; i < self.value.size(); ++i) {
            const double t = self.value[i];
            X.grad[i] += self.grad[i] * (1.0 - t * t);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same(a, b, "add");
    std::vector<double> out(a.numel());
    const auto& av = a.node()->value;
    const auto& bv = b.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    return make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
        for (auto& in : self.inputs) {
            if (in->requires_grad) accumulate(*in, self.grad);
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same(a, b, "sub");
    std::vector<double> out(a.numel());
    const auto& av = a.node()->value;
    const auto& bv = b.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    return make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
        Node& A = *self.inputs[0];
        Node& B = *self.inputs[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (A.requires_grad) A.grad[i] += self.grad[i];
            if (B.requires_grad) B.grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same(a, b, "mul");
    std::vector<double> out(a.numel());
    const auto& av = a.node()->value;
    const auto& bv = b.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
        Node& A = *self.inputs[0];
        Node& B = *self.inputs[1];
        if (A.requires_grad) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i] * B.value[i];
        }
        if (B.requires_grad) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) B.grad[i] += self.grad[i] * A.value[i];
        }
    });
}

Tensor pointwise(const Tensor& x, Pointwise f) {
    switch (f) {
        case Pointwise::Sigmoid: return sigmoid(x);
        case Pointwise::Tanh: return tanh(x);
        default: throw ContractError("pointwise: binary function applied to a single operand");
    }
}

Tensor pointwise(const Tensor& x, const Tensor& y, Pointwise f) {
    switch (f) {
        case Pointwise::Add: return add(x, y);
        case Pointwise::Mul: return mul(x, y);
        default: throw ContractError("pointwise: unary function applied to two operands");
    }
}

Tensor scale(const Tensor& x, double factor) {
    std::vector<double> out(x.numel());
    const auto& xv = x.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
    return make_result(x.shape(), std::move(out), "scale", {x}, [factor](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (std::size_t i = 0; i < self.grad.size(); ++i) X.grad[i] += self.grad[i] * factor;
    });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    const std::size_t n = x.shape().back();
    if (bias.numel() != n) {
        throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match last extent of " +
                             shape_str(x.shape()));
    }
    std::vector<double> out(x.node()->value);
    const auto& bv = bias.node()->value;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % n];
    return make_result(x.shape(), std::move(out), "add_bias", {x, bias}, [n](Node& self) {
        Node& X = *self.inputs[0];
        Node& B = *self.inputs[1];
        if (X.requires_grad) accumulate(X, self.grad);
        if (B.requires_grad) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) B.grad[i % n] += self.grad[i];
        }
    });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
    if (a.rank() != b.rank() || axis >= a.rank()) {
        throw DimensionError("concat: incompatible ranks or axis for " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()) + " along axis " + std::to_string(axis));
    }
    for (std::size_t i = 0; i < a.rank(); ++i) {
        if (i != axis && a.dim(i) != b.dim(i)) {
            throw DimensionError("concat: extents differ off the concat axis, " + shape_str(a.shape()) + " and " +
                                 shape_str(b.shape()));
        }
    }
    const auto sa = split_at(a.shape(), axis);
    const auto sb = split_at(b.shape(), axis);
    const std::size_t ra = sa.extent * sa.inner, rb = sb.extent * sb.inner;
    Shape shape = a.shape();
    shape[axis] += b.dim(axis);
    std::vector<double> out(sa.outer * (ra + rb));
    const auto& av = a.node()->value;
    const auto& bv = b.node()->value;
    for (std::size_t o = 0; o < sa.outer; ++o) {
        std::copy_n(av.begin() + o * ra, ra, out.begin() + o * (ra + rb));
        std::copy_n(bv.begin() + o * rb, rb, out.begin() + o * (ra + rb) + ra);
    }
    return make_result(std::move(shape), std::move(out), "concat", {a, b},
                       [outer = sa.outer, ra, rb](Node& self) {
                           Node& A = *self.inputs[0];
                           Node& B = *self.inputs[1];
                           for (std::size_t o = 0; o < outer; ++o) {
                               const double* g = self.grad.data() + o * (ra + rb);
                               if (A.requires_grad) {
                                   for (std::size_t i = 0; i < ra; ++i) A.grad[o * ra + i] += g[i];
                               }
                               if (B.requires_grad) {
                                   for (std::size_t i = 0; i < rb; ++i) B.grad[o * rb + i] += g[ra + i];
                               }
                           }
                       });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
    if (axis >= x.rank() || begin >= end || end > x.dim(axis)) {
        throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") invalid on axis " + std::to_string(axis) + " of " + shape_str(x.shape()));
    }
    const auto s = split_at(x.shape(), axis);
    const std::size_t len = (end - begin) * s.inner;
    const std::size_t row = s.extent * s.inner;
    const std::size_t off = begin * s.inner;
    Shape shape = x.shape();
    shape[axis] = end - begin;
    std::vector<double> out(s.outer * len);
    const auto& xv = x.node()->value;
    for (std::size_t o = 0; o < s.outer; ++o) std::copy_n(xv.begin() + o * row + off, len, out.begin() + o * len);
    return make_result(std::move(shape), std::move(out), "slice", {x}, [outer = s.outer, len, row, off](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < len; ++i) X.grad[o * row + off + i] += self.grad[o * len + i];
        }
    });
}

Tensor select(const Tensor& x, std::size_t axis, std::size_t index) {
    if (axis >= x.rank() || index >= x.dim(axis)) {
        throw DimensionError("select: index " + std::to_string(index) + " out of range on axis " +
                             std::to_string(axis) + " of " + shape_str(x.shape()));
    }
    if (x.rank() == 1) return slice(x, 0, index, index + 1);
    const auto s = split_at(x.shape(), axis);
    const std::size_t row = s.extent * s.inner;
    const std::size_t off = index * s.inner;
    Shape shape = x.shape();
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
    std::vector<double> out(s.outer * s.inner);
    const auto& xv = x.node()->value;
    for (std::size_t o = 0; o < s.outer; ++o) {
        std::copy_n(xv.begin() + o * row + off, s.inner, out.begin() + o * s.inner);
    }
    return make_result(std::move(shape), std::move(out), "select", {x},
                       [outer = s.outer, inner = s.inner, row, off](Node& self) {
                           Node& X = *self.inputs[0];
                           if (!X.requires_grad) return;
                           for (std::size_t o = 0; o < outer; ++o) {
                               for (std::size_t i = 0; i < inner; ++i) {
                                   X.grad[o * row + off + i] += self.grad[o * inner + i];
                               }
                           }
                       });
}

Tensor stack(std::span<const Tensor> parts, std::size_t axis) {
    if (parts.empty()) throw DimensionError("stack: no tensors");
    const Shape& base = parts[0].shape();
    if (axis > base.size()) throw DimensionError("stack: axis out of range for " + shape_str(base));
    for (const auto& p : parts) {
        if (p.shape() != base) {
            throw DimensionError("stack: shape mismatch " + shape_str(base) + " vs " + shape_str(p.shape()));
        }
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= base[i];
    for (std::size_t i = axis; i < base.size(); ++i) inner *= base[i];
    const std::size_t count = parts.size();
    Shape shape = base;
    shape.insert(shape.begin() + static_cast<std::ptrdiff_t>(axis), count);
    std::vector<double> out(outer * count * inner);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& pv = parts[k].node()->value;
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(pv.begin() + o * inner, inner, out.begin() + (o * count + k) * inner);
        }
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return make_result(std::move(shape), std::move(out), "stack", std::move(inputs),
                       [outer, inner, count](Node& self) {
                           for (std::size_t k = 0; k < count; ++k) {
                               Node& P = *self.inputs[k];
                               if (!P.requires_grad) continue;
                               for (std::size_t o = 0; o < outer; ++o) {
                                   const double* g = self.grad.data() + (o * count + k) * inner;
                                   for (std::size_t i = 0; i < inner; ++i) P.grad[o * inner + i] += g[i];
                               }
                           }
                       });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    return make_result(std::move(shape), x.node()->value, "reshape", {x}, [](Node& self) {
        Node& X = *self.inputs[0];
        if (X.requires_grad) accumulate(X, self.grad);
    });
}

Tensor repeat_axis(const Tensor& x, std::size_t axis, std::size_t count) {
    if (axis > x.rank() || count == 0) {
        throw DimensionError("repeat_axis: bad axis/count for " + shape_str(x.shape()));
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis; i < x.rank(); ++i) inner *= x.dim(i);
    Shape shape = x.shape();
    shape.insert(shape.begin() + static_cast<std::ptrdiff_t>(axis), count);
    std::vector<double> out(outer * count * inner);
    const auto& xv = x.node()->value;
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t k = 0; k < count; ++k) {
            std::copy_n(xv.begin() + o * inner, inner, out.begin() + (o * count + k) * inner);
        }
    }
    return make_result(std::move(shape), std::move(out), "repeat_axis", {x}, [outer, inner, count](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t k = 0; k < count; ++k) {
                const double* g = self.grad.data() + (o * count + k) * inner;
                for (std::size_t i = 0; i < inner; ++i) X.grad[o * inner + i] += g[i];
            }
        }
    });
}

namespace {

BackwardRule softmax_backward(std::size_t n) {
    return [n](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        const std::size_t rows = self.value.size() / n;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = self.value.data() + r * n;
            const double* g = self.grad.data() + r * n;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y[j] * g[j];
            double* dx = X.grad.data() + r * n;
            for (std::size_t j = 0; j < n; ++j) dx[j] += y[j] * (g[j] - dot);
        }
    };
}

void softmax_row(const double* x, const double* mask, double* y, std::size_t n) {
    bool any = false;
    if (mask != nullptr) {
        for (std::size_t j = 0; j < n; ++j) any = any || mask[j] != 0.0;
        if (!any) mask = nullptr;
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (mask == nullptr || mask[j] != 0.0) mx = std::max(mx, x[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = (mask == nullptr || mask[j] != 0.0) ? std::exp(x[j] - mx) : 0.0;
        total += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= total;
}

}  // namespace

Tensor softmax_rows(const Tensor& x) {
    if (!x.defined()) throw ContractError("softmax_rows: undefined tensor");
    const std::size_t n = x.shape().back();
    if (n == 0) throw DimensionError("softmax_rows: empty row");
    std::vector<double> out(x.numel());
    const auto& xv = x.node()->value;
    for (std::size_t r = 0; r < out.size() / n; ++r) softmax_row(xv.data() + r * n, nullptr, out.data() + r * n, n);
    return make_result(x.shape(), std::move(out), "softmax_rows", {x}, softmax_backward(n));
}

Tensor masked_softmax_rows(const Tensor& x, const Tensor& mask) {
    if (!x.defined() || !mask.defined()) throw ContractError("masked_softmax_rows: undefined tensor");
    if (x.rank() < 2) throw DimensionError("masked_softmax_rows: need rank >= 2, got " + shape_str(x.shape()));
    const std::size_t n = x.shape().back();
    const std::size_t per_group = x.shape()[x.rank() - 2];
    const std::size_t rows = x.numel() / n;
    if (mask.numel() != (rows / per_group) * n) {
        throw DimensionError("masked_softmax_rows: mask " + shape_str(mask.shape()) + " does not fit scores " +
                             shape_str(x.shape()));
    }
    std::vector<double> out(x.numel());
    const auto& xv = x.node()->value;
    const auto& mv = mask.node()->value;
    for (std::size_t r = 0; r < rows; ++r) {
        softmax_row(xv.data() + r * n, mv.data() + (r / per_group) * n, out.data() + r * n, n);
    }
    return make_result(x.shape(), std::move(out), "masked_softmax_rows", {x}, softmax_backward(n));
}

Tensor cross_entropy(const Tensor& p, const Tensor& y_onehot, const Tensor& mask) {
    require_same(p, y_onehot, "cross_entropy");
    const std::size_t labels = p.shape().back();
    const std::size_t rows = p.numel() / labels;
    if (mask.numel() != rows) {
        throw DimensionError("cross_entropy: mask " + shape_str(mask.shape()) + " does not match " +
                             std::to_string(rows) + " positions");
    }
    const auto& pv = p.node()->value;
    const auto& yv = y_onehot.node()->value;
    const auto& mv = mask.node()->value;
    double loss = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (pv[i] < 0.0 || std::isnan(pv[i])) {
            throw DomainError("cross_entropy: probability " + std::to_string(pv[i]) + " at flat index " +
                              std::to_string(i) + " is outside [0, 1]");
        }
        const double w = mv[i / labels] * yv[i];
        if (w != 0.0) loss -= w * std::log(std::max(pv[i], kLogClamp));
    }
    return make_result({1}, {loss}, "cross_entropy", {p, y_onehot, mask}, [labels](Node& self) {
        Node& P = *self.inputs[0];
        Node& Y = *self.inputs[1];
        Node& M = *self.inputs[2];
        const double g = self.grad[0];
        for (std::size_t i = 0; i < P.value.size(); ++i) {
            const double m = M.value[i / labels];
            if (m == 0.0) continue;
            const double logp = std::log(std::max(P.value[i], kLogClamp));
            if (P.requires_grad && P.value[i] >= kLogClamp) P.grad[i] -= g * m * Y.value[i] / P.value[i];
            if (Y.requires_grad) Y.grad[i] -= g * m * logp;
            if (M.requires_grad) M.grad[i / labels] -= g * Y.value[i] * logp;
        }
    });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    return make_result({1}, {total}, "sum", {x}, [](Node& self) {
        Node& X = *self.inputs[0];
        if (!X.requires_grad) return;
        for (auto& g : X.grad) g += self.grad[0];
    });
}

Tensor gather_columns(const Tensor& table, std::span<const std::int32_t> indices) {
    require_rank(table, 2, "gather_columns");
    const std::size_t d = table.dim(0), vocab = table.dim(1);
    if (indices.empty()) throw DimensionError("gather_columns: no indices");
    std::vector<double> out(indices.size() * d);
    const auto& tv = table.node()->value;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto idx = indices[i];
        if (idx < 0 || static_cast<std::size_t>(idx) >= vocab) {
            throw VocabularyError("token index " + std::to_string(idx) + " outside vocabulary of size " +
                                  std::to_string(vocab));
        }
        for (std::size_t r = 0; r < d; ++r) out[i * d + r] = tv[r * vocab + static_cast<std::size_t>(idx)];
    }
    std::vector<std::int32_t> idx(indices.begin(), indices.end());
    return make_result({indices.size(), d}, std::move(out), "gather_columns", {table},
                       [idx = std::move(idx), d, vocab](Node& self) {
                           Node& T = *self.inputs[0];
                           if (!T.requires_grad) return;
                           for (std::size_t i = 0; i < idx.size(); ++i) {
                               const auto c = static_cast<std::size_t>(idx[i]);
                               for (std::size_t r = 0; r < d; ++r) T.grad[r * vocab + c] += self.grad[i * d + r];
                           }
                       });
}

}  // namespace dan
