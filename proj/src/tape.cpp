#include "gvlm/tape.hpp"

#include <cmath>
#include <utility>

namespace gvlm {

const Tensor2D& Value::val() const { return tape->value(idx); }
const Tensor2D& Value::grad() const { return tape->grad(idx); }

double Value::scalar() const {
    const Tensor2D& v = val();
    if (v.rows != 1 || v.cols != 1) throw std::invalid_argument("scalar(): tensor is not 1x1");
    return v.data[0];
}

Value make_node(Tape& t, Tensor2D v, std::function<void(Tape&, std::size_t)> back) {
    Tape::Node n;
    n.grad = Tensor2D(v.rows, v.cols, 0.0);
    n.value = std::move(v);
    n.back = std::move(back);
    t.nodes_.push_back(std::move(n));
    return Value{&t, t.nodes_.size() - 1};
}

Value Tape::leaf(Tensor2D v) { return make_node(*this, std::move(v), nullptr); }
Value Tape::leaf(const Tensor2D& v) { return make_node(*this, v, nullptr); }

void Tape::backward(Value loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: value from another tape");
    const Tensor2D& lv = nodes_[loss.idx].value;
    if (lv.rows != 1 || lv.cols != 1) throw std::invalid_argument("backward: loss must be 1x1");
    nodes_[loss.idx].grad.data[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this, i);
    }
}

namespace {

void check_same_tape(Value a, Value b) {
    if (a.tape != b.tape) throw std::invalid_argument("op: values from different tapes");
}

}  // namespace

Value matmul(Value a, Value b) {
    check_same_tape(a, b);
    Tensor2D c = matmul_plain(a.val(), b.val());
    std::size_t ai = a.idx, bi = b.idx;
    return make_node(*a.tape, std::move(c), [ai, bi](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& av = t.value(ai);
        const Tensor2D& bv = t.value(bi);
        Tensor2D& ga = OpAccess::grad(t, ai);
        Tensor2D& gb = OpAccess::grad(t, bi);
        // ga += g * b^T
        for (std::size_t i = 0; i < av.rows; ++i) {
            const double* gr = g.row(i);
            double* gar = ga.row(i);
            for (std::size_t k = 0; k < bv.cols; ++k) {
                const double gik = gr[k];
                for (std::size_t j = 0; j < bv.rows; ++j) gar[j] += gik * bv.at(j, k);
            }
        }
        // gb += a^T * g
        for (std::size_t i = 0; i < av.rows; ++i) {
            const double* ar = av.row(i);
            const double* gr = g.row(i);
            for (std::size_t k = 0; k < av.cols; ++k) {
                const double aik = ar[k];
                double* gbr = gb.row(k);
                for (std::size_t j = 0; j < bv.cols; ++j) gbr[j] += aik * gr[j];
            }
        }
    });
}

Value add(Value a, Value b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val())) throw std::invalid_argument("add: shape mismatch");
    Tensor2D c = a.val();
    const Tensor2D& bv = b.val();
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += bv.data[i];
    std::size_t ai = a.idx, bi = b.idx;
    return make_node(*a.tape, std::move(c), [ai, bi](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        Tensor2D& gb = OpAccess::grad(t, bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
}

Value add_rowvec(Value a, Value b) {
    check_same_tape(a, b);
    const Tensor2D& av = a.val();
    const Tensor2D& bv = b.val();
    if (bv.rows != 1 || bv.cols != av.cols) throw std::invalid_argument("add_rowvec: shape mismatch");
    Tensor2D c = av;
    for (std::size_t i = 0; i < av.rows; ++i)
        for (std::size_t j = 0; j < av.cols; ++j) c.at(i, j) += bv.data[j];
    std::size_t ai = a.idx, bi = b.idx;
    return make_node(*a.tape, std::move(c), [ai, bi](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        Tensor2D& gb = OpAccess::grad(t, bi);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) gb.data[j] += g.at(i, j);
    });
}

Value sub(Value a, Value b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val())) throw std::invalid_argument("sub: shape mismatch");
    Tensor2D c = a.val();
    const Tensor2D& bv = b.val();
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= bv.data[i];
    std::size_t ai = a.idx, bi = b.idx;
    return make_node(*a.tape, std::move(c), [ai, bi](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        Tensor2D& gb = OpAccess::grad(t, bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    });
}

Value mul(Value a, Value b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val())) throw std::invalid_argument("mul: shape mismatch");
    Tensor2D c = a.val();
    const Tensor2D& bv = b.val();
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] *= bv.data[i];
    std::size_t ai = a.idx, bi = b.idx;
    return make_node(*a.tape, std::move(c), [ai, bi](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& av = t.value(ai);
        const Tensor2D& bv2 = t.value(bi);
        Tensor2D& ga = OpAccess::grad(t, ai);
        Tensor2D& gb = OpAccess::grad(t, bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * bv2.data[i];
            gb.data[i] += g.data[i] * av.data[i];
        }
    });
}

Value scale(Value a, double c) {
    Tensor2D y = a.val();
    for (double& v : y.data) v *= c;
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, c](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    });
}

Value transpose(Value a) {
    Tensor2D y = transpose_plain(a.val());
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
    });
}

Value softmax_rows(Value a) {
    Tensor2D y = softmax_rows_plain(a.val());
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& y2 = t.value(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i) {
            const double* gr = g.row(i);
            const double* yr = y2.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols; ++j) dot += gr[j] * yr[j];
            double* gar = ga.row(i);
            for (std::size_t j = 0; j < g.cols; ++j) gar[j] += yr[j] * (gr[j] - dot);
        }
    });
}

Value softmax_rows_causal(Value a, std::size_t offset) {
    const Tensor2D& x = a.val();
    if (x.rows == 0 || x.cols == 0) throw std::invalid_argument("softmax_rows: empty input");
    Tensor2D y(x.rows, x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::size_t lim = std::min(x.cols, i + offset + 1);
        const double* xr = x.row(i);
        double* yr = y.row(i);
        double mx = xr[0];
        for (std::size_t j = 1; j < lim; ++j) mx = std::max(mx, xr[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < lim; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            sum += yr[j];
        }
        for (std::size_t j = 0; j < lim; ++j) yr[j] /= sum;
    }
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, offset](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& y2 = t.value(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i) {
            std::size_t lim = std::min(g.cols, i + offset + 1);
            const double* gr = g.row(i);
            const double* yr = y2.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < lim; ++j) dot += gr[j] * yr[j];
            double* gar = ga.row(i);
            for (std::size_t j = 0; j < lim; ++j) gar[j] += yr[j] * (gr[j] - dot);
        }
    });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Value gelu(Value a) {
    Tensor2D y = a.val();
    for (double& v : y.data) {
        double u = kGeluC * (v + kGeluA * v * v * v);
        v = 0.5 * v * (1.0 + std::tanh(u));
    }
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& x = t.value(ai);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double v = x.data[i];
            double u = kGeluC * (v + kGeluA * v * v * v);
            double th = std::tanh(u);
            double d = 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
            ga.data[i] += g.data[i] * d;
        }
    });
}

Value layer_norm_rows(Value x, Value gain, Value bias, double eps) {
    check_same_tape(x, gain);
    check_same_tape(x, bias);
    const Tensor2D& xv = x.val();
    const Tensor2D& gv = gain.val();
    const Tensor2D& bv = bias.val();
    if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
        throw std::invalid_argument("layer_norm: gain/bias shape mismatch");
    const std::size_t n = xv.cols;
    Tensor2D y(xv.rows, n);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        const double* xr = xv.row(i);
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) mu += xr[j];
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= static_cast<double>(n);
        double inv = 1.0 / std::sqrt(var + eps);
        double* yr = y.row(i);
        for (std::size_t j = 0; j < n; ++j) yr[j] = (xr[j] - mu) * inv * gv.data[j] + bv.data[j];
    }
    std::size_t xi = x.idx, gi = gain.idx, bi = bias.idx;
    return make_node(*x.tape, std::move(y), [xi, gi, bi, eps](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& xv2 = t.value(xi);
        const Tensor2D& gv2 = t.value(gi);
        Tensor2D& gx = OpAccess::grad(t, xi);
        Tensor2D& gg = OpAccess::grad(t, gi);
        Tensor2D& gb = OpAccess::grad(t, bi);
        const std::size_t n = xv2.cols;
        const double dn = static_cast<double>(n);
        for (std::size_t i = 0; i < xv2.rows; ++i) {
            const double* xr = xv2.row(i);
            const double* gr = g.row(i);
            double mu = 0.0;
            for (std::size_t j = 0; j < n; ++j) mu += xr[j];
            mu /= dn;
            double var = 0.0;
            for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
            var /= dn;
            double inv = 1.0 / std::sqrt(var + eps);
            // dxhat = g * gain; accumulate the two row sums needed for dx.
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double xhat = (xr[j] - mu) * inv;
                double dxhat = gr[j] * gv2.data[j];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xhat;
                gg.data[j] += gr[j] * xhat;
                gb.data[j] += gr[j];
            }
            double* gxr = gx.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                double xhat = (xr[j] - mu) * inv;
                double dxhat = gr[j] * gv2.data[j];
                gxr[j] += inv * (dxhat - sum_dxhat / dn - xhat * sum_dxhat_xhat / dn);
            }
        }
    });
}

Value concat_rows(const std::vector<Value>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    std::size_t cols = parts[0].val().cols;
    std::size_t rows = 0;
    for (const Value& p : parts) {
        check_same_tape(parts[0], p);
        if (p.val().cols != cols) throw std::invalid_argument("concat_rows: column mismatch");
        rows += p.val().rows;
    }
    Tensor2D y(rows, cols);
    std::size_t r = 0;
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // (node idx, start row)
    for (const Value& p : parts) {
        const Tensor2D& pv = p.val();
        spans.emplace_back(p.idx, r);
        for (std::size_t i = 0; i < pv.rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) y.at(r + i, j) = pv.at(i, j);
        r += pv.rows;
    }
    return make_node(*parts[0].tape, std::move(y), [spans](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        for (const auto& [idx, start] : spans) {
            Tensor2D& gp = OpAccess::grad(t, idx);
            for (std::size_t i = 0; i < gp.rows; ++i)
                for (std::size_t j = 0; j < gp.cols; ++j) gp.at(i, j) += g.at(start + i, j);
        }
    });
}

Value concat_cols(const std::vector<Value>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    std::size_t rows = parts[0].val().rows;
    std::size_t cols = 0;
    for (const Value& p : parts) {
        check_same_tape(parts[0], p);
        if (p.val().rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
        cols += p.val().cols;
    }
    Tensor2D y(rows, cols);
    std::size_t c = 0;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const Value& p : parts) {
        const Tensor2D& pv = p.val();
        spans.emplace_back(p.idx, c);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < pv.cols; ++j) y.at(i, c + j) = pv.at(i, j);
        c += pv.cols;
    }
    return make_node(*parts[0].tape, std::move(y), [spans](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        for (const auto& [idx, start] : spans) {
            Tensor2D& gp = OpAccess::grad(t, idx);
            for (std::size_t i = 0; i < gp.rows; ++i)
                for (std::size_t j = 0; j < gp.cols; ++j) gp.at(i, j) += g.at(i, start + j);
        }
    });
}

Value slice_rows(Value a, std::size_t r0, std::size_t r1) {
    const Tensor2D& av = a.val();
    if (r0 > r1 || r1 > av.rows) throw std::invalid_argument("slice_rows: bad range");
    Tensor2D y(r1 - r0, av.cols);
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < av.cols; ++j) y.at(i - r0, j) = av.at(i, j);
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, r0](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) ga.at(r0 + i, j) += g.at(i, j);
    });
}

Value slice_cols(Value a, std::size_t c0, std::size_t c1) {
    const Tensor2D& av = a.val();
    if (c0 > c1 || c1 > av.cols) throw std::invalid_argument("slice_cols: bad range");
    Tensor2D y(av.rows, c1 - c0);
    for (std::size_t i = 0; i < av.rows; ++i)
        for (std::size_t j = c0; j < c1; ++j) y.at(i, j - c0) = av.at(i, j);
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, c0](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) ga.at(i, c0 + j) += g.at(i, j);
    });
}

Value rows_gather(Value a, const std::vector<std::size_t>& indices) {
    const Tensor2D& av = a.val();
    for (std::size_t ix : indices)
        if (ix >= av.rows) throw std::invalid_argument("rows_gather: index out of range");
    Tensor2D y(indices.size(), av.cols);
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t j = 0; j < av.cols; ++j) y.at(i, j) = av.at(indices[i], j);
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, indices](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < indices.size(); ++i)
            for (std::size_t j = 0; j < g.cols; ++j) ga.at(indices[i], j) += g.at(i, j);
    });
}

Value sum_all(Value a) {
    const Tensor2D& av = a.val();
    double s = 0.0;
    for (double v : av.data) s += v;
    std::size_t ai = a.idx;
    return make_node(*a.tape, Tensor2D(1, 1, s), [ai](Tape& t, std::size_t self) {
        double g = t.grad(self).data[0];
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (double& v : ga.data) v += g;
    });
}

Value mean_all(Value a) {
    const Tensor2D& av = a.val();
    if (av.size() == 0) throw std::invalid_argument("mean_all: empty input");
    double s = 0.0;
    for (double v : av.data) s += v;
    double inv = 1.0 / static_cast<double>(av.size());
    std::size_t ai = a.idx;
    return make_node(*a.tape, Tensor2D(1, 1, s * inv), [ai, inv](Tape& t, std::size_t self) {
        double g = t.grad(self).data[0] * inv;
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (double& v : ga.data) v += g;
    });
}

Value mean_over_rows(Value a) {
    const Tensor2D& av = a.val();
    if (av.rows == 0) throw std::invalid_argument("mean_over_rows: empty input");
    Tensor2D y(1, av.cols, 0.0);
    for (std::size_t i = 0; i < av.rows; ++i)
        for (std::size_t j = 0; j < av.cols; ++j) y.data[j] += av.at(i, j);
    double inv = 1.0 / static_cast<double>(av.rows);
    for (double& v : y.data) v *= inv;
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, inv](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < ga.rows; ++i)
            for (std::size_t j = 0; j < ga.cols; ++j) ga.at(i, j) += g.data[j] * inv;
    });
}

Value sin_elem(Value a) {
    Tensor2D y = a.val();
    for (double& v : y.data) v = std::sin(v);
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& x = t.value(ai);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * std::cos(x.data[i]);
    });
}

Value cos_elem(Value a) {
    Tensor2D y = a.val();
    for (double& v : y.data) v = std::cos(v);
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& x = t.value(ai);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] -= g.data[i] * std::sin(x.data[i]);
    });
}

Value normalize_rows(Value a, double eps) {
    const Tensor2D& av = a.val();
    Tensor2D y(av.rows, av.cols);
    for (std::size_t i = 0; i < av.rows; ++i) {
        const double* xr = av.row(i);
        double nrm = 0.0;
        for (std::size_t j = 0; j < av.cols; ++j) nrm += xr[j] * xr[j];
        nrm = std::sqrt(nrm);
        double inv = 1.0 / std::max(nrm, eps);
        double* yr = y.row(i);
        for (std::size_t j = 0; j < av.cols; ++j) yr[j] = xr[j] * inv;
    }
    std::size_t ai = a.idx;
    return make_node(*a.tape, std::move(y), [ai, eps](Tape& t, std::size_t self) {
        const Tensor2D& g = t.grad(self);
        const Tensor2D& x = t.value(ai);
        const Tensor2D& y2 = t.value(self);
        Tensor2D& ga = OpAccess::grad(t, ai);
        for (std::size_t i = 0; i < g.rows; ++i) {
            const double* xr = x.row(i);
            const double* gr = g.row(i);
            const double* yr = y2.row(i);
            double nrm = 0.0;
            for (std::size_t j = 0; j < g.cols; ++j) nrm += xr[j] * xr[j];
            nrm = std::sqrt(nrm);
            double* gar = ga.row(i);
            if (nrm < eps) {
                // Pass-through branch: y = x / eps.
                for (std::size_t j = 0; j < g.cols; ++j) gar[j] += gr[j] / eps;
            } else {
                double dot = 0.0;
                for (std::size_t j = 0; j < g.cols; ++j) dot += gr[j] * yr[j];
                for (std::size_t j = 0; j < g.cols; ++j) gar[j] += (gr[j] - yr[j] * dot) / nrm;
            }
        }
    });
}

Value cross_entropy_sum(Value logits, const std::vector<std::size_t>& ids) {
    const Tensor2D& z = logits.val();
    if (z.rows != ids.size()) throw std::invalid_argument("cross_entropy_sum: row count != id count");
    if (z.cols == 0) throw std::invalid_argument("cross_entropy_sum: empty logits");
    for (std::size_t id : ids)
        if (id >= z.cols) throw std::invalid_argument("cross_entropy_sum: id out of vocabulary");
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* zr = z.row(i);
        double mx = zr[0];
        for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, zr[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) sum += std::exp(zr[j] - mx);
        loss += mx + std::log(sum) - zr[ids[i]];
    }
    std::size_t li = logits.idx;
    return make_node(*logits.tape, Tensor2D(1, 1, loss), [li, ids](Tape& t, std::size_t self) {
        double g = t.grad(self).data[0];
        const Tensor2D& z2 = t.value(li);
        Tensor2D& gz = OpAccess::grad(t, li);
        for (std::size_t i = 0; i < z2.rows; ++i) {
            const double* zr = z2.row(i);
            double mx = zr[0];
            for (std::size_t j = 1; j < z2.cols; ++j) mx = std::max(mx, zr[j]);
            double sum = 0.0;
            for (std::size_t j = 0; j < z2.cols; ++j) sum += std::exp(zr[j] - mx);
            double* gzr = gz.row(i);
            for (std::size_t j = 0; j < z2.cols; ++j) {
                double p = std::exp(zr[j] - mx) / sum;
                gzr[j] += g * (p - (j == ids[i] ? 1.0 : 0.0));
            }
        }
    });
}

}  // namespace gvlm
