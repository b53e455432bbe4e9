#include "bat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "bat/kernels.hpp"

namespace bat {

namespace {

std::size_t numel_of(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 1 : n;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
}

Tape* result_tape(std::initializer_list<const Tensor*> inputs) {
    Tape* tp = nullptr;
    for (const Tensor* t : inputs) {
        if (!t->on_tape()) continue;
        if (tp && tp != t->tape())
            throw ArgumentError("operation mixes tensors from two different tapes");
        tp = t->tape();
    }
    return tp;
}

int node_on(const Tensor& t, Tape* tp) {
    return (tp && t.tape() == tp) ? t.node() : -1;
}

}  // namespace

Tensor bind_result(Tensor out, Tape* tape, int node) {
    out.tape_ = tape;
    out.node_ = node;
    return out;
}

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(std::make_shared<std::vector<double>>(numel_of(shape_), 0.0)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values) : shape_(std::move(shape)) {
    if (values.size() != numel_of(shape_))
        throw DimensionError("tensor init: " + std::to_string(values.size()) +
                             " values for shape " + shape_str(shape_));
    data_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data(), t.data() + t.size(), v);
    return t;
}

Tensor Tensor::from_mat(const Mat& m) {
    return Tensor({m.rows(), m.cols()}, std::vector<double>(m.data(), m.data() + m.size()));
}

std::size_t Tensor::size() const { return data_ ? data_->size() : 0; }

std::size_t Tensor::rows() const {
    if (shape_.empty()) return 1;
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.size() < 2) return 1;
    std::size_t c = 1;
    for (std::size_t i = 1; i < shape_.size(); ++i) c *= shape_[i];
    return c;
}

double* Tensor::data() {
    if (!data_) throw ArgumentError("access to empty tensor");
    return data_->data();
}

const double* Tensor::data() const {
    if (!data_) throw ArgumentError("access to empty tensor");
    return data_->data();
}

double Tensor::value() const {
    if (size() != 1)
        throw DimensionError("value() needs a single-element tensor, got shape " + shape_str(shape_));
    return (*data_)[0];
}

Tensor Tensor::detached() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
}

Tensor Tensor::clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<double>>(*data_);
    return t;
}

Mat Tensor::to_mat() const {
    if (rank() > 2) throw DimensionError("to_mat: rank " + std::to_string(rank()) + " tensor");
    Mat m(rows(), cols());
    std::copy(data(), data() + size(), m.data());
    return m;
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::watch(const Tensor& t) {
    if (t.on_tape()) {
        if (t.tape() != this) throw ArgumentError("tensor already bound to another tape");
        return t;
    }
    const void* key = t.data();
    auto it = watched_.find(key);
    int id;
    if (it != watched_.end()) {
        id = it->second;
    } else {
        id = add_node({}, t.size(), nullptr);
        watched_.emplace(key, id);
    }
    return bind_result(t.detached(), this, id);
}

int Tape::add_node(std::vector<int> inputs, std::size_t out_numel, BackwardFn fn) {
    nodes_.push_back(Node{std::move(inputs), out_numel, std::move(fn), {}});
    return static_cast<int>(nodes_.size()) - 1;
}

double* Tape::grad_buffer(int node, std::size_t numel) {
    Node& n = nodes_.at(static_cast<std::size_t>(node));
    if (n.grad.empty()) n.grad.assign(numel, 0.0);
    return n.grad.data();
}

const std::vector<double>* Tape::node_grad(int node) const {
    const Node& n = nodes_.at(static_cast<std::size_t>(node));
    return n.grad.empty() ? nullptr : &n.grad;
}

void Tape::backward(const Tensor& loss) {
    if (loss.tape() != this) throw ArgumentError("backward: loss is not bound to this tape");
    if (loss.size() != 1)
        throw DimensionError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    for (Node& n : nodes_) n.grad.clear();
    grad_buffer(loss.node(), 1)[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.grad.empty() || !n.backward) continue;
        n.backward(n.grad.data(), *this);
    }
}

Tensor Tape::grad(const Tensor& t) const {
    if (t.tape() != this) throw ArgumentError("grad: tensor is not bound to this tape");
    const std::vector<double>* g = node_grad(t.node());
    if (!g) return Tensor(t.shape());
    return Tensor(t.shape(), *g);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace {

// Shared storage keeps input values alive for the backward closure.
using Buf = std::shared_ptr<const std::vector<double>>;

Buf keep(const Tensor& t) {
    return t.storage();
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw DimensionError("matmul: need rank-2 tensors, got " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out({m, n});
    kernels::matmul(a.data(), b.data(), out.data(), m, k, n);
    Tape* tp = result_tape({&a, &b});
    if (!tp) return out;
    int na = node_on(a, tp), nb = node_on(b, tp);
    Buf av = keep(a), bv = keep(b);
    int id = tp->add_node({na, nb}, m * n, [=](const double* g, Tape& t) {
        if (na >= 0)  // dA = G * B^T
            kernels::matmul(g, bv->data(), t.grad_buffer(na, m * k), m, n, k, false, true, true);
        if (nb >= 0)  // dB = A^T * G
            kernels::matmul(av->data(), g, t.grad_buffer(nb, k * n), k, m, n, true, false, true);
    });
    return bind_result(std::move(out), tp, id);
}

namespace {

template <class Fwd, class Bwd>
Tensor binary_elementwise(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, Bwd bwd) {
    require_same_shape(name, a, b);
    const std::size_t n = a.size();
    Tensor out(a.shape());
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = fwd(a[i], b[i]);
    Tape* tp = result_tape({&a, &b});
    if (!tp) return out;
    int na = node_on(a, tp), nb = node_on(b, tp);
    Buf av = keep(a), bv = keep(b);
    int id = tp->add_node({na, nb}, n, [=](const double* g, Tape& t) {
        double* ga = na >= 0 ? t.grad_buffer(na, n) : nullptr;
        double* gb = nb >= 0 ? t.grad_buffer(nb, n) : nullptr;
        for (std::size_t i = 0; i < n; ++i) bwd(g[i], (*av)[i], (*bv)[i], ga ? ga + i : nullptr, gb ? gb + i : nullptr);
    });
    return bind_result(std::move(out), tp, id);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double g, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb += g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double g, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb -= g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double g, double x, double y, double* ga, double* gb) {
            if (ga) *ga += g * y;
            if (gb) *gb += g * x;
        });
}

namespace {

template <class Fwd, class Bwd>
Tensor unary_elementwise(const Tensor& x, Fwd fwd, Bwd bwd) {
    const std::size_t n = x.size();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = fwd(x[i]);
    Tape* tp = result_tape({&x});
    if (!tp) return out;
    int nx = node_on(x, tp);
    Buf xv = keep(x);
    Buf ov = keep(out);
    int id = tp->add_node({nx}, n, [=](const double* g, Tape& t) {
        double* gx = t.grad_buffer(nx, n);
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * bwd((*xv)[i], (*ov)[i]);
    });
    return bind_result(std::move(out), tp, id);
}

}  // namespace

Tensor scale(const Tensor& a, double c) {
    return unary_elementwise(
        a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor relu(const Tensor& x) {
    return unary_elementwise(
        x, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
    return unary_elementwise(
        x,
        [](double v) {
            if (v >= 0.0) {
                double e = std::exp(-v);
                return 1.0 / (1.0 + e);
            }
            double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double s) { return s * (1.0 - s); });
}

Tensor broadcast_add_bias(const Tensor& x, const Tensor& bias) {
    if (x.rank() != 2 || bias.rank() != 1 || bias.shape()[0] != x.cols())
        throw DimensionError("broadcast_add_bias: " + shape_str(x.shape()) + " with bias " +
                             shape_str(bias.shape()));
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data()[i * c + j] = x[i * c + j] + bias[j];
    Tape* tp = result_tape({&x, &bias});
    if (!tp) return out;
    int nx = node_on(x, tp), nb = node_on(bias, tp);
    int id = tp->add_node({nx, nb}, r * c, [=](const double* g, Tape& t) {
        if (nx >= 0) {
            double* gx = t.grad_buffer(nx, r * c);
            for (std::size_t i = 0; i < r * c; ++i) gx[i] += g[i];
        }
        if (nb >= 0) {
            double* gb = t.grad_buffer(nb, c);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
        }
    });
    return bind_result(std::move(out), tp, id);
}

Tensor sum(const Tensor& x) {
    const std::size_t n = x.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    Tensor out = Tensor::scalar(s);
    Tape* tp = result_tape({&x});
    if (!tp) return out;
    int nx = node_on(x, tp);
    int id = tp->add_node({nx}, 1, [=](const double* g, Tape& t) {
        double* gx = t.grad_buffer(nx, n);
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
    });
    return bind_result(std::move(out), tp, id);
}

Tensor mean(const Tensor& x) {
    if (x.size() == 0) throw EmptySetError("mean of empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

namespace {

Tensor pool_blocks(const Tensor& x, std::size_t block, const char* name) {
    if (x.rank() != 2) throw DimensionError(std::string(name) + ": need rank-2, got " + shape_str(x.shape()));
    const std::size_t r = x.rows(), c = x.cols();
    if (r == 0) throw EmptySetError(std::string(name) + ": no rows to pool");
    if (block == 0 || r % block != 0)
        throw DimensionError(std::string(name) + ": " + std::to_string(r) +
                             " rows not divisible into blocks of " + std::to_string(block));
    const std::size_t groups = r / block;
    Tensor out({groups, c});
    auto arg = std::make_shared<std::vector<std::uint32_t>>(groups * c);
    for (std::size_t gidx = 0; gidx < groups; ++gidx) {
        for (std::size_t j = 0; j < c; ++j) {
            std::size_t best = gidx * block;
            double bv = x[best * c + j];
            for (std::size_t i = gidx * block + 1; i < (gidx + 1) * block; ++i) {
                double v = x[i * c + j];
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            out.data()[gidx * c + j] = bv;
            (*arg)[gidx * c + j] = static_cast<std::uint32_t>(best);
        }
    }
    Tape* tp = result_tape({&x});
    if (!tp) return out;
    int nx = node_on(x, tp);
    int id = tp->add_node({nx}, groups * c, [=](const double* g, Tape& t) {
        double* gx = t.grad_buffer(nx, r * c);
        for (std::size_t o = 0; o < groups * c; ++o) gx[(*arg)[o] * c + (o % c)] += g[o];
    });
    return bind_result(std::move(out), tp, id);
}

}  // namespace

Tensor max_pool_over_points(const Tensor& x) {
    Tensor pooled = pool_blocks(x, x.rows(), "max_pool_over_points");
    // Collapse the leading group dimension of 1.
    Tensor out({x.cols()}, std::vector<double>(pooled.data(), pooled.data() + pooled.size()));
    if (!pooled.on_tape()) return out;
    Tape* tp = pooled.tape();
    const std::size_t n = out.size();
    int np = pooled.node();
    int id = tp->add_node({np}, n, [=](const double* g, Tape& t) {
        double* gp = t.grad_buffer(np, n);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[i];
    });
    return bind_result(std::move(out), tp, id);
}

Tensor max_pool_groups(const Tensor& x, std::size_t group_size) {
    return pool_blocks(x, group_size, "max_pool_groups");
}

Tensor reshape(const Tensor& x, const std::vector<std::size_t>& shape) {
    std::size_t numel = 1;
    for (std::size_t d : shape) numel *= d;
    if (numel != x.size())
        throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape) +
                             " changes element count");
    Tensor out(shape, std::vector<double>(x.data(), x.data() + x.size()));
    Tape* tp = result_tape({&x});
    if (!tp) return out;
    int nx = node_on(x, tp);
    int id = tp->add_node({nx}, numel, [=](const double* g, Tape& t) {
        double* gx = t.grad_buffer(nx, numel);
        for (std::size_t i = 0; i < numel; ++i) gx[i] += g[i];
    });
    return bind_result(std::move(out), tp, id);
}

Tensor concat_last_dim(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw EmptySetError("concat_last_dim: no tensors");
    const std::size_t r = parts[0].rows();
    std::size_t total = 0;
    for (const Tensor& p : parts) {
        if (p.rank() > 2)
            throw DimensionError("concat_last_dim: rank " + std::to_string(p.rank()) + " input");
        if (p.rows() != r)
            throw DimensionError("concat_last_dim: row mismatch " + std::to_string(p.rows()) + " vs " +
                                 std::to_string(r));
        total += p.cols();
    }
    Tensor out({r, total});
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        const std::size_t c = p.cols();
        for (std::size_t i = 0; i < r; ++i)
            std::copy(p.data() + i * c, p.data() + (i + 1) * c, out.data() + i * total + off);
        off += c;
    }
    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    Tape* tp = nullptr;
    for (const Tensor* p : ptrs) {
        if (!p->on_tape()) continue;
        if (tp && tp != p->tape()) throw ArgumentError("operation mixes tensors from two different tapes");
        tp = p->tape();
    }
    if (!tp) return out;
    struct Piece {
        int node;
        std::size_t off, c;
    };
    auto pieces = std::make_shared<std::vector<Piece>>();
    std::vector<int> in_nodes;
    off = 0;
    for (const Tensor& p : parts) {
        int n = node_on(p, tp);
        if (n >= 0) {
            pieces->push_back({n, off, p.cols()});
            in_nodes.push_back(n);
        }
        off += p.cols();
    }
    int id = tp->add_node(in_nodes, r * total, [=](const double* g, Tape& t) {
        for (const Piece& pc : *pieces) {
            double* gp = t.grad_buffer(pc.node, r * pc.c);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < pc.c; ++j) gp[i * pc.c + j] += g[i * total + pc.off + j];
        }
    });
    return bind_result(std::move(out), tp, id);
}

Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1) {
    if (x.rank() != 2) throw DimensionError("slice_cols: need rank-2, got " + shape_str(x.shape()));
    if (c0 >= c1 || c1 > x.cols())
        throw ArgumentError("slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                            ") out of " + std::to_string(x.cols()) + " columns");
    const std::size_t r = x.rows(), c = x.cols(), w = c1 - c0;
    Tensor out({r, w});
    for (std::size_t i = 0; i < r; ++i)
        std::copy(x.data() + i * c + c0, x.data() + i * c + c1, out.data() + i * w);
    Tape* tp = result_tape({&x});
    if (!tp) return out;
    int nx = node_on(x, tp);
    int id = tp->add_node({nx}, r * w, [=](const double* g, Tape& t) {
        double* gx = t.grad_buffer(nx, r * c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < w; ++j) gx[i * c + c0 + j] += g[i * w + j];
    });
    return bind_result(std::move(out), tp, id);
}

Tensor gather_rows(const Tensor& src, const std::vector<std::uint32_t>& idx) {
    if (src.rank() != 2) throw DimensionError("gather_rows: need rank-2, got " + shape_str(src.shape()));
    const std::size_t r = src.rows(), c = src.cols(), k = idx.size();
    for (std::uint32_t i : idx)
        if (i >= r) throw ArgumentError("gather_rows: index " + std::to_string(i) + " out of " + std::to_string(r) + " rows");
    Tensor out({k, c});
    for (std::size_t i = 0; i < k; ++i)
        std::copy(src.data() + idx[i] * c, src.data() + (idx[i] + 1) * c, out.data() + i * c);
    Tape* tp = result_tape({&src});
    if (!tp) return out;
    int ns = node_on(src, tp);
    auto ix = std::make_shared<std::vector<std::uint32_t>>(idx);
    int id = tp->add_node({ns}, k * c, [=](const double* g, Tape& t) {
        double* gs = t.grad_buffer(ns, r * c);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < c; ++j) gs[(*ix)[i] * c + j] += g[i * c + j];
    });
    return bind_result(std::move(out), tp, id);
}

namespace {

double huber(double d) {
    double a = std::fabs(d);
    return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

double huber_grad(double d) {
    if (d > 1.0) return 1.0;
    if (d < -1.0) return -1.0;
    return d;
}

void check_masked_pair(const char* op, const Tensor& pred, const Tensor& target, const Tensor& mask) {
    require_same_shape(op, pred, target);
    if (mask.size() != pred.rows())
        throw DimensionError(std::string(op) + ": mask of " + std::to_string(mask.size()) +
                             " entries for " + std::to_string(pred.rows()) + " rows");
}

}  // namespace

Tensor smooth_l1(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    check_masked_pair("smooth_l1", pred, target, mask);
    const std::size_t r = pred.rows(), c = pred.cols();
    double msum = 0.0;
    for (std::size_t i = 0; i < r; ++i) msum += mask[i];
    double total = 0.0;
    if (msum > 0.0) {
        for (std::size_t i = 0; i < r; ++i) {
            if (mask[i] == 0.0) continue;
            double rowsum = 0.0;
            for (std::size_t j = 0; j < c; ++j) rowsum += huber(pred[i * c + j] - target[i * c + j]);
            total += mask[i] * rowsum;
        }
        total /= msum;
    }
    Tensor out = Tensor::scalar(total);
    Tape* tp = result_tape({&pred, &target, &mask});
    if (!tp) return out;
    int np = node_on(pred, tp), nt = node_on(target, tp);
    Buf pv = keep(pred), tv = keep(target), mv = keep(mask);
    int id = tp->add_node({np, nt}, 1, [=](const double* g, Tape& t) {
        if (msum == 0.0) return;
        double* gp = np >= 0 ? t.grad_buffer(np, r * c) : nullptr;
        double* gt = nt >= 0 ? t.grad_buffer(nt, r * c) : nullptr;
        for (std::size_t i = 0; i < r; ++i) {
            if ((*mv)[i] == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) {
                double d = g[0] * (*mv)[i] * huber_grad((*pv)[i * c + j] - (*tv)[i * c + j]) / msum;
                if (gp) gp[i * c + j] += d;
                if (gt) gt[i * c + j] -= d;
            }
        }
    });
    return bind_result(std::move(out), tp, id);
}

Tensor binary_cross_entropy(const Tensor& prob, const Tensor& target, const Tensor& mask) {
    check_masked_pair("binary_cross_entropy", prob, target, mask);
    constexpr double kEps = 1e-12;
    const std::size_t r = prob.rows(), c = prob.cols();
    double msum = 0.0;
    for (std::size_t i = 0; i < r; ++i) msum += mask[i];
    double total = 0.0;
    if (msum > 0.0) {
        for (std::size_t i = 0; i < r; ++i) {
            if (mask[i] == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) {
                double p = std::clamp(prob[i * c + j], kEps, 1.0 - kEps);
                double y = target[i * c + j];
                total -= mask[i] * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
            }
        }
        total /= msum;
    }
    Tensor out = Tensor::scalar(total);
    Tape* tp = result_tape({&prob, &target, &mask});
    if (!tp) return out;
    int np = node_on(prob, tp);
    Buf pv = keep(prob), tv = keep(target), mv = keep(mask);
    int id = tp->add_node({np}, 1, [=](const double* g, Tape& t) {
        if (msum == 0.0 || np < 0) return;
        double* gp = t.grad_buffer(np, r * c);
        for (std::size_t i = 0; i < r; ++i) {
            if ((*mv)[i] == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) {
                double raw = (*pv)[i * c + j];
                if (raw < kEps || raw > 1.0 - kEps) continue;
                double y = (*tv)[i * c + j];
                gp[i * c + j] += g[0] * (*mv)[i] * (raw - y) / (raw * (1.0 - raw)) / msum;
            }
        }
    });
    return bind_result(std::move(out), tp, id);
}

Tensor cosine_rows(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols())
        throw DimensionError("cosine_rows: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    constexpr double kFloor = 1e-12;
    const std::size_t m = a.rows(), n = b.rows(), d = a.cols();
    std::vector<double> na(m), nb(n);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += a[i * d + j] * a[i * d + j];
        na[i] = std::max(std::sqrt(s), kFloor);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += b[i * d + j] * b[i * d + j];
        nb[i] = std::max(std::sqrt(s), kFloor);
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t q = 0; q < d; ++q) dot += a[i * d + q] * b[j * d + q];
            out.data()[i * n + j] = dot / (na[i] * nb[j]);
        }
    Tape* tp = result_tape({&a, &b});
    if (!tp) return out;
    int nA = node_on(a, tp), nB = node_on(b, tp);
    Buf av = keep(a), bv = keep(b), sv = keep(out);
    auto nav = std::make_shared<std::vector<double>>(std::move(na));
    auto nbv = std::make_shared<std::vector<double>>(std::move(nb));
    int id = tp->add_node({nA, nB}, m * n, [=](const double* g, Tape& t) {
        double* ga = nA >= 0 ? t.grad_buffer(nA, m * d) : nullptr;
        double* gb = nB >= 0 ? t.grad_buffer(nB, n * d) : nullptr;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double gu = g[i * n + j];
                if (gu == 0.0) continue;
                double s = (*sv)[i * n + j];
                double inv = 1.0 / ((*nav)[i] * (*nbv)[j]);
                for (std::size_t q = 0; q < d; ++q) {
                    double ai = (*av)[i * d + q], bj = (*bv)[j * d + q];
                    if (ga) ga[i * d + q] += gu * (bj * inv - s * ai / ((*nav)[i] * (*nav)[i]));
                    if (gb) gb[j * d + q] += gu * (ai * inv - s * bj / ((*nbv)[j] * (*nbv)[j]));
                }
            }
    });
    return bind_result(std::move(out), tp, id);
}

}  // namespace bat
