#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "bat/common.hpp"

namespace bat {

class Tape;

// Dense 64-bit tensor. Copies are shallow (shared storage); operations never
// mutate their inputs. A tensor is either detached (plain data) or bound to
// the tape that produced it, in which case backward() can reach it.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor full(std::vector<std::size_t> shape, double v);
    static Tensor from_mat(const Mat& m);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const;
    // Row/column view: rank-1 tensors count as n x 1, scalars as 1 x 1.
    std::size_t rows() const;
    std::size_t cols() const;

    double* data();
    const double* data() const;
    double operator[](std::size_t i) const { return data()[i]; }
    double& at(std::size_t i, std::size_t j) { return data()[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return data()[i * cols() + j]; }
    double value() const;

    bool on_tape() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int node() const { return node_; }
    // Shared handle to the storage; backward closures hold these instead of
    // copying values (buffers are immutable for the life of a tape).
    std::shared_ptr<const std::vector<double>> storage() const { return data_; }
    // Same values, no tape binding; shares storage.
    Tensor detached() const;
    Tensor clone() const;
    Mat to_mat() const;

private:
    std::vector<std::size_t> shape_;
    std::shared_ptr<std::vector<double>> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;

    friend class Tape;
    friend Tensor bind_result(Tensor out, Tape* tape, int node);
};

// Reverse-mode computation tape. Nodes are appended in execution order;
// backward() replays them once, in reverse, accumulating gradients
// additively. One tape and its bound tensors belong to a single execution
// context; distinct tapes are independent.
class Tape {
public:
    using BackwardFn = std::function<void(const double* upstream, Tape&)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers a leaf (typically a parameter). Idempotent per storage
    // buffer: watching the same tensor twice yields the same node.
    Tensor watch(const Tensor& t);

    int add_node(std::vector<int> inputs, std::size_t out_numel, BackwardFn fn);

    // Seeds d(loss)/d(loss) = 1 and propagates. loss must be a scalar bound
    // to this tape.
    void backward(const Tensor& loss);

    // Gradient of the last backward() w.r.t. t, as a detached tensor
    // (zeros if t never received gradient).
    Tensor grad(const Tensor& t) const;

    // Accumulation buffer for a node, zero-initialized on first touch.
    double* grad_buffer(int node, std::size_t numel);
    const std::vector<double>* node_grad(int node) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        std::vector<int> inputs;
        std::size_t numel = 0;
        BackwardFn backward;
        std::vector<double> grad;
    };
    std::vector<Node> nodes_;
    std::unordered_map<const void*, int> watched_;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Results are bound to the (unique) tape of their
// tape-bound inputs; constants mixed in contribute no gradient. Shapes must
// match exactly except where a contract says otherwise.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor broadcast_add_bias(const Tensor& x, const Tensor& bias);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Column-wise max over all rows; gradient routes to the first argmax row.
Tensor max_pool_over_points(const Tensor& x);
// Column-wise max within each consecutive block of group_size rows.
Tensor max_pool_groups(const Tensor& x, std::size_t group_size);
Tensor reshape(const Tensor& x, const std::vector<std::size_t>& shape);
Tensor concat_last_dim(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1);
Tensor gather_rows(const Tensor& src, const std::vector<std::uint32_t>& idx);
// Masked smooth-L1 (delta = 1): sum of per-element Huber over rows with
// mask 1, divided by the mask count; 0 when the mask is empty.
Tensor smooth_l1(const Tensor& pred, const Tensor& target, const Tensor& mask);
// Masked binary cross-entropy over probabilities (clamped to [1e-12, 1-1e-12]),
// normalized like smooth_l1.
Tensor binary_cross_entropy(const Tensor& prob, const Tensor& target, const Tensor& mask);
// s(i,j) = cosine similarity of row a_i and row b_j (norms floored at 1e-12).
Tensor cosine_rows(const Tensor& a, const Tensor& b);

}  // namespace bat
