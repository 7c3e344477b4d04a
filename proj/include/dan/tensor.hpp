#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dan {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;
struct Node;

using BackwardRule = std::function<void(Node&)>;

// Storage behind a Tensor handle. Values and grad are row-major and always the
// same length.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::string op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardRule backward;
    Tape* tape = nullptr;
    std::size_t tape_index = 0;
};

// Shared handle to a dense double-precision array with an accumulated gradient.
// Copies alias; use clone() for a detached deep copy.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double fill, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t numel() const { return node_->value.size(); }

    std::span<double> values() { return node_->value; }
    std::span<const double> values() const { return node_->value; }
    std::span<double> grad() { return node_->grad; }
    std::span<const double> grad() const { return node_->grad; }

    double item() const;
    double at(std::size_t i) const { return node_->value.at(i); }
    double at(std::size_t i, std::size_t j) const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }
    void zero_grad();

    const std::string& op() const { return node_->op; }
    Tensor clone() const;

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// Ordered record of the operations executed while it is active. Operations
// whose inputs need gradients are appended; nothing is recorded without an
// active tape, which is the inference mode.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    ~Tape();

    void record(const std::shared_ptr<Node>& node);

    // Replays backward rules in reverse execution order. Interior gradients
    // are reset first; leaf gradients accumulate across calls.
    void backward(const Tensor& loss);

    std::size_t size() const { return nodes_.size(); }
    void clear();

private:
    std::vector<std::shared_ptr<Node>> nodes_;
};

// Makes `tape` the active tape of the calling thread for the scope's lifetime.
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;
    ~TapeScope();

private:
    Tape* previous_;
};

Tape* active_tape();

// d(loss)/d(leaf) for every reachable leaf with requires_grad.
void backward(const Tensor& loss);

// Builds an op result. When an active tape exists and some input requires a
// gradient, the result is recorded with `rule`; otherwise it is a constant.
Tensor make_result(Shape shape, std::vector<double> values, std::string_view op,
                   std::vector<Tensor> inputs, BackwardRule rule);

namespace debug {

// Fault injection for gradient-check negative controls: the backward rule of
// the named op scales its input-gradient contribution by 1.5. Empty disables.
void set_corrupted_op(std::string op);
const std::string& corrupted_op();

}  // namespace debug

}  // namespace dan
