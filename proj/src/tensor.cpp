#include "dan/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "dan/errors.hpp"

namespace dan {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::atomic<bool> g_fault_enabled{false};
std::string g_fault_op;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

static void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
    for (auto e : shape) {
        if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
    }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double fill, bool requires_grad) {
    check_shape(shape);
    auto node = std::make_shared<Node>();
    const auto n = shape_numel(shape);
    node->shape = std::move(shape);
    node->value.assign(n, fill);
    node->grad.assign(n, 0.0);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (shape_numel(shape) != values.size()) {
        throw DimensionError("shape " + shape_str(shape) + " does not hold " + std::to_string(values.size()) +
                             " values");
    }
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->grad.assign(values.size(), 0.0);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

double Tensor::item() const {
    if (numel() != 1) throw ContractError("item() on non-scalar tensor " + shape_str(shape()));
    return node_->value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("at(i, j) needs a rank-2 tensor, got " + shape_str(shape()));
    return node_->value.at(i * shape()[1] + j);
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::clone() const {
    return Tensor::from(node_->shape, node_->value, node_->requires_grad);
}

Tape::~Tape() { clear(); }

void Tape::record(const std::shared_ptr<Node>& node) {
    node->tape = this;
    node->tape_index = nodes_.size();
    nodes_.push_back(node);
}

void Tape::clear() {
    for (auto& n : nodes_) {
        n->tape = nullptr;
        n->inputs.clear();
        n->backward = nullptr;
    }
    nodes_.clear();
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined()) throw ContractError("backward() on an undefined tensor");
    if (loss.numel() != 1) {
        throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    Node* root = loss.node();
    if (root->tape != this) throw ContractError("backward(): loss was not produced on this tape");

    for (std::size_t i = 0; i <= root->tape_index; ++i) {
        auto& g = nodes_[i]->grad;
        std::fill(g.begin(), g.end(), 0.0);
    }
    root->grad[0] = 1.0;
    for (std::size_t i = root->tape_index + 1; i-- > 0;) {
        Node& n = *nodes_[i];
        if (n.backward) n.backward(n);
    }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void backward(const Tensor& loss) {
    if (!loss.defined()) throw ContractError("backward() on an undefined tensor");
    if (loss.numel() != 1) {
        throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    Tape* tape = loss.node()->tape;
    if (tape == nullptr) {
        // A leaf loss has the trivial gradient d(loss)/d(loss) = 1.
        if (loss.requires_grad() && loss.node()->inputs.empty()) {
            loss.node()->grad[0] += 1.0;
            return;
        }
        throw ContractError("backward(): loss was not produced on an active tape");
    }
    tape->backward(loss);
}

Tensor make_result(Shape shape, std::vector<double> values, std::string_view op, std::vector<Tensor> inputs,
                   BackwardRule rule) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->grad.assign(values.size(), 0.0);
    node->value = std::move(values);
    node->op = std::string(op);

    Tape* tape = g_active_tape;
    const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (tape == nullptr || !needs) return Tensor(std::move(node));

    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.shared());

    if (g_fault_enabled.load(std::memory_order_relaxed) && node->op == g_fault_op) {
        node->backward = [rule = std::move(rule)](Node& self) {
            std::vector<std::vector<double>> before;
            for (auto& in : self.inputs) before.push_back(in->grad);
            rule(self);
            for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                auto& g = self.inputs[k]->grad;
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = before[k][i] + 1.5 * (g[i] - before[k][i]);
            }
        };
    } else {
        node->backward = std::move(rule);
    }
    tape->record(node);
    return Tensor(std::move(node));
}

namespace debug {

void set_corrupted_op(std::string op) {
    g_fault_op = std::move(op);
    g_fault_enabled.store(!g_fault_op.empty());
}

const std::string& corrupted_op() { return g_fault_op; }

}  // namespace debug

}  // namespace dan
