#include "dan/layers.hpp"

#include <cmath>
#include <vector>

#include "dan/errors.hpp"
#include "dan/ops.hpp"

namespace dan {

Tensor embed(std::span<const std::int32_t> tokens, const EmbeddingTable& table) {
    return gather_columns(table.weight, tokens);
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from({rows, cols}, std::move(v), true);
}

namespace {

LstmCell make_cell(std::size_t input_dim, std::size_t hidden, Rng& rng) {
    LstmCell cell;
    cell.hidden = hidden;
    cell.wx = glorot_uniform(input_dim, 4 * hidden, rng);
    cell.wh = glorot_uniform(hidden, 4 * hidden, rng);
    std::vector<double> bias(4 * hidden, 0.0);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) bias[j] = 1.0;
    cell.b = Tensor::from({4 * hidden}, std::move(bias), true);
    return cell;
}

// Runs one direction over x [B x T x d_in]; returns the hidden state of every
// step indexed by time.
std::vector<Tensor> run_direction(const Tensor& x, const LstmCell& cell, bool reverse) {
    const std::size_t batch = x.dim(0), steps = x.dim(1), din = x.dim(2), h = cell.hidden;
    if (cell.wx.dim(0) != din) {
        throw DimensionError("blstm: input width " + std::to_string(din) + " does not match layer input " +
                             std::to_string(cell.wx.dim(0)));
    }
    Tensor proj = reshape(matmul(reshape(x, {batch * steps, din}), cell.wx), {batch, steps, 4 * h});
    proj = add_bias(proj, cell.b);

    std::vector<Tensor> states(steps);
    Tensor hprev, cprev;
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reverse ? steps - 1 - k : k;
        Tensor pre = select(proj, 1, t);
        if (hprev.defined()) pre = add(pre, matmul(hprev, cell.wh));
        Tensor in_gate = sigmoid(slice(pre, 1, 0, h));
        Tensor forget_gate = sigmoid(slice(pre, 1, h, 2 * h));
        Tensor candidate = tanh(slice(pre, 1, 2 * h, 3 * h));
        Tensor out_gate = sigmoid(slice(pre, 1, 3 * h, 4 * h));
        Tensor c = mul(in_gate, candidate);
        if (cprev.defined()) c = add(mul(forget_gate, cprev), c);
        Tensor hs = mul(out_gate, tanh(c));
        states[t] = hs;
        hprev = hs;
        cprev = c;
    }
    return states;
}

void check_layer_input(const Tensor& x, const BlstmLayer& layer, const char* op) {
    if (!x.defined()) throw ContractError(std::string(op) + ": undefined input");
    if (x.rank() != 2 && x.rank() != 3) {
        throw DimensionError(std::string(op) + ": expected [T x d] or [B x T x d], got " + shape_str(x.shape()));
    }
    if (x.shape().back() != layer.input_dim) {
        throw DimensionError(std::string(op) + ": input " + shape_str(x.shape()) + " does not match layer input " +
                             std::to_string(layer.input_dim));
    }
}

Tensor as_batched(const Tensor& x) { return x.rank() == 3 ? x : reshape(x, {1, x.dim(0), x.dim(1)}); }

}  // namespace

BlstmLayer BlstmLayer::create(std::size_t input_dim, std::size_t output_dim, Rng& rng) {
    if (output_dim == 0 || output_dim % 2 != 0) {
        throw ConfigError("BLSTM output dimension must be positive and even, got " + std::to_string(output_dim));
    }
    BlstmLayer layer;
    layer.input_dim = input_dim;
    layer.output_dim = output_dim;
    layer.fwd = make_cell(input_dim, output_dim / 2, rng);
    layer.bwd = make_cell(input_dim, output_dim / 2, rng);
    return layer;
}

Tensor blstm_seq(const Tensor& x, const BlstmLayer& layer) {
    check_layer_input(x, layer, "blstm_seq");
    const Tensor xb = as_batched(x);
    const auto fwd = run_direction(xb, layer.fwd, false);
    const auto bwd = run_direction(xb, layer.bwd, true);
    Tensor out = concat(stack(fwd, 1), stack(bwd, 1), 2);
    if (x.rank() == 2) out = reshape(out, {x.dim(0), layer.output_dim});
    return out;
}

Tensor blstm_pool(const Tensor& x, const BlstmLayer& layer) {
    check_layer_input(x, layer, "blstm_pool");
    const Tensor xb = as_batched(x);
    const auto fwd = run_direction(xb, layer.fwd, false);
    const auto bwd = run_direction(xb, layer.bwd, true);
    Tensor out = concat(fwd.back(), bwd.front(), 1);
    if (x.rank() == 2) out = reshape(out, {layer.output_dim});
    return out;
}

AttentionResult attend(const Tensor& src, const Tensor& story, const Tensor& story_mask) {
    if (!src.defined() || !story.defined()) throw ContractError("attend: undefined input");
    if (src.rank() != story.rank() || (src.rank() != 2 && src.rank() != 3)) {
        throw DimensionError("attend: ranks differ or unsupported, " + shape_str(src.shape()) + " vs " +
                             shape_str(story.shape()));
    }
    if (src.shape().back() != story.shape().back()) {
        throw DimensionError("attend: feature widths differ, " + shape_str(src.shape()) + " vs " +
                             shape_str(story.shape()));
    }
    const bool single = src.rank() == 2;
    const Tensor s = single ? reshape(src, {1, src.dim(0), src.dim(1)}) : src;
    const Tensor u = single ? reshape(story, {1, story.dim(0), story.dim(1)}) : story;
    if (s.dim(0) != u.dim(0)) {
        throw DimensionError("attend: batch sizes differ, " + shape_str(src.shape()) + " vs " +
                             shape_str(story.shape()));
    }
    Tensor scores = bmm(s, u, true);
    Tensor weights = story_mask.defined() ? masked_softmax_rows(scores, story_mask) : softmax_rows(scores);
    Tensor context = bmm(weights, u);
    if (single) {
        weights = reshape(weights, {src.dim(0), story.dim(0)});
        context = reshape(context, {src.dim(0), story.dim(1)});
    }
    return {weights, context};
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return x;
    const double keep = 1.0 - rate;
    std::vector<double> m(x.numel());
    for (auto& v : m) v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    return mul(x, Tensor::from(x.shape(), std::move(m)));
}

Tensor dense_shared(const Tensor& h, const Tensor& w, const Tensor& b) {
    if (w.rank() != 2 || h.shape().back() != w.dim(1)) {
        throw DimensionError("dense_shared: features " + shape_str(h.shape()) + " do not match weights " +
                             shape_str(w.shape()));
    }
    if (b.numel() != w.dim(0)) {
        throw DimensionError("dense_shared: bias " + shape_str(b.shape()) + " does not match weights " +
                             shape_str(w.shape()));
    }
    const std::size_t d = w.dim(1);
    const std::size_t rows = h.numel() / d;
    Tensor s = add_bias(matmul(reshape(h, {rows, d}), transpose(w)), b);
    Shape out = h.shape();
    out.back() = w.dim(0);
    return reshape(s, std::move(out));
}

}  // namespace dan
