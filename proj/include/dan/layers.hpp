#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "dan/rng.hpp"
#include "dan/tensor.hpp"

namespace dan {

// Word embedding matrix W_e of shape [d_e x V]; column 0 is PAD.
struct EmbeddingTable {
    Tensor weight;
    bool trainable = true;

    std::size_t dim() const { return weight.dim(0); }
    std::size_t vocab_size() const { return weight.dim(1); }
};

// Looks up one column per token: [tokens.size() x d_e].
Tensor embed(std::span<const std::int32_t> tokens, const EmbeddingTable& table);

// One LSTM direction. Gate blocks along the 4h axis are ordered
// input, forget, candidate, output.
struct LstmCell {
    Tensor wx;  // [d_in x 4h]
    Tensor wh;  // [h x 4h]
    Tensor b;   // [4h]
    std::size_t hidden = 0;
};

struct BlstmLayer {
    LstmCell fwd;
    LstmCell bwd;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;  // fwd + bwd, even

    // Glorot-uniform weights, zero biases, forget-gate bias 1.
    static BlstmLayer create(std::size_t input_dim, std::size_t output_dim, Rng& rng);
};

// Glorot-uniform [rows x cols] leaf.
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// x is [T x d_in] or [B x T x d_in]; the result keeps the rank with last
// extent output_dim. Row t is fwd_state_t (+) bwd_state_t from zero states.
Tensor blstm_seq(const Tensor& x, const BlstmLayer& layer);

// fwd_state_T (+) bwd_state_1: [output_dim] for rank-2 x, [B x output_dim]
// for rank-3 x.
Tensor blstm_pool(const Tensor& x, const BlstmLayer& layer);

struct AttentionResult {
    Tensor weights;  // [T_src x T_story] or [B x T_src x T_story]
    Tensor context;  // [T_src x d] or [B x T_src x d]
};

// Dot-product attention of every source row over the story rows. When given,
// story_mask ([T_story] or [B x T_story]) removes PAD positions from the
// softmax.
AttentionResult attend(const Tensor& src, const Tensor& story, const Tensor& story_mask = Tensor());

// Inverted dropout; identity when not training or rate is 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

// s_t = W h_t + b with one (W, b) shared by every position; h is [.. x d],
// W is [|L| x d], b is [|L|].
Tensor dense_shared(const Tensor& h, const Tensor& w, const Tensor& b);

}  // namespace dan
