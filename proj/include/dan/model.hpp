#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dan/config.hpp"
#include "dan/corpus.hpp"
#include "dan/labels.hpp"
#include "dan/layers.hpp"
#include "dan/rng.hpp"
#include "dan/tensor.hpp"

namespace dan {

// All trainable tensors by name; std::map keeps iteration sorted.
using ParamSet = std::map<std::string, Tensor>;

struct ForwardOptions {
    bool training = false;
    Rng* rng = nullptr;  // dropout masks; required when training with dropout > 0
    // Replaces every attention context vector with zeros.
    bool zero_attention_context = false;
};

// Intermediates of one batched forward pass. Sequence tensors are
// [B x T x width]; undefined members do not exist for the variant.
struct ForwardTrace {
    Tensor h_q1, h_a1, h_qa;
    Tensor attn_q, attn_a;  // attention weights
    Tensor c_q, c_a;
    Tensor h_q2, h_a2;
    Tensor h_q3;  // [B x T_q x blstm_dim]
    Tensor h_a3;  // polarity vector, [B x blstm_dim]
    Tensor scores;  // [B x T_q x |L|]
    Tensor probs;
};

class Model {
public:
    // Parameters are drawn deterministically from cfg.seed.
    static Model build(const ModelConfig& cfg, std::size_t vocab_size);

    ForwardTrace forward(std::span<const EncodedExample> batch, const ForwardOptions& opts = {}) const;
    ForwardTrace forward(const EncodedExample& ex, const ForwardOptions& opts = {}) const;

    ParamSet params() const;

    const ModelConfig& config() const { return cfg_; }
    const LabelSpace& labels() const { return LabelSpace::for_task(cfg_.task); }
    std::size_t vocab_size() const { return vocab_size_; }

    const EmbeddingTable& embedding() const { return embedding_; }
    EmbeddingTable& embedding() { return embedding_; }

    // Named BLSTM layers present in this variant, e.g. "question_context1".
    std::vector<std::string> blstm_names() const;

private:
    ModelConfig cfg_;
    std::size_t vocab_size_ = 0;
    EmbeddingTable embedding_;
    BlstmLayer question_ctx1_;
    BlstmLayer answer_ctx1_;
    std::optional<BlstmLayer> story_ctx_;
    BlstmLayer question_ctx2_;
    BlstmLayer answer_ctx2_;
    Tensor dense_w_;  // [|L| x 2 blstm_dim]
    Tensor dense_b_;  // [|L|]
};

// argmax over labels per non-PAD position (lowest index wins ties); PAD
// positions are O. One sequence of length T_q per batch row.
std::vector<LabelSeq> predict_labels(const ForwardTrace& trace, std::span<const EncodedExample> batch);
// Same on a raw [B x T x |L|] probability tensor with [B x T] masks.
std::vector<LabelSeq> predict_labels(const Tensor& probs, const std::vector<std::vector<std::uint8_t>>& masks);

}  // namespace dan
