#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "dan/labels.hpp"

namespace dan {

enum class Variant { Dan, DanNoAnswerAttention, QaSBlstm, QaCoAttention };

// CLI spelling: dan | dan-no-ans-attn | qa-s-blstm | qa-coattention.
std::string_view variant_name(Variant v);
// Table row label, e.g. "DAN (-) Ans. Attention".
std::string_view variant_display_name(Variant v);
Variant parse_variant(std::string_view name);

struct ModelConfig {
    Variant variant = Variant::Dan;
    std::size_t embed_dim = 300;
    std::size_t blstm_dim = 128;  // concatenated fwd + bwd width
    std::size_t question_len = 82;
    std::size_t answer_len = 82;
    Task task = Task::Compat;
    double dropout_rate = 0.1;
    std::uint64_t seed = 1;

    // Desk-scale preset: d_e 64, BLSTM 64, T_q = T_a = 24.
    static ModelConfig micro();

    std::size_t story_len() const { return question_len + answer_len; }

    // Throws ConfigError on a violated invariant.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

}  // namespace dan
