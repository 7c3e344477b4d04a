#include "dan/config.hpp"

#include "dan/errors.hpp"

namespace dan {

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::Dan: return "dan";
        case Variant::DanNoAnswerAttention: return "dan-no-ans-attn";
        case Variant::QaSBlstm: return "qa-s-blstm";
        case Variant::QaCoAttention: return "qa-coattention";
    }
    return "?";
}

std::string_view variant_display_name(Variant v) {
    switch (v) {
        case Variant::Dan: return "DAN";
        case Variant::DanNoAnswerAttention: return "DAN (-) Ans. Attention";
        case Variant::QaSBlstm: return "QA S-BLSTM";
        case Variant::QaCoAttention: return "QA CoAttention";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (auto v : {Variant::Dan, Variant::DanNoAnswerAttention, Variant::QaSBlstm, Variant::QaCoAttention}) {
        if (name == variant_name(v)) return v;
    }
    throw ConfigError("unknown model variant '" + std::string(name) +
                      "' (expected dan, dan-no-ans-attn, qa-s-blstm or qa-coattention)");
}

ModelConfig ModelConfig::micro() {
    ModelConfig cfg;
    cfg.embed_dim = 64;
    cfg.blstm_dim = 64;
    cfg.question_len = 24;
    cfg.answer_len = 24;
    return cfg;
}

void ModelConfig::validate() const {
    if (question_len < 1 || answer_len < 1) throw ConfigError("question and answer lengths must be >= 1");
    if (embed_dim < 1) throw ConfigError("embedding dimension must be >= 1");
    if (blstm_dim < 2 || blstm_dim % 2 != 0) {
        throw ConfigError("BLSTM dimension must be even and >= 2, got " + std::to_string(blstm_dim));
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(dropout_rate));
    }
}

}  // namespace dan
