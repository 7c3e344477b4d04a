#include "dan/model.hpp"

#include <cmath>

#include "dan/errors.hpp"
#include "dan/ops.hpp"

namespace dan {

namespace {

bool has_story(Variant v) { return v == Variant::Dan || v == Variant::DanNoAnswerAttention; }

std::size_t question_ctx2_input(const ModelConfig& cfg) {
    return cfg.variant == Variant::QaSBlstm ? cfg.blstm_dim : 2 * cfg.blstm_dim;
}

std::size_t answer_ctx2_input(const ModelConfig& cfg) {
    return (cfg.variant == Variant::Dan || cfg.variant == Variant::QaCoAttention) ? 2 * cfg.blstm_dim
                                                                                   : cfg.blstm_dim;
}

void add_blstm(ParamSet& out, const std::string& prefix, const BlstmLayer& layer) {
    out.emplace(prefix + ".fwd.Wx", layer.fwd.wx);
    out.emplace(prefix + ".fwd.Wh", layer.fwd.wh);
    out.emplace(prefix + ".fwd.b", layer.fwd.b);
    out.emplace(prefix + ".bwd.Wx", layer.bwd.wx);
    out.emplace(prefix + ".bwd.Wh", layer.bwd.wh);
    out.emplace(prefix + ".bwd.b", layer.bwd.b);
}

Tensor mask_tensor(std::span<const EncodedExample> batch, bool question, bool answer) {
    std::vector<double> m;
    std::size_t width = 0;
    for (const auto& ex : batch) {
        width = 0;
        if (question) {
            for (auto v : ex.question_mask) m.push_back(v);
            width += ex.question_mask.size();
        }
        if (answer) {
            for (auto v : ex.answer_mask) m.push_back(v);
            width += ex.answer_mask.size();
        }
    }
    return Tensor::from({batch.size(), width}, std::move(m));
}

}  // namespace

Model Model::build(const ModelConfig& cfg, std::size_t vocab_size) {
    cfg.validate();
    if (vocab_size < 2) throw ConfigError("vocabulary must hold at least PAD and UNK");
    Model m;
    m.cfg_ = cfg;
    m.vocab_size_ = vocab_size;
    Rng rng(cfg.seed);

    const double bound = std::sqrt(3.0 / static_cast<double>(cfg.embed_dim));
    std::vector<double> we(cfg.embed_dim * vocab_size);
    for (std::size_t r = 0; r < cfg.embed_dim; ++r) {
        for (std::size_t c = 0; c < vocab_size; ++c) {
            we[r * vocab_size + c] = c == static_cast<std::size_t>(Vocab::kPad) ? 0.0 : rng.uniform(-bound, bound);
        }
    }
    m.embedding_.weight = Tensor::from({cfg.embed_dim, vocab_size}, std::move(we), true);

    m.question_ctx1_ = BlstmLayer::create(cfg.embed_dim, cfg.blstm_dim, rng);
    m.answer_ctx1_ = BlstmLayer::create(cfg.embed_dim, cfg.blstm_dim, rng);
    if (has_story(cfg.variant)) m.story_ctx_ = BlstmLayer::create(cfg.embed_dim, cfg.blstm_dim, rng);
    m.question_ctx2_ = BlstmLayer::create(question_ctx2_input(cfg), cfg.blstm_dim, rng);
    m.answer_ctx2_ = BlstmLayer::create(answer_ctx2_input(cfg), cfg.blstm_dim, rng);

    const std::size_t labels = LabelSpace::for_task(cfg.task).size();
    m.dense_w_ = glorot_uniform(labels, 2 * cfg.blstm_dim, rng);
    m.dense_b_ = Tensor::zeros({labels}, true);
    return m;
}

ParamSet Model::params() const {
    ParamSet out;
    out.emplace("embedding.W_e", embedding_.weight);
    add_blstm(out, "question_context1", question_ctx1_);
    add_blstm(out, "answer_context1", answer_ctx1_);
    if (story_ctx_) add_blstm(out, "story_context", *story_ctx_);
    add_blstm(out, "question_context2", question_ctx2_);
    add_blstm(out, "answer_context2", answer_ctx2_);
    out.emplace("dense.W", dense_w_);
    out.emplace("dense.b", dense_b_);
    return out;
}

std::vector<std::string> Model::blstm_names() const {
    std::vector<std::string> names{"question_context1", "answer_context1"};
    if (story_ctx_) names.push_back("story_context");
    names.push_back("question_context2");
    names.push_back("answer_context2");
    return names;
}

ForwardTrace Model::forward(const EncodedExample& ex, const ForwardOptions& opts) const {
    return forward(std::span<const EncodedExample>(&ex, 1), opts);
}

ForwardTrace Model::forward(std::span<const EncodedExample> batch, const ForwardOptions& opts) const {
    if (batch.empty()) throw ContractError("forward: empty batch");
    const std::size_t B = batch.size(), tq = cfg_.question_len, ta = cfg_.answer_len, d = cfg_.embed_dim;
    const double rate = cfg_.dropout_rate;
    const bool drop = opts.training && rate > 0.0;
    if (drop && opts.rng == nullptr) throw ContractError("forward: training with dropout needs an rng");

    std::vector<std::int32_t> q_idx, a_idx, qa_idx;
    q_idx.reserve(B * tq);
    a_idx.reserve(B * ta);
    for (const auto& ex : batch) {
        if (ex.question.size() != tq || ex.answer.size() != ta || ex.story.size() != tq + ta ||
            ex.question_mask.size() != tq || ex.answer_mask.size() != ta) {
            throw ContractError("forward: example '" + ex.id + "' is not encoded for T_q=" + std::to_string(tq) +
                                ", T_a=" + std::to_string(ta));
        }
        q_idx.insert(q_idx.end(), ex.question.begin(), ex.question.end());
        a_idx.insert(a_idx.end(), ex.answer.begin(), ex.answer.end());
        qa_idx.insert(qa_idx.end(), ex.story.begin(), ex.story.end());
    }

    auto maybe_drop = [&](const Tensor& x) { return drop ? dropout(x, rate, true, *opts.rng) : x; };

    ForwardTrace tr;
    const Tensor e_q = reshape(embed(q_idx, embedding_), {B, tq, d});
    const Tensor e_a = reshape(embed(a_idx, embedding_), {B, ta, d});
    tr.h_q1 = maybe_drop(blstm_seq(e_q, question_ctx1_));
    tr.h_a1 = maybe_drop(blstm_seq(e_a, answer_ctx1_));

    auto zeroed = [&](const Tensor& c) {
        return opts.zero_attention_context ? Tensor::zeros(c.shape()) : c;
    };

    switch (cfg_.variant) {
        case Variant::Dan:
        case Variant::DanNoAnswerAttention: {
            const Tensor e_qa = reshape(embed(qa_idx, embedding_), {B, tq + ta, d});
            tr.h_qa = maybe_drop(blstm_seq(e_qa, *story_ctx_));
            const Tensor story_mask = mask_tensor(batch, true, true);
            auto att_q = attend(tr.h_q1, tr.h_qa, story_mask);
            tr.attn_q = att_q.weights;
            tr.c_q = zeroed(att_q.context);
            tr.h_q2 = concat(tr.h_q1, tr.c_q, 2);
            if (cfg_.variant == Variant::Dan) {
                auto att_a = attend(tr.h_a1, tr.h_qa, story_mask);
                tr.attn_a = att_a.weights;
                tr.c_a = zeroed(att_a.context);
                tr.h_a2 = concat(tr.h_a1, tr.c_a, 2);
            } else {
                tr.h_a2 = tr.h_a1;
            }
            break;
        }
        case Variant::QaSBlstm:
            tr.h_q2 = tr.h_q1;
            tr.h_a2 = tr.h_a1;
            break;
        case Variant::QaCoAttention: {
            auto att_q = attend(tr.h_q1, tr.h_a1, mask_tensor(batch, false, true));
            auto att_a = attend(tr.h_a1, tr.h_q1, mask_tensor(batch, true, false));
            tr.attn_q = att_q.weights;
            tr.attn_a = att_a.weights;
            tr.c_q = zeroed(att_q.context);
            tr.c_a = zeroed(att_a.context);
            tr.h_q2 = concat(tr.h_q1, tr.c_q, 2);
            tr.h_a2 = concat(tr.h_a1, tr.c_a, 2);
            break;
        }
    }

    tr.h_q3 = blstm_seq(tr.h_q2, question_ctx2_);
    tr.h_a3 = blstm_pool(tr.h_a2, answer_ctx2_);
    const Tensor joint = maybe_drop(concat(tr.h_q3, repeat_axis(tr.h_a3, 1, tq), 2));
    tr.scores = dense_shared(joint, dense_w_, dense_b_);
    tr.probs = softmax_rows(tr.scores);
    return tr;
}

std::vector<LabelSeq> predict_labels(const Tensor& probs, const std::vector<std::vector<std::uint8_t>>& masks) {
    if (probs.rank() != 3 || probs.dim(0) != masks.size()) {
        throw DimensionError("predict_labels: probabilities " + shape_str(probs.shape()) + " do not match " +
                             std::to_string(masks.size()) + " masks");
    }
    const std::size_t B = probs.dim(0), T = probs.dim(1), L = probs.dim(2);
    const auto p = probs.values();
    std::vector<LabelSeq> out(B, LabelSeq(T, 0));
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < T; ++t) {
            if (t >= masks[b].size() || masks[b][t] == 0) continue;
            const double* row = p.data() + (b * T + t) * L;
            std::size_t best = 0;
            for (std::size_t l = 1; l < L; ++l) {
                if (row[l] > row[best]) best = l;
            }
            out[b][t] = static_cast<int>(best);
        }
    }
    return out;
}

std::vector<LabelSeq> predict_labels(const ForwardTrace& trace, std::span<const EncodedExample> batch) {
    std::vector<std::vector<std::uint8_t>> masks;
    masks.reserve(batch.size());
    for (const auto& ex : batch) masks.push_back(ex.question_mask);
    return predict_labels(trace.probs, masks);
}

}  // namespace dan
