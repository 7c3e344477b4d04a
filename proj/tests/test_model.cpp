#include "doctest.h"

#include <cmath>

#include "dan/errors.hpp"
#include "dan/model.hpp"
#include "dan/ops.hpp"

using namespace dan;

namespace {

ModelConfig tiny(Variant v, Task task = Task::Compat) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.embed_dim = 6;
    cfg.blstm_dim = 8;
    cfg.question_len = 5;
    cfg.answer_len = 4;
    cfg.task = task;
    cfg.dropout_rate = 0.0;
    cfg.seed = 3;
    return cfg;
}

EncodedExample example(const ModelConfig& cfg, std::uint64_t seed, std::size_t q_len, std::size_t a_len,
                       std::size_t vocab = 15) {
    Rng rng(seed);
    EncodedExample ex;
    ex.id = "ex" + std::to_string(seed);
    for (std::size_t t = 0; t < cfg.question_len; ++t) {
        const bool on = t < q_len;
        ex.question.push_back(on ? static_cast<std::int32_t>(1 + rng.below(vocab - 1)) : 0);
        ex.question_mask.push_back(on);
        ex.labels.push_back(0);
    }
    for (std::size_t t = 0; t < cfg.answer_len; ++t) {
        const bool on = t < a_len;
        ex.answer.push_back(on ? static_cast<std::int32_t>(1 + rng.below(vocab - 1)) : 0);
        ex.answer_mask.push_back(on);
    }
    ex.story = ex.question;
    ex.story.insert(ex.story.end(), ex.answer.begin(), ex.answer.end());
    return ex;
}

const Variant kAll[] = {Variant::Dan, Variant::DanNoAnswerAttention, Variant::QaSBlstm, Variant::QaCoAttention};

}  // namespace

TEST_CASE("variant names round-trip") {
    for (auto v : kAll) CHECK(parse_variant(variant_name(v)) == v);
    CHECK(variant_display_name(Variant::DanNoAnswerAttention) == "DAN (-) Ans. Attention");
    CHECK_THROWS_AS(parse_variant("lstm-crf"), ConfigError);
}

TEST_CASE("config defaults and validation") {
    ModelConfig cfg;
    CHECK(cfg.embed_dim == 300);
    CHECK(cfg.blstm_dim == 128);
    CHECK(cfg.question_len == 82);
    CHECK(cfg.answer_len == 82);
    CHECK(cfg.dropout_rate == 0.1);
    CHECK(cfg.story_len() == 164);
    ModelConfig micro = ModelConfig::micro();
    CHECK(micro.embed_dim == 64);
    CHECK(micro.blstm_dim == 64);
    CHECK(micro.question_len == 24);
    cfg.blstm_dim = 7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ModelConfig{};
    cfg.question_len = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(Model::build(tiny(Variant::Dan), 1), ConfigError);
}

TEST_CASE("parameter inventory per variant") {
    Model dan = Model::build(tiny(Variant::Dan), 15);
    const auto p = dan.params();
    CHECK(p.size() == 1 + 5 * 6 + 2);
    CHECK(dan.blstm_names() ==
          std::vector<std::string>{"question_context1", "answer_context1", "story_context", "question_context2",
                                   "answer_context2"});
    CHECK(p.at("embedding.W_e").shape() == Shape{6, 15});
    CHECK(p.at("question_context2.fwd.Wx").shape() == Shape{16, 16});
    CHECK(p.at("answer_context2.fwd.Wx").shape() == Shape{16, 16});
    CHECK(p.at("dense.W").shape() == Shape{4, 16});
    CHECK(p.at("dense.b").shape() == Shape{4});
    for (std::size_t r = 0; r < 6; ++r) CHECK(p.at("embedding.W_e").at(r, 0) == 0.0);

    auto no_ans = Model::build(tiny(Variant::DanNoAnswerAttention), 15).params();
    CHECK(no_ans.count("story_context.fwd.Wx") == 1);
    CHECK(no_ans.at("answer_context2.fwd.Wx").shape() == Shape{8, 16});
    CHECK(no_ans.at("question_context2.fwd.Wx").shape() == Shape{16, 16});

    auto plain = Model::build(tiny(Variant::QaSBlstm), 15).params();
    CHECK(plain.count("story_context.fwd.Wx") == 0);
    CHECK(plain.at("question_context2.fwd.Wx").shape() == Shape{8, 16});

    auto co = Model::build(tiny(Variant::QaCoAttention, Task::Satisf), 15).params();
    CHECK(co.count("story_context.fwd.Wx") == 0);
    CHECK(co.at("question_context2.fwd.Wx").shape() == Shape{16, 16});
    CHECK(co.at("dense.W").shape() == Shape{7, 16});
}

TEST_CASE("same seed builds bit-identical parameters") {
    auto a = Model::build(tiny(Variant::Dan), 15).params();
    auto b = Model::build(tiny(Variant::Dan), 15).params();
    for (const auto& [name, t] : a) {
        const auto& u = b.at(name);
        CHECK(std::equal(t.values().begin(), t.values().end(), u.values().begin()));
    }
    ModelConfig other = tiny(Variant::Dan);
    other.seed = 4;
    CHECK(Model::build(other, 15).params().at("dense.W").at(0) != a.at("dense.W").at(0));
}

TEST_CASE("forward shapes and normalized rows for every variant") {
    for (auto v : kAll) {
        CAPTURE(variant_name(v));
        const ModelConfig cfg = tiny(v, Task::Satisf);
        Model m = Model::build(cfg, 15);
        std::vector<EncodedExample> batch = {example(cfg, 1, 5, 4), example(cfg, 2, 3, 0)};
        ForwardTrace tr = m.forward(batch);
        CHECK(tr.probs.shape() == Shape{2, 5, 7});
        CHECK(tr.h_q3.shape() == Shape{2, 5, 8});
        CHECK(tr.h_a3.shape() == Shape{2, 8});
        for (std::size_t r = 0; r < 10; ++r) {
            double s = 0.0;
            for (std::size_t l = 0; l < 7; ++l) {
                const double p = tr.probs.at(r * 7 + l);
                CHECK(std::isfinite(p));
                s += p;
            }
            CHECK(std::abs(s - 1.0) < 1e-9);
        }
        const bool attends = v != Variant::QaSBlstm;
        CHECK(tr.attn_q.defined() == attends);
        CHECK(tr.attn_a.defined() == (v == Variant::Dan || v == Variant::QaCoAttention));
        if (v == Variant::QaSBlstm) CHECK(tr.h_q2.node() == tr.h_q1.node());
    }
}

TEST_CASE("PAD story positions get no attention") {
    const ModelConfig cfg = tiny(Variant::Dan);
    Model m = Model::build(cfg, 15);
    const EncodedExample ex = example(cfg, 5, 3, 2);
    ForwardTrace tr = m.forward(ex);
    const std::size_t story = cfg.story_len();
    for (std::size_t i = 0; i < cfg.question_len; ++i) {
        double s = 0.0;
        for (std::size_t u = 0; u < story; ++u) {
            const double w = tr.attn_q.at(i * story + u);
            if (ex.story[u] == Vocab::kPad) CHECK(w == 0.0);
            s += w;
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("batched forward equals single-example forward") {
    const ModelConfig cfg = tiny(Variant::Dan);
    Model m = Model::build(cfg, 15);
    std::vector<EncodedExample> batch = {example(cfg, 1, 5, 4), example(cfg, 2, 2, 1)};
    ForwardTrace both = m.forward(batch);
    ForwardTrace second = m.forward(batch[1]);
    for (std::size_t i = 0; i < second.probs.numel(); ++i) {
        CHECK(both.probs.at(second.probs.numel() + i) == doctest::Approx(second.probs.at(i)).epsilon(1e-13));
    }
}

TEST_CASE("PAD-only answer still yields distributions") {
    const ModelConfig cfg = tiny(Variant::Dan);
    Model m = Model::build(cfg, 15);
    ForwardTrace tr = m.forward(example(cfg, 7, 4, 0));
    for (double p : tr.probs.values()) CHECK(std::isfinite(p));
}

TEST_CASE("forward rejects examples encoded for another length") {
    const ModelConfig cfg = tiny(Variant::Dan);
    Model m = Model::build(cfg, 15);
    ModelConfig longer = cfg;
    longer.question_len = 6;
    CHECK_THROWS_AS(m.forward(example(longer, 1, 3, 3)), ContractError);
}

TEST_CASE("DAN with zeroed attention contexts equals QA S-BLSTM on shared weights") {
    const ModelConfig dcfg = tiny(Variant::Dan);
    const ModelConfig scfg = tiny(Variant::QaSBlstm);
    Model dan = Model::build(dcfg, 15);
    Model plain = Model::build(scfg, 15);
    auto dp = dan.params();
    auto sp = plain.params();
    for (auto& [name, t] : sp) {
        const Tensor& src = dp.at(name);
        if (src.shape() == t.shape()) {
            std::copy(src.values().begin(), src.values().end(), t.values().begin());
        } else {
            // Context-2 input weights: keep the rows that read h^1, drop the
            // rows that read the attention context.
            std::copy(src.values().begin(), src.values().begin() + static_cast<std::ptrdiff_t>(t.numel()),
                      t.values().begin());
        }
    }
    const EncodedExample ex = example(dcfg, 9, 4, 3);
    ForwardOptions zero;
    zero.zero_attention_context = true;
    ForwardTrace a = dan.forward(ex, zero);
    ForwardTrace b = plain.forward(ex);
    for (std::size_t i = 0; i < a.probs.numel(); ++i) CHECK(a.probs.at(i) == doctest::Approx(b.probs.at(i)).epsilon(1e-13));
}

TEST_CASE("dropout needs an rng when training") {
    ModelConfig cfg = tiny(Variant::Dan);
    cfg.dropout_rate = 0.1;
    Model m = Model::build(cfg, 15);
    ForwardOptions opts;
    opts.training = true;
    CHECK_THROWS_AS(m.forward(example(cfg, 1, 3, 3), opts), ContractError);
    Rng rng(1);
    opts.rng = &rng;
    CHECK_NOTHROW(m.forward(example(cfg, 1, 3, 3), opts));
}

TEST_CASE("predict_labels argmax, tie-break and PAD") {
    // One-hot rows.
    Tensor p = Tensor::from({1, 3, 3}, {0, 1, 0, 0, 0, 1, 1, 0, 0});
    CHECK(predict_labels(p, {{1, 1, 1}}) == std::vector<LabelSeq>{{1, 2, 0}});
    // Uniform row goes to label 0; PAD is forced to O.
    Tensor u = Tensor::from({1, 2, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 1});
    CHECK(predict_labels(u, {{1, 0}}) == std::vector<LabelSeq>{{0, 0}});
    // Random probabilities against an independent scan.
    Rng rng(17);
    std::vector<double> v(4 * 6 * 7);
    for (auto& x : v) x = rng.uniform();
    Tensor r = Tensor::from({4, 6, 7}, v);
    std::vector<std::vector<std::uint8_t>> masks(4, std::vector<std::uint8_t>(6, 1));
    masks[2][5] = 0;
    const auto got = predict_labels(r, masks);
    for (std::size_t b = 0; b < 4; ++b) {
        for (std::size_t t = 0; t < 6; ++t) {
            int best = 0;
            double bv = -1;
            for (int l = 0; l < 7; ++l) {
                const double x = v[(b * 6 + t) * 7 + static_cast<std::size_t>(l)];
                if (x > bv) {
                    bv = x;
                    best = l;
                }
            }
            CHECK(got[b][t] == (masks[b][t] ? best : 0));
        }
    }
    CHECK_THROWS_AS(predict_labels(r, {{1}}), DimensionError);
}
