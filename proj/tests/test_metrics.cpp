#include "doctest.h"

#include "dan/errors.hpp"
#include "dan/metrics.hpp"
#include "reference_scorer.hpp"

using namespace dan;

namespace {

LabelSeq labels_of(const LabelSpace& space, std::initializer_list<const char*> names) {
    LabelSeq out;
    for (const char* n : names) out.push_back(space.index_of(n));
    return out;
}

SpanPred target(std::size_t b, std::size_t e, int pol = 1) { return {b, e, pol, LabelKind::Target}; }

void check_equal(const MetricsReport& got, const ref::Result& want) {
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(got.per_class[k].tp == want.tp[k]);
        CHECK(got.per_class[k].fp == want.fp[k]);
        CHECK(got.per_class[k].fn == want.fn[k]);
        CHECK(got.per_class[k].f1 == want.f1[k]);
    }
    CHECK(got.extraction_tp == want.ext_tp);
    CHECK(got.extraction_fp == want.ext_fp);
    CHECK(got.extraction_fn == want.ext_fn);
    CHECK(got.positive_extractions == want.positives);
    CHECK(got.polarity_matches == want.matches);
    CHECK(got.avg_f1 == want.avg_f1);
    CHECK(got.extraction_f1 == want.ext_f1);
    CHECK(got.polarity_acc == want.polarity_acc);
}

}  // namespace

TEST_CASE("overlap rule") {
    // Exact match.
    auto m = match_targets({target(2, 4)}, {target(2, 4)});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].overlap == 2);
    // 1 of 2 gold tokens: the 50% boundary is positive.
    CHECK(match_targets({target(2, 3)}, {target(2, 4)}).pairs.size() == 1);
    // 1 of 3 is not.
    m = match_targets({target(2, 3)}, {target(2, 5)});
    CHECK(m.pairs.empty());
    CHECK(m.unmatched_preds == std::vector<std::size_t>{0});
    CHECK(m.unmatched_golds == std::vector<std::size_t>{0});
    // The denominator is the gold span: a long prediction over a short gold matches.
    CHECK(match_targets({target(0, 10)}, {target(4, 5)}).pairs.size() == 1);
}

TEST_CASE("greedy matching is one-to-one") {
    // Two predictions on one gold: the larger overlap wins, the other is unmatched.
    auto m = match_targets({target(0, 1), target(1, 4)}, {target(0, 4)});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].pred == 1);
    CHECK(m.unmatched_preds == std::vector<std::size_t>{0});
    // Equal overlap: the leftmost prediction wins.
    m = match_targets({target(0, 1), target(1, 2)}, {target(0, 2)});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].pred == 0);
    // One prediction over two golds: the leftmost gold is taken on a tie.
    m = match_targets({target(0, 4)}, {target(0, 2), target(2, 4)});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].gold == 0);
}

TEST_CASE("majority polarity") {
    const auto& c = LabelSpace::compat();
    CHECK(polarity_of_extraction(labels_of(c, {"C", "C", "I"}), c) == 1);
    CHECK(polarity_of_extraction(labels_of(c, {"C", "I"}), c) == 1);
    CHECK(polarity_of_extraction(labels_of(c, {"I", "U", "U"}), c) == 3);
    CHECK(polarity_of_extraction(labels_of(c, {"U"}), c) == 3);
    CHECK_THROWS_AS(polarity_of_extraction({}, c), ContractError);
}

TEST_CASE("perfect predictions score 1") {
    const auto& c = LabelSpace::compat();
    const std::vector<LabelSeq> g = {labels_of(c, {"O", "C", "C", "O", "I"}), labels_of(c, {"U", "O"})};
    const auto r = score_compat(g, g);
    CHECK(r.avg_f1 == 1.0);
    CHECK(r.extraction_f1 == 1.0);
    CHECK(r.polarity_acc == 1.0);

    const auto& s = LabelSpace::satisf();
    const std::vector<LabelSeq> fig = {labels_of(s, {"F-S", "F-S", "S", "O"})};
    const auto rs = score_satisf(fig, fig);
    CHECK(rs.avg_f1 == 1.0);
    CHECK(rs.extraction_f1 == 1.0);
    CHECK(rs.polarity_acc == 1.0);
}

TEST_CASE("polarity mismatch is a false negative, not a false positive") {
    const auto& c = LabelSpace::compat();
    const auto r = score_compat({labels_of(c, {"O", "I", "O"})}, {labels_of(c, {"O", "C", "O"})});
    CHECK(r.extraction_f1 == 1.0);
    CHECK(r.polarity_acc == 0.0);
    CHECK(r.per_class[0].fn == 1);
    CHECK(r.per_class[0].tp == 0);
    CHECK(r.per_class[1].fp == 0);
    CHECK(r.avg_f1 == 0.0);
}

TEST_CASE("unmatched predictions are false positives of their class") {
    const auto& c = LabelSpace::compat();
    const auto r = score_compat({labels_of(c, {"C", "O", "U"})}, {labels_of(c, {"C", "O", "O"})});
    CHECK(r.per_class[0].tp == 1);
    CHECK(r.per_class[2].fp == 1);
    CHECK(r.extraction_fp == 1);
    // Class 1: F1 1; class 3: precision 0, active; class 2 inactive.
    CHECK(r.avg_f1 == doctest::Approx(0.5));
    CHECK(r.polarity_acc == 1.0);
}

TEST_CASE("function-word clause") {
    const auto& s = LabelSpace::satisf();
    // Gold has no function word: the target alone is a true positive.
    auto r = score_satisf({labels_of(s, {"O", "S", "S"})}, {labels_of(s, {"O", "S", "S"})});
    CHECK(r.per_class[0].tp == 1);
    // Gold has a function word near the target, the prediction has none.
    r = score_satisf({labels_of(s, {"O", "O", "S", "O"})}, {labels_of(s, {"F-S", "O", "S", "O"})});
    CHECK(r.per_class[0].tp == 0);
    CHECK(r.per_class[0].fn == 1);
    CHECK(r.extraction_tp == 0);
    // A function-word hit of another polarity still satisfies the clause.
    r = score_satisf({labels_of(s, {"F-UN", "O", "S", "O"})}, {labels_of(s, {"F-S", "O", "S", "O"})});
    CHECK(r.per_class[0].tp == 1);
    // A gold function word beyond the window does not count.
    r = score_satisf({labels_of(s, {"O", "O", "O", "O", "O", "S"})}, {labels_of(s, {"F-S", "O", "O", "O", "O", "S"})});
    CHECK(r.per_class[0].tp == 1);
}

TEST_CASE("vacuous corpora") {
    const auto r = score_compat({LabelSeq{0, 0}}, {LabelSeq{0, 0}});
    CHECK(r.avg_f1 == 1.0);
    CHECK(r.extraction_f1 == 1.0);
    CHECK(r.polarity_acc == 1.0);
    const auto miss = score_compat({LabelSeq{0, 0}}, {LabelSeq{1, 0}});
    CHECK(miss.avg_f1 == 0.0);
    CHECK(miss.polarity_acc == 0.0);
    CHECK_THROWS_AS(score_compat({LabelSeq{0}}, {LabelSeq{0, 0}}), ContractError);
    CHECK_THROWS_AS(score_compat({}, {LabelSeq{0}}), ContractError);
}

TEST_CASE("removing a false positive never lowers precision") {
    Rng rng(31);
    const auto& c = LabelSpace::compat();
    for (int trial = 0; trial < 100; ++trial) {
        auto cs = ref::random_case(rng, c, false);
        const auto before = score_compat({cs.pred}, {cs.gold});
        const auto preds = spans_from_labels(cs.pred, c);
        const auto m = match_targets(preds, spans_from_labels(cs.gold, c));
        if (m.unmatched_preds.empty()) continue;
        const auto& fp = preds[m.unmatched_preds.front()];
        LabelSeq pruned = cs.pred;
        for (std::size_t t = fp.begin; t < fp.end; ++t) pruned[t] = 0;
        const auto after = score_compat({pruned}, {cs.gold});
        for (std::size_t k = 0; k < 3; ++k) CHECK(after.per_class[k].precision >= before.per_class[k].precision);
    }
}

TEST_CASE("agrees with the brute-force reference scorer") {
    Rng rng(2024);
    std::size_t boundary_hits = 0, no_fw_hits = 0;
    for (int k = 0; k < 200; ++k) {
        const bool satisf = k % 2 == 1;
        const auto& space = satisf ? LabelSpace::satisf() : LabelSpace::compat();
        const auto c = ref::random_case(rng, space, k % 4 < 2);
        const auto want = ref::score({c.pred}, {c.gold}, space);
        const auto got = score(space.task(), {c.pred}, {c.gold});
        CAPTURE(k);
        check_equal(got, want);

        for (const auto& g : ref::runs(c.gold, space)) {
            if (g.funcword) continue;
            for (const auto& p : ref::runs(c.pred, space)) {
                if (!p.funcword && 2 * ref::common(p, g) == g.tokens.size()) ++boundary_hits;
            }
        }
        if (satisf && got.extraction_tp > 0) {
            bool any_fw = false;
            for (const auto& g : ref::runs(c.gold, space)) any_fw = any_fw || g.funcword;
            if (!any_fw) ++no_fw_hits;
        }
    }
    CHECK(boundary_hits > 20);
    CHECK(no_fw_hits > 5);

    // Multi-example corpora pool counts before rates.
    std::vector<LabelSeq> preds, golds;
    for (int k = 0; k < 40; ++k) {
        const auto c = ref::random_case(rng, LabelSpace::satisf(), k % 2 == 0);
        preds.push_back(c.pred);
        golds.push_back(c.gold);
    }
    check_equal(score_satisf(preds, golds), ref::score(preds, golds, LabelSpace::satisf()));
}

TEST_CASE("report JSON round trip and table layout") {
    const auto& c = LabelSpace::compat();
    const auto r = score_compat({labels_of(c, {"C", "O", "U"})}, {labels_of(c, {"C", "O", "I"})});
    const auto j = r.to_json();
    for (const char* key : {"avg_f1", "extraction_f1", "polarity_acc", "per_class"}) CHECK(j.contains(key));
    CHECK(j["per_class"].contains("incompatible"));
    const auto back = MetricsReport::from_json(j);
    CHECK(back.avg_f1 == r.avg_f1);
    CHECK(back.per_class[1].fn == r.per_class[1].fn);
    CHECK(back.extraction_tp == r.extraction_tp);

    const std::string table = render_table(Task::Compat, {{"QA S-BLSTM", r}, {"DAN", r}});
    CHECK(table.find("Method") == 0);
    CHECK(table.find("PCA F1") != std::string::npos);
    CHECK(table.find("CER F1") != std::string::npos);
    CHECK(table.find("Polar. Acc.") != std::string::npos);
    CHECK(table.find("QA S-BLSTM") != std::string::npos);
    CHECK(render_table(Task::Satisf, {{"DAN", r}}).find("FNR F1") != std::string::npos);
    // 1 TP of 2 golds, 1 FP: CER P = R = 0.5.
    CHECK(table.find("50.0") != std::string::npos);
}
