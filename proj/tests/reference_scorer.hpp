#pragma once

// Brute-force reference scorer used as an oracle for the metrics module. It
// shares no code with the library beyond the label space table: spans are
// position sets, matching is an exhaustive repeated scan, distances are
// computed over every token pair.

#include <array>
#include <cstddef>
#include <cstdlib>
#include <set>
#include <vector>

#include "dan/labels.hpp"
#include "dan/rng.hpp"

namespace ref {

struct Span {
    std::set<std::size_t> tokens;
    int polarity = 0;
    bool funcword = false;
    std::size_t first() const { return *tokens.begin(); }
};

struct Result {
    std::array<std::size_t, 3> tp{}, fp{}, fn{};
    std::size_t ext_tp = 0, ext_fp = 0, ext_fn = 0, positives = 0, matches = 0;
    std::array<double, 3> f1{};
    double avg_f1 = 0, ext_f1 = 0, polarity_acc = 0;
};

inline std::vector<Span> runs(const dan::LabelSeq& labels, const dan::LabelSpace& space) {
    std::vector<Span> out;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        const auto& info = space.info(labels[t]);
        if (info.kind == dan::LabelKind::Other) continue;
        if (t > 0 && labels[t - 1] == labels[t]) {
            out.back().tokens.insert(t);
        } else {
            out.push_back({{t}, info.polarity, info.kind == dan::LabelKind::FuncWord});
        }
    }
    return out;
}

inline std::size_t common(const Span& a, const Span& b) {
    std::size_t n = 0;
    for (auto t : a.tokens) n += b.tokens.count(t);
    return n;
}

inline std::size_t distance(const Span& a, const Span& b) {
    std::size_t best = SIZE_MAX;
    for (auto i : a.tokens) {
        for (auto j : b.tokens) best = std::min<std::size_t>(best, i > j ? i - j : j - i);
    }
    return best;
}

inline double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
    const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

inline Result score(const std::vector<dan::LabelSeq>& preds, const std::vector<dan::LabelSeq>& golds,
                    const dan::LabelSpace& space) {
    const bool satisf = space.task() == dan::Task::Satisf;
    Result r;
    for (std::size_t e = 0; e < preds.size(); ++e) {
        const auto& pl = preds[e];
        std::vector<Span> pt, gt, gf;
        for (auto& s : runs(pl, space)) {
            if (!s.funcword) pt.push_back(s);
        }
        for (auto& s : runs(golds[e], space)) (s.funcword ? gf : gt).push_back(s);

        // Repeatedly take the best remaining qualifying pair.
        std::vector<int> pred_of_gold(gt.size(), -1);
        std::vector<bool> pred_taken(pt.size(), false);
        while (true) {
            int bp = -1, bg = -1;
            std::size_t bo = 0;
            for (std::size_t p = 0; p < pt.size(); ++p) {
                if (pred_taken[p]) continue;
                for (std::size_t g = 0; g < gt.size(); ++g) {
                    if (pred_of_gold[g] >= 0) continue;
                    const std::size_t o = common(pt[p], gt[g]);
                    if (o == 0 || 2 * o < gt[g].tokens.size()) continue;
                    bool better = bp < 0 || o > bo;
                    if (!better && o == bo) {
                        if (pt[p].first() != pt[bp].first()) {
                            better = pt[p].first() < pt[bp].first();
                        } else {
                            better = gt[g].first() < gt[bg].first();
                        }
                    }
                    if (better) {
                        bp = int(p);
                        bg = int(g);
                        bo = o;
                    }
                }
            }
            if (bp < 0) break;
            pred_taken[bp] = true;
            pred_of_gold[bg] = bp;
        }

        for (std::size_t g = 0; g < gt.size(); ++g) {
            const std::size_t cls = std::size_t(gt[g].polarity - 1);
            bool positive = pred_of_gold[g] >= 0;
            if (positive && satisf) {
                bool has_fw = false, hit = false;
                for (const auto& f : gf) {
                    if (distance(f, gt[g]) > 3) continue;
                    has_fw = true;
                    for (auto t : f.tokens) hit = hit || space.info(pl[t]).kind == dan::LabelKind::FuncWord;
                }
                positive = !has_fw || hit;
            }
            if (!positive) {
                ++r.fn[cls];
                ++r.ext_fn;
                continue;
            }
            ++r.ext_tp;
            ++r.positives;
            std::array<int, 4> votes{};
            for (auto t : pt[std::size_t(pred_of_gold[g])].tokens) ++votes[std::size_t(space.info(pl[t]).polarity)];
            int pol = 1;
            for (int c = 2; c <= 3; ++c) {
                if (votes[std::size_t(c)] > votes[std::size_t(pol)]) pol = c;
            }
            if (pol == gt[g].polarity) {
                ++r.tp[cls];
                ++r.matches;
            } else {
                ++r.fn[cls];
            }
        }
        for (std::size_t p = 0; p < pt.size(); ++p) {
            if (!pred_taken[p]) {
                ++r.fp[std::size_t(pt[p].polarity - 1)];
                ++r.ext_fp;
            }
        }
    }

    double sum = 0;
    int active = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        r.f1[k] = f1(r.tp[k], r.fp[k], r.fn[k]);
        if (r.tp[k] + r.fp[k] + r.fn[k] > 0) {
            sum += r.f1[k];
            ++active;
        }
    }
    const bool vacuous = r.ext_tp + r.ext_fp + r.ext_fn == 0;
    r.avg_f1 = active ? sum / active : 1.0;
    r.ext_f1 = vacuous ? 1.0 : f1(r.ext_tp, r.ext_fp, r.ext_fn);
    r.polarity_acc = r.positives ? double(r.matches) / double(r.positives) : (vacuous ? 1.0 : 0.0);
    return r;
}

// Random gold/prediction pair with at most five spans per side. With
// `boundary`, every even-length gold target gets a prediction covering exactly
// half of it. Satisf golds carry function words only some of the time.
struct Case {
    dan::LabelSeq pred, gold;
};

inline std::size_t span_count(const dan::LabelSeq& l, const dan::LabelSpace& space) { return runs(l, space).size(); }

inline Case random_case(dan::Rng& rng, const dan::LabelSpace& space, bool boundary, std::size_t length = 16) {
    const bool satisf = space.task() == dan::Task::Satisf;
    while (true) {
        Case c{dan::LabelSeq(length, 0), dan::LabelSeq(length, 0)};
        const std::size_t n_gold = rng.below(4) + (boundary ? 1 : 0);
        for (std::size_t k = 0; k < n_gold; ++k) {
            const std::size_t len = boundary ? 2 * (1 + rng.below(2)) : 1 + rng.below(4);
            const std::size_t at = rng.below(length - len + 1);
            const int pol = int(1 + rng.below(3));
            for (std::size_t t = at; t < at + len; ++t) c.gold[t] = space.target_label(pol);
            if (satisf && rng.bernoulli(0.5)) {
                // A function word just before the target when there is room.
                const std::size_t gap = rng.below(5);
                if (at >= 1 + gap) c.gold[at - 1 - gap] = *space.funcword_label(int(1 + rng.below(3)));
            }
            if (boundary) {
                const std::size_t half = len / 2;
                const std::size_t from = rng.bernoulli(0.5) ? at : at + half;
                const int ppol = rng.bernoulli(0.7) ? pol : int(1 + rng.below(3));
                for (std::size_t t = from; t < from + half; ++t) c.pred[t] = space.target_label(ppol);
            }
        }
        const std::size_t noise = rng.below(4);
        for (std::size_t k = 0; k < noise; ++k) {
            const std::size_t len = 1 + rng.below(3);
            const std::size_t at = rng.below(length - len + 1);
            const int label = int(rng.below(space.size()));
            for (std::size_t t = at; t < at + len; ++t) c.pred[t] = label;
        }
        if (!boundary && rng.bernoulli(0.3)) {
            // Copy a gold stretch so exact and near-exact hits are common.
            const std::size_t at = rng.below(length);
            const std::size_t end = std::min(length, at + 1 + rng.below(6));
            for (std::size_t t = at; t < end; ++t) c.pred[t] = c.gold[t];
        }
        if (span_count(c.pred, space) <= 5 && span_count(c.gold, space) <= 5) return c;
    }
}

}  // namespace ref
