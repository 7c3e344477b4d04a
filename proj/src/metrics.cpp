#include "dan/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dan/decode.hpp"
#include "dan/errors.hpp"

namespace dan {

std::size_t span_overlap(const SpanPred& a, const SpanPred& b) {
    const auto lo = std::max(a.begin, b.begin);
    const auto hi = std::min(a.end, b.end);
    return hi > lo ? hi - lo : 0;
}

Matching match_targets(const std::vector<SpanPred>& preds, const std::vector<SpanPred>& golds) {
    std::vector<TargetMatch> candidates;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < golds.size(); ++g) {
            const auto ov = span_overlap(preds[p], golds[g]);
            // ov / |g| >= 0.5 without floating point.
            if (ov > 0 && 2 * ov >= golds[g].length()) candidates.push_back({p, g, ov});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](const TargetMatch& a, const TargetMatch& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (preds[a.pred].begin != preds[b.pred].begin) return preds[a.pred].begin < preds[b.pred].begin;
        return golds[a.gold].begin < golds[b.gold].begin;
    });

    std::vector<bool> pred_used(preds.size(), false), gold_used(golds.size(), false);
    Matching m;
    for (const auto& c : candidates) {
        if (pred_used[c.pred] || gold_used[c.gold]) continue;
        pred_used[c.pred] = gold_used[c.gold] = true;
        m.pairs.push_back(c);
    }
    std::sort(m.pairs.begin(), m.pairs.end(), [](const auto& a, const auto& b) { return a.gold < b.gold; });
    for (std::size_t p = 0; p < preds.size(); ++p) {
        if (!pred_used[p]) m.unmatched_preds.push_back(p);
    }
    for (std::size_t g = 0; g < golds.size(); ++g) {
        if (!gold_used[g]) m.unmatched_golds.push_back(g);
    }
    return m;
}

int polarity_of_extraction(const LabelSeq& span_labels, const LabelSpace& space) {
    if (span_labels.empty()) throw ContractError("polarity_of_extraction: empty span");
    std::array<std::size_t, kNumPolarities + 1> votes{};
    for (int l : span_labels) {
        if (!space.contains(l)) throw ContractError("polarity_of_extraction: label outside the space");
        ++votes[static_cast<std::size_t>(space.info(l).polarity)];
    }
    int best = 1;
    for (int c = 2; c <= kNumPolarities; ++c) {
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

namespace {

struct Counts {
    std::array<std::size_t, kNumPolarities> tp{}, fp{}, fn{};
    std::size_t ext_tp = 0, ext_fp = 0, ext_fn = 0;
    std::size_t positives = 0, polarity_matches = 0;
};

std::vector<SpanPred> of_kind(const std::vector<SpanPred>& spans, LabelKind kind) {
    std::vector<SpanPred> out;
    for (const auto& s : spans) {
        if (s.kind == kind) out.push_back(s);
    }
    return out;
}

// Gold function words of a gold target are the function-word spans within the
// decoding window, regardless of polarity. The function-word side holds when
// there are none, or when a predicted function-word label sits on one of them.
bool funcword_ok(const SpanPred& gold_target, const std::vector<SpanPred>& gold_fw, const LabelSeq& pred,
                 const LabelSpace& space) {
    bool any_gold = false;
    for (const auto& f : gold_fw) {
        if (span_gap(f.begin, f.end, gold_target.begin, gold_target.end) > kFunctionWordWindow) continue;
        any_gold = true;
        for (std::size_t t = f.begin; t < f.end; ++t) {
            if (space.info(pred[t]).kind == LabelKind::FuncWord) return true;
        }
    }
    return !any_gold;
}

void count_example(const LabelSeq& pred, const LabelSeq& gold, const LabelSpace& space, Counts& c) {
    if (pred.size() != gold.size()) {
        throw ContractError("score: prediction and gold label sequences differ in length");
    }
    const auto pred_spans = spans_from_labels(pred, space);
    const auto gold_spans = spans_from_labels(gold, space);
    const auto pred_targets = of_kind(pred_spans, LabelKind::Target);
    const auto gold_targets = of_kind(gold_spans, LabelKind::Target);
    const auto gold_fw = of_kind(gold_spans, LabelKind::FuncWord);
    const bool satisf = space.task() == Task::Satisf;

    const Matching m = match_targets(pred_targets, gold_targets);
    std::vector<bool> gold_positive(gold_targets.size(), false);
    std::vector<int> gold_pred_polarity(gold_targets.size(), 0);
    for (const auto& pair : m.pairs) {
        const auto& g = gold_targets[pair.gold];
        if (satisf && !funcword_ok(g, gold_fw, pred, space)) continue;
        const auto& p = pred_targets[pair.pred];
        LabelSeq span_labels(pred.begin() + static_cast<std::ptrdiff_t>(p.begin),
                             pred.begin() + static_cast<std::ptrdiff_t>(p.end));
        gold_positive[pair.gold] = true;
        gold_pred_polarity[pair.gold] = polarity_of_extraction(span_labels, space);
    }

    for (std::size_t g = 0; g < gold_targets.size(); ++g) {
        const auto cls = static_cast<std::size_t>(gold_targets[g].polarity - 1);
        if (!gold_positive[g]) {
            ++c.fn[cls];
            ++c.ext_fn;
            continue;
        }
        ++c.ext_tp;
        ++c.positives;
        if (gold_pred_polarity[g] == gold_targets[g].polarity) {
            ++c.tp[cls];
            ++c.polarity_matches;
        } else {
            ++c.fn[cls];
        }
    }
    for (auto p : m.unmatched_preds) {
        ++c.fp[static_cast<std::size_t>(pred_targets[p].polarity - 1)];
        ++c.ext_fp;
    }
}

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

MetricsReport finalize(const Counts& c, const LabelSpace& space) {
    MetricsReport r;
    r.task = space.task();
    double f1_sum = 0.0;
    std::size_t active = 0;
    for (std::size_t k = 0; k < kNumPolarities; ++k) {
        auto& m = r.per_class[k];
        m.name = space.polarity_names()[k];
        m.tp = c.tp[k];
        m.fp = c.fp[k];
        m.fn = c.fn[k];
        m.precision = ratio(m.tp, m.tp + m.fp);
        m.recall = ratio(m.tp, m.tp + m.fn);
        m.f1 = f1_of(m.precision, m.recall);
        if (m.tp + m.fp + m.fn > 0) {
            f1_sum += m.f1;
            ++active;
        }
    }
    const bool vacuous = c.ext_tp + c.ext_fp + c.ext_fn == 0;
    r.avg_f1 = active == 0 ? 1.0 : f1_sum / static_cast<double>(active);

    r.extraction_tp = c.ext_tp;
    r.extraction_fp = c.ext_fp;
    r.extraction_fn = c.ext_fn;
    r.extraction_precision = ratio(c.ext_tp, c.ext_tp + c.ext_fp);
    r.extraction_recall = ratio(c.ext_tp, c.ext_tp + c.ext_fn);
    r.extraction_f1 = vacuous ? 1.0 : f1_of(r.extraction_precision, r.extraction_recall);

    r.positive_extractions = c.positives;
    r.polarity_matches = c.polarity_matches;
    r.polarity_acc = c.positives == 0 ? (vacuous ? 1.0 : 0.0) : ratio(c.polarity_matches, c.positives);
    return r;
}

MetricsReport score_with(const LabelSpace& space, const std::vector<LabelSeq>& preds,
                         const std::vector<LabelSeq>& golds) {
    if (preds.size() != golds.size()) {
        throw ContractError("score: " + std::to_string(preds.size()) + " predictions for " +
                            std::to_string(golds.size()) + " gold sequences");
    }
    Counts c;
    for (std::size_t i = 0; i < preds.size(); ++i) count_example(preds[i], golds[i], space, c);
    return finalize(c, space);
}

}  // namespace

MetricsReport score_compat(const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds) {
    return score_with(LabelSpace::compat(), preds, golds);
}

MetricsReport score_satisf(const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds) {
    return score_with(LabelSpace::satisf(), preds, golds);
}

MetricsReport score(Task task, const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds) {
    return task == Task::Compat ? score_compat(preds, golds) : score_satisf(preds, golds);
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["task"] = std::string(task_name(task));
    j["avg_f1"] = avg_f1;
    j["extraction_f1"] = extraction_f1;
    j["extraction_precision"] = extraction_precision;
    j["extraction_recall"] = extraction_recall;
    j["polarity_acc"] = polarity_acc;
    j["counts"] = {{"extraction_tp", extraction_tp},
                   {"extraction_fp", extraction_fp},
                   {"extraction_fn", extraction_fn},
                   {"positive_extractions", positive_extractions},
                   {"polarity_matches", polarity_matches}};
    auto& pc = j["per_class"];
    pc = nlohmann::json::object();
    for (const auto& m : per_class) {
        pc[m.name] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                      {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}};
    }
    return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.task = parse_task(j.at("task").get<std::string>());
    r.avg_f1 = j.at("avg_f1").get<double>();
    r.extraction_f1 = j.at("extraction_f1").get<double>();
    r.extraction_precision = j.value("extraction_precision", 0.0);
    r.extraction_recall = j.value("extraction_recall", 0.0);
    r.polarity_acc = j.at("polarity_acc").get<double>();
    if (auto it = j.find("counts"); it != j.end()) {
        r.extraction_tp = it->value("extraction_tp", std::size_t{0});
        r.extraction_fp = it->value("extraction_fp", std::size_t{0});
        r.extraction_fn = it->value("extraction_fn", std::size_t{0});
        r.positive_extractions = it->value("positive_extractions", std::size_t{0});
        r.polarity_matches = it->value("polarity_matches", std::size_t{0});
    }
    const auto& names = LabelSpace::for_task(r.task).polarity_names();
    for (std::size_t k = 0; k < kNumPolarities; ++k) {
        auto& m = r.per_class[k];
        m.name = names[k];
        const auto& c = j.at("per_class").at(m.name);
        m.precision = c.at("precision").get<double>();
        m.recall = c.at("recall").get<double>();
        m.f1 = c.at("f1").get<double>();
        m.tp = c.at("tp").get<std::size_t>();
        m.fp = c.at("fp").get<std::size_t>();
        m.fn = c.at("fn").get<std::size_t>();
    }
    return r;
}

std::string render_table(Task task, const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    const char* avg = task == Task::Compat ? "PCA F1" : "FSA F1";
    const char* ext = task == Task::Compat ? "CER F1" : "FNR F1";
    std::size_t width = 6;
    for (const auto& [name, _] : rows) width = std::max(width, name.size());

    auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
        std::string s = a;
        s.resize(width, ' ');
        char buf[128];
        std::snprintf(buf, sizeof(buf), " | %8s | %8s | %11s\n", b.c_str(), c.c_str(), d.c_str());
        return s + buf;
    };
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
        return std::string(buf);
    };

    std::ostringstream os;
    const std::string header = line("Method", avg, ext, "Polar. Acc.");
    os << header << std::string(header.size() - 1, '-') << '\n';
    for (const auto& [name, r] : rows) os << line(name, pct(r.avg_f1), pct(r.extraction_f1), pct(r.polarity_acc));
    return os.str();
}

}  // namespace dan
