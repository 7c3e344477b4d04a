#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dan/labels.hpp"
#include "json.hpp"

namespace dan {

// A predicted target counts as a positive extraction of a gold target when it
// covers at least this fraction of the gold span's tokens.
constexpr double kOverlapThreshold = 0.5;

struct TargetMatch {
    std::size_t pred = 0;
    std::size_t gold = 0;
    std::size_t overlap = 0;
};

struct Matching {
    std::vector<TargetMatch> pairs;  // sorted by gold index
    std::vector<std::size_t> unmatched_preds;
    std::vector<std::size_t> unmatched_golds;
};

std::size_t span_overlap(const SpanPred& a, const SpanPred& b);

// One-to-one greedy matching over qualifying (overlap / |gold| >= 0.5) pairs,
// taken by descending overlap, then leftmost prediction, then leftmost gold.
Matching match_targets(const std::vector<SpanPred>& preds, const std::vector<SpanPred>& golds);

// Majority polarity class over the labels of an extraction; ties go to the
// lower class. O labels do not vote. Throws ContractError on an empty span.
int polarity_of_extraction(const LabelSeq& span_labels, const LabelSpace& space);

struct ClassMetrics {
    std::string name;
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MetricsReport {
    Task task = Task::Compat;
    std::array<ClassMetrics, kNumPolarities> per_class;
    double avg_f1 = 0.0;  // PCA F1 or FSA F1: macro average over active classes

    std::size_t extraction_tp = 0, extraction_fp = 0, extraction_fn = 0;
    double extraction_precision = 0.0, extraction_recall = 0.0;
    double extraction_f1 = 0.0;  // CER F1 or FNR F1

    std::size_t positive_extractions = 0, polarity_matches = 0;
    double polarity_acc = 0.0;

    nlohmann::json to_json() const;
    static MetricsReport from_json(const nlohmann::json& j);
};

// Label sequences are aligned per example (pred[i] and gold[i] same length).
MetricsReport score_compat(const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds);
MetricsReport score_satisf(const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds);
MetricsReport score(Task task, const std::vector<LabelSeq>& preds, const std::vector<LabelSeq>& golds);

// Method | averaged F1 | extraction F1 | Polar. Acc., percentages to 1 decimal.
std::string render_table(Task task, const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace dan
