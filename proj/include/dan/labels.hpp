#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dan {

enum class Task { Compat, Satisf };

std::string_view task_name(Task task);  // "compat" | "satisf"
Task parse_task(std::string_view name);

enum class LabelKind { Other, Target, FuncWord };

// Polarity classes shared by both tasks: 1 compatible/satisfiable,
// 2 incompatible/unsatisfiable, 3 uncertain. 0 marks O.
constexpr int kNumPolarities = 3;

struct LabelInfo {
    std::string name;
    LabelKind kind = LabelKind::Other;
    int polarity = 0;
};

using LabelSeq = std::vector<int>;

class LabelSpace {
public:
    static const LabelSpace& compat();  // O, C, I, U
    static const LabelSpace& satisf();  // O, S, UN, U, F-S, F-UN, F-U
    static const LabelSpace& for_task(Task task);

    Task task() const { return task_; }
    std::size_t size() const { return labels_.size(); }
    const LabelInfo& info(int label) const { return labels_.at(static_cast<std::size_t>(label)); }
    const std::string& name(int label) const { return info(label).name; }
    const std::vector<LabelInfo>& labels() const { return labels_; }

    std::optional<int> find(std::string_view name) const;
    // Throws ValidationError naming the label when it is not in the space.
    int index_of(std::string_view name) const;
    bool contains(int label) const { return label >= 0 && static_cast<std::size_t>(label) < labels_.size(); }

    int target_label(int polarity) const;
    std::optional<int> funcword_label(int polarity) const;

    // Human names of the three polarity classes, e.g. "compatible".
    const std::vector<std::string>& polarity_names() const { return polarity_names_; }

private:
    LabelSpace(Task task, std::vector<LabelInfo> labels, std::vector<std::string> polarity_names);

    Task task_;
    std::vector<LabelInfo> labels_;
    std::vector<std::string> polarity_names_;
};

// Token span [begin, end) over question positions.
struct SpanPred {
    std::size_t begin = 0;
    std::size_t end = 0;
    int polarity = 0;
    LabelKind kind = LabelKind::Target;

    std::size_t length() const { return end - begin; }
    bool operator==(const SpanPred&) const = default;
};

// Maximal runs of identical non-O labels, in order of position. Throws
// ContractError on a label outside the space.
std::vector<SpanPred> spans_from_labels(const LabelSeq& labels, const LabelSpace& space);

// Inverse of spans_from_labels over a sequence of the given length.
LabelSeq labels_from_spans(const std::vector<SpanPred>& spans, std::size_t length, const LabelSpace& space);

}  // namespace dan
