#include "dan/labels.hpp"

#include "dan/errors.hpp"

namespace dan {

std::string_view task_name(Task task) { return task == Task::Compat ? "compat" : "satisf"; }

Task parse_task(std::string_view name) {
    if (name == "compat") return Task::Compat;
    if (name == "satisf") return Task::Satisf;
    throw ConfigError("unknown task '" + std::string(name) + "' (expected compat or satisf)");
}

LabelSpace::LabelSpace(Task task, std::vector<LabelInfo> labels, std::vector<std::string> polarity_names)
    : task_(task), labels_(std::move(labels)), polarity_names_(std::move(polarity_names)) {}

const LabelSpace& LabelSpace::compat() {
    static const LabelSpace space(Task::Compat,
                                  {
                                      {"O", LabelKind::Other, 0},
                                      {"C", LabelKind::Target, 1},
                                      {"I", LabelKind::Target, 2},
                                      {"U", LabelKind::Target, 3},
                                  },
                                  {"compatible", "incompatible", "uncertain"});
    return space;
}

const LabelSpace& LabelSpace::satisf() {
    static const LabelSpace space(Task::Satisf,
                                  {
                                      {"O", LabelKind::Other, 0},
                                      {"S", LabelKind::Target, 1},
                                      {"UN", LabelKind::Target, 2},
                                      {"U", LabelKind::Target, 3},
                                      {"F-S", LabelKind::FuncWord, 1},
                                      {"F-UN", LabelKind::FuncWord, 2},
                                      {"F-U", LabelKind::FuncWord, 3},
                                  },
                                  {"satisfiable", "unsatisfiable", "uncertain"});
    return space;
}

const LabelSpace& LabelSpace::for_task(Task task) { return task == Task::Compat ? compat() : satisf(); }

std::optional<int> LabelSpace::find(std::string_view name) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].name == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

int LabelSpace::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ValidationError("label '" + std::string(name) + "' is not in the " + std::string(task_name(task_)) +
                          " label space");
}

int LabelSpace::target_label(int polarity) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].kind == LabelKind::Target && labels_[i].polarity == polarity) return static_cast<int>(i);
    }
    throw ContractError("no target label with polarity " + std::to_string(polarity));
}

std::optional<int> LabelSpace::funcword_label(int polarity) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].kind == LabelKind::FuncWord && labels_[i].polarity == polarity) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::vector<SpanPred> spans_from_labels(const LabelSeq& labels, const LabelSpace& space) {
    std::vector<SpanPred> spans;
    std::size_t t = 0;
    while (t < labels.size()) {
        const int l = labels[t];
        if (!space.contains(l)) {
            throw ContractError("label index " + std::to_string(l) + " outside a label space of size " +
                                std::to_string(space.size()));
        }
        std::size_t end = t + 1;
        while (end < labels.size() && labels[end] == l) ++end;
        const auto& info = space.info(l);
        if (info.kind != LabelKind::Other) spans.push_back({t, end, info.polarity, info.kind});
        t = end;
    }
    return spans;
}

LabelSeq labels_from_spans(const std::vector<SpanPred>& spans, std::size_t length, const LabelSpace& space) {
    LabelSeq labels(length, 0);
    for (const auto& s : spans) {
        if (s.end > length || s.begin >= s.end) throw ContractError("span outside the sequence");
        int l = 0;
        if (s.kind == LabelKind::Target) {
            l = space.target_label(s.polarity);
        } else if (s.kind == LabelKind::FuncWord) {
            auto f = space.funcword_label(s.polarity);
            if (!f) throw ContractError("label space has no function-word labels");
            l = *f;
        }
        for (std::size_t t = s.begin; t < s.end; ++t) labels[t] = l;
    }
    return labels;
}

}  // namespace dan
