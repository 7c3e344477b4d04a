#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dan/labels.hpp"

namespace dan {

// Function words must have a token within this distance of the target span.
constexpr std::size_t kFunctionWordWindow = 3;

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string text;

    bool operator==(const TokenSpan&) const = default;
};

struct ExtractionTuple {
    std::string product_id;
    std::optional<TokenSpan> target;  // empty for a function expression without a target
    std::vector<TokenSpan> function_words;
    int polarity = 0;

    std::string target_text() const { return target ? target->text : std::string(); }
    bool operator==(const ExtractionTuple&) const = default;
};

// Token distance between the closest tokens of two disjoint spans (1 when
// adjacent).
std::size_t span_gap(std::size_t a_begin, std::size_t a_end, std::size_t b_begin, std::size_t b_end);

// COMPAT: one tuple per target span. SATISF: each target is paired with every
// function-word span of the same polarity whose nearest token is within
// kFunctionWordWindow; function-word spans paired with no target become
// tuples without a target. Tokens shorter than labels are rendered as "".
std::vector<ExtractionTuple> decode_tuples(const LabelSeq& labels, const std::vector<std::string>& tokens,
                                           const std::string& product_id, const LabelSpace& space);

}  // namespace dan
