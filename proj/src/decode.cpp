#include "dan/decode.hpp"

#include "dan/errors.hpp"

namespace dan {

std::size_t span_gap(std::size_t a_begin, std::size_t a_end, std::size_t b_begin, std::size_t b_end) {
    if (a_end <= b_begin) return b_begin - (a_end - 1);
    if (b_end <= a_begin) return a_begin - (b_end - 1);
    return 0;
}

namespace {

TokenSpan make_span(const SpanPred& s, const std::vector<std::string>& tokens) {
    TokenSpan out{s.begin, s.end, {}};
    for (std::size_t t = s.begin; t < s.end; ++t) {
        if (t > s.begin) out.text += ' ';
        if (t < tokens.size()) out.text += tokens[t];
    }
    return out;
}

}  // namespace

std::vector<ExtractionTuple> decode_tuples(const LabelSeq& labels, const std::vector<std::string>& tokens,
                                           const std::string& product_id, const LabelSpace& space) {
    const auto spans = spans_from_labels(labels, space);

    std::vector<const SpanPred*> targets, funcwords;
    for (const auto& s : spans) (s.kind == LabelKind::Target ? targets : funcwords).push_back(&s);

    std::vector<ExtractionTuple> out;
    std::vector<bool> used(funcwords.size(), false);
    for (const SpanPred* t : targets) {
        ExtractionTuple tuple;
        tuple.product_id = product_id;
        tuple.target = make_span(*t, tokens);
        tuple.polarity = t->polarity;
        for (std::size_t k = 0; k < funcwords.size(); ++k) {
            const SpanPred* f = funcwords[k];
            if (f->polarity != t->polarity) continue;
            if (span_gap(f->begin, f->end, t->begin, t->end) > kFunctionWordWindow) continue;
            tuple.function_words.push_back(make_span(*f, tokens));
            used[k] = true;
        }
        out.push_back(std::move(tuple));
    }
    for (std::size_t k = 0; k < funcwords.size(); ++k) {
        if (used[k]) continue;
        ExtractionTuple tuple;
        tuple.product_id = product_id;
        tuple.function_words.push_back(make_span(*funcwords[k], tokens));
        tuple.polarity = funcwords[k]->polarity;
        out.push_back(std::move(tuple));
    }
    return out;
}

}  // namespace dan
