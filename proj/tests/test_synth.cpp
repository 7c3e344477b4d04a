#include "doctest.h"

#include <array>

#include "dan/decode.hpp"
#include "dan/errors.hpp"
#include "dan/synth.hpp"

using namespace dan;

namespace {

constexpr PolarityMix kEven = {0.34, 0.33, 0.33};

std::string join(const std::vector<std::string>& tokens, std::size_t b, std::size_t e) {
    std::string out;
    for (std::size_t t = b; t < e; ++t) out += (t > b ? " " : "") + tokens[t];
    return out;
}

}  // namespace

TEST_CASE("a single pair labels exactly its slot tokens") {
    for (Task task : {Task::Compat, Task::Satisf}) {
        const auto sp = synth_generate_detailed(1, task, 3, kEven);
        REQUIRE(sp.size() == 1);
        const QAPair& p = sp[0].pair;
        CHECK_NOTHROW(validate_pair(p));
        REQUIRE(p.labels.has_value());
        const auto& space = LabelSpace::for_task(task);
        std::vector<std::string> target_tokens;
        for (std::size_t t = 0; t < p.question.size(); ++t) {
            const auto kind = space.info(space.index_of((*p.labels)[t])).kind;
            if (kind == LabelKind::Target) target_tokens.push_back(p.question[t]);
            if (kind != LabelKind::Other) CHECK(space.info(space.index_of((*p.labels)[t])).polarity == sp[0].polarity);
        }
        CHECK(join(target_tokens, 0, target_tokens.size()) == sp[0].filler);
    }
}

TEST_CASE("polarity mix is respected") {
    const auto sp = synth_generate_detailed(1000, Task::Compat, 8, {0.5, 0.3, 0.2});
    std::array<double, 3> counts{};
    for (const auto& s : sp) counts[static_cast<std::size_t>(s.polarity - 1)] += 1.0;
    CHECK(std::abs(counts[0] / 1000 - 0.5) <= 0.03);
    CHECK(std::abs(counts[1] / 1000 - 0.3) <= 0.03);
    CHECK(std::abs(counts[2] / 1000 - 0.2) <= 0.03);

    const auto only = synth_generate_detailed(50, Task::Compat, 8, {0.0, 1.0, 0.0});
    for (const auto& s : only) CHECK(s.polarity == 2);
}

TEST_CASE("decoding a generated pair recovers its filler and function words") {
    for (Task task : {Task::Compat, Task::Satisf}) {
        const auto& space = LabelSpace::for_task(task);
        for (const auto& s : synth_generate_detailed(200, task, 12, kEven)) {
            const QAPair& p = s.pair;
            LabelSeq labels;
            for (const auto& l : *p.labels) labels.push_back(space.index_of(l));
            const auto tuples = decode_tuples(labels, p.question, p.product_id, space);
            REQUIRE(tuples.size() == 1);
            CHECK(tuples[0].target_text() == s.filler);
            CHECK(tuples[0].polarity == s.polarity);
            std::vector<std::string> fw;
            for (const auto& f : tuples[0].function_words) fw.push_back(f.text);
            CHECK(fw == s.function_words);
        }
    }
    // Some templates carry function words.
    std::size_t with_fw = 0;
    for (const auto& s : synth_generate_detailed(100, Task::Satisf, 1, kEven)) with_fw += !s.function_words.empty();
    CHECK(with_fw > 30);
}

TEST_CASE("generation is seeded") {
    CHECK(synth_generate(40, Task::Satisf, 6, kEven) == synth_generate(40, Task::Satisf, 6, kEven));
    CHECK(synth_generate(40, Task::Satisf, 6, kEven) != synth_generate(40, Task::Satisf, 7, kEven));
}

TEST_CASE("invalid requests") {
    CHECK_THROWS_AS(synth_generate(10, Task::Compat, 1, {0.5, 0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(synth_generate(10, Task::Compat, 1, {1.2, -0.1, -0.1}), ConfigError);
    CHECK_THROWS_AS(synth_generate(0, Task::Compat, 1, kEven), ConfigError);
}
