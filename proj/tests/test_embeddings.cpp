#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dan/embeddings.hpp"
#include "dan/errors.hpp"

using namespace dan;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name, const std::string& text) {
    fs::create_directories(DAN_TEST_TMP);
    const auto p = fs::path(DAN_TEST_TMP) / name;
    std::ofstream(p) << text;
    return p;
}

double column_entry(const EmbeddingTable& t, std::size_t row, std::int32_t col) {
    return t.weight.at(row * t.vocab_size() + static_cast<std::size_t>(col));
}

std::vector<double> values_of(const EmbeddingTable& t) { return {t.weight.values().begin(), t.weight.values().end()}; }

Vocab vocab_of(std::vector<std::string> words) {
    std::vector<std::string> tokens = {"<pad>", "<unk>"};
    tokens.insert(tokens.end(), words.begin(), words.end());
    return Vocab::from_tokens(tokens);
}

}  // namespace

TEST_CASE("vector files") {
    auto v = load_vectors(tmp_file("two.txt", "cat 1 2 3\ndog -1 0.5 4e-1\n"), 3);
    CHECK(v.words.size() == 2);
    CHECK(v.words.at("dog") == std::vector<double>{-1, 0.5, 0.4});

    v = load_vectors(tmp_file("header.txt", "2 3\ncat 1 2 3\ndog 4 5 6\n"), 3);
    CHECK(v.words.size() == 2);
    CHECK(v.words.at("cat")[2] == 3.0);

    try {
        load_vectors(tmp_file("short.txt", "cat 1 2 3\ndog 1 2\n"), 3);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_vectors(tmp_file("nan.txt", "cat 1 x 3\n"), 3), ParseError);
    CHECK_THROWS_AS(load_vectors(tmp_file("dim.txt", "2 5\ncat 1 2 3 4 5\n"), 3), ConfigError);
    CHECK_THROWS_AS(load_vectors(fs::path(DAN_TEST_TMP) / "absent.txt", 3), ConfigError);
}

TEST_CASE("character n-grams") {
    const auto g = char_ngrams("ab");
    // "<ab>" has 4 characters: two 3-grams and one 4-gram.
    CHECK(g == std::vector<std::string>{"<ab", "ab>", "<ab>"});
    CHECK(char_ngrams("").empty());
    const auto longer = char_ngrams("where");
    CHECK(longer.front() == "<wh");
    CHECK(longer.back() == "where>");
    CHECK(longer.size() == 5 + 4 + 3 + 2);
    // Multi-byte characters count once.
    const auto u = char_ngrams("\xC3\xA9t\xC3\xA9");
    CHECK(u[0] == "<\xC3\xA9t");
    CHECK(u.size() == 3 + 2 + 1);
}

TEST_CASE("embedding table initialization") {
    PretrainedVectors pre;
    pre.dim = 2;
    pre.words["cat"] = {0.25, -0.5};
    pre.ngrams["<do"] = {1.0, 0.0};
    pre.ngrams["dog"] = {0.0, 3.0};
    pre.ngrams["<dog"] = {2.0, 3.0};
    const Vocab v = vocab_of({"cat", "dog", "zzzz"});
    const auto t = init_table(v, &pre, 2, 7);
    CHECK(t.weight.shape() == Shape{2, 5});
    CHECK(t.trainable);
    CHECK(t.weight.requires_grad());

    // Exact copy.
    CHECK(column_entry(t, 0, 2) == 0.25);
    CHECK(column_entry(t, 1, 2) == -0.5);
    // Mean of the known n-grams, computed independently.
    CHECK(column_entry(t, 0, 3) == doctest::Approx((1.0 + 0.0 + 2.0) / 3.0));
    CHECK(column_entry(t, 1, 3) == doctest::Approx((0.0 + 3.0 + 3.0) / 3.0));
    // PAD zero; the unknown word gets bounded noise.
    CHECK(column_entry(t, 0, 0) == 0.0);
    CHECK(column_entry(t, 1, 0) == 0.0);
    const double bound = std::sqrt(3.0 / 2.0);
    CHECK(std::abs(column_entry(t, 0, 4)) <= bound);
    CHECK(column_entry(t, 0, 4) != 0.0);

    // Random columns depend only on the seed.
    const auto a = init_table(v, nullptr, 4, 11);
    const auto b = init_table(v, nullptr, 4, 11);
    const auto c = init_table(v, nullptr, 4, 12);
    CHECK(values_of(a) == values_of(b));
    CHECK(values_of(a) != values_of(c));
    // Pretrained hits leave other columns' noise untouched.
    PretrainedVectors only_cat;
    only_cat.dim = 4;
    only_cat.words["cat"] = {1, 1, 1, 1};
    const auto d = init_table(v, &only_cat, 4, 11);
    for (std::size_t r = 0; r < 4; ++r) CHECK(column_entry(d, r, 3) == column_entry(a, r, 3));

    CHECK_THROWS_AS(init_table(v, &pre, 3, 1), ConfigError);
}
