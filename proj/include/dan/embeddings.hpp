#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dan/corpus.hpp"
#include "dan/layers.hpp"

namespace dan {

constexpr std::size_t kMinNgram = 3;
constexpr std::size_t kMaxNgram = 6;

struct PretrainedVectors {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> words;
    // Keys are character n-grams of "<token>".
    std::unordered_map<std::string, std::vector<double>> ngrams;
};

// Text format: optional "count dim" header, then "token v1 ... v_dim" lines.
// Throws ConfigError on a header dimension other than expected_dim and
// ParseError (with the line number) on a malformed line.
PretrainedVectors load_vectors(const std::filesystem::path& path, std::size_t expected_dim);

// Reads an n-gram file of the same format into vectors.ngrams.
void load_ngram_vectors(PretrainedVectors& vectors, const std::filesystem::path& path);

// Character n-grams (n in [3, 6], counted in UTF-8 code points) of the token
// wrapped as "<token>", in order of length then position.
std::vector<std::string> char_ngrams(const std::string& token);

// Column per vocabulary entry: exact vector, else mean of the known n-gram
// vectors, else seeded uniform noise. PAD stays zero; the table is trainable.
EmbeddingTable init_table(const Vocab& vocab, const PretrainedVectors* vectors, std::size_t dim, std::uint64_t seed);

}  // namespace dan
