#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dan/config.hpp"
#include "dan/labels.hpp"

namespace dan {

struct QAPair {
    std::string id;
    std::string product_id;
    std::vector<std::string> question;
    std::vector<std::string> answer;
    std::optional<std::vector<std::string>> labels;  // aligned to question
    Task task = Task::Compat;

    bool operator==(const QAPair&) const = default;
};

// Throws ValidationError when labels are misaligned or outside the task space.
void validate_pair(const QAPair& pair);

// One JSON object per line; blank lines are skipped. Errors name the line.
std::vector<QAPair> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const std::vector<QAPair>& pairs);

QAPair pair_from_json_line(const std::string& line);
std::string pair_to_json_line(const QAPair& pair);

class Vocab {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;

    Vocab();

    // Question and answer tokens seen at least min_count times, ordered by
    // (frequency desc, token asc).
    static Vocab build(const std::vector<QAPair>& pairs, std::size_t min_count = 1);
    // Rebuilds from the full index-ordered token list, reserved entries included.
    static Vocab from_tokens(std::vector<std::string> tokens);

    std::size_t size() const { return tokens_.size(); }
    std::int32_t index_of(const std::string& token) const;  // UNK when absent
    bool contains(const std::string& token) const { return index_.count(token) != 0; }
    const std::string& token(std::int32_t index) const { return tokens_.at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // FNV-1a 64 over the index-ordered tokens.
    std::uint64_t hash() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
};

struct EncodedExample {
    std::string id;
    std::vector<std::int32_t> question;  // T_q
    std::vector<std::int32_t> answer;    // T_a
    std::vector<std::int32_t> story;     // question (+) answer
    std::vector<std::uint8_t> question_mask;
    std::vector<std::uint8_t> answer_mask;
    std::vector<int> labels;  // T_q, PAD positions O
    std::size_t truncated_label_tokens = 0;  // non-O gold labels lost to truncation
};

// Pads/truncates to the config lengths. Truncated non-O gold labels are
// counted on the example and reported on stderr with the pair id.
EncodedExample encode(const QAPair& pair, const Vocab& vocab, const ModelConfig& cfg);
std::vector<EncodedExample> encode_all(const std::vector<QAPair>& pairs, const Vocab& vocab, const ModelConfig& cfg);

struct Split {
    std::vector<QAPair> train;
    std::vector<QAPair> valid;
    std::vector<QAPair> test;
};

struct SplitSizes {
    std::size_t train = 0, valid = 0, test = 0;
};

// floor(10%) validation, floor(20%) test, remainder to train.
SplitSizes split_sizes(std::size_t n);

// Seeded shuffle then 70/10/20 partition. Needs at least 10 pairs.
Split split(const std::vector<QAPair>& pairs, std::uint64_t seed);

}  // namespace dan
