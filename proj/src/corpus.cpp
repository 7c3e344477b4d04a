#include "dan/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include "dan/errors.hpp"
#include "dan/rng.hpp"
#include "json.hpp"

namespace dan {

using nlohmann::json;

void validate_pair(const QAPair& pair) {
    if (!pair.labels) return;
    const auto& labels = *pair.labels;
    if (labels.size() != pair.question.size()) {
        throw ValidationError("pair '" + pair.id + "': " + std::to_string(pair.question.size()) +
                              " question tokens but " + std::to_string(labels.size()) + " labels");
    }
    const auto& space = LabelSpace::for_task(pair.task);
    for (const auto& l : labels) {
        if (!space.find(l)) {
            throw ValidationError("pair '" + pair.id + "': label '" + l + "' is not in the " +
                                  std::string(task_name(pair.task)) + " label space");
        }
    }
}

namespace {

std::vector<std::string> string_array(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw ValidationError(std::string("missing or non-array '") + key + "'");
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) throw ValidationError(std::string("non-string entry in '") + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::string string_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ValidationError(std::string("missing or non-string '") + key + "'");
    return it->get<std::string>();
}

}  // namespace

QAPair pair_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("expected a JSON object");

    QAPair pair;
    pair.id = string_field(j, "id");
    pair.product_id = string_field(j, "product_id");
    pair.question = string_array(j, "question");
    pair.answer = string_array(j, "answer");
    try {
        pair.task = parse_task(string_field(j, "task"));
    } catch (const ConfigError& e) {
        throw ValidationError(e.what());
    }
    if (auto it = j.find("labels"); it != j.end() && !it->is_null()) pair.labels = string_array(j, "labels");
    validate_pair(pair);
    return pair;
}

std::string pair_to_json_line(const QAPair& pair) {
    json j;
    j["id"] = pair.id;
    j["product_id"] = pair.product_id;
    j["question"] = pair.question;
    j["answer"] = pair.answer;
    j["labels"] = pair.labels ? json(*pair.labels) : json(nullptr);
    j["task"] = std::string(task_name(pair.task));
    return j.dump();
}

std::vector<QAPair> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus " + path.string());
    std::vector<QAPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            pairs.push_back(pair_from_json_line(line));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return pairs;
}

void save_corpus(const std::filesystem::path& path, const std::vector<QAPair>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write corpus " + path.string());
    for (const auto& p : pairs) out << pair_to_json_line(p) << '\n';
}

Vocab::Vocab() : tokens_{"<pad>", "<unk>"} {
    index_[tokens_[0]] = kPad;
    index_[tokens_[1]] = kUnk;
}

Vocab Vocab::build(const std::vector<QAPair>& pairs, std::size_t min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& p : pairs) {
        for (const auto& t : p.question) ++counts[t];
        for (const auto& t : p.answer) ++counts[t];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, n] : counts) {
        if (n >= min_count) kept.emplace_back(tok, n);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocab v;
    for (auto& [tok, n] : kept) {
        if (v.index_.count(tok)) continue;  // a literal "<pad>"/"<unk>" token stays reserved
        v.index_[tok] = static_cast<std::int32_t>(v.tokens_.size());
        v.tokens_.push_back(tok);
    }
    return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < 2) throw ContractError("vocabulary needs the PAD and UNK entries");
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.index_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        if (!v.index_.emplace(v.tokens_[i], static_cast<std::int32_t>(i)).second) {
            throw ContractError("duplicate vocabulary token '" + v.tokens_[i] + "'");
        }
    }
    return v;
}

std::int32_t Vocab::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

std::uint64_t Vocab::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& t : tokens_) {
        for (unsigned char c : t) feed(c);
        feed(0);
    }
    return h;
}

EncodedExample encode(const QAPair& pair, const Vocab& vocab, const ModelConfig& cfg) {
    const auto& space = LabelSpace::for_task(pair.task);
    EncodedExample ex;
    ex.id = pair.id;
    ex.question.assign(cfg.question_len, Vocab::kPad);
    ex.question_mask.assign(cfg.question_len, 0);
    ex.labels.assign(cfg.question_len, 0);
    ex.answer.assign(cfg.answer_len, Vocab::kPad);
    ex.answer_mask.assign(cfg.answer_len, 0);

    for (std::size_t t = 0; t < pair.question.size(); ++t) {
        const int label = pair.labels ? space.index_of((*pair.labels)[t]) : 0;
        if (t >= cfg.question_len) {
            if (label != 0) ++ex.truncated_label_tokens;
            continue;
        }
        ex.question[t] = vocab.index_of(pair.question[t]);
        ex.question_mask[t] = 1;
        ex.labels[t] = label;
    }
    const std::size_t na = std::min(pair.answer.size(), cfg.answer_len);
    for (std::size_t t = 0; t < na; ++t) {
        ex.answer[t] = vocab.index_of(pair.answer[t]);
        ex.answer_mask[t] = 1;
    }
    ex.story = ex.question;
    ex.story.insert(ex.story.end(), ex.answer.begin(), ex.answer.end());

    if (ex.truncated_label_tokens > 0) {
        std::cerr << "warning: pair '" << pair.id << "': question truncated to " << cfg.question_len
                  << " tokens drops " << ex.truncated_label_tokens << " labeled entity tokens\n";
    }
    return ex;
}

std::vector<EncodedExample> encode_all(const std::vector<QAPair>& pairs, const Vocab& vocab, const ModelConfig& cfg) {
    std::vector<EncodedExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(encode(p, vocab, cfg));
    return out;
}

SplitSizes split_sizes(std::size_t n) {
    SplitSizes s;
    s.valid = n / 10;
    s.test = n / 5;
    s.train = n - s.valid - s.test;
    return s;
}

Split split(const std::vector<QAPair>& pairs, std::uint64_t seed) {
    if (pairs.size() < 10) {
        throw ConfigError("splitting needs at least 10 QA pairs, got " + std::to_string(pairs.size()));
    }
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto sizes = split_sizes(pairs.size());
    Split out;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& p = pairs[order[k]];
        if (k < sizes.train) {
            out.train.push_back(p);
        } else if (k < sizes.train + sizes.valid) {
            out.valid.push_back(p);
        } else {
            out.test.push_back(p);
        }
    }
    return out;
}

}  // namespace dan
