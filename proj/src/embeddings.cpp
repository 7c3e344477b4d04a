#include "dan/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dan/errors.hpp"
#include "dan/rng.hpp"

namespace dan {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

void read_vector_file(const std::filesystem::path& path, std::size_t expected_dim,
                      std::unordered_map<std::string, std::vector<double>>& into) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open vector file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (lineno == 1 && fields.size() == 2) {
            double count = 0, dim = 0;
            if (parse_double(fields[0], count) && parse_double(fields[1], dim)) {
                if (static_cast<std::size_t>(dim) != expected_dim) {
                    throw ConfigError(path.string() + ": header declares dimension " + fields[1] + ", expected " +
                                      std::to_string(expected_dim));
                }
                continue;
            }
        }
        if (fields.size() != expected_dim + 1) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(expected_dim) + " components, got " +
                             std::to_string(fields.size() - 1));
        }
        std::vector<double> v(expected_dim);
        for (std::size_t i = 0; i < expected_dim; ++i) {
            if (!parse_double(fields[i + 1], v[i])) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad component '" +
                                 fields[i + 1] + "'");
            }
        }
        into[fields[0]] = std::move(v);
    }
}

// Byte offsets of UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> code_point_offsets(const std::string& s) {
    std::vector<std::size_t> offs;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) offs.push_back(i);
    }
    offs.push_back(s.size());
    return offs;
}

}  // namespace

PretrainedVectors load_vectors(const std::filesystem::path& path, std::size_t expected_dim) {
    if (expected_dim == 0) throw ConfigError("expected vector dimension must be positive");
    PretrainedVectors v;
    v.dim = expected_dim;
    read_vector_file(path, expected_dim, v.words);
    return v;
}

void load_ngram_vectors(PretrainedVectors& vectors, const std::filesystem::path& path) {
    read_vector_file(path, vectors.dim, vectors.ngrams);
}

std::vector<std::string> char_ngrams(const std::string& token) {
    const std::string wrapped = "<" + token + ">";
    const auto offs = code_point_offsets(wrapped);
    const std::size_t chars = offs.size() - 1;
    std::vector<std::string> out;
    for (std::size_t n = kMinNgram; n <= kMaxNgram; ++n) {
        for (std::size_t i = 0; i + n <= chars; ++i) out.push_back(wrapped.substr(offs[i], offs[i + n] - offs[i]));
    }
    return out;
}

EmbeddingTable init_table(const Vocab& vocab, const PretrainedVectors* vectors, std::size_t dim,
                          std::uint64_t seed) {
    if (vectors != nullptr && vectors->dim != dim) {
        throw ConfigError("pretrained vectors have dimension " + std::to_string(vectors->dim) + ", model expects " +
                          std::to_string(dim));
    }
    const std::size_t V = vocab.size();
    std::vector<double> w(dim * V, 0.0);
    auto set_column = [&](std::size_t c, const std::vector<double>& v) {
        for (std::size_t r = 0; r < dim; ++r) w[r * V + c] = v[r];
    };

    Rng rng(seed);
    const double bound = std::sqrt(3.0 / static_cast<double>(dim));
    for (std::size_t c = 0; c < V; ++c) {
        // Every column consumes the same draws so columns stay independent of
        // which other tokens hit the pretrained map.
        std::vector<double> noise(dim);
        for (auto& x : noise) x = rng.uniform(-bound, bound);
        if (c == static_cast<std::size_t>(Vocab::kPad)) continue;

        const std::string& tok = vocab.token(static_cast<std::int32_t>(c));
        if (vectors != nullptr && c != static_cast<std::size_t>(Vocab::kUnk)) {
            if (auto it = vectors->words.find(tok); it != vectors->words.end()) {
                set_column(c, it->second);
                continue;
            }
            if (!vectors->ngrams.empty()) {
                std::vector<double> mean(dim, 0.0);
                std::size_t hits = 0;
                for (const auto& g : char_ngrams(tok)) {
                    auto git = vectors->ngrams.find(g);
                    if (git == vectors->ngrams.end()) continue;
                    for (std::size_t r = 0; r < dim; ++r) mean[r] += git->second[r];
                    ++hits;
                }
                if (hits > 0) {
                    for (auto& x : mean) x /= static_cast<double>(hits);
                    set_column(c, mean);
                    continue;
                }
            }
        }
        set_column(c, noise);
    }
    EmbeddingTable table;
    table.weight = Tensor::from({dim, V}, std::move(w), true);
    table.trainable = true;
    return table;
}

}  // namespace dan
