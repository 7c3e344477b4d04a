#include "dan/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dan/errors.hpp"

namespace dan {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'A', 'N', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::vector<char>& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        unsigned char buf[sizeof(T)];
        std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }

    std::string str(std::size_t n) {
        need(n);
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw ValidationError("checkpoint truncated");
    }

    const std::vector<char>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

json config_to_json(const ModelConfig& cfg) {
    return {{"variant", std::string(variant_name(cfg.variant))},
            {"d_e", cfg.embed_dim},
            {"blstm_dim", cfg.blstm_dim},
            {"T_q", cfg.question_len},
            {"T_a", cfg.answer_len},
            {"task", std::string(task_name(cfg.task))},
            {"dropout", cfg.dropout_rate},
            {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.embed_dim = j.at("d_e").get<std::size_t>();
    cfg.blstm_dim = j.at("blstm_dim").get<std::size_t>();
    cfg.question_len = j.at("T_q").get<std::size_t>();
    cfg.answer_len = j.at("T_a").get<std::size_t>();
    cfg.task = parse_task(j.at("task").get<std::string>());
    cfg.dropout_rate = j.at("dropout").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

std::vector<char> serialize_checkpoint(const Model& model, const CheckpointMeta& meta) {
    json manifest;
    manifest["format_version"] = kCheckpointVersion;
    manifest["config"] = config_to_json(model.config());
    std::vector<std::string> labels;
    for (const auto& l : model.labels().labels()) labels.push_back(l.name);
    manifest["label_space"] = labels;
    manifest["vocab_hash"] = meta.vocab_hash;
    manifest["vocab_size"] = model.vocab_size();
    manifest["vocab"] = meta.vocab_tokens;
    manifest["split_seed"] = meta.split_seed;
    manifest["extra"] = meta.extra;
    const std::string text = manifest.dump();

    std::vector<char> out(kMagic, kMagic + sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());

    const auto params = model.params();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto e : t.shape()) put<std::uint64_t>(out, e);
        for (double v : t.values()) put<double>(out, v);
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointMeta& meta) {
    const auto bytes = serialize_checkpoint(model, meta);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint deserialize_checkpoint(const std::vector<char>& bytes) {
    Reader r(bytes);
    if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw ValidationError("not a checkpoint file");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto manifest_len = r.get<std::uint64_t>();
    json manifest;
    try {
        manifest = json::parse(r.str(manifest_len));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint manifest unreadable: ") + e.what());
    }

    const ModelConfig cfg = config_from_json(manifest.at("config"));
    const auto vocab_size = manifest.at("vocab_size").get<std::size_t>();
    Checkpoint ck{Model::build(cfg, vocab_size), {}};
    ck.meta.vocab_tokens = manifest.at("vocab").get<std::vector<std::string>>();
    ck.meta.vocab_hash = manifest.at("vocab_hash").get<std::uint64_t>();
    ck.meta.split_seed = manifest.value("split_seed", std::uint64_t{0});
    ck.meta.extra = manifest.value("extra", json::object());

    std::vector<std::string> labels;
    for (const auto& l : ck.model.labels().labels()) labels.push_back(l.name);
    if (manifest.at("label_space").get<std::vector<std::string>>() != labels) {
        throw ValidationError("checkpoint label space does not match its task");
    }

    auto params = ck.model.params();
    const auto count = r.get<std::uint32_t>();
    if (count != params.size()) {
        throw ValidationError("checkpoint holds " + std::to_string(count) + " parameters, model declares " +
                              std::to_string(params.size()));
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto name = r.str(r.get<std::uint32_t>());
        auto it = params.find(name);
        if (it == params.end()) throw ValidationError("checkpoint parameter '" + name + "' is unknown");
        Shape shape(r.get<std::uint32_t>());
        for (auto& e : shape) e = static_cast<std::size_t>(r.get<std::uint64_t>());
        if (shape != it->second.shape()) {
            throw ValidationError("checkpoint parameter '" + name + "' has shape " + shape_str(shape) +
                                  ", expected " + shape_str(it->second.shape()));
        }
        for (auto& v : it->second.values()) v = r.get<double>();
    }
    if (!r.done()) throw ValidationError("trailing bytes after checkpoint parameters");
    return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace dan
