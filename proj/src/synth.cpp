#include "dan/synth.hpp"

#include <cmath>
#include <sstream>

#include "dan/errors.hpp"
#include "dan/rng.hpp"

namespace dan {

namespace {

// Template tokens: "{E}" entity slot, "{G}" gerund slot, "{P}" product name,
// "*word" a function word. Consecutive starred words form one span.
struct QuestionTemplate {
    const char* text;
};

constexpr QuestionTemplate kQuestions[] = {
    {"does this *work *with {E} ?"},
    {"can it *run {E} ?"},
    {"can you *use this *for {G} ?"},
    {"will it *connect *to {E} ?"},
    {"is this *compatible *with {E} ?"},
    {"does the {P} *support {E} ?"},
    {"{E} ?"},
    {"hi , does it *play {E} well ?"},
    {"can i *install {E} on it ?"},
    {"quick question , will it *work *on {E} ?"},
};

// Indexed by polarity - 1.
const std::vector<const char*> kAnswers[kNumPolarities] = {
    {
        "yes , it works great with {E}",
        "it runs {E} very well",
        "yes it does",
        "works perfectly , i use it with {E} every day",
        "absolutely , no problems at all",
        "yes",
        "mine handles {E} just fine",
    },
    {
        "no , it does not",
        "it struggles with {E}",
        "unfortunately no",
        "no , {E} is not supported",
        "sadly it will not work",
        "nope",
        "it fails to load {E} at all",
    },
    {
        "i am not sure",
        "not sure but it works for my {O}",
        "i can not speak to {E}",
        "it depends on the version",
        "maybe , you should ask the seller",
        "i do not know",
        "no idea , i never tried {E}",
    },
};

const char* const kEntities[] = {
    "iphone",         "iphone 6 plus",      "android phones", "google play app store",
    "photoshop",      "fallout 4",          "itunes",         "kindle books",
    "windows 10",     "adobe flash player", "hdmi",           "sd card",
    "straight talk",  "cricket",            "gmail",          "xbox one games",
    "mac",            "5g home wireless network", "bluetooth headphones", "netflix",
    "spotify",        "usb c",              "glass table",    "verizon",
    "chromecast",     "ps4 controller",     "linux",          "minecraft",
};

const char* const kGerunds[] = {
    "sketching", "gaming", "video editing", "reading", "drawing",
    "streaming movies", "note taking", "photo editing", "music production", "travel",
};

const char* const kOthers[] = {"android phone", "old laptop", "tv", "car"};

struct Product {
    const char* id;
    const char* name;
};

const Product kProducts[] = {
    {"surface-pro-4", "surface pro 4"}, {"kindle-paperwhite", "kindle"}, {"galaxy-tab", "galaxy tab"},
    {"echo-dot", "echo dot"},           {"macbook-air", "macbook air"},  {"apple-watch", "apple watch"},
    {"xbox-one", "xbox"},               {"oculus-rift", "rift"},         {"micro-sd-card", "card"},
    {"logitech-mouse", "mouse"},
};

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

template <typename T, std::size_t N>
const T& pick(const T (&items)[N], Rng& rng) {
    return items[rng.below(N)];
}

int draw_polarity(const PolarityMix& mix, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int k = 0; k < kNumPolarities; ++k) {
        acc += mix[static_cast<std::size_t>(k)];
        if (u < acc) return k + 1;
    }
    for (int k = kNumPolarities; k >= 1; --k) {
        if (mix[static_cast<std::size_t>(k - 1)] > 0.0) return k;
    }
    return 1;
}

}  // namespace

void validate_mix(const PolarityMix& mix) {
    double total = 0.0;
    for (double m : mix) {
        if (!(m >= 0.0)) throw ConfigError("polarity mix entries must be non-negative");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("polarity mix must sum to 1, got " + std::to_string(total));
    }
}

std::vector<SynthPair> synth_generate_detailed(std::size_t n, Task task, std::uint64_t seed, const PolarityMix& mix) {
    if (n < 1) throw ConfigError("synthetic corpus size must be >= 1");
    validate_mix(mix);
    const auto& space = LabelSpace::for_task(task);
    Rng rng(seed);

    std::vector<SynthPair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int polarity = draw_polarity(mix, rng);
        const auto& tmpl = pick(kQuestions, rng);
        const Product& product = pick(kProducts, rng);
        const std::string entity = pick(kEntities, rng);
        const std::string gerund = pick(kGerunds, rng);
        const auto& answers = kAnswers[polarity - 1];
        const std::string answer_text = answers[rng.below(answers.size())];
        const std::string other = pick(kOthers, rng);

        SynthPair sp;
        sp.polarity = polarity;
        QAPair& p = sp.pair;
        p.id = "synth-" + std::to_string(seed) + "-" + std::to_string(i);
        p.product_id = product.id;
        p.task = task;
        std::vector<std::string> labels;

        const int target = space.target_label(polarity);
        const int funcword = task == Task::Satisf ? *space.funcword_label(polarity) : 0;
        bool in_fw = false;
        for (const auto& tok : words(tmpl.text)) {
            if (tok == "{E}" || tok == "{G}") {
                sp.filler = tok == "{E}" ? entity : gerund;
                for (const auto& w : words(sp.filler)) {
                    p.question.push_back(w);
                    labels.push_back(space.name(target));
                }
                in_fw = false;
            } else if (tok == "{P}") {
                for (const auto& w : words(product.name)) {
                    p.question.push_back(w);
                    labels.push_back("O");
                }
                in_fw = false;
            } else if (tok[0] == '*') {
                const std::string w = tok.substr(1);
                p.question.push_back(w);
                labels.push_back(space.name(funcword));
                if (in_fw) {
                    sp.function_words.back() += " " + w;
                } else {
                    sp.function_words.push_back(w);
                }
                in_fw = true;
            } else {
                p.question.push_back(tok);
                labels.push_back("O");
                in_fw = false;
            }
        }
        if (task == Task::Compat) sp.function_words.clear();

        for (const auto& tok : words(answer_text)) {
            if (tok == "{E}") {
                for (const auto& w : words(sp.filler)) p.answer.push_back(w);
            } else if (tok == "{O}") {
                for (const auto& w : words(other)) p.answer.push_back(w);
            } else {
                p.answer.push_back(tok);
            }
        }
        p.labels = std::move(labels);
        out.push_back(std::move(sp));
    }
    return out;
}

std::vector<QAPair> synth_generate(std::size_t n, Task task, std::uint64_t seed, const PolarityMix& mix) {
    std::vector<QAPair> out;
    out.reserve(n);
    for (auto& sp : synth_generate_detailed(n, task, seed, mix)) out.push_back(std::move(sp.pair));
    return out;
}

}  // namespace dan
