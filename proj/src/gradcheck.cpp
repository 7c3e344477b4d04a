#include "dan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>

#include "dan/corpus.hpp"
#include "dan/model.hpp"
#include "dan/ops.hpp"
#include "dan/rng.hpp"
#include "dan/training.hpp"

namespace dan {

namespace {

constexpr std::size_t kVocab = 20;
constexpr std::size_t kLen = 6;

Tensor random_leaf(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::from(shape, std::move(v), true);
}

// sum(f(x) * R) for a fixed random R, so every output element feeds the loss
// with a distinct weight.
Tensor weighted_sum(const Tensor& y, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> r(y.numel());
    for (auto& x : r) x = rng.uniform(-1.0, 1.0);
    return sum(mul(y, Tensor::from(y.shape(), std::move(r))));
}

std::string layer_of(const std::string& param) {
    const auto dot = param.find('.');
    return dot == std::string::npos ? param : param.substr(0, dot);
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

bool GradcheckSection::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

bool GradcheckReport::passed() const {
    return std::all_of(sections.begin(), sections.end(), [](const auto& s) { return s.passed(); });
}

std::string GradcheckReport::first_failure() const {
    for (const auto& s : sections) {
        for (const auto& e : s.entries) {
            if (!e.passed) return s.title + "/" + e.name;
        }
    }
    return {};
}

void GradcheckReport::print(std::ostream& os) const {
    const auto flags = os.flags();
    os << std::scientific << std::setprecision(3);
    for (const auto& s : sections) {
        os << "[" << s.title << "] " << (s.passed() ? "pass" : "FAIL") << "\n";
        std::map<std::string, double> per_layer;
        for (const auto& e : s.entries) {
            os << "  " << (e.passed ? "ok   " : "FAIL ") << std::left << std::setw(36) << e.name << std::right
               << " n=" << std::setw(5) << e.count << " max_rel_err=" << e.max_rel_err;
            if (!e.passed) os << " at [" << e.worst_index << "] analytic=" << e.analytic << " numeric=" << e.numeric;
            os << "\n";
            auto& worst = per_layer[layer_of(e.name)];
            worst = std::max(worst, e.max_rel_err);
        }
        if (s.title != "ops") {
            for (const auto& [layer, err] : per_layer) os << "  layer " << layer << " max_rel_err=" << err << "\n";
        }
    }
    os.flags(flags);
}

std::vector<GradcheckEntry> check_leaves(const LossFn& loss, std::vector<std::pair<std::string, Tensor>> leaves,
                                         const GradcheckOptions& opts) {
    for (auto& [_, t] : leaves) t.zero_grad();
    {
        Tape tape;
        TapeScope scope(tape);
        backward(loss());
    }

    std::vector<GradcheckEntry> out;
    for (auto& [name, t] : leaves) {
        GradcheckEntry e;
        e.name = name;
        e.count = t.numel();
        const std::vector<double> analytic(t.grad().begin(), t.grad().end());
        auto w = t.values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double orig = w[i];
            w[i] = orig + opts.eps;
            const double up = loss().item();
            w[i] = orig - opts.eps;
            const double down = loss().item();
            w[i] = orig;
            const double numeric = (up - down) / (2.0 * opts.eps);
            const double rel = relative_error(analytic[i], numeric, opts.denominator_floor);
            if (!(rel <= e.max_rel_err)) {
                e.max_rel_err = rel;
                e.worst_index = i;
                e.analytic = analytic[i];
                e.numeric = numeric;
            }
        }
        e.passed = e.max_rel_err <= opts.tolerance;
        t.zero_grad();
        out.push_back(std::move(e));
    }
    return out;
}

GradcheckSection gradcheck_ops(const GradcheckOptions& opts) {
    Rng rng(mix_seed(opts.seed ^ 0x6f7073ULL));
    GradcheckSection section;
    section.title = "ops";
    std::uint64_t k = 0;

    auto run = [&](const std::string& op, std::vector<Tensor> leaves, std::function<Tensor()> f) {
        const std::uint64_t wseed = mix_seed(opts.seed + ++k);
        std::vector<std::pair<std::string, Tensor>> named;
        for (std::size_t i = 0; i < leaves.size(); ++i) named.emplace_back(op + "#" + std::to_string(i), leaves[i]);
        auto entries = check_leaves([&] { return weighted_sum(f(), wseed); }, named, opts);
        GradcheckEntry merged;
        merged.name = op;
        for (const auto& e : entries) {
            merged.count += e.count;
            if (e.max_rel_err >= merged.max_rel_err) {
                merged.max_rel_err = e.max_rel_err;
                merged.worst_index = e.worst_index;
                merged.analytic = e.analytic;
                merged.numeric = e.numeric;
            }
            merged.passed = merged.passed && e.passed;
        }
        section.entries.push_back(merged);
    };

    {
        Tensor a = random_leaf({3, 4}, rng), b = random_leaf({4, 5}, rng);
        run("matmul", {a, b}, [=] { return matmul(a, b); });
    }
    {
        Tensor a = random_leaf({2, 3, 4}, rng), b = random_leaf({2, 4, 5}, rng), c = random_leaf({2, 5, 4}, rng);
        run("bmm", {a, b}, [=] { return bmm(a, b); });
        run("bmm(transpose_b)", {a, c}, [=] { return bmm(a, c, true); });
    }
    {
        Tensor a = random_leaf({3, 5}, rng);
        run("transpose", {a}, [=] { return transpose(a); });
        run("sigmoid", {a}, [=] { return sigmoid(a); });
        run("tanh", {a}, [=] { return tanh(a); });
        run("scale", {a}, [=] { return scale(a, -1.7); });
        run("sum", {a}, [=] { return sum(a); });
        run("softmax_rows", {a}, [=] { return softmax_rows(a); });
    }
    {
        Tensor a = random_leaf({2, 3, 4}, rng), b = random_leaf({2, 3, 4}, rng), bias = random_leaf({4}, rng);
        run("add", {a, b}, [=] { return add(a, b); });
        run("sub", {a, b}, [=] { return sub(a, b); });
        run("mul", {a, b}, [=] { return mul(a, b); });
        run("add_bias", {a, bias}, [=] { return add_bias(a, bias); });
        run("concat", {a, b}, [=] { return concat(a, b, 2); });
        run("slice", {a}, [=] { return slice(a, 1, 1, 3); });
        run("select", {a}, [=] { return select(a, 1, 2); });
        run("stack", {a, b}, [=] {
            const Tensor parts[] = {a, b};
            return stack(parts, 1);
        });
        run("reshape", {a}, [=] { return reshape(a, {6, 4}); });
        run("repeat_axis", {bias}, [=] { return repeat_axis(bias, 0, 3); });
        const Tensor mask = Tensor::from({2, 4}, {1, 1, 0, 1, 1, 0, 0, 0});
        run("masked_softmax_rows", {a}, [=] { return masked_softmax_rows(a, mask); });
    }
    {
        Tensor p = random_leaf({2, 3, 4}, rng, 0.1, 1.0);
        std::vector<double> y(24, 0.0);
        for (std::size_t r = 0; r < 6; ++r) y[r * 4 + rng.below(4)] = 1.0;
        const Tensor yt = Tensor::from({2, 3, 4}, y);
        const Tensor mask = Tensor::from({2, 3}, {1, 1, 0, 1, 0, 1});
        run("cross_entropy", {p}, [=] { return cross_entropy(p, yt, mask); });
    }
    {
        Tensor table = random_leaf({3, 6}, rng);
        const std::vector<std::int32_t> idx = {0, 5, 2, 5, 1};
        run("gather_columns", {table}, [=] { return gather_columns(table, idx); });
    }
    return section;
}

ModelConfig gradcheck_config(Variant variant, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.embed_dim = 8;
    cfg.blstm_dim = 8;
    cfg.question_len = kLen;
    cfg.answer_len = kLen;
    cfg.task = Task::Satisf;
    cfg.dropout_rate = 0.0;
    cfg.seed = seed;
    return cfg;
}

GradcheckSection gradcheck_model(Variant variant, const GradcheckOptions& opts) {
    const ModelConfig cfg = gradcheck_config(variant, opts.seed);
    const Model model = Model::build(cfg, kVocab);
    const auto& space = model.labels();
    Rng rng(mix_seed(opts.seed ^ 0x6261746368ULL));

    // Two examples; the second is padded on both sides to exercise the masks.
    std::vector<EncodedExample> batch(2);
    const std::size_t q_lens[] = {kLen, 4};
    const std::size_t a_lens[] = {kLen, 3};
    for (std::size_t b = 0; b < 2; ++b) {
        auto& ex = batch[b];
        ex.id = "gradcheck-" + std::to_string(b);
        for (std::size_t t = 0; t < kLen; ++t) {
            const bool q_on = t < q_lens[b], a_on = t < a_lens[b];
            ex.question.push_back(q_on ? static_cast<std::int32_t>(1 + rng.below(kVocab - 1)) : Vocab::kPad);
            ex.answer.push_back(a_on ? static_cast<std::int32_t>(1 + rng.below(kVocab - 1)) : Vocab::kPad);
            ex.question_mask.push_back(q_on ? 1 : 0);
            ex.answer_mask.push_back(a_on ? 1 : 0);
            ex.labels.push_back(q_on ? static_cast<int>(rng.below(space.size())) : 0);
        }
        ex.story = ex.question;
        ex.story.insert(ex.story.end(), ex.answer.begin(), ex.answer.end());
    }

    std::vector<std::pair<std::string, Tensor>> leaves;
    for (const auto& [name, t] : model.params()) leaves.emplace_back(name, t);

    GradcheckSection section;
    section.title = std::string(variant_name(variant));
    section.entries = check_leaves([&] { return batch_loss(model, batch, false); }, leaves, opts);
    return section;
}

GradcheckReport gradcheck_suite(const GradcheckOptions& opts) {
    GradcheckReport report;
    report.sections.push_back(gradcheck_ops(opts));
    for (auto v : {Variant::Dan, Variant::DanNoAnswerAttention, Variant::QaSBlstm, Variant::QaCoAttention}) {
        report.sections.push_back(gradcheck_model(v, opts));
    }
    return report;
}

}  // namespace dan
