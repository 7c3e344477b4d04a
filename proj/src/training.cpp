#include "dan/training.hpp"

#include <cmath>
#include <sstream>

#include "dan/errors.hpp"
#include "dan/ops.hpp"

namespace dan {

AdamState AdamState::for_params(const ParamSet& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const auto& [name, t] : params) {
        s.m[name].assign(t.numel(), 0.0);
        s.v[name].assign(t.numel(), 0.0);
    }
    return s;
}

Tensor batch_loss(const Model& model, std::span<const EncodedExample> batch, bool training, Rng* rng) {
    if (batch.empty()) throw ContractError("batch_loss: empty batch");
    const auto& cfg = model.config();
    const std::size_t L = model.labels().size(), tq = cfg.question_len;
    for (const auto& ex : batch) {
        if (ex.labels.size() != tq) {
            throw ContractError("batch_loss: example '" + ex.id + "' has " + std::to_string(ex.labels.size()) +
                                " labels, config expects T_q=" + std::to_string(tq));
        }
    }
    ForwardOptions opts;
    opts.training = training;
    opts.rng = rng;
    const ForwardTrace tr = model.forward(batch, opts);

    std::vector<double> y(batch.size() * tq * L, 0.0), mask(batch.size() * tq, 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        for (std::size_t t = 0; t < tq; ++t) {
            const int l = batch[b].labels[t];
            if (l < 0 || static_cast<std::size_t>(l) >= L) throw ContractError("batch_loss: label outside the space");
            y[(b * tq + t) * L + static_cast<std::size_t>(l)] = 1.0;
            mask[b * tq + t] = batch[b].question_mask[t];
        }
    }
    return cross_entropy(tr.probs, Tensor::from(tr.probs.shape(), std::move(y)),
                         Tensor::from({batch.size(), tq}, std::move(mask)));
}

void adam_step(ParamSet& params, AdamState& state) {
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (auto& [name, p] : params) {
        auto mit = state.m.find(name);
        auto vit = state.v.find(name);
        if (mit == state.m.end() || vit == state.v.end() || mit->second.size() != p.numel()) {
            throw ContractError("adam_step: no moment buffer for parameter '" + name + "'");
        }
        auto& m = mit->second;
        auto& v = vit->second;
        auto w = p.values();
        auto g = p.grad();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        p.zero_grad();
    }
}

void clip_gradients(ParamSet& params, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    for (auto& [_, p] : params) {
        for (double g : p.grad()) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double f = max_norm / norm;
    for (auto& [_, p] : params) {
        for (auto& g : p.grad()) g *= f;
    }
}

std::vector<LabelSeq> predict_all(const Model& model, const std::vector<EncodedExample>& data,
                                  std::size_t batch_size) {
    std::vector<LabelSeq> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); i += batch_size) {
        const std::size_t n = std::min(batch_size, data.size() - i);
        std::span<const EncodedExample> batch(data.data() + i, n);
        auto labels = predict_labels(model.forward(batch), batch);
        for (auto& l : labels) out.push_back(std::move(l));
    }
    return out;
}

MetricsReport evaluate(const Model& model, const std::vector<EncodedExample>& data, std::size_t batch_size) {
    std::vector<LabelSeq> gold;
    gold.reserve(data.size());
    for (const auto& ex : data) gold.push_back(ex.labels);
    return score(model.config().task, predict_all(model, data, batch_size), gold);
}

namespace {

std::string param_norms(const ParamSet& params) {
    std::ostringstream os;
    for (const auto& [name, p] : params) {
        double sq = 0.0;
        for (double v : p.values()) sq += v * v;
        os << "  " << name << " |w|=" << std::sqrt(sq) << "\n";
    }
    return os.str();
}

std::vector<std::vector<double>> snapshot(const ParamSet& params) {
    std::vector<std::vector<double>> out;
    for (const auto& [_, p] : params) out.emplace_back(p.values().begin(), p.values().end());
    return out;
}

void restore(ParamSet& params, const std::vector<std::vector<double>>& snap) {
    std::size_t k = 0;
    for (auto& [_, p] : params) {
        std::copy(snap[k].begin(), snap[k].end(), p.values().begin());
        ++k;
    }
}

}  // namespace

FitResult fit(Model& model, const std::vector<EncodedExample>& train, const std::vector<EncodedExample>& valid,
              const TrainConfig& tcfg, const FitHooks& hooks) {
    if (tcfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
    FitResult result;
    if (tcfg.max_epochs == 0) return result;
    if (train.empty()) throw ConfigError("training set is empty");

    ParamSet params = model.params();
    AdamState adam = AdamState::for_params(params, tcfg.lr);
    std::vector<std::vector<double>> best = snapshot(params);
    Rng dropout_rng(mix_seed(tcfg.seed ^ 0x64726f70ULL));

    std::vector<std::size_t> order(train.size());
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (tcfg.shuffle) {
            Rng shuffle_rng(tcfg.seed ^ static_cast<std::uint64_t>(epoch));
            shuffle_rng.shuffle(std::span<std::size_t>(order));
        }

        double epoch_loss = 0.0;
        std::vector<EncodedExample> batch;
        for (std::size_t start = 0, bi = 0; start < order.size(); start += tcfg.batch_size, ++bi) {
            const std::size_t n = std::min(tcfg.batch_size, order.size() - start);
            batch.clear();
            for (std::size_t k = 0; k < n; ++k) batch.push_back(train[order[start + k]]);

            Tape tape;
            TapeScope scope(tape);
            auto numeric_failure = [&](const std::string& what) {
                return NumericError(what + " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi) +
                                    "\nparameter norms:\n" + param_norms(params));
            };
            Tensor loss;
            try {
                loss = batch_loss(model, batch, true, &dropout_rng);
            } catch (const DomainError& e) {
                throw numeric_failure(e.what());
            }
            const double lv = loss.item();
            if (!std::isfinite(lv)) throw numeric_failure("non-finite loss " + std::to_string(lv));
            backward(loss);
            clip_gradients(params, tcfg.clip_norm);
            adam_step(params, adam);
            epoch_loss += lv;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss;
        rec.valid = evaluate(model, valid);
        result.history.push_back(rec);
        if (hooks.log) {
            *hooks.log << "epoch " << epoch << " train_loss " << epoch_loss << " valid_f1 " << rec.valid.avg_f1
                       << " valid_extraction_f1 " << rec.valid.extraction_f1 << "\n";
        }

        if (rec.valid.avg_f1 > result.best_valid_f1) {
            result.best_valid_f1 = rec.valid.avg_f1;
            result.best_epoch = epoch;
            best = snapshot(params);
            since_best = 0;
            if (hooks.on_best) hooks.on_best(model, rec);
        } else if (++since_best >= tcfg.patience) {
            break;
        }
    }
    restore(params, best);
    return result;
}

}  // namespace dan
