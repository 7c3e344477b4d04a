#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dan/corpus.hpp"
#include "dan/metrics.hpp"
#include "dan/model.hpp"
#include "dan/rng.hpp"

namespace dan {

struct AdamState {
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
    std::uint64_t step = 0;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_params(const ParamSet& params, double lr = 0.001);
};

struct TrainConfig {
    std::size_t batch_size = 128;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 1;
    bool shuffle = true;
    double lr = 0.001;
    double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

// Summed masked cross entropy of the batch. Records on the active tape when
// one exists.
Tensor batch_loss(const Model& model, std::span<const EncodedExample> batch, bool training, Rng* rng = nullptr);

// Bias-corrected Adam update in place, then zeroes the gradients.
void adam_step(ParamSet& params, AdamState& state);

// Rescales all gradients so their global L2 norm is at most max_norm.
void clip_gradients(ParamSet& params, double max_norm);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    MetricsReport valid;
};

struct FitResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // 0: initial parameters
    double best_valid_f1 = -1.0;
};

struct FitHooks {
    // Called whenever a new best validation score is reached.
    std::function<void(const Model&, const EpochRecord&)> on_best;
    std::ostream* log = nullptr;
};

// Predicted label sequences for encoded examples, evaluated in batches.
std::vector<LabelSeq> predict_all(const Model& model, const std::vector<EncodedExample>& data,
                                  std::size_t batch_size = 128);
MetricsReport evaluate(const Model& model, const std::vector<EncodedExample>& data, std::size_t batch_size = 128);

// Epoch loop with validation model selection and early stopping. On return
// the model holds the best-scoring parameters. Throws NumericError on a
// non-finite loss.
FitResult fit(Model& model, const std::vector<EncodedExample>& train, const std::vector<EncodedExample>& valid,
              const TrainConfig& tcfg, const FitHooks& hooks = {});

}  // namespace dan
