#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dan/config.hpp"
#include "dan/tensor.hpp"

namespace dan {

struct GradcheckOptions {
    std::uint64_t seed = 1;
    double eps = 1e-4;        // central-difference step
    double tolerance = 1e-4;  // maximum relative error
    // Relative error is |a - n| / max(|a|, |n|, denominator_floor).
    double denominator_floor = 1e-6;
};

double relative_error(double analytic, double numeric, double floor);

// Worst entry of one checked tensor.
struct GradcheckEntry {
    std::string name;  // op name or parameter name
    std::size_t count = 0;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    bool passed = true;
};

struct GradcheckSection {
    std::string title;  // "ops" or a variant name
    std::vector<GradcheckEntry> entries;
    bool passed() const;
};

struct GradcheckReport {
    std::vector<GradcheckSection> sections;
    bool passed() const;
    // First failing entry as "section/name", empty when everything passed.
    std::string first_failure() const;
    void print(std::ostream& os) const;
};

// Scalar loss over the given leaves; called both on a tape and without one.
using LossFn = std::function<Tensor()>;

// Compares backward() through `loss` with central differences for every
// element of every leaf. Leaf values are restored afterwards.
std::vector<GradcheckEntry> check_leaves(const LossFn& loss, std::vector<std::pair<std::string, Tensor>> leaves,
                                         const GradcheckOptions& opts);

// Every differentiable primitive on small random inputs, one entry per op.
GradcheckSection gradcheck_ops(const GradcheckOptions& opts);

// The micro configuration used for whole-model checks: vocab 20, d_e 8,
// BLSTM 8, T_q = T_a = 6, batch 2, dropout 0.
ModelConfig gradcheck_config(Variant variant, std::uint64_t seed);

// Every parameter of one variant against the summed batch loss.
GradcheckSection gradcheck_model(Variant variant, const GradcheckOptions& opts);

// Ops first, then the four variants.
GradcheckReport gradcheck_suite(const GradcheckOptions& opts);

}  // namespace dan
