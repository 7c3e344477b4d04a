#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dan/corpus.hpp"
#include "dan/labels.hpp"

namespace dan {

using PolarityMix = std::array<double, kNumPolarities>;

// Throws ConfigError unless the entries are non-negative and sum to 1 +- 1e-9.
void validate_mix(const PolarityMix& mix);

struct SynthPair {
    QAPair pair;
    std::string filler;                        // slot text, space-joined
    std::vector<std::string> function_words;   // template function-word spans
    int polarity = 0;
};

// Templated QA pairs with known gold labels. Answers carry the polarity either
// explicitly or implicitly (no leading yes/no).
std::vector<SynthPair> synth_generate_detailed(std::size_t n, Task task, std::uint64_t seed, const PolarityMix& mix);
std::vector<QAPair> synth_generate(std::size_t n, Task task, std::uint64_t seed, const PolarityMix& mix);

}  // namespace dan
