#pragma once

#include <array>
#include <string>
#include <vector>

#include "docrisk/corpus.hpp"

namespace docrisk {

inline constexpr int kBleuOrder = 4;

struct BleuScore {
  double value = 0.0;  // [0,1]; reports multiply by 100
  std::array<double, kBleuOrder> ngram_precisions{};
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

// Clipped n-gram match counts, accumulable across segments for corpus-level
// scores (each segment contributes its own clipping).
struct BleuStats {
  std::array<long, kBleuOrder> matched{};
  std::array<long, kBleuOrder> total{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  void add(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);
  BleuStats& operator+=(const BleuStats& other);
  BleuScore score() const;
};

// BLEU-4 on token surfaces. Precisions for n >= 2 with a raw match count of
// zero get add-one smoothing ((m+1)/(t+1)); a zero unigram match or an empty
// hypothesis scores 0.
BleuScore bleu_tokens(const std::vector<std::string>& hyp,
                      const std::vector<std::string>& ref);

BleuScore bleu_sentence(const Sentence& hyp, const Sentence& ref);

// Concatenate each side into one token sequence, then score as one sentence.
BleuScore bleu_document(const std::vector<Sentence>& hyp_sents,
                        const std::vector<Sentence>& ref_sents);

}  // namespace docrisk
