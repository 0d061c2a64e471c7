#pragma once

#include <cstdint>
#include <string>

namespace docrisk {

struct SyntheticConfig {
  std::string kind = "copy";  // "copy" or "cohesion"
  std::size_t train_docs = 40;
  std::size_t val_docs = 8;
  std::size_t doc_sents = 5;   // sentences per document
  std::size_t sent_len = 6;    // tokens per sentence (copy: upper bound)
  std::size_t vocab_words = 16;  // copy-task word inventory
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct SyntheticPaths {
  std::string train_src, train_tgt, val_src, val_tgt;
  std::string relations, topics, stoplist;  // cohesion kind only
};

// `copy`: target equals source over a small vocabulary. `cohesion`: each
// document carries a latent topic; source marker tokens are realized in the
// references as one of two topic-word variants per marker, so consistent
// variant choice raises LC/COH without a reliable BLEU penalty; the emitted
// relation db links variants of the same register within a topic and also a
// small distractor synonym set that never helps BLEU.
SyntheticPaths gen_synthetic(const SyntheticConfig& config);

}  // namespace docrisk
