#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "docrisk/bleu.hpp"
#include "docrisk/coherence.hpp"
#include "docrisk/corpus.hpp"
#include "docrisk/lexcohesion.hpp"
#include "docrisk/policy.hpp"

namespace docrisk {

struct RewardSpec {
  bool bleu_doc = false;
  bool bleu_sen = false;
  bool lc_doc = false;
  bool coh_doc = false;

  // Parse a `+`-separated, order-insensitive list such as
  // "bleu_doc+lc_doc+coh_doc".
  static RewardSpec parse(const std::string& text);
  std::string to_string() const;

  bool any() const { return bleu_doc || bleu_sen || lc_doc || coh_doc; }
  bool needs_reference() const { return bleu_doc || bleu_sen; }
};

struct RewardBreakdown {
  std::optional<double> bleu_doc, bleu_sen, lc_doc, coh_doc;  // set iff enabled
  double sum = 0.0;
};

// Reference block handed to reward computation behind an access counter, so
// tests can prove the unsupervised rewards never touch it.
class RefBlock {
 public:
  RefBlock() = default;
  RefBlock(const std::vector<Sentence>* sentences, long* read_counter = nullptr)
      : sentences_(sentences), read_counter_(read_counter) {}

  const std::vector<Sentence>& get() const;  // throws MissingReferenceError if absent
  bool present() const { return sentences_ != nullptr; }

 private:
  const std::vector<Sentence>* sentences_ = nullptr;
  long* read_counter_ = nullptr;
};

struct RiskBatchResult {
  double loss = 0.0;
  std::vector<double> candidate_probs;     // sums to 1 within 1e-9
  std::vector<RewardBreakdown> rewards;    // aligned with candidate_probs
};

enum class Objective { risk, nll };

struct MixSchedule {
  double risk_prob = 0.0;
  std::mt19937_64 rng;

  MixSchedule(double p, std::uint64_t seed);
};

// Bernoulli(risk_prob) draw from the schedule's own generator.
Objective next_objective(MixSchedule& schedule);

// Softmax over mean step log-probs with max-subtraction (Eq.-style candidate
// distribution over the beam set).
std::vector<double> softmax_probs(const std::vector<double>& mean_logprobs);
std::vector<double> candidate_probabilities(const CandidateSet& set);

// Sum of the enabled rewards over one candidate block. LC and COH never read
// the reference; a BLEU reward without a reference raises
// MissingReferenceError. COH contributes 0 for single-sentence blocks
// (zero-pair exclusion).
RewardBreakdown segment_reward(const std::vector<Sentence>& candidate_block,
                               const RefBlock& reference, const RewardSpec& spec,
                               const RelationDb& db, const TopicTable& table,
                               const StopList& stop);

// Turn a decoded candidate into a reward-ready sentence: reserved symbols
// (EOS in particular) are stripped, UNK and real words keep their surfaces.
Sentence candidate_sentence(const Candidate& candidate, const Vocabulary& tgt_vocab,
                            int doc_position);

struct RiskLossOptions {
  // Per-pair context sentences (previous source sentence), aligned with the
  // segment; null or shorter entries mean no context.
  const std::vector<const Sentence*>* contexts = nullptr;
  long* ref_reads = nullptr;  // instrumentation counter for reference access
};

// Expected-risk loss over candidate blocks assembled from per-sentence beam
// ranks. Block score is total log-prob over the block divided by its token
// count; gradients flow through the normalized probabilities only.
RiskBatchResult risk_loss(const PolicyModel& model, const Vocabulary& tgt_vocab,
                          const Segment& segment, const RewardSpec& spec, int beam,
                          const RelationDb& db, const TopicTable& table,
                          const StopList& stop, GradientAccumulator* grads,
                          const RiskLossOptions& options = {});

}  // namespace docrisk
