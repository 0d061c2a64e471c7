#include "docrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace docrisk {

RewardSpec RewardSpec::parse(const std::string& text) {
  RewardSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '+')) {
    if (item.empty()) continue;
    if (item == "bleu_doc")
      spec.bleu_doc = true;
    else if (item == "bleu_sen")
      spec.bleu_sen = true;
    else if (item == "lc_doc")
      spec.lc_doc = true;
    else if (item == "coh_doc")
      spec.coh_doc = true;
    else
      throw ConfigError("unknown reward '" + item +
                        "' (expected bleu_doc, bleu_sen, lc_doc, coh_doc)");
  }
  if (!spec.any()) throw ConfigError("reward spec is empty: '" + text + "'");
  return spec;
}

std::string RewardSpec::to_string() const {
  std::string out;
  auto append = [&out](const char* name) {
    if (!out.empty()) out += '+';
    out += name;
  };
  if (bleu_doc) append("bleu_doc");
  if (bleu_sen) append("bleu_sen");
  if (lc_doc) append("lc_doc");
  if (coh_doc) append("coh_doc");
  return out;
}

const std::vector<Sentence>& RefBlock::get() const {
  if (!sentences_)
    throw MissingReferenceError("a BLEU reward is enabled but no reference block is available");
  if (read_counter_) ++*read_counter_;
  return *sentences_;
}

MixSchedule::MixSchedule(double p, std::uint64_t seed) : risk_prob(p), rng(seed) {
  if (p < 0.0 || p > 1.0) throw ConfigError("risk probability must be in [0,1]");
}

Objective next_objective(MixSchedule& schedule) {
  std::bernoulli_distribution draw(schedule.risk_prob);
  return draw(schedule.rng) ? Objective::risk : Objective::nll;
}

std::vector<double> softmax_probs(const std::vector<double>& mean_logprobs) {
  std::vector<double> probs(mean_logprobs.size());
  const double mx = *std::max_element(mean_logprobs.begin(), mean_logprobs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < mean_logprobs.size(); ++i) {
    probs[i] = std::exp(mean_logprobs[i] - mx);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

std::vector<double> candidate_probabilities(const CandidateSet& set) {
  std::vector<double> means;
  means.reserve(set.candidates.size());
  for (const auto& cand : set.candidates) means.push_back(cand.mean_logprob());
  return softmax_probs(means);
}

RewardBreakdown segment_reward(const std::vector<Sentence>& candidate_block,
                               const RefBlock& reference, const RewardSpec& spec,
                               const RelationDb& db, const TopicTable& table,
                               const StopList& stop) {
  if (!spec.any()) throw ConfigError("segment_reward: empty reward spec");
  RewardBreakdown breakdown;
  if (spec.lc_doc) {
    breakdown.lc_doc = lexical_cohesion(candidate_block, db, stop).value;
    breakdown.sum += *breakdown.lc_doc;
  }
  if (spec.coh_doc) {
    CohScore coh = coherence(candidate_block, table);
    // Zero-pair blocks are excluded from the COH term.
    breakdown.coh_doc = coh.pairs == 0 ? 0.0 : coh.value;
    breakdown.sum += *breakdown.coh_doc;
  }
  if (spec.bleu_doc) {
    breakdown.bleu_doc = bleu_document(candidate_block, reference.get()).value;
    breakdown.sum += *breakdown.bleu_doc;
  }
  if (spec.bleu_sen) {
    const auto& refs = reference.get();
    if (refs.size() != candidate_block.size())
      throw AlignmentError("segment_reward: candidate and reference block sizes differ");
    double total = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i)
      total += bleu_sentence(candidate_block[i], refs[i]).value;
    breakdown.bleu_sen = total / static_cast<double>(refs.size());
    breakdown.sum += *breakdown.bleu_sen;
  }
  return breakdown;
}

Sentence candidate_sentence(const Candidate& candidate, const Vocabulary& tgt_vocab,
                            int doc_position) {
  Sentence sent;
  sent.doc_position = doc_position;
  for (int id : candidate.tokens) {
    if (id == kEosId || id == kBosId || id == kPadId) continue;
    sent.tokens.push_back(Token{tgt_vocab.surface(id), id});
  }
  return sent;
}

RiskBatchResult risk_loss(const PolicyModel& model, const Vocabulary& tgt_vocab,
                          const Segment& segment, const RewardSpec& spec, int beam,
                          const RelationDb& db, const TopicTable& table,
                          const StopList& stop, GradientAccumulator* grads,
                          const RiskLossOptions& options) {
  if (segment.sentence_pairs.empty())
    throw ConfigError("risk_loss: empty segment");
  if (beam < 1) throw ConfigError("risk_loss: beam must be >= 1");

  const std::size_t n_sents = segment.sentence_pairs.size();
  auto context_of = [&](std::size_t i) -> const Sentence* {
    if (!options.contexts || i >= options.contexts->size()) return nullptr;
    return (*options.contexts)[i];
  };

  // Per-sentence candidate sets from beam search under the current policy.
  std::vector<CandidateSet> sets;
  sets.reserve(n_sents);
  for (std::size_t i = 0; i < n_sents; ++i)
    sets.push_back(model.beam_search(segment.sentence_pairs[i].first, beam, context_of(i)));

  // Block b takes each sentence's rank-b hypothesis, falling back to rank 0
  // when the beam returned fewer.
  const std::size_t l = static_cast<std::size_t>(beam);
  auto pick_candidate = [&](std::size_t sent, std::size_t block) -> const Candidate& {
    const auto& cands = sets[sent].candidates;
    return cands[block < cands.size() ? block : 0];
  };

  // Rewards are constants with respect to the parameters.
  std::vector<Sentence> reference_block;
  const std::vector<Sentence>* ref_ptr = nullptr;
  if (spec.needs_reference()) {
    reference_block.reserve(n_sents);
    for (const auto& [src, tgt] : segment.sentence_pairs) reference_block.push_back(tgt);
    ref_ptr = &reference_block;
  }
  RefBlock reference(ref_ptr, options.ref_reads);

  RiskBatchResult result;
  ad::Vec rewards(static_cast<Eigen::Index>(l));
  for (std::size_t b = 0; b < l; ++b) {
    std::vector<Sentence> block;
    block.reserve(n_sents);
    for (std::size_t i = 0; i < n_sents; ++i)
      block.push_back(candidate_sentence(pick_candidate(i, b), tgt_vocab,
                                         static_cast<int>(i)));
    RewardBreakdown breakdown = segment_reward(block, reference, spec, db, table, stop);
    rewards(static_cast<Eigen::Index>(b)) = breakdown.sum;
    result.rewards.push_back(std::move(breakdown));
  }

  // Teacher-forced re-scoring of every block on one tape; the block score is
  // the token-count-weighted mean step log-prob.
  ad::Tape tape(grads != nullptr);
  ParamVars pv = model.register_params(tape);
  std::vector<ad::Var> block_scores;
  block_scores.reserve(l);
  std::vector<ad::Var> encodings(n_sents);
  for (std::size_t i = 0; i < n_sents; ++i)
    encodings[i] = model.encode(
        tape, pv, PolicyModel::encoder_input(segment.sentence_pairs[i].first, context_of(i)));
  for (std::size_t b = 0; b < l; ++b) {
    std::vector<ad::Var> steps;
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < n_sents; ++i) {
      const Candidate& cand = pick_candidate(i, b);
      auto vars = model.score_steps(tape, pv, encodings[i], cand.tokens);
      steps.insert(steps.end(), vars.begin(), vars.end());
      tokens += cand.tokens.size();
    }
    block_scores.push_back(ad::scale(ad::sum(steps), 1.0 / static_cast<double>(tokens)));
  }

  ad::Vec probs;
  ad::Var expected = ad::expected_reward(ad::stack(block_scores), rewards, &probs);
  ad::Var loss = ad::scale(expected, -1.0);
  result.loss = loss.scalar();
  result.candidate_probs.assign(probs.data(), probs.data() + probs.size());
  if (grads) {
    tape.backward(loss);
    grads->add_from(pv);
  }
  return result;
}

}  // namespace docrisk
