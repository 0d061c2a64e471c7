#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docrisk/autodiff.hpp"
#include "docrisk/corpus.hpp"

namespace docrisk {

struct ModelConfig {
  std::size_t src_vocab_size = 0;
  std::size_t tgt_vocab_size = 0;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;

  void validate() const;
};

// All trainable tensors. Biases are stored as n x 1 matrices so the
// name/shape visitor below covers everything uniformly.
struct Params {
  ad::Mat src_embed, tgt_embed;  // V x E
  ad::Mat enc_wh, enc_wx, enc_b;
  ad::Mat dec_wh, dec_wy, dec_b;
  ad::Mat cmb_w, cmb_b;          // combine [state; attention context]
  ad::Mat out_w, out_b;          // projection to target vocabulary
};

template <class P, class F>
void for_each_param(P& params, F&& fn) {
  fn("src_embed", params.src_embed);
  fn("tgt_embed", params.tgt_embed);
  fn("enc_wh", params.enc_wh);
  fn("enc_wx", params.enc_wx);
  fn("enc_b", params.enc_b);
  fn("dec_wh", params.dec_wh);
  fn("dec_wy", params.dec_wy);
  fn("dec_b", params.dec_b);
  fn("cmb_w", params.cmb_w);
  fn("cmb_b", params.cmb_b);
  fn("out_w", params.out_w);
  fn("out_b", params.out_b);
}

// Parameter leaves registered on a tape, aligned with Params.
struct ParamVars {
  std::vector<std::pair<std::string, ad::Var>> vars;
  ad::Var get(const std::string& name) const;
};

struct Candidate {
  std::vector<int> tokens;            // ends in EOS unless truncated at max length
  std::vector<double> step_logprobs;  // one per token, each <= 0

  double total_logprob() const;
  double mean_logprob() const;
};

struct CandidateSet {
  std::vector<Candidate> candidates;  // ordered by mean log-prob, best first
};

struct GradientAccumulator;

struct NllResult {
  double loss = 0.0;
  std::size_t tokens = 0;  // target tokens scored, including the EOS step
};

// Single-layer recurrent encoder-decoder with dot-product attention over the
// encoder states. The optional context sentence is concatenated in front of
// the source with an EOS separator. Decoding and teacher-forced scoring share
// one step function, built on the autodiff tape.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(ModelConfig config, Params params);

  // Glorot-style uniform init (biases zero); bit-reproducible given the seed.
  static PolicyModel init(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Params& params() const { return params_; }
  Params& params() { return params_; }

  static std::size_t max_decode_len(std::size_t src_len) { return 2 * src_len + 5; }

  // --- tape-level building blocks (one tape may span many sentences) ---
  ParamVars register_params(ad::Tape& tape) const;
  static std::vector<int> encoder_input(const Sentence& src, const Sentence* context);
  ad::Var encode(ad::Tape& tape, const ParamVars& pv, const std::vector<int>& input_ids) const;
  // Teacher-forced per-step log p(out_ids[j] | out_ids[<j], input); out_ids
  // normally ends with EOS.
  std::vector<ad::Var> score_steps(ad::Tape& tape, const ParamVars& pv, ad::Var enc_states,
                                   const std::vector<int>& out_ids) const;
  // Mean negative log-likelihood of (src, tgt ++ EOS) as a tape node.
  ad::Var build_nll(ad::Tape& tape, const ParamVars& pv, const Sentence& src,
                    const Sentence& tgt, const Sentence* context) const;

  // --- convenience entry points ---
  NllResult nll_loss(const Sentence& src, const Sentence& tgt, const Sentence* context,
                     GradientAccumulator* grads) const;
  // Forward-only total log-prob of (tgt ++ EOS); used for perplexity.
  NllResult sentence_nll(const Sentence& src, const Sentence& tgt,
                         const Sentence* context) const;

  CandidateSet beam_search(const Sentence& src, int beam, const Sentence* context) const;

  // Teacher-forced re-scoring of an explicit token sequence.
  std::vector<double> sequence_logprobs(const Sentence& src,
                                        const std::vector<int>& candidate_tokens,
                                        const Sentence* context) const;

 private:
  ModelConfig config_;
  Params params_;
};

struct GradientAccumulator {
  Params grads;

  explicit GradientAccumulator(const PolicyModel& model);
  void zero();
  // Add the leaf gradients accumulated on the tape (call after backward()).
  void add_from(const ParamVars& pv);
  double squared_norm() const;
};

}  // namespace docrisk
