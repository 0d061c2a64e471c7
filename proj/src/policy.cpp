#include "docrisk/policy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <set>

namespace docrisk {

using ad::Mat;
using ad::Tape;
using ad::Var;

void ModelConfig::validate() const {
  if (src_vocab_size < static_cast<std::size_t>(kNumReserved) ||
      tgt_vocab_size < static_cast<std::size_t>(kNumReserved))
    throw ConfigError("model: vocabulary sizes must cover the reserved tokens");
  if (embed_dim < 1 || hidden_dim < 1)
    throw ConfigError("model: embed_dim and hidden_dim must be >= 1");
}

double Candidate::total_logprob() const {
  double t = 0.0;
  for (double lp : step_logprobs) t += lp;
  return t;
}

double Candidate::mean_logprob() const {
  return step_logprobs.empty() ? 0.0
                               : total_logprob() / static_cast<double>(step_logprobs.size());
}

PolicyModel::PolicyModel(ModelConfig config, Params params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
}

namespace {

void shape_params(const ModelConfig& c, Params& p) {
  const auto V_s = static_cast<Eigen::Index>(c.src_vocab_size);
  const auto V_t = static_cast<Eigen::Index>(c.tgt_vocab_size);
  const auto E = static_cast<Eigen::Index>(c.embed_dim);
  const auto H = static_cast<Eigen::Index>(c.hidden_dim);
  p.src_embed = Mat::Zero(V_s, E);
  p.tgt_embed = Mat::Zero(V_t, E);
  p.enc_wh = Mat::Zero(H, H);
  p.enc_wx = Mat::Zero(H, E);
  p.enc_b = Mat::Zero(H, 1);
  p.dec_wh = Mat::Zero(H, H);
  p.dec_wy = Mat::Zero(H, E);
  p.dec_b = Mat::Zero(H, 1);
  p.cmb_w = Mat::Zero(H, 2 * H);
  p.cmb_b = Mat::Zero(H, 1);
  p.out_w = Mat::Zero(V_t, H);
  p.out_b = Mat::Zero(V_t, 1);
}

}  // namespace

PolicyModel PolicyModel::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Params params;
  shape_params(config, params);
  std::mt19937_64 rng(seed);
  for_each_param(params, [&rng](const char* name, Mat& m) {
    (void)name;
    if (m.cols() == 1) return;  // biases stay zero
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  });
  return PolicyModel(config, std::move(params));
}

Var ParamVars::get(const std::string& name) const {
  for (const auto& [n, v] : vars)
    if (n == name) return v;
  throw ConfigError("unknown parameter name: " + name);
}

ParamVars PolicyModel::register_params(Tape& tape) const {
  ParamVars pv;
  for_each_param(params_, [&](const char* name, const Mat& m) {
    pv.vars.emplace_back(name, tape.leaf(m));
  });
  return pv;
}

std::vector<int> PolicyModel::encoder_input(const Sentence& src, const Sentence* context) {
  std::vector<int> ids;
  if (context != nullptr) {
    for (const auto& tok : context->tokens) ids.push_back(tok.id);
    ids.push_back(kEosId);  // separator between context and current sentence
  }
  for (const auto& tok : src.tokens) ids.push_back(tok.id);
  return ids;
}

namespace {

struct StepVars {
  Var w_eh, w_ex, b_e, w_dh, w_dy, b_d, w_c, b_c, w_out, b_out, src_embed, tgt_embed;
};

StepVars unpack(const ParamVars& pv) {
  StepVars s;
  s.src_embed = pv.get("src_embed");
  s.tgt_embed = pv.get("tgt_embed");
  s.w_eh = pv.get("enc_wh");
  s.w_ex = pv.get("enc_wx");
  s.b_e = pv.get("enc_b");
  s.w_dh = pv.get("dec_wh");
  s.w_dy = pv.get("dec_wy");
  s.b_d = pv.get("dec_b");
  s.w_c = pv.get("cmb_w");
  s.b_c = pv.get("cmb_b");
  s.w_out = pv.get("out_w");
  s.b_out = pv.get("out_b");
  return s;
}

// One decoder step shared by teacher-forced scoring and beam search.
// Returns the log distribution over the target vocabulary and the new state.
std::pair<Var, Var> decode_step(const StepVars& sv, Var enc_states, Var state,
                                int prev_id) {
  Var e = ad::row_of(sv.tgt_embed, prev_id);
  Var s = ad::tanh(ad::matmul(sv.w_dh, state) + ad::matmul(sv.w_dy, e) + sv.b_d);
  Var scores = ad::matmul_tn(enc_states, s);
  Var attention = ad::softmax(scores);
  Var ctx = ad::matmul(enc_states, attention);
  Var combined = ad::tanh(ad::matmul(sv.w_c, ad::concat_rows(s, ctx)) + sv.b_c);
  Var logits = ad::matmul(sv.w_out, combined) + sv.b_out;
  return {ad::log_softmax(logits), s};
}

}  // namespace

Var PolicyModel::encode(Tape& tape, const ParamVars& pv,
                        const std::vector<int>& input_ids) const {
  assert(!input_ids.empty());
  StepVars sv = unpack(pv);
  Var h = tape.leaf(Mat::Zero(static_cast<Eigen::Index>(config_.hidden_dim), 1));
  std::vector<Var> states;
  states.reserve(input_ids.size());
  for (int id : input_ids) {
    Var x = ad::row_of(sv.src_embed, id);
    h = ad::tanh(ad::matmul(sv.w_eh, h) + ad::matmul(sv.w_ex, x) + sv.b_e);
    states.push_back(h);
  }
  return ad::concat_cols(states);
}

std::vector<Var> PolicyModel::score_steps(Tape& tape, const ParamVars& pv, Var enc_states,
                                          const std::vector<int>& out_ids) const {
  assert(enc_states.tape() == &tape);
  (void)tape;
  StepVars sv = unpack(pv);
  Var state = ad::col_of(enc_states, static_cast<int>(enc_states.value().cols()) - 1);
  std::vector<Var> logprobs;
  logprobs.reserve(out_ids.size());
  int prev = kBosId;
  for (int id : out_ids) {
    auto [logp, s] = decode_step(sv, enc_states, state, prev);
    logprobs.push_back(ad::pick(logp, id));
    state = s;
    prev = id;
  }
  return logprobs;
}

Var PolicyModel::build_nll(Tape& tape, const ParamVars& pv, const Sentence& src,
                           const Sentence& tgt, const Sentence* context) const {
  if (tgt.tokens.empty()) throw EmptySentenceError("nll: empty target sentence");
  std::vector<int> out_ids = tgt.ids();
  out_ids.push_back(kEosId);  // the model must learn to terminate
  Var enc = encode(tape, pv, encoder_input(src, context));
  auto logprobs = score_steps(tape, pv, enc, out_ids);
  return ad::scale(ad::sum(logprobs), -1.0 / static_cast<double>(out_ids.size()));
}

NllResult PolicyModel::nll_loss(const Sentence& src, const Sentence& tgt,
                                const Sentence* context, GradientAccumulator* grads) const {
  Tape tape(grads != nullptr);
  ParamVars pv = register_params(tape);
  Var loss = build_nll(tape, pv, src, tgt, context);
  NllResult result;
  result.loss = loss.scalar();
  result.tokens = tgt.tokens.size() + 1;
  if (grads) {
    tape.backward(loss);
    grads->add_from(pv);
  }
  return result;
}

NllResult PolicyModel::sentence_nll(const Sentence& src, const Sentence& tgt,
                                    const Sentence* context) const {
  return nll_loss(src, tgt, context, nullptr);
}

CandidateSet PolicyModel::beam_search(const Sentence& src, int beam,
                                      const Sentence* context) const {
  if (beam < 1) throw ConfigError("beam_search: beam must be >= 1");
  Tape tape(false);
  ParamVars pv = register_params(tape);
  StepVars sv = unpack(pv);
  Var enc = encode(tape, pv, encoder_input(src, context));
  const std::size_t max_len = max_decode_len(src.tokens.size());
  const int vocab = static_cast<int>(config_.tgt_vocab_size);

  struct Hyp {
    Var state;
    std::vector<int> tokens;
    std::vector<double> logps;
    double total = 0.0;
  };
  struct Expansion {
    double mean;
    std::size_t hyp;
    int token;
    double logp;
  };

  std::vector<Hyp> live;
  live.push_back(Hyp{ad::col_of(enc, static_cast<int>(enc.value().cols()) - 1), {}, {}, 0.0});
  std::vector<Candidate> pool;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Expansion> expansions;
    std::vector<Var> next_states(live.size());
    for (std::size_t hi = 0; hi < live.size(); ++hi) {
      const Hyp& hyp = live[hi];
      const int prev = hyp.tokens.empty() ? kBosId : hyp.tokens.back();
      auto [logp, s] = decode_step(sv, enc, hyp.state, prev);
      next_states[hi] = s;
      const Mat& lp = logp.value();
      const double len = static_cast<double>(hyp.tokens.size() + 1);
      for (int tok = 0; tok < vocab; ++tok) {
        if (tok == kPadId || tok == kBosId) continue;  // never generated
        expansions.push_back(Expansion{(hyp.total + lp(tok, 0)) / len, hi, tok, lp(tok, 0)});
      }
    }
    std::stable_sort(expansions.begin(), expansions.end(),
                     [](const Expansion& a, const Expansion& b) {
                       if (a.mean != b.mean) return a.mean > b.mean;
                       if (a.hyp != b.hyp) return a.hyp < b.hyp;
                       return a.token < b.token;
                     });
    std::vector<Hyp> next_live;
    const std::size_t keep = std::min<std::size_t>(expansions.size(), static_cast<std::size_t>(beam));
    for (std::size_t e = 0; e < keep; ++e) {
      const Expansion& ex = expansions[e];
      const Hyp& parent = live[ex.hyp];
      std::vector<int> tokens = parent.tokens;
      std::vector<double> logps = parent.logps;
      tokens.push_back(ex.token);
      logps.push_back(ex.logp);
      if (ex.token == kEosId) {
        pool.push_back(Candidate{std::move(tokens), std::move(logps)});
      } else {
        next_live.push_back(
            Hyp{next_states[ex.hyp], std::move(tokens), std::move(logps), parent.total + ex.logp});
      }
    }
    live = std::move(next_live);
  }
  // Hypotheses still alive at the length limit become truncated candidates.
  for (auto& hyp : live) pool.push_back(Candidate{std::move(hyp.tokens), std::move(hyp.logps)});

  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    const double ma = a.mean_logprob(), mb = b.mean_logprob();
    if (ma != mb) return ma > mb;
    return a.tokens < b.tokens;
  });
  CandidateSet out;
  std::set<std::vector<int>> seen;
  for (auto& cand : pool) {
    if (static_cast<int>(out.candidates.size()) >= beam) break;
    if (!seen.insert(cand.tokens).second) continue;
    out.candidates.push_back(std::move(cand));
  }
  return out;
}

std::vector<double> PolicyModel::sequence_logprobs(const Sentence& src,
                                                   const std::vector<int>& candidate_tokens,
                                                   const Sentence* context) const {
  Tape tape(false);
  ParamVars pv = register_params(tape);
  Var enc = encode(tape, pv, encoder_input(src, context));
  auto vars = score_steps(tape, pv, enc, candidate_tokens);
  std::vector<double> out;
  out.reserve(vars.size());
  for (const auto& v : vars) out.push_back(v.scalar());
  return out;
}

GradientAccumulator::GradientAccumulator(const PolicyModel& model) {
  shape_params(model.config(), grads);
}

void GradientAccumulator::zero() {
  for_each_param(grads, [](const char* name, Mat& m) {
    (void)name;
    m.setZero();
  });
}

void GradientAccumulator::add_from(const ParamVars& pv) {
  std::size_t i = 0;
  for_each_param(grads, [&](const char* name, Mat& m) {
    assert(pv.vars[i].first == name);
    (void)name;
    const Mat& g = pv.vars[i].second.grad();
    if (g.size() != 0) m += g;
    ++i;
  });
}

double GradientAccumulator::squared_norm() const {
  double total = 0.0;
  for_each_param(grads, [&](const char* name, const Mat& m) {
    (void)name;
    total += m.squaredNorm();
  });
  return total;
}

}  // namespace docrisk
