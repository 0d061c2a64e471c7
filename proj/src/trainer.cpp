#include "docrisk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace docrisk {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (train_src.empty() || train_tgt.empty())
    throw ConfigError("training corpus paths are required");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (max_batch_sentences < 1) throw ConfigError("batch size must be >= 1");
  if (beam < 1) throw ConfigError("beam must be >= 1");
  if (risk_prob < 0.0 || risk_prob > 1.0) throw ConfigError("risk-prob must be in [0,1]");
  if (context_sents != 0 && context_sents != 1)
    throw ConfigError("context-sents must be 0 or 1");
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("model dims must be >= 1");
  if (vocab_max_size < 5) throw ConfigError("vocab size must be >= 5");
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

Annealer::Action Annealer::observe(double perplexity) {
  if (!has_best_ || perplexity < best_ * (1.0 - min_rel_improvement_)) {
    best_ = has_best_ ? std::min(best_, perplexity) : perplexity;
    has_best_ = true;
    stale_ = 0;
    return Action::keep;
  }
  best_ = std::min(best_, perplexity);
  if (++stale_ < patience_) return Action::keep;
  stale_ = 0;
  if (halvings_ >= max_halvings_) return Action::stop;
  ++halvings_;
  lr_ *= 0.5;
  return Action::halved;
}

std::size_t select_record(const std::vector<ValidationRecord>& records, SelectionMode mode) {
  if (records.empty()) throw ConfigError("no validation records to select from");
  if (mode == SelectionMode::perplexity) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
      if (records[i].perplexity < records[best].perplexity) best = i;
    return best;
  }
  double max_bleu = records[0].bleu_doc, max_lc = records[0].lc, max_coh = records[0].coh;
  for (const auto& r : records) {
    max_bleu = std::max(max_bleu, r.bleu_doc);
    max_lc = std::max(max_lc, r.lc);
    max_coh = std::max(max_coh, r.coh);
  }
  auto wins = [&](const ValidationRecord& r) {
    return static_cast<int>(r.bleu_doc >= max_bleu) + static_cast<int>(r.lc >= max_lc) +
           static_cast<int>(r.coh >= max_coh);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const int wi = wins(records[i]), wb = wins(records[best]);
    if (wi > wb || (wi == wb && records[i].bleu_doc > records[best].bleu_doc)) best = i;
  }
  return best;
}

MetricResources load_metric_resources(const TrainConfig& config) {
  MetricResources res;
  if (!config.relations_path.empty()) res.db = load_relation_db(config.relations_path);
  if (!config.topics_path.empty()) res.table = load_topic_table(config.topics_path);
  if (!config.stoplist_path.empty()) res.stop = StopList::load(config.stoplist_path);
  return res;
}

namespace {

std::uint64_t mix64(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

struct Batch {
  Segment segment;
  std::vector<const Sentence*> contexts;  // aligned with segment pairs
};

std::vector<Batch> build_batches(const std::vector<ParallelDocument>& docs,
                                 std::size_t max_sents, int context_sents) {
  std::vector<Batch> batches;
  for (const auto& doc : docs) {
    for (auto& seg : make_segments(doc, max_sents)) {
      Batch batch;
      batch.contexts.resize(seg.sentence_pairs.size(), nullptr);
      if (context_sents == 1) {
        for (std::size_t t = 0; t < seg.sentence_pairs.size(); ++t) {
          const std::size_t pos = seg.origin_doc_offset + t;
          if (pos > 0) batch.contexts[t] = &doc.source.sentences[pos - 1];
        }
      }
      batch.segment = std::move(seg);
      batches.push_back(std::move(batch));
    }
  }
  return batches;
}

double nll_segment_loss(const PolicyModel& model, const Batch& batch,
                        GradientAccumulator* grads) {
  ad::Tape tape(grads != nullptr);
  ParamVars pv = model.register_params(tape);
  std::vector<ad::Var> steps;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < batch.segment.sentence_pairs.size(); ++i) {
    const auto& [src, tgt] = batch.segment.sentence_pairs[i];
    std::vector<int> out_ids = tgt.ids();
    out_ids.push_back(kEosId);
    ad::Var enc = model.encode(tape, pv, PolicyModel::encoder_input(src, batch.contexts[i]));
    auto vars = model.score_steps(tape, pv, enc, out_ids);
    steps.insert(steps.end(), vars.begin(), vars.end());
    tokens += out_ids.size();
  }
  ad::Var loss = ad::scale(ad::sum(steps), -1.0 / static_cast<double>(tokens));
  if (grads) {
    tape.backward(loss);
    grads->add_from(pv);
  }
  return loss.scalar();
}

void sgd_step(PolicyModel& model, const GradientAccumulator& grads, double lr, double clip) {
  double factor = lr;
  if (clip > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > clip) factor = lr * clip / norm;
  }
  std::vector<const ad::Mat*> gs;
  for_each_param(grads.grads, [&gs](const char*, const ad::Mat& m) { gs.push_back(&m); });
  std::size_t i = 0;
  for_each_param(model.params(), [&](const char*, ad::Mat& m) { m -= factor * (*gs[i++]); });
}

const Sentence* doc_context(const ParallelDocument& doc, std::size_t pos, int context_sents) {
  if (context_sents != 1 || pos == 0) return nullptr;
  return &doc.source.sentences[pos - 1];
}

struct CorpusMetrics {
  double bleu_pp = 0.0, lc_pp = 0.0, coh_pp = 0.0;
};

// Micro-averaged corpus metrics over per-document hypothesis blocks.
CorpusMetrics block_metrics(const std::vector<std::vector<Sentence>>& hyp_blocks,
                            const std::vector<std::vector<Sentence>>& ref_blocks,
                            const MetricResources& res, std::vector<DocScore>* per_doc) {
  BleuStats corpus_bleu;
  std::size_t devices = 0, content = 0, pairs = 0;
  double cos_sum = 0.0;
  for (std::size_t d = 0; d < hyp_blocks.size(); ++d) {
    BleuStats doc_bleu;
    std::vector<std::string> hyp_tokens, ref_tokens;
    for (const auto& s : hyp_blocks[d])
      for (const auto& t : s.tokens) hyp_tokens.push_back(t.surface);
    for (const auto& s : ref_blocks[d])
      for (const auto& t : s.tokens) ref_tokens.push_back(t.surface);
    doc_bleu.add(hyp_tokens, ref_tokens);
    corpus_bleu += doc_bleu;

    LcScore lc = lexical_cohesion(hyp_blocks[d], res.db, res.stop);
    CohScore coh = coherence(hyp_blocks[d], res.table);
    devices += lc.devices;
    content += lc.content_tokens;
    pairs += coh.pairs;
    cos_sum += coh.value * static_cast<double>(coh.pairs);
    if (per_doc)
      per_doc->push_back(DocScore{"doc" + std::to_string(d), 100.0 * doc_bleu.score().value,
                                  100.0 * lc.value, 100.0 * coh.value});
  }
  CorpusMetrics out;
  out.bleu_pp = 100.0 * corpus_bleu.score().value;
  out.lc_pp = 100.0 * static_cast<double>(devices) /
              static_cast<double>(std::max<std::size_t>(content, 1));
  out.coh_pp = pairs == 0 ? 0.0 : 100.0 * cos_sum / static_cast<double>(pairs);
  return out;
}

std::vector<Sentence> decode_document(const PolicyModel& model, const Vocabulary& tgt_vocab,
                                      const ParallelDocument& doc, int beam,
                                      int context_sents) {
  std::vector<Sentence> hyp;
  hyp.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    CandidateSet set = model.beam_search(doc.source.sentences[i], beam,
                                         doc_context(doc, i, context_sents));
    hyp.push_back(candidate_sentence(set.candidates.front(), tgt_vocab, static_cast<int>(i)));
  }
  return hyp;
}

void write_log(const std::string& path, const std::vector<ValidationRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log: " + path);
  out << "iteration\tbleu_doc\tlc\tcoh\tperplexity\tlearning_rate\tcheckpoint\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t", r.iteration,
                  r.bleu_doc, r.lc, r.coh, r.perplexity, r.learning_rate);
    out << buf << r.checkpoint_path << "\n";
  }
}

struct LoopSpec {
  bool allow_risk = false;
  SelectionMode selection = SelectionMode::perplexity;
  bool annealing = false;
  std::size_t epoch_base = 0;
  std::string prefix = "pretrain";
};

TrainResult run_training(const TrainConfig& cfg, PolicyModel model,
                         const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                         const std::vector<ParallelDocument>& train_docs,
                         const std::vector<ParallelDocument>& val_docs,
                         const MetricResources& res, const LoopSpec& loop) {
  fs::create_directories(cfg.ckpt_dir);
  auto batches = build_batches(train_docs, cfg.max_batch_sentences, cfg.context_sents);
  if (batches.empty()) throw ConfigError("training corpus produced no batches");

  RewardSpec spec;
  if (loop.allow_risk) spec = RewardSpec::parse(cfg.rewards);
  MixSchedule schedule(cfg.risk_prob, mix64(cfg.seed, 0x7269736bull));

  Annealer annealer(cfg.learning_rate, cfg.anneal_steps, cfg.patience, cfg.plateau_threshold);
  double lr = cfg.learning_rate;

  TrainResult result;
  std::size_t iteration = 0;
  bool stop = false;

  auto validate = [&](std::size_t epochs_done) {
    double nll_total = 0.0;
    std::size_t tokens = 0;
    std::vector<std::vector<Sentence>> hyp_blocks, ref_blocks;
    for (const auto& doc : val_docs) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        NllResult r = model.sentence_nll(doc.source.sentences[i], doc.target.sentences[i],
                                         doc_context(doc, i, cfg.context_sents));
        nll_total += r.loss * static_cast<double>(r.tokens);
        tokens += r.tokens;
      }
      hyp_blocks.push_back(decode_document(model, tgt_vocab, doc, cfg.beam, cfg.context_sents));
      ref_blocks.push_back(doc.target.sentences);
    }
    const double ppl = std::exp(nll_total / static_cast<double>(std::max<std::size_t>(tokens, 1)));
    CorpusMetrics metrics = block_metrics(hyp_blocks, ref_blocks, res, nullptr);

    ValidationRecord record;
    record.iteration = iteration;
    record.bleu_doc = metrics.bleu_pp;
    record.lc = metrics.lc_pp;
    record.coh = metrics.coh_pp;
    record.perplexity = ppl;
    record.learning_rate = lr;
    record.checkpoint_path =
        (fs::path(cfg.ckpt_dir) / (loop.prefix + "_iter" + std::to_string(iteration) + ".ckpt"))
            .string();
    char lr_buf[64];
    std::snprintf(lr_buf, sizeof(lr_buf), "%.17g", lr);
    save_checkpoint(record.checkpoint_path, model, src_vocab, tgt_vocab,
                    {{"phase", loop.prefix},
                     {"epochs_completed", std::to_string(epochs_done)},
                     {"iteration", std::to_string(iteration)},
                     {"context_sents", std::to_string(cfg.context_sents)},
                     {"seed", std::to_string(cfg.seed)},
                     {"learning_rate", lr_buf}});
    result.records.push_back(record);
    std::cerr << "[" << loop.prefix << "] iter " << iteration << " ppl " << ppl << " BLEU_doc "
              << record.bleu_doc << " LC " << record.lc << " COH " << record.coh << " lr " << lr
              << "\n";

    if (loop.annealing) {
      switch (annealer.observe(ppl)) {
        case Annealer::Action::halved:
          lr = annealer.learning_rate();
          std::cerr << "[" << loop.prefix << "] plateau: learning rate halved to " << lr << "\n";
          break;
        case Annealer::Action::stop:
          std::cerr << "[" << loop.prefix << "] plateau after " << annealer.halvings()
                    << " halvings: stopping\n";
          stop = true;
          break;
        case Annealer::Action::keep:
          break;
      }
    }
  };

  std::vector<std::size_t> order(batches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    const std::size_t global_epoch = loop.epoch_base + epoch;
    std::mt19937_64 shuffle_rng(mix64(cfg.seed, global_epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t idx : order) {
      const Batch& batch = batches[idx];
      const Objective objective =
          loop.allow_risk ? next_objective(schedule) : Objective::nll;
      GradientAccumulator grads(model);
      if (objective == Objective::risk) {
        RiskLossOptions options;
        options.contexts = &batch.contexts;
        risk_loss(model, tgt_vocab, batch.segment, spec, cfg.beam, res.db, res.table, res.stop,
                  &grads, options);
        ++result.risk_batches;
      } else {
        nll_segment_loss(model, batch, &grads);
        ++result.nll_batches;
      }
      sgd_step(model, grads, lr, cfg.grad_clip);
      ++iteration;
      if (cfg.validate_every > 0 && iteration % cfg.validate_every == 0) {
        validate(global_epoch);
        if (stop) break;
      }
    }
    if (cfg.validate_every == 0 && !stop) validate(global_epoch + 1);
  }
  if (result.records.empty()) validate(loop.epoch_base + cfg.epochs);

  result.log_path = (fs::path(cfg.ckpt_dir) / (loop.prefix + "_log.tsv")).string();
  write_log(result.log_path, result.records);

  const std::size_t best = select_record(result.records, loop.selection);
  result.best_checkpoint = (fs::path(cfg.ckpt_dir) / (loop.prefix + "_best.ckpt")).string();
  fs::copy_file(result.records[best].checkpoint_path, result.best_checkpoint,
                fs::copy_options::overwrite_existing);
  result.final_train_perplexity = corpus_perplexity(model, train_docs, cfg.context_sents);
  return result;
}

std::vector<const Document*> source_side(const std::vector<ParallelDocument>& docs) {
  std::vector<const Document*> out;
  for (const auto& d : docs) out.push_back(&d.source);
  return out;
}

std::vector<const Document*> target_side(const std::vector<ParallelDocument>& docs) {
  std::vector<const Document*> out;
  for (const auto& d : docs) out.push_back(&d.target);
  return out;
}

void apply_vocabs(std::vector<ParallelDocument>& docs, const Vocabulary& src,
                  const Vocabulary& tgt) {
  for (auto& d : docs) {
    apply_vocab(d.source, src);
    apply_vocab(d.target, tgt);
  }
}

struct LoadedCorpus {
  std::vector<ParallelDocument> train;
  std::vector<ParallelDocument> val;
};

LoadedCorpus load_training_corpus(const TrainConfig& cfg) {
  CorpusOptions options;
  options.max_sentence_len = cfg.max_sentence_len;
  LoadedCorpus corpus;
  corpus.train = load_corpus(cfg.train_src, cfg.train_tgt, options);
  if (cfg.val_src.empty() != cfg.val_tgt.empty())
    throw ConfigError("validation corpus needs both --val-src and --val-tgt");
  corpus.val = cfg.val_src.empty() ? corpus.train : load_corpus(cfg.val_src, cfg.val_tgt, options);
  return corpus;
}

}  // namespace

double corpus_perplexity(const PolicyModel& model,
                         const std::vector<ParallelDocument>& docs, int context_sents) {
  double nll_total = 0.0;
  std::size_t tokens = 0;
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      NllResult r = model.sentence_nll(doc.source.sentences[i], doc.target.sentences[i],
                                       doc_context(doc, i, context_sents));
      nll_total += r.loss * static_cast<double>(r.tokens);
      tokens += r.tokens;
    }
  }
  return std::exp(nll_total / static_cast<double>(std::max<std::size_t>(tokens, 1)));
}

TrainResult pretrain_nll(const TrainConfig& cfg) {
  cfg.validate();
  LoadedCorpus corpus = load_training_corpus(cfg);
  Vocabulary src_vocab =
      Vocabulary::build(source_side(corpus.train), cfg.vocab_max_size, cfg.vocab_min_freq);
  Vocabulary tgt_vocab =
      Vocabulary::build(target_side(corpus.train), cfg.vocab_max_size, cfg.vocab_min_freq);
  apply_vocabs(corpus.train, src_vocab, tgt_vocab);
  apply_vocabs(corpus.val, src_vocab, tgt_vocab);

  ModelConfig mc;
  mc.src_vocab_size = src_vocab.size();
  mc.tgt_vocab_size = tgt_vocab.size();
  mc.embed_dim = cfg.embed_dim;
  mc.hidden_dim = cfg.hidden_dim;
  PolicyModel model = PolicyModel::init(mc, cfg.seed);

  MetricResources res = load_metric_resources(cfg);
  LoopSpec loop;
  loop.allow_risk = false;
  loop.selection = SelectionMode::perplexity;
  loop.annealing = false;
  loop.prefix = "pretrain";
  return run_training(cfg, std::move(model), src_vocab, tgt_vocab, corpus.train, corpus.val, res,
                      loop);
}

TrainResult finetune_risk(const TrainConfig& cfg, const std::string& init_checkpoint) {
  cfg.validate();
  RewardSpec::parse(cfg.rewards);  // fail fast on a bad spec
  Checkpoint ckpt = load_checkpoint(init_checkpoint);
  LoadedCorpus corpus = load_training_corpus(cfg);
  Vocabulary src_vocab =
      Vocabulary::build(source_side(corpus.train), cfg.vocab_max_size, cfg.vocab_min_freq);
  Vocabulary tgt_vocab =
      Vocabulary::build(target_side(corpus.train), cfg.vocab_max_size, cfg.vocab_min_freq);
  if (src_vocab.hash() != ckpt.src_vocab.hash() || tgt_vocab.hash() != ckpt.tgt_vocab.hash())
    throw VocabMismatchError("checkpoint vocabulary does not match the training corpus");
  apply_vocabs(corpus.train, ckpt.src_vocab, ckpt.tgt_vocab);
  apply_vocabs(corpus.val, ckpt.src_vocab, ckpt.tgt_vocab);

  std::size_t epoch_base = 0;
  if (auto it = ckpt.metadata.find("epochs_completed"); it != ckpt.metadata.end())
    epoch_base = static_cast<std::size_t>(std::stoull(it->second));

  MetricResources res = load_metric_resources(cfg);
  LoopSpec loop;
  loop.allow_risk = true;
  loop.selection = SelectionMode::majority_metrics;
  loop.annealing = cfg.anneal_steps > 0;
  loop.epoch_base = epoch_base;
  loop.prefix = "risk";
  return run_training(cfg, ckpt.model(), ckpt.src_vocab, ckpt.tgt_vocab, corpus.train,
                      corpus.val, res, loop);
}

void translate_file(const std::string& checkpoint_path, const std::string& src_path,
                    const std::string& out_path, int beam) {
  if (beam < 1) throw ConfigError("beam must be >= 1");
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  PolicyModel model = ckpt.model();
  int context_sents = 0;
  if (auto it = ckpt.metadata.find("context_sents"); it != ckpt.metadata.end())
    context_sents = std::stoi(it->second);

  auto docs = load_documents(src_path, Side::source);
  for (auto& doc : docs) apply_vocab(doc, ckpt.src_vocab);

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write translation: " + out_path);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) out << kDocSeparator << "\n";
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const Sentence* ctx =
          (context_sents == 1 && i > 0) ? &docs[d].sentences[i - 1] : nullptr;
      CandidateSet set = model.beam_search(docs[d].sentences[i], beam, ctx);
      out << candidate_sentence(set.candidates.front(), ckpt.tgt_vocab, static_cast<int>(i))
                 .detokenized()
          << "\n";
    }
  }
}

std::string ScoreReport::to_tsv() const {
  std::ostringstream out;
  out << "doc_id\tbleu_doc\tlc\tcoh\n";
  char buf[128];
  auto row = [&](const DocScore& s) {
    std::snprintf(buf, sizeof(buf), "%s\t%.2f\t%.2f\t%.2f\n", s.doc_id.c_str(), s.bleu, s.lc,
                  s.coh);
    out << buf;
  };
  for (const auto& d : docs) row(d);
  row(corpus);
  return out.str();
}

std::string ScoreReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu documents | BLEU_doc %.2f | LC %.2f | COH %.2f (percentage points)",
                docs.size(), corpus.bleu, corpus.lc, corpus.coh);
  return buf;
}

ScoreReport score_corpus(const std::string& hyp_path, const std::string& ref_path,
                         const RelationDb& db, const TopicTable& table,
                         const StopList& stop) {
  auto hyp_docs = load_documents(hyp_path, Side::target);
  auto ref_docs = load_documents(ref_path, Side::target);
  if (hyp_docs.size() != ref_docs.size())
    throw AlignmentError("score: document counts differ (" + std::to_string(hyp_docs.size()) +
                         " vs " + std::to_string(ref_docs.size()) + ")");
  std::vector<std::vector<Sentence>> hyp_blocks, ref_blocks;
  for (auto& d : hyp_docs) hyp_blocks.push_back(std::move(d.sentences));
  for (auto& d : ref_docs) ref_blocks.push_back(std::move(d.sentences));

  MetricResources res;
  res.db = db;
  res.table = table;
  res.stop = stop;
  ScoreReport report;
  CorpusMetrics metrics = block_metrics(hyp_blocks, ref_blocks, res, &report.docs);
  report.corpus = DocScore{"ALL", metrics.bleu_pp, metrics.lc_pp, metrics.coh_pp};
  return report;
}

void write_reward_curves(const std::string& log_path, const std::string& csv_path) {
  std::ifstream in(log_path);
  if (!in) throw IoError("cannot open training log: " + log_path);
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot write curves: " + csv_path);
  out << "iteration,BLEU_doc,LC,COH,perplexity,learning_rate\n";
  std::string line;
  if (!std::getline(in, line)) throw ParseError(log_path + ": empty log");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 6)
      throw ParseError(log_path + ":" + std::to_string(line_no) + ": malformed log row");
    for (std::size_t i = 1; i < 6; ++i) {
      const double v = std::stod(fields[i]);
      if (!std::isfinite(v))
        throw ParseError(log_path + ":" + std::to_string(line_no) + ": non-finite value");
    }
    out << fields[0];
    for (std::size_t i = 1; i < 6; ++i) out << ',' << fields[i];
    out << "\n";
  }
}

}  // namespace docrisk
