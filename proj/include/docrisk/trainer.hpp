#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docrisk/checkpoint.hpp"
#include "docrisk/coherence.hpp"
#include "docrisk/corpus.hpp"
#include "docrisk/lexcohesion.hpp"
#include "docrisk/policy.hpp"
#include "docrisk/risk.hpp"

namespace docrisk {

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 10;
  double learning_rate = 0.5;
  std::size_t max_batch_sentences = 15;
  int beam = 2;
  double risk_prob = 1.0;
  std::string rewards = "bleu_doc+lc_doc+coh_doc";
  int context_sents = 0;  // 0 or 1 previous source sentence
  std::size_t anneal_steps = 5;

  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;
  std::size_t vocab_max_size = 2000;
  std::size_t vocab_min_freq = 1;
  std::size_t max_sentence_len = 64;

  std::size_t validate_every = 0;  // in batches; 0 = once per epoch
  std::size_t patience = 2;        // validations without improvement per halving
  double plateau_threshold = 0.001;  // relative perplexity improvement
  double grad_clip = 5.0;

  std::string train_src, train_tgt;
  std::string val_src, val_tgt;  // default to the training files when empty
  std::string relations_path, topics_path, stoplist_path;
  std::string ckpt_dir = "checkpoints";

  void validate() const;
};

struct ValidationRecord {
  std::size_t iteration = 0;
  double bleu_doc = 0.0;  // percentage points
  double lc = 0.0;
  double coh = 0.0;
  double perplexity = 0.0;
  double learning_rate = 0.0;
  std::string checkpoint_path;
};

enum class SelectionMode { perplexity, majority_metrics };

// perplexity: lowest validation perplexity. majority_metrics: most column
// maxima over {BLEU_doc, LC, COH}, ties broken by BLEU_doc, then earliest.
std::size_t select_record(const std::vector<ValidationRecord>& records, SelectionMode mode);

// Simulated-annealing learning-rate schedule: halve on a perplexity plateau
// (no relative improvement over `patience` consecutive validations), at most
// `max_halvings` times; the next plateau after that requests a stop.
class Annealer {
 public:
  enum class Action { keep, halved, stop };

  Annealer(double learning_rate, std::size_t max_halvings, std::size_t patience,
           double min_rel_improvement)
      : lr_(learning_rate),
        max_halvings_(max_halvings),
        patience_(patience),
        min_rel_improvement_(min_rel_improvement) {}

  Action observe(double perplexity);
  double learning_rate() const { return lr_; }
  std::size_t halvings() const { return halvings_; }

 private:
  double lr_;
  std::size_t max_halvings_;
  std::size_t patience_;
  double min_rel_improvement_;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t stale_ = 0;
  std::size_t halvings_ = 0;
};

struct TrainResult {
  std::string best_checkpoint;
  std::vector<ValidationRecord> records;
  std::string log_path;
  std::size_t risk_batches = 0;
  std::size_t nll_batches = 0;
  double final_train_perplexity = 0.0;
};

struct MetricResources {
  RelationDb db;
  TopicTable table;
  StopList stop;
};

MetricResources load_metric_resources(const TrainConfig& config);

// NLL pretraining; per-validation checkpoints, model selection by lowest
// validation perplexity. Annealing is not applied here.
TrainResult pretrain_nll(const TrainConfig& config);

// Mixed Risk/NLL fine-tuning from a pretrained checkpoint, with learning-rate
// annealing on validation-perplexity plateaus and majority-metric selection.
TrainResult finetune_risk(const TrainConfig& config, const std::string& init_checkpoint);

// Decode every sentence of every document; `<<<DOC>>>` boundaries preserved.
void translate_file(const std::string& checkpoint_path, const std::string& src_path,
                    const std::string& out_path, int beam);

struct DocScore {
  std::string doc_id;
  double bleu = 0.0, lc = 0.0, coh = 0.0;  // percentage points
};

struct ScoreReport {
  std::vector<DocScore> docs;
  DocScore corpus;  // micro-averaged, doc_id "ALL"

  std::string to_tsv() const;
  std::string summary() const;
};

ScoreReport score_corpus(const std::string& hyp_path, const std::string& ref_path,
                         const RelationDb& db, const TopicTable& table,
                         const StopList& stop);

// Convert a training-log TSV into the reward-curves CSV
// (iteration,BLEU_doc,LC,COH,perplexity,learning_rate).
void write_reward_curves(const std::string& log_path, const std::string& csv_path);

double corpus_perplexity(const PolicyModel& model,
                         const std::vector<ParallelDocument>& docs, int context_sents);

}  // namespace docrisk
