#include <CLI11.hpp>
#include <iostream>

#include "docrisk/synthetic.hpp"
#include "docrisk/trainer.hpp"

namespace {

using docrisk::TrainConfig;

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
  cmd->set_config("--config", "", "flat key=value config file; command-line flags override it");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--lr", cfg.learning_rate, "learning rate");
  cmd->add_option("--batch-sents", cfg.max_batch_sentences, "max sentences per batch/segment");
  cmd->add_option("--beam", cfg.beam, "beam size for candidate generation");
  cmd->add_option("--risk-prob", cfg.risk_prob, "probability of picking the Risk loss per batch");
  cmd->add_option("--rewards", cfg.rewards, "reward spec, e.g. bleu_doc+lc_doc+coh_doc");
  cmd->add_option("--context-sents", cfg.context_sents,
                  "previous source sentences concatenated as context (0 or 1)");
  cmd->add_option("--anneal-steps", cfg.anneal_steps, "max learning-rate halvings (0 disables)");
  cmd->add_option("--relations", cfg.relations_path, "lexical relation db (TSV)");
  cmd->add_option("--topics", cfg.topics_path, "topic vector table (word2vec text)");
  cmd->add_option("--stoplist", cfg.stoplist_path, "stopword list, one word per line");
  cmd->add_option("--ckpt-dir", cfg.ckpt_dir, "checkpoint/log output directory");
  cmd->add_option("--train-src", cfg.train_src, "training source corpus");
  cmd->add_option("--train-tgt", cfg.train_tgt, "training target corpus");
  cmd->add_option("--val-src", cfg.val_src, "validation source corpus (default: training)");
  cmd->add_option("--val-tgt", cfg.val_tgt, "validation target corpus (default: training)");
  cmd->add_option("--embed-dim", cfg.embed_dim, "embedding dimension");
  cmd->add_option("--hidden-dim", cfg.hidden_dim, "hidden dimension");
  cmd->add_option("--vocab-size", cfg.vocab_max_size, "max vocabulary size (incl. reserved)");
  cmd->add_option("--min-freq", cfg.vocab_min_freq, "min token frequency for the vocabulary");
  cmd->add_option("--max-len", cfg.max_sentence_len, "max sentence length before truncation");
  cmd->add_option("--validate-every", cfg.validate_every,
                  "validate every N batches (0: once per epoch)");
  cmd->add_option("--patience", cfg.patience, "stale validations per annealing step");
  cmd->add_option("--grad-clip", cfg.grad_clip, "gradient norm clip (0 disables)");
}

void report_result(const docrisk::TrainResult& result) {
  std::cout << "best checkpoint: " << result.best_checkpoint << "\n"
            << "training log:    " << result.log_path << "\n"
            << "batches:         " << result.nll_batches << " NLL, " << result.risk_batches
            << " Risk\n"
            << "train perplexity " << result.final_train_perplexity << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"document-level NMT training with discourse rewards (LC, COH, BLEU)"};
  app.require_subcommand(1);

  TrainConfig pre_cfg;
  auto* pretrain = app.add_subcommand("pretrain", "NLL pretraining of the translation policy");
  add_train_options(pretrain, pre_cfg);

  TrainConfig risk_cfg;
  std::string init_ckpt;
  auto* finetune = app.add_subcommand("finetune-risk",
                                      "expected-risk fine-tuning with discourse rewards");
  add_train_options(finetune, risk_cfg);
  finetune->add_option("--init", init_ckpt, "pretrained checkpoint to start from")->required();

  std::string tr_ckpt, tr_src, tr_out;
  int tr_beam = 2;
  auto* translate = app.add_subcommand("translate", "decode a source corpus file");
  translate->add_option("--ckpt", tr_ckpt, "model checkpoint")->required();
  translate->add_option("--src", tr_src, "source corpus")->required();
  translate->add_option("--out", tr_out, "output file")->required();
  translate->add_option("--beam", tr_beam, "beam size");

  std::string sc_hyp, sc_ref, sc_rel, sc_top, sc_stop, sc_out;
  auto* score = app.add_subcommand("score", "BLEU_doc/LC/COH report for a translated corpus");
  score->add_option("--hyp", sc_hyp, "hypothesis corpus")->required();
  score->add_option("--ref", sc_ref, "reference corpus")->required();
  score->add_option("--relations", sc_rel, "lexical relation db (TSV)");
  score->add_option("--topics", sc_top, "topic vector table");
  score->add_option("--stoplist", sc_stop, "stopword list");
  score->add_option("--out", sc_out, "TSV report path (default: stdout)");

  docrisk::SyntheticConfig gen_cfg;
  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus");
  gen->add_option("--kind", gen_cfg.kind, "copy or cohesion");
  gen->add_option("--docs", gen_cfg.train_docs, "training documents");
  gen->add_option("--val-docs", gen_cfg.val_docs, "validation documents");
  gen->add_option("--doc-sents", gen_cfg.doc_sents, "sentences per document");
  gen->add_option("--sent-len", gen_cfg.sent_len, "tokens per sentence");
  gen->add_option("--vocab-words", gen_cfg.vocab_words, "copy-task word inventory");
  gen->add_option("--seed", gen_cfg.seed, "random seed");
  gen->add_option("--out-dir", gen_cfg.out_dir, "output directory");

  std::string rc_log, rc_out = "reward_curves.csv";
  auto* curves = app.add_subcommand("reward-curves", "export training-log metrics as CSV");
  curves->add_option("--log", rc_log, "training log TSV")->required();
  curves->add_option("--out", rc_out, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pretrain->parsed()) {
      report_result(docrisk::pretrain_nll(pre_cfg));
    } else if (finetune->parsed()) {
      report_result(docrisk::finetune_risk(risk_cfg, init_ckpt));
    } else if (translate->parsed()) {
      docrisk::translate_file(tr_ckpt, tr_src, tr_out, tr_beam);
      std::cout << "wrote " << tr_out << "\n";
    } else if (score->parsed()) {
      docrisk::RelationDb db;
      docrisk::TopicTable table;
      docrisk::StopList stop;
      if (!sc_rel.empty()) db = docrisk::load_relation_db(sc_rel);
      if (!sc_top.empty()) table = docrisk::load_topic_table(sc_top);
      if (!sc_stop.empty()) stop = docrisk::StopList::load(sc_stop);
      docrisk::ScoreReport report = docrisk::score_corpus(sc_hyp, sc_ref, db, table, stop);
      std::cout << report.summary() << "\n";
      if (sc_out.empty()) {
        std::cout << report.to_tsv();
      } else {
        std::ofstream out(sc_out);
        if (!out) throw docrisk::IoError("cannot write report: " + sc_out);
        out << report.to_tsv();
        std::cout << "wrote " << sc_out << "\n";
      }
    } else if (gen->parsed()) {
      docrisk::SyntheticPaths paths = docrisk::gen_synthetic(gen_cfg);
      std::cout << "wrote " << paths.train_src << " " << paths.train_tgt << " " << paths.val_src
                << " " << paths.val_tgt;
      if (!paths.relations.empty())
        std::cout << " " << paths.relations << " " << paths.topics << " " << paths.stoplist;
      std::cout << "\n";
    } else if (curves->parsed()) {
      docrisk::write_reward_curves(rc_log, rc_out);
      std::cout << "wrote " << rc_out << "\n";
    }
  } catch (const docrisk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
