#include "docrisk/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "docrisk/corpus.hpp"
#include "docrisk/errors.hpp"

namespace docrisk {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path);
  return out;
}

std::string two_digits(std::size_t i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

void write_copy_side(std::ofstream& out, const std::vector<std::vector<std::string>>& docs) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) out << kDocSeparator << "\n";
    for (const auto& line : docs[d]) out << line << "\n";
  }
}

SyntheticPaths gen_copy(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < cfg.vocab_words; ++i) words.push_back("w" + two_digits(i));
  std::uniform_int_distribution<std::size_t> word_dist(0, words.size() - 1);
  const std::size_t min_len = std::min<std::size_t>(3, cfg.sent_len);
  std::uniform_int_distribution<std::size_t> len_dist(min_len, cfg.sent_len);

  auto gen_docs = [&](std::size_t count) {
    std::vector<std::vector<std::string>> docs(count);
    for (auto& doc : docs) {
      for (std::size_t s = 0; s < cfg.doc_sents; ++s) {
        std::string line;
        const std::size_t len = len_dist(rng);
        for (std::size_t t = 0; t < len; ++t) {
          if (t > 0) line += ' ';
          line += words[word_dist(rng)];
        }
        doc.push_back(line);
      }
    }
    return docs;
  };

  SyntheticPaths paths;
  paths.train_src = (fs::path(cfg.out_dir) / "train.src").string();
  paths.train_tgt = (fs::path(cfg.out_dir) / "train.tgt").string();
  paths.val_src = (fs::path(cfg.out_dir) / "val.src").string();
  paths.val_tgt = (fs::path(cfg.out_dir) / "val.tgt").string();

  auto train = gen_docs(cfg.train_docs);
  auto val = gen_docs(cfg.val_docs);
  {
    auto s = open_out(paths.train_src);
    write_copy_side(s, train);
    auto t = open_out(paths.train_tgt);
    write_copy_side(t, train);
    auto vs = open_out(paths.val_src);
    write_copy_side(vs, val);
    auto vt = open_out(paths.val_tgt);
    write_copy_side(vt, val);
  }
  return paths;
}

// Cohesion corpus inventory.
constexpr std::size_t kTopics = 4;
constexpr std::size_t kMarkersPerTopic = 3;
constexpr std::size_t kFillers = 10;
constexpr std::size_t kDistractors = 4;
constexpr std::size_t kTopicDim = 8;
constexpr double kVariantProb = 0.45;  // a and b each; remainder -> distractor

std::string src_marker(std::size_t topic, std::size_t m) {
  return "sm" + std::to_string(topic) + std::to_string(m);
}
std::string tgt_variant(std::size_t topic, std::size_t m, char variant) {
  return "t" + std::to_string(topic) + std::to_string(m) + variant;
}
std::string distractor(std::size_t i) { return "dw" + std::to_string(i); }

SyntheticPaths gen_cohesion(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::string> src_fillers, tgt_fillers;
  for (std::size_t i = 0; i < kFillers; ++i) {
    src_fillers.push_back("sf" + two_digits(i));
    tgt_fillers.push_back("tf" + two_digits(i));
  }

  SyntheticPaths paths;
  paths.train_src = (fs::path(cfg.out_dir) / "train.src").string();
  paths.train_tgt = (fs::path(cfg.out_dir) / "train.tgt").string();
  paths.val_src = (fs::path(cfg.out_dir) / "val.src").string();
  paths.val_tgt = (fs::path(cfg.out_dir) / "val.tgt").string();
  paths.relations = (fs::path(cfg.out_dir) / "relations.tsv").string();
  paths.topics = (fs::path(cfg.out_dir) / "topics.vec").string();
  paths.stoplist = (fs::path(cfg.out_dir) / "stoplist.txt").string();

  // One document: a latent topic; each sentence is fillers plus one marker of
  // that topic. The reference realizes the marker as variant a or b at
  // random, occasionally as a distractor.
  auto gen_pair = [&](std::size_t count, std::ofstream& src_out, std::ofstream& tgt_out) {
    std::uniform_int_distribution<std::size_t> topic_dist(0, kTopics - 1);
    std::uniform_int_distribution<std::size_t> marker_dist(0, kMarkersPerTopic - 1);
    std::uniform_int_distribution<std::size_t> filler_dist(0, kFillers - 1);
    std::uniform_int_distribution<std::size_t> distractor_dist(0, kDistractors - 1);
    const std::size_t len = std::max<std::size_t>(cfg.sent_len, 2);
    std::uniform_int_distribution<std::size_t> pos_dist(0, len - 1);
    for (std::size_t d = 0; d < count; ++d) {
      if (d > 0) {
        src_out << kDocSeparator << "\n";
        tgt_out << kDocSeparator << "\n";
      }
      const std::size_t topic = topic_dist(rng);
      for (std::size_t s = 0; s < cfg.doc_sents; ++s) {
        const std::size_t marker = marker_dist(rng);
        const std::size_t marker_pos = pos_dist(rng);
        std::vector<std::string> src_line(len), tgt_line(len);
        for (std::size_t t = 0; t < len; ++t) {
          if (t == marker_pos) continue;
          const std::size_t f = filler_dist(rng);
          src_line[t] = src_fillers[f];
          tgt_line[t] = tgt_fillers[f];
        }
        src_line[marker_pos] = src_marker(topic, marker);
        const double roll = unit(rng);
        if (roll < kVariantProb)
          tgt_line[marker_pos] = tgt_variant(topic, marker, 'a');
        else if (roll < 2 * kVariantProb)
          tgt_line[marker_pos] = tgt_variant(topic, marker, 'b');
        else
          tgt_line[marker_pos] = distractor(distractor_dist(rng));
        for (std::size_t t = 0; t < len; ++t) {
          if (t > 0) {
            src_out << ' ';
            tgt_out << ' ';
          }
          src_out << src_line[t];
          tgt_out << tgt_line[t];
        }
        src_out << "\n";
        tgt_out << "\n";
      }
    }
  };

  {
    auto ts = open_out(paths.train_src);
    auto tt = open_out(paths.train_tgt);
    gen_pair(cfg.train_docs, ts, tt);
    auto vs = open_out(paths.val_src);
    auto vt = open_out(paths.val_tgt);
    gen_pair(cfg.val_docs, vs, vt);
  }

  // Relation db: same-register variants of one topic are coordinate terms;
  // the distractors form a synonym clique.
  {
    auto rel = open_out(paths.relations);
    rel << "# synthetic cohesion relations\n";
    for (std::size_t topic = 0; topic < kTopics; ++topic)
      for (char variant : {'a', 'b'})
        for (std::size_t i = 0; i < kMarkersPerTopic; ++i)
          for (std::size_t j = i + 1; j < kMarkersPerTopic; ++j)
            rel << tgt_variant(topic, i, variant) << "\tcoordinate\t"
                << tgt_variant(topic, j, variant) << "\n";
    for (std::size_t i = 0; i < kDistractors; ++i)
      for (std::size_t j = i + 1; j < kDistractors; ++j)
        rel << distractor(i) << "\tsynonym\t" << distractor(j) << "\n";
  }

  // Topic vectors: a unit direction per topic (plus one for the distractors)
  // with a small per-word jitter, normalized.
  {
    std::mt19937_64 vec_rng(cfg.seed ^ 0x746f706963ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto unit_vec = [&]() {
      std::vector<double> v(kTopicDim);
      double norm = 0.0;
      for (auto& x : v) {
        x = gauss(vec_rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
      return v;
    };
    std::vector<std::vector<double>> centers;
    for (std::size_t t = 0; t < kTopics + 1; ++t) centers.push_back(unit_vec());
    auto jittered = [&](const std::vector<double>& center) {
      std::vector<double> v(kTopicDim);
      double norm = 0.0;
      for (std::size_t d = 0; d < kTopicDim; ++d) {
        v[d] = center[d] + 0.15 * gauss(vec_rng);
        norm += v[d] * v[d];
      }
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
      return v;
    };

    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (std::size_t topic = 0; topic < kTopics; ++topic)
      for (std::size_t m = 0; m < kMarkersPerTopic; ++m)
        for (char variant : {'a', 'b'})
          rows.emplace_back(tgt_variant(topic, m, variant), jittered(centers[topic]));
    for (std::size_t i = 0; i < kDistractors; ++i)
      rows.emplace_back(distractor(i), jittered(centers[kTopics]));

    auto vec = open_out(paths.topics);
    vec << rows.size() << ' ' << kTopicDim << "\n";
    vec.precision(17);
    for (const auto& [word, v] : rows) {
      vec << word;
      for (double x : v) vec << ' ' << x;
      vec << "\n";
    }
  }

  {
    auto stop = open_out(paths.stoplist);
    for (const auto& f : tgt_fillers) stop << f << "\n";
  }
  return paths;
}

}  // namespace

SyntheticPaths gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.train_docs < 1 || cfg.doc_sents < 1 || cfg.sent_len < 1)
    throw ConfigError("gen_synthetic: sizes must be >= 1");
  fs::create_directories(cfg.out_dir);
  if (cfg.kind == "copy") return gen_copy(cfg);
  if (cfg.kind == "cohesion") return gen_cohesion(cfg);
  throw ConfigError("gen_synthetic: unknown kind '" + cfg.kind + "'");
}

}  // namespace docrisk
