#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "docrisk/errors.hpp"

namespace docrisk {

// Reserved vocabulary entries. Ids are fixed so checkpoints and corpora can
// rely on them without negotiation.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumReserved = 4;

const std::string& reserved_surface(int id);
bool is_reserved_surface(const std::string& surface);

// True when every character of the surface is ASCII punctuation. The
// tokenizer emits punctuation as single-character tokens, so in practice this
// matches exactly the tokens it split off.
bool is_punctuation(const std::string& surface);

struct Token {
  std::string surface;
  int id = kUnkId;
};

struct Sentence {
  std::vector<Token> tokens;
  int doc_position = 0;

  std::size_t size() const { return tokens.size(); }
  std::vector<int> ids() const;
  std::vector<std::string> surfaces() const;
  std::string detokenized() const;  // surfaces joined by single spaces
};

enum class Side { source, target };

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  Side side = Side::source;

  std::size_t size() const { return sentences.size(); }
};

// Sentence-aligned document pair; the unit discourse rewards are defined on.
struct ParallelDocument {
  Document source;
  Document target;

  std::size_t size() const { return source.sentences.size(); }
};

class Vocabulary {
 public:
  Vocabulary();

  // Most-frequent-first with lexicographic tie-break; reserved entries are
  // always present and occupy ids 0..3. max_size bounds the total size
  // including the reserved entries.
  static Vocabulary build(const std::vector<const Document*>& docs,
                          std::size_t max_size, std::size_t min_freq);

  int id(const std::string& surface) const;  // kUnkId when absent
  const std::string& surface(int id) const;
  bool contains(const std::string& surface) const;
  std::size_t size() const { return id_to_surface_.size(); }

  // FNV-1a over the surface list; used for checkpoint compatibility checks.
  std::uint64_t hash() const;

  const std::vector<std::string>& surfaces() const { return id_to_surface_; }

  // Rebuild from an explicit surface list (checkpoint load path). The list
  // must start with the four reserved surfaces.
  static Vocabulary from_surfaces(const std::vector<std::string>& surfaces);

 private:
  void insert(const std::string& surface);

  std::vector<std::string> id_to_surface_;
  std::unordered_map<std::string, int> surface_to_id_;
};

// Assign vocabulary ids to every token in the document (in place).
void apply_vocab(Document& doc, const Vocabulary& vocab);

// A contiguous slice of one ParallelDocument; the training batch unit.
struct Segment {
  std::string doc_id;
  std::vector<std::pair<Sentence, Sentence>> sentence_pairs;
  std::size_t origin_doc_offset = 0;

  std::size_t size() const { return sentence_pairs.size(); }
};

// Lowercase, split on whitespace, split ASCII punctuation into
// single-character tokens. Throws EmptySentenceError when nothing remains.
Sentence tokenize(const std::string& line);

struct CorpusOptions {
  std::size_t max_sentence_len = 64;  // longer sentences truncated with a warning
};

inline constexpr const char* kDocSeparator = "<<<DOC>>>";

// Load one side of a corpus: plain text, one sentence per line, documents
// separated by `<<<DOC>>>` lines.
std::vector<Document> load_documents(const std::string& path, Side side,
                                     const CorpusOptions& options = {});

// Load a pair of such files. Both sides must agree on document count and on
// the per-document sentence counts.
std::vector<ParallelDocument> load_corpus(const std::string& src_path,
                                          const std::string& tgt_path,
                                          const CorpusOptions& options = {});

// Split one document into contiguous segments of at most max_sents pairs.
std::vector<Segment> make_segments(const ParallelDocument& doc,
                                   std::size_t max_sents);

}  // namespace docrisk
