#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "docrisk/corpus.hpp"

namespace docrisk {

enum class Relation {
  synonym,
  near_synonym,
  hypernym,
  meronym,
  troponym,
  antonym,
  coordinate,
};

const char* relation_name(Relation rel);

// Word-to-related-words map with relation labels. The symmetric closure is
// applied at load time; self-relations are dropped. Individual labels can be
// disabled, which removes their edges from device detection.
class RelationDb {
 public:
  void add(const std::string& a, Relation rel, const std::string& b);
  bool related(const std::string& a, const std::string& b) const;
  std::size_t entry_count() const { return entries_.size(); }

  void set_enabled(Relation rel, bool enabled);
  bool enabled(Relation rel) const;

 private:
  std::unordered_map<std::string, std::vector<std::pair<std::string, Relation>>> entries_;
  std::uint32_t enabled_mask_ = 0x7f;  // all seven labels on
};

// TSV lines `word<TAB>label<TAB>word`; '#'-prefixed lines are comments.
RelationDb load_relation_db(const std::string& path);

class StopList {
 public:
  void add(std::string word);  // lowercased on insert
  bool contains(const std::string& word) const;
  std::size_t size() const { return words_.size(); }

  static StopList load(const std::string& path);

 private:
  std::unordered_set<std::string> words_;
};

struct LcScore {
  std::size_t devices = 0;
  std::size_t content_tokens = 0;
  double value = 0.0;  // devices / max(content_tokens, 1)
};

struct LcOptions {
  // Denominator choice: content tokens only (default) or all tokens.
  bool denominator_all_tokens = false;
};

// Lexical cohesion over a block of sentences. A content token (not a
// stopword, not punctuation, not a reserved symbol) counts as a cohesion
// device when it ties to an earlier content token by surface repetition or a
// RelationDb edge; equivalently, each connected component of the tie graph
// over content-token occurrences contributes size-1 devices, which makes the
// count independent of token order.
LcScore lexical_cohesion(const std::vector<Sentence>& sentences,
                         const RelationDb& db, const StopList& stop,
                         const LcOptions& options = {});

bool is_content_token(const std::string& surface, const StopList& stop);

}  // namespace docrisk
