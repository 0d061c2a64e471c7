#include "docrisk/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace docrisk {

namespace {

const std::string kReserved[kNumReserved] = {"<pad>", "<bos>", "<eos>", "<unk>"};

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

const std::string& reserved_surface(int id) { return kReserved[id]; }

bool is_reserved_surface(const std::string& surface) {
  for (const auto& r : kReserved)
    if (surface == r) return true;
  return false;
}

bool is_punctuation(const std::string& surface) {
  if (surface.empty()) return false;
  for (unsigned char c : surface)
    if (!is_ascii_punct(c)) return false;
  return true;
}

std::vector<int> Sentence::ids() const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.id);
  return out;
}

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::string Sentence::detokenized() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i].surface;
  }
  return out;
}

Sentence tokenize(const std::string& line) {
  Sentence sent;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      sent.tokens.push_back(Token{word, kUnkId});
      word.clear();
    }
  };
  for (unsigned char c : line) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      sent.tokens.push_back(Token{std::string(1, static_cast<char>(c)), kUnkId});
    } else {
      word += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  flush();
  if (sent.tokens.empty()) throw EmptySentenceError("tokenize: no tokens in line");
  return sent;
}

Vocabulary::Vocabulary() {
  for (const auto& r : kReserved) insert(r);
}

void Vocabulary::insert(const std::string& surface) {
  surface_to_id_.emplace(surface, static_cast<int>(id_to_surface_.size()));
  id_to_surface_.push_back(surface);
}

Vocabulary Vocabulary::build(const std::vector<const Document*>& docs,
                             std::size_t max_size, std::size_t min_freq) {
  if (max_size < kNumReserved + 1)
    throw ConfigError("build_vocab: max_size must be at least 5");
  // std::map keeps candidates lexicographically sorted, which settles
  // frequency ties deterministically.
  std::map<std::string, std::size_t> freq;
  for (const Document* doc : docs)
    for (const auto& sent : doc->sentences)
      for (const auto& tok : sent.tokens)
        if (!is_reserved_surface(tok.surface)) ++freq[tok.surface];

  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (const auto& [surface, count] : items) {
    if (vocab.size() >= max_size) break;
    if (count < min_freq) continue;
    vocab.insert(surface);
  }
  return vocab;
}

Vocabulary Vocabulary::from_surfaces(const std::vector<std::string>& surfaces) {
  if (surfaces.size() < kNumReserved)
    throw ParseError("vocabulary: surface list shorter than reserved set");
  for (int i = 0; i < kNumReserved; ++i)
    if (surfaces[i] != kReserved[i])
      throw ParseError("vocabulary: reserved surfaces malformed");
  Vocabulary vocab;
  for (std::size_t i = kNumReserved; i < surfaces.size(); ++i)
    vocab.insert(surfaces[i]);
  return vocab;
}

int Vocabulary::id(const std::string& surface) const {
  auto it = surface_to_id_.find(surface);
  return it == surface_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::surface(int id) const {
  return id_to_surface_.at(static_cast<std::size_t>(id));
}

bool Vocabulary::contains(const std::string& surface) const {
  return surface_to_id_.count(surface) > 0;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& s : id_to_surface_) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  return h;
}

void apply_vocab(Document& doc, const Vocabulary& vocab) {
  for (auto& sent : doc.sentences)
    for (auto& tok : sent.tokens) tok.id = vocab.id(tok.surface);
}

std::vector<Document> load_documents(const std::string& path, Side side,
                                     const CorpusOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<Document> docs(1);
  std::string line;
  std::size_t line_no = 0;
  bool warned = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == kDocSeparator) {
      if (docs.back().sentences.empty())
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": document with no sentences");
      docs.emplace_back();
      continue;
    }
    Sentence sent;
    try {
      sent = tokenize(line);
    } catch (const EmptySentenceError&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": empty sentence");
    }
    if (sent.tokens.size() > options.max_sentence_len) {
      sent.tokens.resize(options.max_sentence_len);
      if (!warned) {
        std::cerr << "[warn] " << path << ":" << line_no << ": sentence truncated to "
                  << options.max_sentence_len << " tokens (further truncations not reported)\n";
        warned = true;
      }
    }
    sent.doc_position = static_cast<int>(docs.back().sentences.size());
    docs.back().sentences.push_back(std::move(sent));
  }
  if (docs.back().sentences.empty())
    throw ParseError(path + ": trailing document with no sentences");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    docs[i].id = "doc" + std::to_string(i);
    docs[i].side = side;
  }
  return docs;
}

std::vector<ParallelDocument> load_corpus(const std::string& src_path,
                                          const std::string& tgt_path,
                                          const CorpusOptions& options) {
  auto src_docs = load_documents(src_path, Side::source, options);
  auto tgt_docs = load_documents(tgt_path, Side::target, options);
  if (src_docs.size() != tgt_docs.size())
    throw AlignmentError("document count mismatch: " + src_path + " has " +
                         std::to_string(src_docs.size()) + ", " + tgt_path + " has " +
                         std::to_string(tgt_docs.size()));
  std::vector<ParallelDocument> out;
  out.reserve(src_docs.size());
  for (std::size_t i = 0; i < src_docs.size(); ++i) {
    if (src_docs[i].sentences.size() != tgt_docs[i].sentences.size())
      throw AlignmentError("sentence count mismatch in document " + std::to_string(i) +
                           ": " + std::to_string(src_docs[i].sentences.size()) + " vs " +
                           std::to_string(tgt_docs[i].sentences.size()));
    ParallelDocument pd;
    pd.source = std::move(src_docs[i]);
    pd.target = std::move(tgt_docs[i]);
    out.push_back(std::move(pd));
  }
  return out;
}

std::vector<Segment> make_segments(const ParallelDocument& doc,
                                   std::size_t max_sents) {
  if (max_sents < 1) throw ConfigError("make_segments: max_sents must be >= 1");
  std::vector<Segment> segments;
  const std::size_t k = doc.size();
  for (std::size_t start = 0; start < k; start += max_sents) {
    Segment seg;
    seg.doc_id = doc.source.id;
    seg.origin_doc_offset = start;
    const std::size_t end = std::min(start + max_sents, k);
    for (std::size_t i = start; i < end; ++i)
      seg.sentence_pairs.emplace_back(doc.source.sentences[i], doc.target.sentences[i]);
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace docrisk
