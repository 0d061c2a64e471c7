#include "docrisk/lexcohesion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

namespace docrisk {

namespace {

const std::pair<const char*, Relation> kRelationNames[] = {
    {"synonym", Relation::synonym},       {"near_synonym", Relation::near_synonym},
    {"hypernym", Relation::hypernym},     {"meronym", Relation::meronym},
    {"troponym", Relation::troponym},     {"antonym", Relation::antonym},
    {"coordinate", Relation::coordinate},
};

Relation parse_relation(const std::string& name, const std::string& where) {
  for (const auto& [n, rel] : kRelationNames)
    if (name == n) return rel;
  throw UnknownLabelError(where + ": unknown relation label '" + name + "'");
}

std::string lowercased(std::string s) {
  for (auto& c : s)
    if (static_cast<unsigned char>(c) < 0x80)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

const char* relation_name(Relation rel) {
  return kRelationNames[static_cast<int>(rel)].first;
}

void RelationDb::add(const std::string& a, Relation rel, const std::string& b) {
  if (a == b) return;
  auto insert = [this](const std::string& from, const std::string& to, Relation r) {
    auto& vec = entries_[from];
    for (const auto& [word, existing] : vec)
      if (word == to && existing == r) return;
    vec.emplace_back(to, r);
  };
  insert(a, b, rel);
  insert(b, a, rel);
}

bool RelationDb::related(const std::string& a, const std::string& b) const {
  auto it = entries_.find(a);
  if (it == entries_.end()) return false;
  for (const auto& [word, rel] : it->second)
    if (word == b && enabled(rel)) return true;
  return false;
}

void RelationDb::set_enabled(Relation rel, bool on) {
  const std::uint32_t bit = 1u << static_cast<int>(rel);
  enabled_mask_ = on ? (enabled_mask_ | bit) : (enabled_mask_ & ~bit);
}

bool RelationDb::enabled(Relation rel) const {
  return (enabled_mask_ >> static_cast<int>(rel)) & 1u;
}

RelationDb load_relation_db(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open relation db: " + path);
  RelationDb db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::istringstream ss(line);
    std::string a, label, b;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, label, '\t') ||
        !std::getline(ss, b, '\t') || a.empty() || b.empty())
      throw ParseError(where + ": expected word<TAB>label<TAB>word");
    std::string rest;
    if (std::getline(ss, rest, '\t'))
      throw ParseError(where + ": trailing fields");
    db.add(lowercased(a), parse_relation(label, where), lowercased(b));
  }
  return db;
}

void StopList::add(std::string word) { words_.insert(lowercased(std::move(word))); }

bool StopList::contains(const std::string& word) const {
  return words_.count(word) > 0;
}

StopList StopList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stoplist: " + path);
  StopList stop;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) stop.add(line);
  }
  return stop;
}

bool is_content_token(const std::string& surface, const StopList& stop) {
  return !surface.empty() && !is_punctuation(surface) &&
         !is_reserved_surface(surface) && !stop.contains(surface);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

LcScore lexical_cohesion(const std::vector<Sentence>& sentences,
                         const RelationDb& db, const StopList& stop,
                         const LcOptions& options) {
  std::vector<std::string> content;
  std::size_t all_tokens = 0;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent.tokens) {
      ++all_tokens;
      if (is_content_token(tok.surface, stop)) content.push_back(tok.surface);
    }
  }

  LcScore score;
  score.content_tokens = content.size();
  if (content.empty()) return score;

  // Same-surface occurrences always share a component, so the components of
  // the occurrence tie graph equal the components over distinct surfaces.
  std::vector<std::string> distinct = content;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  UnionFind uf(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i)
    for (std::size_t j = i + 1; j < distinct.size(); ++j)
      if (db.related(distinct[i], distinct[j])) uf.unite(static_cast<int>(i), static_cast<int>(j));

  std::size_t components = 0;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    if (uf.find(static_cast<int>(i)) == static_cast<int>(i)) ++components;

  score.devices = content.size() - components;
  const std::size_t denom = options.denominator_all_tokens ? all_tokens : content.size();
  score.value = static_cast<double>(score.devices) / static_cast<double>(std::max<std::size_t>(denom, 1));
  return score;
}

}  // namespace docrisk
