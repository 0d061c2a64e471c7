#include "docrisk/coherence.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace docrisk {

void TopicTable::add(const std::string& word, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_)
    throw DimensionMismatchError("topic table: vector for '" + word + "' has " +
                                 std::to_string(vec.size()) + " values, expected " +
                                 std::to_string(dim_));
  if (!vectors_.emplace(word, std::move(vec)).second)
    throw ParseError("topic table: duplicate word '" + word + "'");
}

const std::vector<double>* TopicTable::lookup(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

TopicTable load_topic_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open topic table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": missing header");
  std::istringstream header(line);
  std::size_t count = 0, dim = 0;
  if (!(header >> count >> dim) || dim < 1)
    throw ParseError(path + ": header must be `count dim`");

  TopicTable table(dim);
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) throw ParseError(where + ": missing word");
    std::vector<double> vec;
    vec.reserve(dim);
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.size() != dim)
      throw DimensionMismatchError(where + ": expected " + std::to_string(dim) +
                                   " values, got " + std::to_string(vec.size()));
    table.add(word, std::move(vec));
    ++rows;
  }
  if (rows != count)
    throw ParseError(path + ": header declares " + std::to_string(count) +
                     " rows, file has " + std::to_string(rows));
  return table;
}

SentenceTopic sentence_topic(const Sentence& sentence, const TopicTable& table,
                             const CohOptions& options) {
  SentenceTopic topic;
  topic.vector.assign(table.dim(), 0.0);
  for (const auto& tok : sentence.tokens) {
    if (options.skip && options.skip->contains(tok.surface)) continue;
    const auto* vec = table.lookup(tok.surface);
    if (!vec) continue;
    for (std::size_t d = 0; d < vec->size(); ++d) topic.vector[d] += (*vec)[d];
    ++topic.covered;
  }
  if (topic.covered > 0)
    for (auto& v : topic.vector) v /= static_cast<double>(topic.covered);
  return topic;
}

namespace {

double cosine_or_zero(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CohScore coherence(const std::vector<Sentence>& sentences, const TopicTable& table,
                   const CohOptions& options) {
  CohScore score;
  if (sentences.size() <= 1) return score;
  std::vector<SentenceTopic> topics;
  topics.reserve(sentences.size());
  for (const auto& sent : sentences) topics.push_back(sentence_topic(sent, table, options));
  double sum = 0.0;
  for (std::size_t i = 1; i < topics.size(); ++i)
    sum += cosine_or_zero(topics[i].vector, topics[i - 1].vector);
  score.pairs = sentences.size() - 1;
  score.value = sum / static_cast<double>(score.pairs);
  return score;
}

}  // namespace docrisk
