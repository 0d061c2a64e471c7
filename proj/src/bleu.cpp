#include "docrisk/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace docrisk {

namespace {

// n-grams hashed as joined strings; '\x1f' cannot appear inside a token.
std::unordered_map<std::string, int> count_ngrams(
    const std::vector<std::string>& toks, int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int j = 1; j < n; ++j) {
      key += '\x1f';
      key += toks[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

void BleuStats::add(const std::vector<std::string>& hyp,
                    const std::vector<std::string>& ref) {
  hyp_len += hyp.size();
  ref_len += ref.size();
  for (int n = 1; n <= kBleuOrder; ++n) {
    auto hyp_counts = count_ngrams(hyp, n);
    auto ref_counts = count_ngrams(ref, n);
    long m = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) m += std::min(count, it->second);
    }
    matched[n - 1] += m;
    total[n - 1] += std::max<long>(static_cast<long>(hyp.size()) - n + 1, 0);
  }
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kBleuOrder; ++n) {
    matched[n] += other.matched[n];
    total[n] += other.total[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

BleuScore BleuStats::score() const {
  BleuScore out;
  out.hyp_len = hyp_len;
  out.ref_len = ref_len;
  if (hyp_len == 0) return out;
  double log_sum = 0.0;
  for (int n = 1; n <= kBleuOrder; ++n) {
    const long m = matched[n - 1];
    const long t = total[n - 1];
    double precision;
    if (n == 1) {
      if (m == 0) return out;
      precision = static_cast<double>(m) / static_cast<double>(t);
    } else if (m > 0) {
      precision = static_cast<double>(m) / static_cast<double>(t);
    } else {
      precision = 1.0 / static_cast<double>(t + 1);
    }
    out.ngram_precisions[n - 1] = precision;
    log_sum += std::log(precision);
  }
  out.brevity_penalty =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  out.value = out.brevity_penalty * std::exp(log_sum / kBleuOrder);
  return out;
}

BleuScore bleu_tokens(const std::vector<std::string>& hyp,
                      const std::vector<std::string>& ref) {
  BleuStats stats;
  stats.add(hyp, ref);
  return stats.score();
}

BleuScore bleu_sentence(const Sentence& hyp, const Sentence& ref) {
  return bleu_tokens(hyp.surfaces(), ref.surfaces());
}

BleuScore bleu_document(const std::vector<Sentence>& hyp_sents,
                        const std::vector<Sentence>& ref_sents) {
  std::vector<std::string> hyp, ref;
  for (const auto& s : hyp_sents)
    for (const auto& t : s.tokens) hyp.push_back(t.surface);
  for (const auto& s : ref_sents)
    for (const auto& t : s.tokens) ref.push_back(t.surface);
  return bleu_tokens(hyp, ref);
}

}  // namespace docrisk
