#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths so they can serve as oracles.

#include <functional>
#include <string>
#include <vector>

#include "docrisk/coherence.hpp"
#include "docrisk/corpus.hpp"
#include "docrisk/lexcohesion.hpp"
#include "docrisk/policy.hpp"

namespace oracle {

// Cohesion devices by explicit connected components of the occurrence tie
// graph (occurrences tied by surface equality or a relation-db edge).
std::size_t lc_devices(const std::vector<std::string>& content_occurrences,
                       const docrisk::RelationDb& db);

// Devices counted by scanning left to right: an occurrence is a device when
// some earlier occurrence is tied to it directly.
std::size_t lc_devices_scan(const std::vector<std::string>& content_occurrences,
                            const docrisk::RelationDb& db);

// Mean adjacent cosine of mean-of-vector sentence topics, written with plain
// loops.
double coh_mean(const std::vector<docrisk::Sentence>& sentences,
                const docrisk::TopicTable& table);

// Reference BLEU-4: map-of-ngram-vector counting, add-one smoothing on
// zero-match precisions for n >= 2.
double bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_block;
};

// Central finite differences over every entry of every parameter block,
// compared against an analytic gradient. rel = |a-f| / max(|a|, |f|, floor).
FdReport fd_check(docrisk::PolicyModel& model,
                  const std::function<double(const docrisk::PolicyModel&)>& loss,
                  const docrisk::Params& analytic, double eps, double floor = 1e-3);

// All decodable token sequences up to max_len (PAD/BOS never produced; a
// sequence either ends in EOS or has exactly max_len tokens), best `k` by
// mean step log-prob with lexicographic tie-break.
std::vector<std::vector<int>> enumerate_best(const docrisk::PolicyModel& model,
                                             const docrisk::Sentence& src, std::size_t max_len,
                                             std::size_t k);

}  // namespace oracle
