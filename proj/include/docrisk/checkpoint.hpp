#pragma once

#include <map>
#include <string>

#include "docrisk/corpus.hpp"
#include "docrisk/policy.hpp"

namespace docrisk {

// Versioned binary container: a JSON header (model config, vocabulary surface
// lists and hashes, free-form metadata, parameter shapes) followed by raw
// little-endian doubles for every parameter block. save -> load -> save is
// byte-identical.
struct Checkpoint {
  ModelConfig model_config;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  std::map<std::string, std::string> metadata;
  Params params;

  PolicyModel model() const { return PolicyModel(model_config, params); }
};

void save_checkpoint(const std::string& path, const PolicyModel& model,
                     const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                     const std::map<std::string, std::string>& metadata);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace docrisk
