#include "docrisk/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace docrisk {

namespace {

constexpr char kMagic[8] = {'D', 'O', 'C', 'R', 'I', 'S', 'K', '\0'};
constexpr std::uint32_t kVersion = 1;

std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

template <class T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ParseError(path + ": truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyModel& model,
                     const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                     const std::map<std::string, std::string>& metadata) {
  nlohmann::json header;
  const ModelConfig& cfg = model.config();
  header["model"] = {{"src_vocab_size", cfg.src_vocab_size},
                     {"tgt_vocab_size", cfg.tgt_vocab_size},
                     {"embed_dim", cfg.embed_dim},
                     {"hidden_dim", cfg.hidden_dim}};
  header["src_vocab"] = src_vocab.surfaces();
  header["tgt_vocab"] = tgt_vocab.surfaces();
  header["src_vocab_hash"] = hash_hex(src_vocab.hash());
  header["tgt_vocab_hash"] = hash_hex(tgt_vocab.hash());
  header["metadata"] = metadata;
  nlohmann::json shapes = nlohmann::json::array();
  for_each_param(model.params(), [&shapes](const char* name, const ad::Mat& m) {
    shapes.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  header["params"] = std::move(shapes);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  const std::string header_text = header.dump();
  write_pod(out, static_cast<std::uint64_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for_each_param(model.params(), [&out](const char* name, const ad::Mat& m) {
    (void)name;
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  });
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ParseError(path + ": not a checkpoint file");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion)
    throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
  const auto header_len = read_pod<std::uint64_t>(in, path);
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len)))
    throw ParseError(path + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad header: " + e.what());
  }

  Checkpoint ckpt;
  const auto& mc = header.at("model");
  ckpt.model_config.src_vocab_size = mc.at("src_vocab_size").get<std::size_t>();
  ckpt.model_config.tgt_vocab_size = mc.at("tgt_vocab_size").get<std::size_t>();
  ckpt.model_config.embed_dim = mc.at("embed_dim").get<std::size_t>();
  ckpt.model_config.hidden_dim = mc.at("hidden_dim").get<std::size_t>();
  ckpt.src_vocab = Vocabulary::from_surfaces(header.at("src_vocab").get<std::vector<std::string>>());
  ckpt.tgt_vocab = Vocabulary::from_surfaces(header.at("tgt_vocab").get<std::vector<std::string>>());
  if (hash_hex(ckpt.src_vocab.hash()) != header.at("src_vocab_hash").get<std::string>() ||
      hash_hex(ckpt.tgt_vocab.hash()) != header.at("tgt_vocab_hash").get<std::string>())
    throw ParseError(path + ": vocabulary hash mismatch");
  if (header.contains("metadata"))
    ckpt.metadata = header.at("metadata").get<std::map<std::string, std::string>>();

  PolicyModel shaped = PolicyModel::init(ckpt.model_config, 0);
  ckpt.params = shaped.params();
  std::size_t i = 0;
  const auto& shapes = header.at("params");
  for_each_param(ckpt.params, [&](const char* name, ad::Mat& m) {
    const auto& entry = shapes.at(i++);
    if (entry.at("name").get<std::string>() != name ||
        entry.at("rows").get<Eigen::Index>() != m.rows() ||
        entry.at("cols").get<Eigen::Index>() != m.cols())
      throw ParseError(path + ": parameter block mismatch at '" + name + "'");
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(sizeof(double) * m.size())))
      throw ParseError(path + ": truncated parameter data at '" + name + "'");
  });
  return ckpt;
}

}  // namespace docrisk
