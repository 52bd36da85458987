#include "whymine/checkpoint.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "whymine/error.h"

namespace whymine::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (is.gcount() != static_cast<std::streamsize>(sizeof v)) throw Error("truncated_file", "checkpoint is truncated");
}

nlohmann::json tensor_entry(const std::string& name, const Tensor& t) {
  return {{"name", name}, {"rows", t.rows}, {"cols", t.cols}};
}

}  // namespace

void save_checkpoint(const std::string& path, const SequenceModel& model, const Vocabulary& vocab, Task task,
                     std::size_t epoch, const Parameters* optimizer_state) {
  const auto& cfg = model.config();
  if (cfg.vocab != vocab.size())
    throw Error("digest_mismatch", "model vocabulary size differs from the supplied vocabulary");
  nlohmann::ordered_json header;
  header["model"] = {{"kind", to_string(cfg.kind)},
                     {"vocab", cfg.vocab},
                     {"embed_dim", cfg.embed_dim},
                     {"hidden_dim", cfg.hidden_dim},
                     {"layers", cfg.layers},
                     {"shared_embeddings", cfg.shared_embeddings}};
  header["task"] = to_string(task);
  header["epoch"] = epoch;
  header["vocab_digest"] = vocab.digest();
  auto tensors = nlohmann::json::array();
  for (const auto& [name, t] : model.params()) tensors.push_back(tensor_entry(name, t));
  header["tensors"] = tensors;
  auto opt = nlohmann::json::array();
  if (optimizer_state)
    for (const auto& [name, t] : *optimizer_state) opt.push_back(tensor_entry(name, t));
  header["optimizer"] = opt;
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("io_error", "cannot write checkpoint '" + path + "'");
    os.write(kCheckpointMagic, sizeof kCheckpointMagic);
    write_pod(os, kCheckpointVersion);
    write_pod(os, static_cast<std::uint64_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : model.params())
      os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (optimizer_state)
      for (const auto& [name, t] : *optimizer_state)
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!os) throw Error("io_error", "failed writing checkpoint '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("io_error", "cannot move checkpoint into place");
}

Checkpoint load_checkpoint(const std::string& path, const Vocabulary& vocab) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io_error", "cannot open checkpoint '" + path + "'");
  char magic[sizeof kCheckpointMagic];
  is.read(magic, sizeof magic);
  if (is.gcount() != static_cast<std::streamsize>(sizeof magic)) throw Error("truncated_file", "checkpoint is truncated");
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw Error("bad_magic", "not a whymine checkpoint");
  std::uint32_t version = 0;
  read_pod(is, version);
  if (version != kCheckpointVersion)
    throw Error("version_mismatch", "checkpoint format version " + std::to_string(version) + ", expected " +
                                        std::to_string(kCheckpointVersion));
  std::uint64_t header_len = 0;
  read_pod(is, header_len);
  if (header_len > (1u << 26)) throw Error("truncated_file", "checkpoint header length is implausible");
  std::string text(header_len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(header_len));
  if (is.gcount() != static_cast<std::streamsize>(header_len)) throw Error("truncated_file", "checkpoint is truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("truncated_file", std::string("checkpoint header unreadable: ") + e.what());
  }

  if (header.at("vocab_digest").get<std::string>() != vocab.digest())
    throw Error("digest_mismatch", "checkpoint was trained with a different vocabulary");

  ModelConfig cfg;
  const auto& m = header.at("model");
  cfg.kind = parse_model_kind(m.at("kind").get<std::string>());
  cfg.vocab = m.at("vocab").get<std::size_t>();
  cfg.embed_dim = m.at("embed_dim").get<std::size_t>();
  cfg.hidden_dim = m.at("hidden_dim").get<std::size_t>();
  cfg.layers = m.at("layers").get<std::size_t>();
  cfg.shared_embeddings = m.at("shared_embeddings").get<bool>();
  if (cfg.vocab != vocab.size()) throw Error("digest_mismatch", "checkpoint vocabulary size differs");

  Checkpoint ck;
  ck.model = make_model(cfg);
  ck.task = parse_task(header.at("task").get<std::string>());
  ck.epoch = header.at("epoch").get<std::size_t>();
  ck.vocab_digest = header.at("vocab_digest").get<std::string>();

  auto read_tensor = [&](Tensor& t) {
    is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (is.gcount() != static_cast<std::streamsize>(t.size() * sizeof(double)))
      throw Error("truncated_file", "checkpoint is truncated");
  };

  const auto& entries = header.at("tensors");
  if (entries.size() != ck.model->params().tensor_count())
    throw Error("shape_mismatch", "checkpoint tensor count does not match its model config");
  std::size_t k = 0;
  for (auto& [name, t] : ck.model->params()) {
    const auto& e = entries.at(k++);
    if (e.at("name").get<std::string>() != name || e.at("rows").get<std::size_t>() != t.rows ||
        e.at("cols").get<std::size_t>() != t.cols)
      throw Error("shape_mismatch", "checkpoint tensor '" + name + "' has inconsistent shape");
    read_tensor(t);
  }
  const auto& opt = header.at("optimizer");
  if (!opt.empty()) {
    Parameters state;
    for (const auto& e : opt)
      read_tensor(state.add(e.at("name").get<std::string>(), e.at("rows").get<std::size_t>(),
                            e.at("cols").get<std::size_t>()));
    ck.optimizer_state = std::move(state);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error("shape_mismatch", "trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace whymine::nn
