#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "whymine/dataset.h"
#include "whymine/models.h"
#include "whymine/vocab.h"

namespace whymine::nn {

inline constexpr char kCheckpointMagic[8] = {'W', 'H', 'Y', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: 8-byte magic, u32 version, u64 header length, JSON header
// (model config, task, epoch, vocabulary digest, tensor names and shapes),
// then each tensor's doubles little-endian in header order.
struct Checkpoint {
  std::unique_ptr<SequenceModel> model;
  Task task = Task::L2E;
  std::size_t epoch = 0;
  std::string vocab_digest;
  std::optional<Parameters> optimizer_state;
};

void save_checkpoint(const std::string& path, const SequenceModel& model, const Vocabulary& vocab, Task task,
                     std::size_t epoch, const Parameters* optimizer_state = nullptr);

// Validates magic, version, vocabulary digest, tensor shapes against the
// stored config and the total byte length. Errors: "bad_magic",
// "version_mismatch", "digest_mismatch", "truncated_file", "shape_mismatch".
Checkpoint load_checkpoint(const std::string& path, const Vocabulary& vocab);

}  // namespace whymine::nn
