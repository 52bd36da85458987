#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "whymine/dataset.h"
#include "whymine/error.h"
#include "whymine/kernels.h"
#include "whymine/tensor.h"

namespace whymine::nn {

enum class ModelKind { lm, seq2seq };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

struct ModelConfig {
  ModelKind kind = ModelKind::seq2seq;
  std::size_t vocab = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 128;
  std::size_t layers = 1;
  bool shared_embeddings = false;  // seq2seq only

  static ModelConfig lm_defaults(std::size_t vocab) { return {ModelKind::lm, vocab, 64, 256, 1, false}; }
  static ModelConfig seq2seq_defaults(std::size_t vocab) { return {ModelKind::seq2seq, vocab, 64, 128, 1, false}; }

  bool operator==(const ModelConfig&) const = default;
};

class NumericFailure : public Error {
 public:
  NumericFailure(std::size_t epoch, std::size_t batch)
      : Error("numeric_failure",
              "non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch),
              ExitCode::numeric),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

// Inverted dropout on embedding outputs and pre-projection hidden states.
// Inactive when rate is 0 or no generator is supplied.
struct Dropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
  bool active() const { return rate > 0.0 && rng != nullptr; }
};

struct ForwardResult {
  std::vector<std::vector<double>> distributions;  // one per predicted position
  double log_likelihood = 0.0;
};

struct LossResult {
  double mean_nll = 0.0;
  double total_nll = 0.0;
  std::size_t tokens = 0;   // non-pad target positions
  std::size_t correct = 0;  // argmax == target
};

// Recurrent decoder state plus the next-token log-distribution.
struct DecoderState {
  std::vector<std::vector<double>> h, c;  // per layer
  std::vector<int> prefix;                // tokens emitted so far
  std::vector<double> log_probs;
};

// Anything beam or greedy search can drive one token at a time.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual DecoderState start(std::span<const int> source) const = 0;
  virtual DecoderState advance(const DecoderState& state, int token) const = 0;
};

class SequenceModel : public StepModel {
 public:
  explicit SequenceModel(ModelConfig cfg) : cfg_(cfg) {}

  const ModelConfig& config() const { return cfg_; }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  kernels::Backend backend() const { return backend_; }
  void set_backend(kernels::Backend b) { backend_ = b; }
  std::size_t vocab_size() const override { return cfg_.vocab; }

  // Summed NLL over the example's non-pad target positions. When `grads` is
  // given, d(summed NLL)/d(params) is added into it.
  virtual LossResult accumulate(const Example& ex, Parameters* grads, const Dropout& dropout) const = 0;

  virtual std::unique_ptr<SequenceModel> clone() const = 0;

 protected:
  void check_ids(std::span<const int> ids) const;

  ModelConfig cfg_;
  Parameters params_;
  kernels::Backend backend_ = kernels::Backend::serial;
};

// Left-to-right LSTM language model. For an Example the modeled sequence is
// <s> source target.
class LanguageModel final : public SequenceModel {
 public:
  explicit LanguageModel(ModelConfig cfg);

  // Distribution at step t predicts ids[t+1] from ids[0..t]. Needs >= 2 ids.
  ForwardResult forward(std::span<const int> ids) const;

  LossResult accumulate(const Example& ex, Parameters* grads, const Dropout& dropout) const override;
  DecoderState start(std::span<const int> source) const override;
  DecoderState advance(const DecoderState& state, int token) const override;
  std::unique_ptr<SequenceModel> clone() const override { return std::make_unique<LanguageModel>(*this); }
};

// LSTM encoder-decoder without attention: the encoder's final (h, c) per
// layer seeds the decoder, whose first input is <s>.
class Seq2SeqModel final : public SequenceModel {
 public:
  explicit Seq2SeqModel(ModelConfig cfg);

  ForwardResult forward(std::span<const int> source, std::span<const int> target) const;

  LossResult accumulate(const Example& ex, Parameters* grads, const Dropout& dropout) const override;
  DecoderState start(std::span<const int> source) const override;
  DecoderState advance(const DecoderState& state, int token) const override;
  std::unique_ptr<SequenceModel> clone() const override { return std::make_unique<Seq2SeqModel>(*this); }
};

std::unique_ptr<SequenceModel> make_model(const ModelConfig& cfg);

// Mean NLL over non-pad target tokens of the batch and its gradient, written
// to `grads` (which is resized to match the model). Throws NumericFailure
// carrying `batch_id` when the loss is not finite.
LossResult loss_and_grads(const SequenceModel& model, std::span<const Example> batch, Parameters& grads,
                          const Dropout& dropout = {}, std::size_t epoch = 0, std::size_t batch_id = 0);

// Loss and accuracy without gradients or dropout. Examples are scored in
// parallel and summed in input order.
LossResult evaluate(const SequenceModel& model, std::span<const Example> examples);

}  // namespace whymine::nn
