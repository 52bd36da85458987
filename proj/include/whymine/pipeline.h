#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "whymine/checkpoint.h"
#include "whymine/conllu.h"
#include "whymine/dataset.h"
#include "whymine/decode.h"
#include "whymine/extract.h"
#include "whymine/metrics.h"
#include "whymine/rewrite.h"
#include "whymine/train.h"

namespace whymine {

// ------------------------------------------------------------------ extract

struct ExtractCommand {
  std::vector<std::string> inputs;  // CoNLL-U files
  std::string out_pairs;            // pairs.jsonl
  std::string out_stats;            // stats JSON; empty = skip
  LabelScheme scheme = LabelScheme::ud2;
  ExtractionConfig extraction;
};

struct ExtractSummary {
  ExtractionStats stats;
  LengthReport lengths;
  std::size_t parse_errors = 0;
};

std::string stats_to_json(const ExtractSummary& summary);

// Throws Error("no_pairs") after writing the stats file when nothing was
// extracted.
ExtractSummary cmd_extract(const ExtractCommand& cmd);

std::vector<ExplanationPair> read_pairs(const std::string& path);

// -------------------------------------------------------------------- build

struct BuildCommand {
  std::string pairs;
  std::string out_dir;
  Task task = Task::L2E;
  std::uint64_t seed = 13;
  std::size_t min_freq = 1;
  std::size_t max_size = 0;
  std::size_t max_src_len = 200;
};

struct BuildSummary {
  std::size_t train = 0, valid = 0, test = 0;
  std::size_t skipped = 0;
  std::size_t vocab_size = 0;
};

// Writes vocab.json, {train,valid,test}.jsonl and meta.json into out_dir.
BuildSummary cmd_build(const BuildCommand& cmd);

struct Dataset {
  Vocabulary vocab;
  DatasetSplit split;
  Task task = Task::L2E;
};

Dataset load_dataset(const std::string& dir);
Vocabulary load_vocab(const std::string& dir);
Task load_dataset_task(const std::string& dir);

// -------------------------------------------------------------------- train

struct TrainCommand {
  std::string dataset_dir;
  std::string out_checkpoint;
  std::string log_path;  // JSON lines; empty = skip
  nn::ModelConfig model;  // vocab size is taken from the dataset
  nn::TrainConfig train;
  std::optional<std::string> resume;
};

// Saves the best-validation parameters to out_checkpoint.
nn::TrainResult cmd_train(const TrainCommand& cmd);

// ----------------------------------------------------------------- generate

struct DecodeSettings {
  nn::DecodeMode mode = nn::DecodeMode::beam;
  std::size_t beam_size = 5;
  std::size_t max_len = 30;
  std::optional<double> length_norm;
};

struct ScoredText {
  std::string text;
  double score = 0.0;
};

struct ExplainResponse {
  std::string s1;
  std::string prompt;
  std::vector<ScoredText> candidates;
  std::optional<RewriteRule> rewrite_rule;
};

// A loaded checkpoint with its vocabulary; read-only and safe to share
// across threads.
class Explainer {
 public:
  Explainer(nn::Checkpoint checkpoint, Vocabulary vocab);

  static Explainer load(const std::string& checkpoint_path, const std::string& dataset_dir);

  ExplainResponse explain_statement(const std::string& s1, const DecodeSettings& decode) const;
  // `conllu` holds one parsed why-question. Throws RewriteError.
  ExplainResponse explain_question(const std::string& conllu, const DecodeSettings& decode) const;

  const nn::SequenceModel& model() const { return *checkpoint_.model; }
  const nn::Checkpoint& checkpoint() const { return checkpoint_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  std::vector<ScoredText> decode(const std::vector<std::string>& prompt, const DecodeSettings& settings) const;

  nn::Checkpoint checkpoint_;
  Vocabulary vocab_;
};

struct GenerateCommand {
  std::string checkpoint;
  std::string dataset_dir;
  std::string prompts;  // one prompt per line
  std::string out;      // one hypothesis per line
  DecodeSettings decode;
};

std::size_t cmd_generate(const GenerateCommand& cmd);

// ----------------------------------------------------------------- evaluate

metrics::MetricReport cmd_evaluate(const std::string& hyp_path, const std::string& ref_path);

// ---------------------------------------------------------- rewrite-question

struct RewriteOutput {
  std::string statement;
  std::string prompt;
  RewriteRule rule = RewriteRule::aux_copy;
};

std::string to_json(const RewriteOutput& out);

// First sentence of `conllu`, label-normalized, through rewrite + to_prompt.
RewriteOutput rewrite_question(const std::string& conllu, LabelScheme scheme = LabelScheme::ud2);

// Runs `command` with the question text on stdin and returns its stdout.
// `{input}` in the command is replaced by the path of a file holding the text.
std::string run_external_parser(const std::string& command, const std::string& text);

// ---------------------------------------------------------------- utilities

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace whymine
