#include "whymine/pipeline.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "whymine/error.h"

namespace whymine {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("io_error", "failed writing '" + path + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot read '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

// ------------------------------------------------------------------ extract

std::string stats_to_json(const ExtractSummary& s) {
  ordered_json j;
  j["sentences_seen"] = s.stats.sentences_seen;
  j["because_sentences"] = s.stats.because_sentences;
  j["pairs_emitted"] = s.stats.pairs_emitted;
  j["rejected_by_reason"] = s.stats.rejected_by_reason;
  j["parse_errors"] = s.parse_errors;
  j["pair_count"] = s.lengths.count;
  j["mean_pair_length"] = s.lengths.mean_pair_len ? ordered_json(*s.lengths.mean_pair_len) : ordered_json(nullptr);
  j["mean_length_with_context"] =
      s.lengths.mean_with_context_len ? ordered_json(*s.lengths.mean_with_context_len) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

ExtractSummary cmd_extract(const ExtractCommand& cmd) {
  if (cmd.inputs.empty()) throw Error("usage", "extract needs at least one input file", ExitCode::usage);
  std::vector<Document> docs;
  ExtractSummary summary;
  for (const auto& path : cmd.inputs) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot read '" + path + "'");
    auto parsed = parse_conllu(in, fs::path(path).stem().string());
    summary.parse_errors += parsed.dropped();
    for (auto& d : parsed.documents) {
      for (auto& s : d.sentences) s = normalize_labels(std::move(s), cmd.scheme);
      docs.push_back(std::move(d));
    }
  }
  auto result = extract_corpus(docs, cmd.extraction);
  summary.stats = result.stats;
  summary.lengths = corpus_stats(result.pairs);

  std::string out;
  for (std::size_t i = 0; i < result.pairs.size(); ++i) out += pair_to_jsonl(result.pairs[i], i) + "\n";
  write_file(cmd.out_pairs, out);
  if (!cmd.out_stats.empty()) write_file(cmd.out_stats, stats_to_json(summary));

  if (result.pairs.empty()) {
    std::string hist;
    for (const auto& [reason, n] : result.stats.rejected_by_reason) hist += " " + reason + "=" + std::to_string(n);
    throw Error("no_pairs", "no explanation pairs extracted from " + std::to_string(result.stats.sentences_seen) +
                                " sentences; rejections:" + (hist.empty() ? " none" : hist));
  }
  return summary;
}

std::vector<ExplanationPair> read_pairs(const std::string& path) {
  std::vector<ExplanationPair> pairs;
  for (const auto& line : read_lines(path))
    if (!line.empty()) pairs.push_back(pair_from_jsonl(line));
  return pairs;
}

// -------------------------------------------------------------------- build

namespace {

void write_examples(const fs::path& path, const std::vector<Example>& examples) {
  std::string out;
  for (const auto& ex : examples) out += example_to_jsonl(ex) + "\n";
  write_file(path.string(), out);
}

std::vector<Example> read_examples(const fs::path& path) {
  std::vector<Example> out;
  for (const auto& line : read_lines(path.string()))
    if (!line.empty()) out.push_back(example_from_jsonl(line));
  return out;
}

}  // namespace

BuildSummary cmd_build(const BuildCommand& cmd) {
  auto pairs = read_pairs(cmd.pairs);
  std::vector<std::vector<std::string>> corpus;
  for (const auto& p : pairs) {
    corpus.push_back(p.s1);
    corpus.push_back(p.s2);
    if (cmd.task == Task::L2EC)
      for (const auto& c : p.context) corpus.push_back(c);
  }
  auto vocab = Vocabulary::build(corpus, cmd.min_freq, cmd.max_size);
  auto examples = make_examples(pairs, vocab, {cmd.task, cmd.max_src_len});
  auto parts = split(std::move(examples.examples), cmd.seed);

  fs::create_directories(cmd.out_dir);
  const fs::path dir(cmd.out_dir);
  write_file((dir / "vocab.json").string(), vocab.to_json() + "\n");
  write_examples(dir / "train.jsonl", parts.train);
  write_examples(dir / "valid.jsonl", parts.valid);
  write_examples(dir / "test.jsonl", parts.test);

  ordered_json meta;
  meta["task"] = to_string(cmd.task);
  meta["seed"] = cmd.seed;
  meta["fractions"] = {kTrainFraction, kValidFraction, kTestFraction};
  meta["min_freq"] = cmd.min_freq;
  meta["max_size"] = cmd.max_size;
  meta["max_src_len"] = cmd.max_src_len;
  meta["counts"] = {{"train", parts.train.size()}, {"valid", parts.valid.size()}, {"test", parts.test.size()}};
  meta["skipped"] = examples.skipped;
  meta["vocab_size"] = vocab.size();
  meta["vocab_digest"] = vocab.digest();
  write_file((dir / "meta.json").string(), meta.dump(2) + "\n");

  return {parts.train.size(), parts.valid.size(), parts.test.size(), examples.skipped, vocab.size()};
}

Vocabulary load_vocab(const std::string& dir) { return Vocabulary::from_json(read_file((fs::path(dir) / "vocab.json").string())); }

Task load_dataset_task(const std::string& dir) {
  try {
    auto meta = nlohmann::json::parse(read_file((fs::path(dir) / "meta.json").string()));
    return parse_task(meta.at("task").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_record", std::string("malformed meta.json: ") + e.what());
  }
}

Dataset load_dataset(const std::string& dir) {
  Dataset d;
  d.vocab = load_vocab(dir);
  d.task = load_dataset_task(dir);
  const fs::path p(dir);
  d.split.train = read_examples(p / "train.jsonl");
  d.split.valid = read_examples(p / "valid.jsonl");
  d.split.test = read_examples(p / "test.jsonl");
  return d;
}

// -------------------------------------------------------------------- train

nn::TrainResult cmd_train(const TrainCommand& cmd) {
  auto data = load_dataset(cmd.dataset_dir);
  std::unique_ptr<nn::SequenceModel> model;
  std::optional<nn::Parameters> opt_state;
  std::size_t start_epoch = 0;
  if (cmd.resume) {
    auto ck = nn::load_checkpoint(*cmd.resume, data.vocab);
    if (ck.task != data.task)
      throw Error("task_mismatch", std::string("checkpoint task ") + to_string(ck.task) + " does not match dataset task " +
                                       to_string(data.task));
    model = std::move(ck.model);
    opt_state = std::move(ck.optimizer_state);
    start_epoch = ck.epoch;
  } else {
    auto cfg = cmd.model;
    cfg.vocab = data.vocab.size();
    model = nn::make_model(cfg);
    model->params().init_uniform(cmd.train.init_scale, cmd.train.seed);
  }

  auto opt_cfg = cmd.train.optimizer;
  if (opt_cfg.d_model == 0) opt_cfg.d_model = model->config().hidden_dim;
  nn::Optimizer optimizer(opt_cfg, model->params());
  if (opt_state) optimizer.load_state(*opt_state);

  std::ofstream log;
  if (!cmd.log_path.empty()) {
    log.open(cmd.log_path, cmd.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw Error("io_error", "cannot write '" + cmd.log_path + "'");
  }
  nn::TrainHooks hooks;
  hooks.start_epoch = start_epoch;
  hooks.on_epoch = [&](const nn::EpochMetrics& m) {
    if (log.is_open()) log << nn::to_json_line(m) << '\n' << std::flush;
  };
  auto result = nn::train(*model, data.split, cmd.train, optimizer, hooks);

  // The final state (with optimizer slots) is kept next to the best one so a
  // run can be resumed exactly where it stopped.
  auto state = optimizer.state();
  nn::save_checkpoint(cmd.out_checkpoint + ".last", *model, data.vocab, data.task, start_epoch + cmd.train.epochs,
                      &state);
  model->params() = result.best_params;
  nn::save_checkpoint(cmd.out_checkpoint, *model, data.vocab, data.task, result.best_epoch);
  return result;
}

// ----------------------------------------------------------------- generate

Explainer::Explainer(nn::Checkpoint checkpoint, Vocabulary vocab)
    : checkpoint_(std::move(checkpoint)), vocab_(std::move(vocab)) {}

Explainer Explainer::load(const std::string& checkpoint_path, const std::string& dataset_dir) {
  auto vocab = load_vocab(dataset_dir);
  auto task = load_dataset_task(dataset_dir);
  auto ck = nn::load_checkpoint(checkpoint_path, vocab);
  if (ck.task != task)
    throw Error("task_mismatch", std::string("checkpoint task ") + to_string(ck.task) + " does not match dataset task " +
                                     to_string(task));
  ck.model->set_backend(kernels::Backend::parallel);
  return Explainer(std::move(ck), std::move(vocab));
}

std::vector<ScoredText> Explainer::decode(const std::vector<std::string>& prompt, const DecodeSettings& s) const {
  auto source = prompt_source(prompt, vocab_);
  nn::DecodeOptions opts;
  opts.max_len = s.max_len;
  auto result = s.mode == nn::DecodeMode::greedy
                    ? nn::greedy_decode(*checkpoint_.model, source, opts)
                    : nn::beam_decode(*checkpoint_.model, source, s.beam_size, opts, s.length_norm);
  std::vector<ScoredText> out;
  for (const auto& c : result.candidates) {
    std::vector<int> ids = c.tokens;
    if (!ids.empty() && ids.back() == kEos) ids.pop_back();
    out.push_back({join_tokens(vocab_.decode(ids)), c.score});
  }
  return out;
}

ExplainResponse Explainer::explain_statement(const std::string& s1, const DecodeSettings& settings) const {
  auto tokens = split_tokens(s1);
  if (tokens.empty()) throw Error("empty_input", "statement is empty");
  auto prompt = adapt_prompt(PromptKind::raw, tokens);
  ExplainResponse r;
  r.s1 = join_tokens(tokens);
  r.prompt = join_tokens(prompt);
  r.candidates = decode(prompt, settings);
  return r;
}

ExplainResponse Explainer::explain_question(const std::string& conllu, const DecodeSettings& settings) const {
  auto rw = rewrite_question(conllu);
  auto prompt = adapt_prompt(PromptKind::raw, split_tokens(rw.prompt));
  ExplainResponse r;
  r.s1 = rw.statement;
  r.prompt = join_tokens(prompt);
  r.candidates = decode(prompt, settings);
  r.rewrite_rule = rw.rule;
  return r;
}

std::size_t cmd_generate(const GenerateCommand& cmd) {
  auto explainer = Explainer::load(cmd.checkpoint, cmd.dataset_dir);
  std::string out;
  std::size_t n = 0;
  for (const auto& line : read_lines(cmd.prompts)) {
    auto tokens = split_tokens(line);
    if (tokens.empty()) {
      out += "\n";
      ++n;
      continue;
    }
    auto r = explainer.explain_statement(line, cmd.decode);
    out += (r.candidates.empty() ? std::string{} : r.candidates.front().text) + "\n";
    ++n;
  }
  write_file(cmd.out, out);
  return n;
}

// ----------------------------------------------------------------- evaluate

metrics::MetricReport cmd_evaluate(const std::string& hyp_path, const std::string& ref_path) {
  auto hyps = read_lines(hyp_path);
  auto refs = read_lines(ref_path);
  if (hyps.size() != refs.size())
    throw Error("length_mismatch", "hypotheses have " + std::to_string(hyps.size()) + " lines, references " +
                                       std::to_string(refs.size()));
  std::vector<metrics::EvalPair> pairs;
  pairs.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i)
    pairs.emplace_back(metrics::tokenize(hyps[i]), metrics::tokenize(refs[i]));
  return metrics::evaluate_pairs(pairs);
}

// ---------------------------------------------------------- rewrite-question

std::string to_json(const RewriteOutput& out) {
  ordered_json j;
  j["statement"] = out.statement;
  j["prompt"] = out.prompt;
  j["rule"] = to_string(out.rule);
  return j.dump();
}

RewriteOutput rewrite_question(const std::string& conllu, LabelScheme scheme) {
  auto parsed = parse_conllu_string(conllu);
  const DepSentence* first = nullptr;
  for (const auto& d : parsed.documents)
    if (!d.sentences.empty()) {
      first = &d.sentences.front();
      break;
    }
  if (!first) {
    std::string why = parsed.errors.empty() ? "no sentence found" : parsed.errors.front().message;
    throw Error("bad_parse", "could not read the question parse: " + why);
  }
  auto rw = rewrite(normalize_labels(*first, scheme));
  return {join_tokens(rw.statement), join_tokens(to_prompt(rw)), rw.applied_rule};
}

std::string run_external_parser(const std::string& command, const std::string& text) {
  std::string cmd = command;
  fs::path tmp;
  const auto placeholder = cmd.find("{input}");
  if (placeholder != std::string::npos) {
    tmp = fs::temp_directory_path() / ("whymine_parse_" + std::to_string(::getpid()) + ".txt");
    write_file(tmp.string(), text + "\n");
    cmd.replace(placeholder, 7, "'" + tmp.string() + "'");
  } else {
    tmp = fs::temp_directory_path() / ("whymine_parse_" + std::to_string(::getpid()) + ".in");
    write_file(tmp.string(), text + "\n");
    cmd += " < '" + tmp.string() + "'";
  }
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    fs::remove(tmp);
    throw Error("parser_failed", "cannot run parser command");
  }
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  std::error_code ec;
  fs::remove(tmp, ec);
  if (status != 0) throw Error("parser_failed", "parser command exited with status " + std::to_string(status));
  return out;
}

}  // namespace whymine
