#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "whymine/pipeline.h"
#include "whymine/server.h"

using namespace whymine;

namespace {

template <typename Enum, typename Parse>
CLI::Option* add_enum(CLI::App* app, const std::string& name, std::string& holder, Parse parse,
                      const std::string& help) {
  return app->add_option(name, holder, help)->check([parse](const std::string& v) -> std::string {
    try {
      (void)static_cast<Enum>(parse(v));
      return {};
    } catch (const std::exception& e) {
      return e.what();
    }
  });
}

struct DecodeFlags {
  std::string mode = "beam";
  std::size_t beam = 5;
  std::size_t max_len = 30;
  double length_norm = -1.0;

  void add(CLI::App* app) {
    add_enum<nn::DecodeMode>(app, "--mode", mode, nn::parse_decode_mode, "greedy or beam")->capture_default_str();
    app->add_option("--beam", beam, "beam size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-len", max_len, "maximum generated tokens")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--length-norm", length_norm, "length normalization exponent (beam); negative = off");
  }

  DecodeSettings settings() const {
    DecodeSettings s;
    s.mode = nn::parse_decode_mode(mode);
    s.beam_size = beam;
    s.max_len = max_len;
    if (length_norm >= 0.0) s.length_norm = length_norm;
    return s;
  }
};

ExplainServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->shutdown();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine because-pairs, train explanation generators and serve them"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; sections are named after subcommands")->envname("WHYMINE_CONFIG");

  // extract
  ExtractCommand extract;
  std::string extract_scheme = "ud2";
  auto* ex = app.add_subcommand("extract", "Mine explanation pairs from CoNLL-U files");
  ex->add_option("inputs", extract.inputs, "CoNLL-U files")->required()->check(CLI::ExistingFile);
  ex->add_option("-o,--out", extract.out_pairs, "pairs JSONL output")->required();
  ex->add_option("--stats", extract.out_stats, "statistics JSON output");
  add_enum<LabelScheme>(ex, "--scheme", extract_scheme, parse_label_scheme, "stanford or ud2")->capture_default_str();
  ex->add_option("--min-clause-len", extract.extraction.min_clause_len)->capture_default_str();
  ex->add_option("--max-clause-len", extract.extraction.max_clause_len)->capture_default_str();
  ex->add_option("--context-window", extract.extraction.context_window)->capture_default_str();

  // build
  BuildCommand build;
  std::string build_task = "L2E";
  auto* bd = app.add_subcommand("build", "Build vocabulary and train/valid/test splits");
  bd->add_option("--pairs", build.pairs, "pairs JSONL")->required()->check(CLI::ExistingFile);
  bd->add_option("-o,--out", build.out_dir, "dataset directory")->required();
  add_enum<Task>(bd, "--task", build_task, parse_task, "L2E or L2EC")->capture_default_str();
  bd->add_option("--seed", build.seed)->capture_default_str();
  bd->add_option("--min-freq", build.min_freq)->capture_default_str()->check(CLI::PositiveNumber);
  bd->add_option("--max-vocab", build.max_size, "0 = unlimited")->capture_default_str();
  bd->add_option("--max-src-len", build.max_src_len)->capture_default_str()->check(CLI::PositiveNumber);

  // train
  TrainCommand train;
  std::string model_kind = "seq2seq", optimizer = "adagrad", precision = "high", resume;
  std::size_t embed = 0, hidden = 0, layers = 1;
  bool shared = false;
  auto* tr = app.add_subcommand("train", "Train a language model or seq2seq model");
  tr->add_option("--dataset", train.dataset_dir)->required()->check(CLI::ExistingDirectory);
  tr->add_option("-o,--out", train.out_checkpoint, "best-validation checkpoint")->required();
  tr->add_option("--log", train.log_path, "per-epoch JSON lines");
  add_enum<nn::ModelKind>(tr, "--model", model_kind, nn::parse_model_kind, "lm or seq2seq")->capture_default_str();
  tr->add_option("--embed", embed, "embedding size (default 64)");
  tr->add_option("--hidden", hidden, "hidden size (default 256 lm, 128 seq2seq)");
  tr->add_option("--layers", layers)->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_flag("--shared-embeddings", shared, "share encoder and decoder embeddings");
  add_enum<nn::OptimizerKind>(tr, "--optimizer", optimizer, nn::parse_optimizer, "adagrad or noam")
      ->capture_default_str();
  tr->add_option("--lr", train.train.optimizer.lr, "adagrad learning rate")->capture_default_str();
  tr->add_option("--weight-decay", train.train.optimizer.weight_decay)->capture_default_str();
  tr->add_option("--warmup", train.train.optimizer.warmup_steps, "noam warmup steps")->capture_default_str();
  tr->add_option("--noam-factor", train.train.optimizer.noam_factor)->capture_default_str();
  tr->add_option("--dropout", train.train.dropout)->capture_default_str()->check(CLI::Range(0.0, 0.999));
  tr->add_option("--batch-size", train.train.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--epochs", train.train.epochs)->capture_default_str();
  tr->add_option("--seed", train.train.seed)->capture_default_str();
  add_enum<nn::Precision>(tr, "--precision", precision, nn::parse_precision, "high (serial) or fast (OpenMP)")
      ->capture_default_str();
  tr->add_option("--clip", train.train.clip_norm, "gradient norm clip, 0 = off")->capture_default_str();
  tr->add_option("--init-scale", train.train.init_scale)->capture_default_str();
  tr->add_option("--resume", resume, "continue from a checkpoint")->check(CLI::ExistingFile);

  // generate
  GenerateCommand gen;
  DecodeFlags gen_decode;
  auto* gn = app.add_subcommand("generate", "Generate explanations for prompts, one per line");
  gn->add_option("--checkpoint", gen.checkpoint)->required()->check(CLI::ExistingFile);
  gn->add_option("--dataset", gen.dataset_dir, "dataset directory holding vocab.json and meta.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  gn->add_option("--prompts", gen.prompts)->required()->check(CLI::ExistingFile);
  gn->add_option("-o,--out", gen.out)->required();
  gen_decode.add(gn);

  // evaluate
  std::string hyp, ref, eval_out;
  auto* ev = app.add_subcommand("evaluate", "BLEU, ROUGE-L and METEOR of hypotheses against references");
  ev->add_option("--hyp", hyp)->required()->check(CLI::ExistingFile);
  ev->add_option("--ref", ref)->required()->check(CLI::ExistingFile);
  ev->add_option("-o,--out", eval_out, "also write the report here");

  // rewrite-question
  std::string rq_parse, rq_text, rq_parser, rq_scheme = "ud2";
  auto* rq = app.add_subcommand("rewrite-question", "Rewrite a why-question into a prompt");
  auto* parse_opt = rq->add_option("--parse", rq_parse, "CoNLL-U parse of the question")->check(CLI::ExistingFile);
  auto* text_opt = rq->add_option("--text", rq_text, "raw question, parsed with --parser-command");
  parse_opt->excludes(text_opt);
  rq->add_option("--parser-command", rq_parser, "shell command producing CoNLL-U; {input} = text file");
  add_enum<LabelScheme>(rq, "--scheme", rq_scheme, parse_label_scheme, "stanford or ud2")->capture_default_str();

  // serve
  ServeOptions serve;
  std::string serve_ckpt, serve_dataset;
  DecodeFlags serve_decode;
  auto* sv = app.add_subcommand("serve", "Serve the explanation API and chat UI");
  sv->add_option("--checkpoint", serve_ckpt)->required()->check(CLI::ExistingFile);
  sv->add_option("--dataset", serve_dataset)->required()->check(CLI::ExistingDirectory);
  sv->add_option("--host", serve.host)->capture_default_str();
  sv->add_option("--port", serve.port)->capture_default_str();
  sv->add_option("--ui-dir", serve.ui_dir, "static chat UI bundle");
  sv->add_option("--parser-command", serve.parser_command, "enables raw-text questions");
  serve_decode.add(sv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (ex->parsed()) {
      extract.scheme = parse_label_scheme(extract_scheme);
      auto s = cmd_extract(extract);
      std::cerr << "extracted " << s.stats.pairs_emitted << " pairs from " << s.stats.sentences_seen
                << " sentences\n";
      if (extract.out_stats.empty()) std::cout << stats_to_json(s);
    } else if (bd->parsed()) {
      build.task = parse_task(build_task);
      auto s = cmd_build(build);
      std::cerr << "train " << s.train << ", valid " << s.valid << ", test " << s.test << ", skipped " << s.skipped
                << ", vocabulary " << s.vocab_size << "\n";
    } else if (tr->parsed()) {
      auto kind = nn::parse_model_kind(model_kind);
      train.model = kind == nn::ModelKind::lm ? nn::ModelConfig::lm_defaults(0) : nn::ModelConfig::seq2seq_defaults(0);
      if (embed) train.model.embed_dim = embed;
      if (hidden) train.model.hidden_dim = hidden;
      train.model.layers = layers;
      train.model.shared_embeddings = shared;
      train.train.optimizer.kind = nn::parse_optimizer(optimizer);
      train.train.optimizer.d_model = 0;
      train.train.precision = nn::parse_precision(precision);
      if (!resume.empty()) train.resume = resume;
      auto r = cmd_train(train);
      for (const auto& m : r.log) std::cout << nn::to_json_line(m) << "\n";
      std::cerr << "best epoch " << r.best_epoch << ", valid perplexity " << r.best_valid_ppl << "\n";
    } else if (gn->parsed()) {
      gen.decode = gen_decode.settings();
      auto n = cmd_generate(gen);
      std::cerr << "wrote " << n << " hypotheses\n";
    } else if (ev->parsed()) {
      auto report = metrics::to_json(cmd_evaluate(hyp, ref));
      std::cout << report << "\n";
      if (!eval_out.empty()) write_file(eval_out, report + "\n");
    } else if (rq->parsed()) {
      std::string conllu;
      if (!rq_parse.empty()) {
        conllu = read_file(rq_parse);
      } else if (!rq_text.empty()) {
        if (rq_parser.empty())
          throw Error("usage", "--text needs --parser-command (raw-text parsing is disabled by default)",
                      ExitCode::usage);
        conllu = run_external_parser(rq_parser, rq_text);
      } else {
        throw Error("usage", "give --parse or --text", ExitCode::usage);
      }
      std::cout << to_json(rewrite_question(conllu, parse_label_scheme(rq_scheme))) << "\n";
    } else if (sv->parsed()) {
      serve.decode = serve_decode.settings();
      ExplainServer server(serve, [&] { return Explainer::load(serve_ckpt, serve_dataset); });
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int port = server.start();
      std::cerr << "listening on http://" << serve.host << ":" << port << "\n";
      if (!server.wait_until_loaded()) {
        std::cerr << "model failed to load; health reports the reason\n";
      }
      server.run();
      g_server = nullptr;
    }
  } catch (const RewriteError& e) {
    std::cout << "{\"error\":\"rewrite_error\",\"reason\":\"" << to_string(e.reason()) << "\"}\n";
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::data);
  }
  return 0;
}
