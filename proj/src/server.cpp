#include "whymine/server.h"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "httplib.h"

namespace whymine {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return {status, j.dump()};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// Reads request decode options over `base`; returns an error message when
// they are invalid.
std::string read_decode(const json& j, const ServeOptions& opts, DecodeSettings& out) {
  out = opts.decode;
  if (!j.contains("decode") || j["decode"].is_null()) return {};
  const auto& d = j["decode"];
  if (!d.is_object()) return "decode must be an object";
  if (d.contains("mode")) {
    if (!d["mode"].is_string()) return "decode.mode must be \"greedy\" or \"beam\"";
    const auto mode = d["mode"].get<std::string>();
    if (mode == "greedy")
      out.mode = nn::DecodeMode::greedy;
    else if (mode == "beam")
      out.mode = nn::DecodeMode::beam;
    else
      return "decode.mode must be \"greedy\" or \"beam\"";
  }
  auto read_count = [&](const char* key, std::size_t limit, std::size_t& dst) -> std::string {
    if (!d.contains(key)) return {};
    const auto& v = d[key];
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > static_cast<long long>(limit))
      return std::string("decode.") + key + " must be an integer in [1, " + std::to_string(limit) + "]";
    dst = v.get<std::size_t>();
    return {};
  };
  if (auto e = read_count("beam_size", opts.beam_limit, out.beam_size); !e.empty()) return e;
  if (auto e = read_count("max_len", opts.max_len_limit, out.max_len); !e.empty()) return e;
  if (d.contains("length_norm") && !d["length_norm"].is_null()) {
    if (!d["length_norm"].is_number() || d["length_norm"].get<double>() < 0.0)
      return "decode.length_norm must be a non-negative number";
    out.length_norm = d["length_norm"].get<double>();
  }
  return {};
}

}  // namespace

ExplainServer::ExplainServer(ServeOptions opts, Loader loader)
    : opts_(std::move(opts)), loader_(std::move(loader)), http_(std::make_unique<httplib::Server>()) {
  http_->Post("/api/explain", [this](const httplib::Request& req, httplib::Response& res) {
    auto r = handle_explain(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  http_->Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  if (!opts_.ui_dir.empty() && std::filesystem::is_directory(opts_.ui_dir)) http_->set_mount_point("/", opts_.ui_dir);
}

ExplainServer::~ExplainServer() { stop(); }

void ExplainServer::load() {
  std::shared_ptr<const Explainer> ex;
  std::string err;
  try {
    ex = std::make_shared<const Explainer>(loader_());
  } catch (const std::exception& e) {
    err = e.what();
  }
  {
    std::lock_guard lock(mu_);
    explainer_ = std::move(ex);
    load_error_ = std::move(err);
    load_done_ = true;
  }
  loaded_cv_.notify_all();
}

int ExplainServer::start() {
  if (opts_.port == 0)
    bound_port_ = http_->bind_to_any_port(opts_.host);
  else
    bound_port_ = http_->bind_to_port(opts_.host, opts_.port) ? opts_.port : -1;
  if (bound_port_ < 0)
    throw Error("bind_failed", "cannot listen on " + opts_.host + ":" + std::to_string(opts_.port), ExitCode::usage);
  loader_thread_ = std::thread([this] { load(); });
  listen_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound_port_;
}

void ExplainServer::run() {
  if (bound_port_ < 0) start();
  if (listen_thread_.joinable()) listen_thread_.join();
}

void ExplainServer::shutdown() {
  if (http_) http_->stop();
}

void ExplainServer::stop() {
  if (http_) http_->stop();
  if (listen_thread_.joinable()) listen_thread_.join();
  if (loader_thread_.joinable()) loader_thread_.join();
}

bool ExplainServer::wait_until_loaded() const {
  std::unique_lock lock(mu_);
  loaded_cv_.wait(lock, [this] { return load_done_; });
  return explainer_ != nullptr;
}

HttpReply ExplainServer::handle_health() const {
  std::shared_ptr<const Explainer> ex;
  std::string err;
  bool done = false;
  {
    std::lock_guard lock(mu_);
    ex = explainer_;
    err = load_error_;
    done = load_done_;
  }
  ordered_json j;
  if (!done) {
    j["status"] = "loading";
    return {503, j.dump()};
  }
  if (!ex) {
    j["status"] = "failed";
    j["message"] = err;
    return {503, j.dump()};
  }
  const auto& cfg = ex->model().config();
  j["status"] = "ready";
  j["model"] = {{"kind", nn::to_string(cfg.kind)},
                {"vocab_size", cfg.vocab},
                {"embed_dim", cfg.embed_dim},
                {"hidden_dim", cfg.hidden_dim},
                {"layers", cfg.layers},
                {"shared_embeddings", cfg.shared_embeddings}};
  j["task"] = to_string(ex->checkpoint().task);
  j["epoch"] = ex->checkpoint().epoch;
  j["vocab_digest"] = ex->checkpoint().vocab_digest;
  j["decode_defaults"] = {{"mode", nn::to_string(opts_.decode.mode)},
                          {"beam_size", opts_.decode.beam_size},
                          {"max_len", opts_.decode.max_len}};
  return {200, j.dump()};
}

HttpReply ExplainServer::handle_explain(const std::string& body) const {
  std::shared_ptr<const Explainer> ex;
  {
    std::lock_guard lock(mu_);
    if (!load_done_) return error_reply(503, "loading", "model is still loading");
    if (!explainer_) return error_reply(503, "model_unavailable", load_error_);
    ex = explainer_;
  }

  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_reply(400, "bad_json", e.what());
  }
  if (!req.is_object()) return error_reply(400, "bad_json", "request must be a JSON object");

  const bool has_q = req.contains("question") && !req["question"].is_null();
  const bool has_s1 = req.contains("s1") && !req["s1"].is_null();
  if (has_q == has_s1) return error_reply(400, "bad_request", "give exactly one of \"question\" or \"s1\"");
  const auto& field = has_q ? req["question"] : req["s1"];
  if (!field.is_string()) return error_reply(400, "bad_request", "input must be a string");
  const std::string input = field.get<std::string>();
  if (trim(input).empty()) return error_reply(422, "empty_input", "input is empty");

  DecodeSettings settings;
  if (auto e = read_decode(req, opts_, settings); !e.empty()) return error_reply(400, "bad_request", e);

  ExplainResponse r;
  try {
    if (has_s1) {
      r = ex->explain_statement(input, settings);
    } else {
      std::string conllu = input;
      if (input.find('\t') == std::string::npos) {
        if (opts_.parser_command.empty())
          return error_reply(400, "bad_parse", "question must be a CoNLL-U block; no parser is configured");
        conllu = run_external_parser(opts_.parser_command, trim(input));
      }
      r = ex->explain_question(conllu, settings);
    }
  } catch (const RewriteError& e) {
    ordered_json j;
    j["error"] = "rewrite_error";
    j["reason"] = to_string(e.reason());
    return {400, j.dump()};
  } catch (const Error& e) {
    if (e.code() == "bad_parse" || e.code() == "parser_failed") return error_reply(400, e.code(), e.what());
    if (e.code() == "empty_input" || e.code() == "empty_prompt") return error_reply(422, "empty_input", e.what());
    return error_reply(500, e.code(), e.what());
  }
  if (r.candidates.empty()) return error_reply(500, "no_candidates", "decoder returned no candidates");

  ordered_json j;
  j["s1"] = r.s1;
  j["prompt"] = r.prompt;
  j["candidates"] = json::array();
  for (const auto& c : r.candidates) j["candidates"].push_back({{"text", c.text}, {"score", c.score}});
  if (r.rewrite_rule) j["rewrite_rule"] = to_string(*r.rewrite_rule);
  return {200, j.dump()};
}

}  // namespace whymine
