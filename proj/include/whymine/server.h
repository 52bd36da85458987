#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "whymine/pipeline.h"

namespace httplib {
class Server;
}

namespace whymine {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 = any free port
  std::string ui_dir;  // served at "/" when it exists
  std::string parser_command;  // turns raw question text into CoNLL-U; empty = disabled
  DecodeSettings decode;  // defaults for requests that omit options
  std::size_t max_len_limit = 200;
  std::size_t beam_limit = 64;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

// JSON service over one immutable model. The model is produced by `loader`
// on a background thread; requests that arrive before it finishes get 503.
class ExplainServer {
 public:
  using Loader = std::function<Explainer()>;

  ExplainServer(ServeOptions opts, Loader loader);
  ~ExplainServer();
  ExplainServer(const ExplainServer&) = delete;
  ExplainServer& operator=(const ExplainServer&) = delete;

  // Binds, starts the loader and the listener threads; returns the bound port.
  int start();
  void stop();
  // Asks the listener to exit without joining; safe from a signal handler.
  void shutdown();
  // Blocks until the listener exits; starts first if needed.
  void run();
  bool wait_until_loaded() const;

  HttpReply handle_explain(const std::string& body) const;
  HttpReply handle_health() const;

 private:
  void load();

  ServeOptions opts_;
  Loader loader_;
  std::unique_ptr<httplib::Server> http_;
  std::thread loader_thread_;
  std::thread listen_thread_;
  int bound_port_ = -1;

  mutable std::mutex mu_;
  mutable std::condition_variable loaded_cv_;
  std::shared_ptr<const Explainer> explainer_;
  std::string load_error_;
  bool load_done_ = false;
};

}  // namespace whymine
