// The WoW server: HTTP API, sync channel and (optionally) the UI bundle.

#include <csignal>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wow/gateway/gateway_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"WoW collaborative wall server"};
  std::optional<std::string> config_file;
  std::optional<std::string> bind;
  std::optional<int> port;
  std::optional<std::string> storage;
  std::optional<std::string> ui_root;
  std::optional<std::string> users;
  app.add_option("-c,--config", config_file, "JSON config file");
  app.add_option("--bind", bind, "Listen address");
  app.add_option("-p,--port", port, "Listen port (0 picks one)")->check(CLI::Range(0, 65535));
  app.add_option("--storage", storage, "Storage root directory");
  app.add_option("--ui-root", ui_root, "Directory holding the UI bundle");
  app.add_option("--users", users, "Accounts as name:secret,name:secret");
  CLI11_PARSE(app, argc, argv);

  auto config = wow::gateway::load_config(config_file);
  if (!config) {
    std::fprintf(stderr, "config: %s\n", config.error().to_string().c_str());
    return 2;
  }
  if (bind) config->bind = *bind;
  if (port) config->port = static_cast<std::uint16_t>(*port);
  if (storage) config->storage_root = *storage;
  if (ui_root) config->ui_root = *ui_root;
  if (users) {
    auto parsed = wow::gateway::parse_user_list(*users);
    if (!parsed) {
      std::fprintf(stderr, "--users: %s\n", parsed.error().to_string().c_str());
      return 2;
    }
    config->users = std::move(parsed).value();
  }
  if (config->users.empty()) {
    std::fprintf(stderr, "no accounts configured; set users in the config, WOW_USERS or --users\n");
    return 2;
  }

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  wow::gateway::GatewayServer server(*config);
  if (auto st = server.start(); !st) {
    std::fprintf(stderr, "start: %s\n", st.error().to_string().c_str());
    return 1;
  }
  std::printf("listening on http://%s:%u (storage %s, ui %s)\n", config->bind.c_str(),
              server.port(), config->storage_root.string().c_str(),
              config->ui_root ? config->ui_root->string().c_str() : "none");
  std::fflush(stdout);

  int sig = 0;
  sigwait(&stop_signals, &sig);
  std::printf("signal %d, shutting down\n", sig);
  server.stop();
  return 0;
}
