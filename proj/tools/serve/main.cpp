// scengraph-serve: HTTP front end for the graphical editor.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scengraph HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string config;
  scengraph::serve::ServiceOptions options;
  std::string workspace = options.workspace.string();
  std::string catalog = options.catalog.string();
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port")->check(CLI::Range(1, 65535));
  app.add_option("--workspace", workspace, "directory holding scenario documents");
  app.add_option("--catalog", catalog, "module catalog directory");
  app.add_option("--config", config, "registry config file")->check(CLI::ExistingFile);
  app.add_option("--cors-origin", options.cors_origin, "allowed editor origin");
  CLI11_PARSE(app, argc, argv);

  options.workspace = workspace;
  options.catalog = catalog;
  if (!config.empty()) {
    std::ifstream in(config);
    std::ostringstream ss;
    ss << in.rdbuf();
    options.config_json = ss.str();
  }

  try {
    scengraph::serve::Service service(options);
    httplib::Server server;
    service.mount(server);
    std::fprintf(stderr, "listening on %s:%d (workspace %s)\n", host.c_str(), port, workspace.c_str());
    if (!server.listen(host, port)) {
      std::fprintf(stderr, "error: cannot bind %s:%d\n", host.c_str(), port);
      return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
