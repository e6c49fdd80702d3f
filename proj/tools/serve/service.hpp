#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <httplib.h>

#include "scengraph/scengraph.h"

namespace scengraph::serve {

struct ServiceOptions {
  std::filesystem::path workspace = "workspace";
  std::filesystem::path catalog = "catalog";
  /// Registry config document text; empty uses the built-in registry.
  std::string config_json;
  std::string cors_origin = "*";
};

/// One stored scenario: canonical document text plus its revision counter.
struct StoredScenario {
  std::string id;
  long revision = 0;
  std::string document;
};

/// Plain-directory persistence: <id>.scenario.json next to <id>.rev, and an
/// optional <id>.layout.json sidecar owned by the editor.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path dir);

  StoredScenario create(const std::string& document);
  std::optional<StoredScenario> get(const std::string& id) const;
  /// Returns nullopt when the id is unknown; throws StaleRevision on mismatch.
  std::optional<StoredScenario> update(const std::string& id, long expected_revision, const std::string& document);
  std::optional<std::string> layout(const std::string& id) const;
  bool set_layout(const std::string& id, const std::string& layout);
  std::string list() const;

  struct StaleRevision {
    long current;
  };

 private:
  std::filesystem::path path(const std::string& id, const char* suffix) const;
  bool exists(const std::string& id) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Registers every route on the server.
  void mount(httplib::Server& server);

 private:
  ServiceOptions options_;
  sg_context* ctx_ = nullptr;
  Workspace store_;
  std::mutex library_mu_;
};

}  // namespace scengraph::serve
