#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

struct CatalogEntry {
  std::string name;
  std::string revision;
  std::vector<std::string> roles;
  bool operator==(const CatalogEntry&) const = default;
};

/// On-disk module library:
///   <dir>/index                       JSON index, one entry per revision
///   <dir>/modules/<name>/<revision>   module definition document
/// Revisions are content hashes, so saving changed content adds a revision
/// and keeps the old one.
class Catalog {
public:
  explicit Catalog(std::string dir) : dir_(std::move(dir)) {}

  /// Stores `def` and returns its revision. With `expected_latest`, the save
  /// is rejected with Conflict unless that is the current latest revision of
  /// the name (optimistic concurrency).
  std::string save(const ModuleDef& def, const std::optional<std::string>& expected_latest = std::nullopt) const;

  /// Latest revision when `revision` is empty. NotFound if absent.
  ModuleDef load(const std::string& name, const std::optional<std::string>& revision = std::nullopt) const;

  /// All stored revisions in save order.
  std::vector<CatalogEntry> list() const;
  std::optional<std::string> latest(const std::string& name) const;

  const std::string& dir() const { return dir_; }

private:
  std::string dir_;
};

/// Free-function forms of the catalog operations.
std::string library_save(const ModuleDef& def, const std::string& dir);
ModuleDef library_load(const std::string& dir, const std::string& name,
                       const std::optional<std::string>& revision = std::nullopt);

}  // namespace scengraph
