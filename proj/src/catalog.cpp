#include "scengraph/catalog.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "scengraph/document.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"

namespace scengraph {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void check_name(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == "." ||
      name == "..")
    fail(ErrorCode::InvalidArgument, "invalid module name '" + name + "'");
}

std::vector<CatalogEntry> read_index(const fs::path& index_path) {
  std::vector<CatalogEntry> entries;
  std::error_code ec;
  if (!fs::exists(index_path, ec)) return entries;
  auto doc = nlohmann::json::parse(read_text_file(index_path.string()), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("modules"))
    fail(ErrorCode::IoError, "corrupt catalog index " + index_path.string());
  for (const auto& m : doc["modules"]) {
    CatalogEntry e;
    e.name = m.value("name", "");
    e.revision = m.value("revision", "");
    for (const auto& r : m.value("roles", nlohmann::json::array())) e.roles.push_back(r.get<std::string>());
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_index(const fs::path& index_path, const std::vector<CatalogEntry>& entries) {
  ojson doc = ojson::object();
  doc["format_version"] = std::string(kFormatVersion);
  ojson mods = ojson::array();
  for (const auto& e : entries) mods.push_back(ojson{{"name", e.name}, {"revision", e.revision}, {"roles", e.roles}});
  doc["modules"] = std::move(mods);
  // Write-then-rename keeps readers from seeing a torn index.
  const auto tmp = index_path.string() + ".tmp";
  write_text_file(tmp, doc.dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, index_path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot update " + index_path.string() + ": " + ec.message());
}

}  // namespace

std::optional<std::string> Catalog::latest(const std::string& name) const {
  std::optional<std::string> rev;
  for (const auto& e : read_index(fs::path(dir_) / "index"))
    if (e.name == name) rev = e.revision;
  return rev;
}

std::vector<CatalogEntry> Catalog::list() const { return read_index(fs::path(dir_) / "index"); }

std::string Catalog::save(const ModuleDef& def, const std::optional<std::string>& expected_latest) const {
  check_name(def.name);
  ModuleDef stored = def;
  stored.revision = compute_revision(def);
  if (!def.revision.empty() && def.revision != stored.revision)
    fail(ErrorCode::Conflict, "module '" + def.name + "' carries revision " + def.revision +
                                  " but its content hashes to " + stored.revision);

  std::error_code ec;
  const fs::path root(dir_);
  fs::create_directories(root / "modules" / def.name, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create catalog directory: " + ec.message());

  auto entries = read_index(root / "index");
  std::optional<std::string> current;
  for (const auto& e : entries)
    if (e.name == def.name) current = e.revision;
  if (expected_latest && current != expected_latest)
    fail(ErrorCode::Conflict, "module '" + def.name + "' is at revision " + current.value_or("<none>") +
                                  ", expected " + *expected_latest);

  const fs::path file = root / "modules" / def.name / stored.revision;
  const std::string text = serialize_module(stored);
  if (fs::exists(file, ec)) {
    if (read_text_file(file.string()) != text)
      fail(ErrorCode::Conflict, "revision file " + file.string() + " exists with different content");
  } else {
    write_text_file(file.string(), text);
  }
  const bool indexed = std::any_of(entries.begin(), entries.end(), [&](const CatalogEntry& e) {
    return e.name == def.name && e.revision == stored.revision;
  });
  if (!indexed || current != stored.revision) {
    // Re-saving an older revision makes it the latest again.
    std::erase_if(entries, [&](const CatalogEntry& e) { return e.name == def.name && e.revision == stored.revision; });
    entries.push_back(CatalogEntry{def.name, stored.revision, def.actor_roles});
    write_index(root / "index", entries);
  }
  return stored.revision;
}

ModuleDef Catalog::load(const std::string& name, const std::optional<std::string>& revision) const {
  check_name(name);
  std::optional<std::string> rev = revision;
  if (!rev || rev->empty()) rev = latest(name);
  if (!rev) fail(ErrorCode::NotFound, "module '" + name + "' is not in catalog " + dir_);
  check_name(*rev);
  const fs::path file = fs::path(dir_) / "modules" / name / *rev;
  std::error_code ec;
  if (!fs::exists(file, ec)) fail(ErrorCode::NotFound, "module '" + name + "' revision " + *rev + " not found");
  return parse_module(read_text_file(file.string()));
}

std::string library_save(const ModuleDef& def, const std::string& dir) { return Catalog(dir).save(def); }

ModuleDef library_load(const std::string& dir, const std::string& name, const std::optional<std::string>& revision) {
  return Catalog(dir).load(name, revision);
}

}  // namespace scengraph
