#include "service.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

namespace scengraph::serve {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Unwinds a handler with an API status and message.
struct Failure {
  sg_status status;
  std::string message;
};

void check(sg_status s) {
  if (s != SG_OK) throw Failure{s, sg_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  sg_string_free(s);
  return out;
}

struct ScenarioDel {
  void operator()(sg_scenario* s) const { sg_scenario_destroy(s); }
};
struct TraceDel {
  void operator()(sg_trace* t) const { sg_trace_destroy(t); }
};
using Scenario = std::unique_ptr<sg_scenario, ScenarioDel>;
using Trace = std::unique_ptr<sg_trace, TraceDel>;

int http_status(sg_status s) {
  switch (s) {
    case SG_ERR_PARSE:
    case SG_ERR_SCHEMA:
    case SG_ERR_INVALID_ARGUMENT:
    case SG_ERR_INVALID_CONFIG:
    case SG_ERR_OUT_OF_RANGE:
    case SG_ERR_UNKNOWN_RULE: return 400;
    case SG_ERR_NOT_FOUND:
    case SG_ERR_UNKNOWN_MODULE: return 404;
    case SG_ERR_CONFLICT: return 409;
    case SG_ERR_IO:
    case SG_ERR_INTERNAL: return 500;
    default: return 422;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

/// Wraps a handler so API failures and bad bodies become structured errors.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Failure& e) {
      send_error(res, http_status(e.status), sg_status_name(e.status), e.message);
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const Workspace::StaleRevision& e) {
      send_json(res, 409,
                {{"error", {{"code", "Conflict"}, {"message", "stale revision"}, {"current_revision", e.current}}}});
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{SG_ERR_IO, "cannot read " + p.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file so readers never see a partial document.
void write_atomic(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Failure{SG_ERR_IO, "cannot write " + tmp.string()};
  }
  fs::rename(tmp, p);
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  return true;
}

}  // namespace

Workspace::Workspace(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path Workspace::path(const std::string& id, const char* suffix) const { return dir_ / (id + suffix); }

bool Workspace::exists(const std::string& id) const {
  return valid_id(id) && fs::is_regular_file(path(id, ".scenario.json"));
}

StoredScenario Workspace::create(const std::string& document) {
  std::lock_guard lock(mu_);
  long n = 1;
  while (exists("s" + std::to_string(n))) ++n;
  StoredScenario s{"s" + std::to_string(n), 1, document};
  write_atomic(path(s.id, ".scenario.json"), document);
  write_atomic(path(s.id, ".rev"), "1\n");
  return s;
}

std::optional<StoredScenario> Workspace::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (!exists(id)) return std::nullopt;
  StoredScenario s{id, 1, read_file(path(id, ".scenario.json"))};
  // Documents dropped into the workspace by hand start at revision 1.
  if (fs::is_regular_file(path(id, ".rev"))) s.revision = std::stol(read_file(path(id, ".rev")));
  return s;
}

std::optional<StoredScenario> Workspace::update(const std::string& id, long expected_revision,
                                                const std::string& document) {
  std::lock_guard lock(mu_);
  if (!exists(id)) return std::nullopt;
  long current = 1;
  if (fs::is_regular_file(path(id, ".rev"))) current = std::stol(read_file(path(id, ".rev")));
  if (current != expected_revision) throw StaleRevision{current};
  StoredScenario s{id, current + 1, document};
  write_atomic(path(id, ".scenario.json"), document);
  write_atomic(path(id, ".rev"), std::to_string(s.revision) + "\n");
  return s;
}

std::optional<std::string> Workspace::layout(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (!exists(id)) return std::nullopt;
  if (!fs::is_regular_file(path(id, ".layout.json"))) return std::string("{}");
  return read_file(path(id, ".layout.json"));
}

bool Workspace::set_layout(const std::string& id, const std::string& layout) {
  std::lock_guard lock(mu_);
  if (!exists(id)) return false;
  write_atomic(path(id, ".layout.json"), layout);
  return true;
}

std::string Workspace::list() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const std::string file = entry.path().filename().string();
    const std::string suffix = ".scenario.json";
    if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    out.push_back(file.substr(0, file.size() - suffix.size()));
  }
  std::sort(out.begin(), out.end());
  return out.dump();
}

Service::Service(ServiceOptions options) : options_(std::move(options)), store_(options_.workspace) {
  check(sg_context_create(&ctx_));
  if (!options_.config_json.empty()) {
    if (sg_context_load_config(ctx_, options_.config_json.c_str()) != SG_OK) {
      const std::string message = sg_last_error();
      sg_context_destroy(ctx_);
      throw std::runtime_error(message);
    }
  }
}

Service::~Service() { sg_context_destroy(ctx_); }

void Service::mount(httplib::Server& server) {
  const sg_context* ctx = ctx_;
  Workspace& store = store_;
  const fs::path catalog = options_.catalog;
  std::mutex& library_mu = library_mu_;

  server.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type, If-Match"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto parse = [ctx](const std::string& text) {
    sg_scenario* raw = nullptr;
    check(sg_scenario_parse(ctx, text.c_str(), &raw));
    return Scenario(raw);
  };
  auto canonical = [](const sg_scenario* s) {
    char* out = nullptr;
    check(sg_scenario_serialize(s, &out));
    return take(out);
  };
  auto stored = [&store, parse](const httplib::Request& req) {
    const auto id = req.path_params.at("id");
    auto s = store.get(id);
    if (!s) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
    return parse(s->document);
  };

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", sg_version()}});
  });

  server.Get("/scenarios", guarded([&store](const httplib::Request&, httplib::Response& res) {
               res.set_content(store.list(), "application/json");
             }));

  server.Post("/scenarios", guarded([&store, parse, canonical](const httplib::Request& req, httplib::Response& res) {
                auto s = parse(req.body);
                const auto saved = store.create(canonical(s.get()));
                send_json(res, 201, {{"id", saved.id}, {"revision", saved.revision}});
              }));

  server.Get("/scenarios/:id", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto id = req.path_params.at("id");
               auto s = store.get(id);
               if (!s) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
               send_json(res, 200, {{"id", s->id}, {"revision", s->revision}, {"document", json::parse(s->document)}});
             }));

  server.Put("/scenarios/:id",
             guarded([&store, parse, canonical](const httplib::Request& req, httplib::Response& res) {
               const auto id = req.path_params.at("id");
               const auto body = json::parse(req.body);
               if (!body.contains("revision") || !body["revision"].is_number_integer() || !body.contains("document"))
                 throw Failure{SG_ERR_INVALID_ARGUMENT, "body must be {\"revision\": n, \"document\": {...}}"};
               auto s = parse(body["document"].dump());
               auto saved = store.update(id, body["revision"].get<long>(), canonical(s.get()));
               if (!saved) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
               send_json(res, 200, {{"id", saved->id}, {"revision", saved->revision}});
             }));

  server.Get("/scenarios/:id/layout", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto id = req.path_params.at("id");
               auto layout = store.layout(id);
               if (!layout) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
               res.set_content(*layout, "application/json");
             }));

  server.Put("/scenarios/:id/layout", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto id = req.path_params.at("id");
               const auto layout = json::parse(req.body);
               if (!layout.is_object()) throw Failure{SG_ERR_INVALID_ARGUMENT, "layout must be an object"};
               if (!store.set_layout(id, layout.dump(2) + "\n")) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
               res.status = 204;
             }));

  server.Post("/scenarios/:id/validate",
              guarded([ctx, &store, parse, stored](const httplib::Request& req, httplib::Response& res) {
                const auto id = req.path_params.at("id");
                if (!store.get(id)) throw Failure{SG_ERR_NOT_FOUND, "unknown scenario " + id};
                // A non-empty body is the editor's unsaved state.
                auto s = req.body.empty() ? stored(req) : parse(req.body);
                const int strict = req.get_param_value("strict") == "1" || req.get_param_value("strict") == "true";
                char* report = nullptr;
                int valid = 0;
                check(sg_validate(ctx, s.get(), strict, &report, &valid));
                res.set_content(take(report), "application/json");
              }));

  server.Post("/scenarios/:id/plan", guarded([ctx, stored](const httplib::Request& req, httplib::Response& res) {
                auto s = stored(req);
                char* plan = nullptr;
                std::uint64_t total = 0;
                check(sg_plan(ctx, s.get(), &plan, &total));
                res.set_content(take(plan), "application/json");
              }));

  server.Post("/scenarios/:id/export", guarded([ctx, stored](const httplib::Request& req, httplib::Response& res) {
                auto s = stored(req);
                if (!req.body.empty() && !json::parse(req.body).is_object())
                  throw Failure{SG_ERR_INVALID_ARGUMENT, "export options must be an object"};
                char* xml = nullptr;
                check(sg_export_xosc(ctx, s.get(), req.body.empty() ? nullptr : req.body.c_str(), &xml));
                res.set_content(take(xml), "application/xml");
              }));

  server.Post("/scenarios/:id/run", guarded([ctx, stored](const httplib::Request& req, httplib::Response& res) {
                auto s = stored(req);
                const json body = req.body.empty() ? json::object() : json::parse(req.body);
                if (!body.is_object()) throw Failure{SG_ERR_INVALID_ARGUMENT, "run body must be an object"};
                sg_tick_config cfg;
                sg_tick_config_default(&cfg);
                const json tc = body.value("tick_config", json::object());
                cfg.dt = tc.value("dt", cfg.dt);
                cfg.max_time = tc.value("max_time", cfg.max_time);
                cfg.seed = tc.value("seed", cfg.seed);
                cfg.sample_stride = tc.value("sample_stride", cfg.sample_stride);
                sg_scenario* raw = nullptr;
                if (body.contains("index")) {
                  check(sg_enumerate(ctx, s.get(), body["index"].get<std::uint64_t>(), &raw));
                  s.reset(raw);
                } else if (body.contains("sample_seed")) {
                  check(sg_sample(ctx, s.get(), body["sample_seed"].get<std::uint64_t>(), &raw));
                  s.reset(raw);
                }
                sg_trace* t = nullptr;
                check(sg_run(ctx, s.get(), &cfg, &t));
                Trace trace(t);
                char* text = nullptr;
                check(sg_trace_to_json(trace.get(), &text));
                res.set_content(take(text), "application/json");
              }));

  server.Get("/library/modules", guarded([catalog](const httplib::Request&, httplib::Response& res) {
               char* out = nullptr;
               check(sg_library_list(catalog.string().c_str(), &out));
               res.set_content(take(out), "application/json");
             }));

  server.Get("/library/modules/:name", guarded([ctx, catalog](const httplib::Request& req, httplib::Response& res) {
               const auto revision = req.get_param_value("revision");
               char* out = nullptr;
               check(sg_library_load(ctx, catalog.string().c_str(), req.path_params.at("name").c_str(),
                                     revision.empty() ? nullptr : revision.c_str(), &out));
               res.set_content(take(out), "application/json");
             }));

  server.Post("/library/modules",
              guarded([ctx, catalog, &library_mu](const httplib::Request& req, httplib::Response& res) {
                const auto expected = req.get_param_value("expected");
                std::lock_guard lock(library_mu);
                char* revision = nullptr;
                check(sg_library_save(ctx, catalog.string().c_str(), req.body.c_str(),
                                      expected.empty() ? nullptr : expected.c_str(), &revision));
                const std::string rev = take(revision);
                send_json(res, 201, {{"name", json::parse(req.body).value("name", "")}, {"revision", rev}});
              }));
}

}  // namespace scengraph::serve
