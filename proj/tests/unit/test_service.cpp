#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "service.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read(const std::string& rel) {
  std::ifstream in(std::string(SG_SOURCE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Service on an ephemeral port over fresh workspace and catalog directories.
struct Harness {
  Harness() : root(fs::temp_directory_path() / ("scengraph_service_" + std::to_string(::getpid()))) {
    fs::remove_all(root);
    scengraph::serve::ServiceOptions opts;
    opts.workspace = root / "workspace";
    opts.catalog = root / "catalog";
    opts.cors_origin = "http://editor.local";
    service = std::make_unique<scengraph::serve::Service>(opts);
    service->mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  ~Harness() {
    server.stop();
    thread.join();
    fs::remove_all(root);
  }

  std::string create(const std::string& fixture) {
    auto res = client->Post("/scenarios", read("fixtures/" + fixture + ".scenario.json"), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 201);
    return json::parse(res->body)["id"];
  }

  fs::path root;
  httplib::Server server;
  std::unique_ptr<scengraph::serve::Service> service;
  int port = 0;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;
};

}  // namespace

TEST_CASE("scenario store with optimistic revisions") {
  Harness h;
  auto res = h.client->Post("/scenarios", read("fixtures/uis1.scenario.json"), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  const auto created = json::parse(res->body);
  CHECK(created["revision"] == 1);
  const std::string id = created["id"];

  // Same file format as the CLI: the stored document is the canonical text.
  CHECK(read("fixtures/uis1.scenario.json") ==
        [&] {
          std::ifstream in(h.root / "workspace" / (id + ".scenario.json"));
          std::ostringstream ss;
          ss << in.rdbuf();
          return ss.str();
        }());

  res = h.client->Get("/scenarios/" + id);
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto got = json::parse(res->body);
  CHECK(got["revision"] == 1);
  CHECK(got["document"]["name"] == json::parse(read("fixtures/uis1.scenario.json"))["name"]);

  const json put{{"revision", 1}, {"document", got["document"]}};
  res = h.client->Put("/scenarios/" + id, put.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["revision"] == 2);
  res = h.client->Put("/scenarios/" + id, put.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(json::parse(res->body)["error"]["current_revision"] == 2);

  res = h.client->Get("/scenarios/unknown");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = h.client->Put("/scenarios/unknown", put.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = h.client->Post("/scenarios", "{oops", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = h.client->Get("/scenarios");
  REQUIRE(res);
  CHECK(json::parse(res->body) == json::array({id}));
}

TEST_CASE("validate stored and inline documents") {
  Harness h;
  const auto id = h.create("uis1");
  auto res = h.client->Post("/scenarios/" + id + "/validate", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["is_valid"] == true);

  res = h.client->Post("/scenarios/" + id + "/validate", read("fixtures/bad_join.scenario.json"), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto report = json::parse(res->body);
  CHECK(report["is_valid"] == false);
  CHECK(report["findings"][0]["rule_id"] == "R5");

  res = h.client->Post("/scenarios/" + id + "/validate", "{\"nodes\": [", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"]["code"] == "ParseError");
}

TEST_CASE("export and run mirror the CLI artifacts") {
  Harness h;
  const auto id = h.create("uis1");
  auto res = h.client->Post("/scenarios/" + id + "/export", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "application/xml");
  CHECK(res->body == read("fixtures/golden/uis1.xosc"));

  res = h.client->Post("/scenarios/" + id + "/run", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  // Same bytes as the C API (and therefore `scengraph run --out`).
  sg_context* ctx = nullptr;
  REQUIRE(sg_context_create(&ctx) == SG_OK);
  sg_scenario* s = nullptr;
  REQUIRE(sg_scenario_parse(ctx, read("fixtures/uis1.scenario.json").c_str(), &s) == SG_OK);
  sg_tick_config cfg;
  sg_tick_config_default(&cfg);
  sg_trace* t = nullptr;
  REQUIRE(sg_run(ctx, s, &cfg, &t) == SG_OK);
  char* text = nullptr;
  REQUIRE(sg_trace_to_json(t, &text) == SG_OK);
  CHECK(res->body == text);
  sg_string_free(text);
  sg_trace_destroy(t);
  sg_scenario_destroy(s);
  sg_context_destroy(ctx);

  res = h.client->Post("/scenarios/" + id + "/run", R"({"tick_config":{"dt":0.025}})", "application/json");
  REQUIRE(res);
  CHECK(json::parse(res->body)["tick_config"]["dt"] == 0.025);
  res = h.client->Post("/scenarios/" + id + "/run", R"({"tick_config":{"dt":0}})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("level and validation failures are 422") {
  Harness h;
  const auto logical = h.create("uis1_logical");
  auto res = h.client->Post("/scenarios/" + logical + "/export", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  CHECK(json::parse(res->body)["error"]["code"] == "LevelError");

  res = h.client->Post("/scenarios/" + logical + "/run", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  res = h.client->Post("/scenarios/" + logical + "/run", R"({"index":1})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["outcome"]["kind"] == "Collision");

  res = h.client->Post("/scenarios/" + logical + "/plan", "", "application/json");
  REQUIRE(res);
  CHECK(json::parse(res->body)["total_count"] == 12);

  const auto bad = h.create("bad_join");
  res = h.client->Post("/scenarios/" + bad + "/export", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  CHECK(json::parse(res->body)["error"]["code"] == "InvalidScenario");
}

TEST_CASE("module library endpoints") {
  Harness h;
  auto res = h.client->Get("/library/modules");
  REQUIRE(res);
  CHECK(json::parse(res->body).empty());

  const auto module = read("fixtures/modules/crossing_maneuver.module.json");
  res = h.client->Post("/library/modules", module, "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(json::parse(res->body)["revision"] == "60b202a2963d3666");
  res = h.client->Post("/library/modules?expected=0000000000000000", module, "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);

  res = h.client->Get("/library/modules");
  REQUIRE(res);
  CHECK(json::parse(res->body)[0]["name"] == "CrossingManeuver");
  res = h.client->Get("/library/modules/CrossingManeuver");
  REQUIRE(res);
  CHECK(res->body == module);
  res = h.client->Get("/library/modules/Nope");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("layout sidecar leaves the scenario untouched") {
  Harness h;
  const auto id = h.create("uis2");
  const auto doc_path = h.root / "workspace" / (id + ".scenario.json");
  const auto before = fs::last_write_time(doc_path);
  auto res = h.client->Put("/scenarios/" + id + "/layout", R"({"root":{"x":10,"y":20}})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 204);
  res = h.client->Get("/scenarios/" + id + "/layout");
  REQUIRE(res);
  CHECK(json::parse(res->body)["root"]["x"] == 10);
  CHECK(fs::last_write_time(doc_path) == before);
  res = h.client->Get("/scenarios/" + id);
  REQUIRE(res);
  CHECK(json::parse(res->body)["revision"] == 1);
}

TEST_CASE("CORS headers") {
  Harness h;
  auto res = h.client->Get("/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://editor.local");
  res = h.client->Options("/scenarios");
  REQUIRE(res);
  CHECK(res->status == 204);
}
