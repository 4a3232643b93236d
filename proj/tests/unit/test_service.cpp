// Copyright 2026 The Simulacra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <httplib.h>

#include "helpers.hpp"
#include "simulacra/service.hpp"

using namespace simulacra;
using simulacra::testing::psychotherapy_design;
using simulacra::testing::TempDir;

namespace {

ServiceOptions test_options() {
  ServiceOptions o;
  o.clock = [] { return Timestamp{std::chrono::seconds{1000}}; };
  std::uint64_t next = 100;
  o.seed_source = [next]() mutable { return next++; };
  return o;
}

ApiRequest req(std::string method, std::string path, std::string body = {}) {
  ApiRequest r;
  r.method = std::move(method);
  r.path = std::move(path);
  r.body = std::move(body);
  return r;
}

const std::string kSmallConfig = R"({"thread_count": 4, "persona_pool_size": 20, "rng_seed": 5})";

struct Fixture {
  TempDir dir;
  Store store{dir.path()};
  std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>();
  Service service{store, make_mock_gateway(audit), test_options()};

  std::string post_design() {
    const auto r = service.handle(req("POST", "/api/designs", Json(psychotherapy_design()).dump()));
    REQUIRE(r.status == 201);
    return r.json()["id"];
  }

  // Runs a job to completion and returns the universe id.
  std::string generate(const std::string& design, const std::string& config = kSmallConfig) {
    const auto r = service.handle(req("POST", "/api/designs/" + design + "/generate", config));
    REQUIRE(r.status == 202);
    const std::string job = r.json()["job_id"];
    REQUIRE(service.wait_idle(std::chrono::seconds(30)));
    const auto j = service.handle(req("GET", "/api/jobs/" + job)).json();
    REQUIRE(j["state"] == "done");
    return j["universe_id"];
  }
};

}  // namespace

TEST_CASE("status codes for engine errors") {
  CHECK(http_status(ErrorCode::kValidation) == 422);
  CHECK(http_status(ErrorCode::kInvalidSpec) == 422);
  CHECK(http_status(ErrorCode::kNotFound) == 404);
  CHECK(http_status(ErrorCode::kConflict) == 409);
  CHECK(http_status(ErrorCode::kBackendUnavailable) == 503);
  CHECK(http_status(ErrorCode::kIntegrity) == 500);
}

TEST_CASE("health, CORS and unknown routes") {
  Fixture f;
  const auto h = f.service.handle(req("GET", "/api/health"));
  CHECK(h.status == 200);
  CHECK(h.json()["status"] == "ok");
  CHECK(h.headers.at("Access-Control-Allow-Origin") == "*");
  CHECK(f.service.handle(req("OPTIONS", "/api/designs")).status == 204);
  const auto missing = f.service.handle(req("GET", "/api/nothing"));
  CHECK(missing.status == 404);
  CHECK(missing.json()["error"]["code"] == "not_found");
}

TEST_CASE("design submission reports every violation") {
  Fixture f;
  const auto bad = f.service.handle(
      req("POST", "/api/designs", R"({"goal": "", "rules": [], "seed_personas": []})"));
  CHECK(bad.status == 422);
  CHECK(bad.json()["error"]["violations"].size() >= 2);
  CHECK(f.service.handle(req("POST", "/api/designs", "{not json")).status == 400);

  const auto id = f.post_design();
  CHECK(f.service.handle(req("GET", "/api/designs")).json()["designs"][0] == id);
  CHECK(f.service.handle(req("GET", "/api/designs/" + id)).json() == Json(psychotherapy_design()));
  CHECK(f.service.handle(req("GET", "/api/designs/d-nope")).status == 404);
}

TEST_CASE("generation job, pagination and persistence") {
  Fixture f;
  const auto design = f.post_design();
  const auto uid = f.generate(design, R"({"thread_count": 5, "persona_pool_size": 20, "rng_seed": 5})");
  CHECK(f.store.has_universe(uid));

  const auto u = f.service.handle(req("GET", "/api/universes/" + uid)).json();
  CHECK(u["threads"].size() == 5);
  CHECK(u["parent_community"] == design);
  CHECK(u["created_at"] == "1970-01-01T00:16:40Z");

  auto page = req("GET", "/api/universes/" + uid + "/threads");
  const auto p1 = f.service.handle(page).json();
  CHECK(p1["total"] == 5);
  CHECK(p1["pages"] == 1);
  CHECK(p1["threads"].size() == 5);
  page.query["page"] = "0";
  CHECK(f.service.handle(page).status == 422);
  page.query["page"] = "2";
  CHECK(f.service.handle(page).json()["threads"].empty());

  const auto list = f.service.handle(req("GET", "/api/universes")).json()["universes"];
  REQUIRE(list.size() == 1);
  CHECK(list[0]["id"] == uid);
  CHECK(f.service.handle(req("GET", "/api/jobs")).json()["jobs"].size() == 1);
  for (const auto& rec : f.audit->records()) CHECK(rec.temperature == 0.7);
}

TEST_CASE("invalid configs are refused before queueing") {
  Fixture f;
  const auto design = f.post_design();
  const auto r = f.service.handle(
      req("POST", "/api/designs/" + design + "/generate", R"({"persona_pool_size": 0})"));
  CHECK(r.status == 422);
  CHECK(r.json()["error"]["code"] == "validation");
  CHECK(f.service.handle(req("GET", "/api/jobs")).json()["jobs"].empty());
  CHECK(f.service.handle(req("GET", "/api/jobs/j-0-none")).status == 404);
  CHECK(f.service.handle(req("POST", "/api/designs/d-nope/generate", "{}")).status == 404);
}

TEST_CASE("failed jobs carry the error") {
  TempDir dir;
  Store store(dir.path());
  auto down = std::make_shared<ScriptedBackend>([](const CompletionRequest&, std::size_t) -> CompletionResult {
    throw TransportError("connection refused");
  });
  auto gateway = std::make_shared<Gateway>(down, BackendConfig{}, std::make_shared<AuditLog>(),
                                           [](std::chrono::milliseconds) {});
  Service service(store, gateway, test_options());
  const auto id = service.handle(req("POST", "/api/designs", Json(psychotherapy_design()).dump()))
                      .json()["id"]
                      .get<std::string>();
  const auto r = service.handle(req("POST", "/api/designs/" + id + "/generate", kSmallConfig));
  REQUIRE(r.status == 202);
  REQUIRE(service.wait_idle(std::chrono::seconds(10)));
  const auto j = service.handle(req("GET", "/api/jobs/" + r.json()["job_id"].get<std::string>())).json();
  CHECK(j["state"] == "failed");
  CHECK(j["error"]["code"] == "backend_unavailable");
  CHECK(j["universe_id"].is_null());
  CHECK(store.list_universes().empty());
}

TEST_CASE("what-if and thread multiverse are stored as branches") {
  Fixture f;
  const auto uid = f.generate(f.post_design());
  const auto universe = f.store.load_universe(uid);
  const auto& thread = universe.threads.front();

  const Json spec{{"thread_id", thread.id()},
                  {"at_utterance_index", 0},
                  {"injected_persona", "Troll:shares trolling comments"},
                  {"seed", 9}};
  const auto w = f.service.handle(req("POST", "/api/universes/" + uid + "/whatif", spec.dump()));
  REQUIRE(w.status == 200);
  CHECK(w.json()["threads"].size() == 3);
  CHECK(w.json()["seed"] == 9);

  const Json mv{{"at_utterance_index", 0}, {"alternatives", 2}};
  const auto m = f.service.handle(
      req("POST", "/api/universes/" + uid + "/threads/" + thread.id() + "/multiverse", mv.dump()));
  REQUIRE(m.status == 200);
  CHECK(m.json()["seed"] == 100);  // first value of the injected seed source
  CHECK(f.service.handle(req("GET", "/api/universes/" + uid + "/branches")).json()["threads"].size() ==
        5);
  CHECK(f.store.load_universe(uid) == universe);

  const Json bad{{"thread_id", "missing"}, {"at_utterance_index", 0}, {"injected_persona", "X:y"}};
  CHECK(f.service.handle(req("POST", "/api/universes/" + uid + "/whatif", bad.dump())).status == 404);
  const Json out_of_range{{"thread_id", thread.id()}, {"at_utterance_index", 50},
                          {"injected_persona", "X:y"}};
  CHECK(f.service.handle(req("POST", "/api/universes/" + uid + "/whatif", out_of_range.dump()))
            .status == 422);

  std::size_t multiverse_calls = 0;
  for (const auto& rec : f.audit->records()) {
    if (rec.operation == "multiverse_thread") {
      ++multiverse_calls;
      CHECK(rec.temperature == 0.8);
    } else {
      CHECK(rec.temperature == 0.7);
    }
  }
  CHECK(multiverse_calls > 0);
}

TEST_CASE("community multiverse creates a sibling universe") {
  Fixture f;
  const auto design = f.post_design();
  const auto uid = f.generate(design);
  const Json body{{"universe_id", uid}, {"seed", 77}};
  const auto r = f.service.handle(req("POST", "/api/designs/" + design + "/multiverse", body.dump()));
  REQUIRE(r.status == 202);
  REQUIRE(f.service.wait_idle(std::chrono::seconds(30)));
  auto q = req("GET", "/api/universes");
  q.query["parent_community"] = design;
  const auto list = f.service.handle(q).json()["universes"];
  REQUIRE(list.size() == 2);
  CHECK(list[0]["id"] == uid);
  CHECK(list[1]["rng_seed"] == 77);
  CHECK(list[1]["thread_count"] == 4);
}

TEST_CASE("idempotency keys replay the first response") {
  Fixture f;
  auto r = req("POST", "/api/designs", Json(psychotherapy_design()).dump());
  r.headers["idempotency-key"] = "abc";
  const auto first = f.service.handle(r);
  const auto second = f.service.handle(r);
  CHECK(first.status == 201);
  CHECK(second.status == 201);
  CHECK(second.body == first.body);
  CHECK(second.headers.at("Idempotent-Replayed") == "true");
  r.body = R"({"goal": "x"})";
  CHECK(f.service.handle(r).status == 409);
}

TEST_CASE("bearer token") {
  TempDir dir;
  Store store(dir.path());
  auto opts = test_options();
  opts.token = "s3cret";
  Service service(store, make_mock_gateway(), opts);
  auto r = req("GET", "/api/health");
  CHECK(service.handle(r).status == 401);
  r.headers["authorization"] = "Bearer wrong";
  CHECK(service.handle(r).status == 401);
  r.headers["authorization"] = "Bearer s3cret";
  CHECK(service.handle(r).status == 200);
}

TEST_CASE("served over HTTP") {
  Fixture f;
  HttpServer server(f.service);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);

  const auto health = client.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  const auto created =
      client.Post("/api/designs", Json(psychotherapy_design()).dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = Json::parse(created->body)["id"];

  const auto job = client.Post("/api/designs/" + id + "/generate", kSmallConfig, "application/json");
  REQUIRE(job);
  CHECK(job->status == 202);
  REQUIRE(f.service.wait_idle(std::chrono::seconds(30)));
  const auto state =
      client.Get("/api/jobs/" + std::string(Json::parse(job->body)["job_id"]));
  REQUIRE(state);
  const auto uid = Json::parse(state->body)["universe_id"].get<std::string>();

  const auto page = client.Get("/api/universes/" + uid + "/threads?page=1");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(Json::parse(page->body)["threads"].size() == 4);

  httplib::Headers headers{{"Idempotency-Key", "k1"}};
  const auto a = client.Post("/api/designs", headers, Json(psychotherapy_design()).dump(),
                             "application/json");
  const auto b = client.Post("/api/designs", headers, Json(psychotherapy_design()).dump(),
                             "application/json");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->get_header_value("Idempotent-Replayed") == "true");
  server.stop();
}
