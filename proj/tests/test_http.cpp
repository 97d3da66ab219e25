#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include "slosim/environment.hpp"
#include "slosim/http_server.hpp"
#include "slosim/metrics_store.hpp"

using namespace slosim;
using nlohmann::json;

namespace {

struct Fixture {
  std::vector<ServiceSpec> specs = default_specs();
  Environment env;
  MetricStore store;
  ControlServer server;
  int port;
  httplib::Client client;

  Fixture()
      : env(specs,
            [] {
              GroundTruthModel t = GroundTruthModel::defaults();
              for (auto& [id, svc] : t.services) svc.noise_sigma = 0.0;
              return t;
            }(),
            0),
        server(env, store),
        port(server.start("127.0.0.1", 0)),
        client("127.0.0.1", port) {}

  json get(const std::string& path, int expected_status) {
    auto res = client.Get(path);
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return json::parse(res->body);
  }

  json post(const std::string& path, const json& body, int expected_status) {
    auto res = client.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return json::parse(res->body);
  }
};

}  // namespace

TEST_CASE("GET /services lists the parameter space and budget") {
  Fixture f;
  json body = f.get("/services", 200);
  CHECK(body.at("budget") == 8.0);
  REQUIRE(body.at("services").size() == 3);
  CHECK(body["services"][0]["id"] == "qr");
  bool found_step = false;
  for (const auto& p : body["services"][1]["parameters"])
    if (p["name"] == "data_quality" && p["step"] == 32.0) found_step = true;
  CHECK(found_step);
}

TEST_CASE("GET /metrics windows records per service") {
  Fixture f;
  json empty = f.get("/metrics?service=qr", 200);
  CHECK(empty.at("records").empty());

  for (int i = 0; i < 5; ++i) f.post("/step", json::object(), 200);

  json all = f.get("/metrics?service=qr", 200);
  CHECK(all.at("service") == "qr");
  REQUIRE(all.at("records").size() == 5);
  CHECK(all["records"][0]["cycle"] == 0);
  CHECK(all["records"][4]["cycle"] == 4);
  CHECK(all["records"][0]["metrics"].contains("completion"));
  CHECK(all["records"][0]["metrics"].contains("cores"));

  json last2 = f.get("/metrics?service=qr&last=2", 200);
  REQUIRE(last2.at("records").size() == 2);
  CHECK(last2["records"][0]["cycle"] == 3);

  f.get("/metrics?service=zz", 404);
  f.get("/metrics", 400);
  f.get("/metrics?service=qr&last=-1", 400);
  f.get("/metrics?service=qr&last=abc", 400);
}

TEST_CASE("POST parameters merges, validates, and applies") {
  Fixture f;
  json ok = f.post("/services/qr/parameters",
                   json{{"data_quality", 500.0}, {"cores", 2.0}}, 200);
  CHECK(ok.at("ok") == true);
  CHECK(ok.at("assignment").at("services").at("qr").at("data_quality") == 500.0);
  CHECK(f.env.current().get("qr", "data_quality") == 500.0);
  // Untouched services keep their values (merge semantics).
  CHECK(f.env.current().get("cv", "data_quality") == 128.0);

  // Partial update: only quality, cores remain.
  json ok2 = f.post("/services/qr/parameters", json{{"data_quality", 600.0}}, 200);
  CHECK(ok2.at("ok") == true);
  CHECK(f.env.current().get("qr", "cores") == 2.0);

  f.post("/services/zz/parameters", json{{"cores", 1.0}}, 404);

  auto raw = f.client.Post("/services/qr/parameters", "{nope", "application/json");
  REQUIRE(raw);
  CHECK(raw->status == 400);

  json bad_type = f.post("/services/qr/parameters",
                         json{{"data_quality", "high"}}, 400);
  CHECK(bad_type.contains("error"));
}

TEST_CASE("off-lattice and out-of-budget posts return violations, not state") {
  Fixture f;
  Assignment before = f.env.current();

  json body = f.post("/services/cv/parameters", json{{"data_quality", 300.0}}, 400);
  CHECK(body.at("ok") == false);
  REQUIRE(body.at("violations").size() == 1);
  CHECK(body["violations"][0]["kind"] == "off-lattice");
  CHECK(body["violations"][0]["service"] == "cv");
  CHECK(body["violations"][0]["variable"] == "data_quality");
  CHECK(body["violations"][0]["value"] == 300.0);
  CHECK(f.env.current() == before);

  json over = f.post("/services/cv/parameters", json{{"cores", 7.9}}, 400);
  CHECK(over.at("ok") == false);
  CHECK(over["violations"][0]["kind"] == "budget-exceeded");
  CHECK(f.env.current() == before);
}

TEST_CASE("GET /fulfillment scores the latest observations") {
  Fixture f;
  json idle = f.get("/fulfillment", 200);
  CHECK(idle.at("global").is_null());
  CHECK(idle.at("cycle").is_null());

  f.post("/step", json::object(), 200);
  json body = f.get("/fulfillment", 200);
  CHECK(body.at("cycle") == 0);
  REQUIRE(body.at("services").size() == 3);
  // Noise-free default initial configuration: the frozen baseline value.
  CHECK(body.at("global").get<double>() ==
        doctest::Approx(0.7501322751322751).epsilon(1e-12));
  CHECK(body["services"]["qr"].get<double>() ==
        doctest::Approx(0.7083333333333334).epsilon(1e-12));
}

TEST_CASE("POST /step advances the cycle and stores records") {
  Fixture f;
  json one = f.post("/step", json::object(), 200);
  CHECK(one.at("cycle") == 0);
  REQUIRE(one.at("records").size() == 3);
  json two = f.post("/step", json::object(), 200);
  CHECK(two.at("cycle") == 1);
  CHECK(f.store.size() == 6);
}
