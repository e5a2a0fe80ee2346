// Copyright 2026 The bosal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "bosal/image.hpp"
#include "bosal/model.hpp"
#include "doctest.h"
#include "httplib.h"
#include <nlohmann/json.hpp>

using bosal::BoundingBox;
using bosal::Image;
using bosal::ModelHandle;
using bosal::QueryError;

namespace {

const std::string kStub = std::string(TEST_DATA_DIR) + "/stub_model.py";

std::vector<std::string> stub_argv(const std::string& mode = "mean") {
  return {"python3", kStub, mode};
}

}  // namespace

TEST_CASE("synthetic box scores the visible fraction") {
  const BoundingBox box{8, 8, 16, 16};
  const ModelHandle model = bosal::make_synthetic_box(64, 64, box);
  const Image clean = bosal::uniform_random_image(64, 64, 1, 1, bosal::kDefaultFill);
  CHECK(bosal::score(model, clean) == 1.0);

  // Fully blanked box: a 16-size window centred mid-box covers it exactly.
  const Image covered = bosal::blank_window(clean, 16, 16, 16);
  CHECK(bosal::score(model, covered) == 0.0);

  // Window rows 0..15 cover exactly the top half of the box (rows 8..15).
  const Image half = bosal::blank_window(clean, 16, 8, 16);
  CHECK(bosal::score(model, half) == 0.5);
}

TEST_CASE("synthetic delta forms y = base minus occluded") {
  const BoundingBox box{8, 8, 16, 16};
  const ModelHandle model = bosal::make_synthetic_box(64, 64, box);
  const Image clean = bosal::uniform_random_image(64, 64, 1, 2, bosal::kDefaultFill);

  const Image disjoint = bosal::blank_window(clean, 48, 48, 8);
  const auto d0 = bosal::delta(model, clean, disjoint);
  CHECK(d0.y == 0.0);
  CHECK(d0.base_score == 1.0);
  CHECK(d0.occluded_score == 1.0);

  const Image covering = bosal::blank_window(clean, 16, 16, 32);
  const auto d1 = bosal::delta(model, clean, covering);
  CHECK(d1.y == 1.0);
}

TEST_CASE("synthetic responses grow monotonically with nested windows") {
  const BoundingBox box{20, 20, 24, 24};
  const ModelHandle model = bosal::make_synthetic_box(64, 64, box);
  const Image clean = bosal::uniform_random_image(64, 64, 1, 3, bosal::kDefaultFill);
  double prev = -1.0;
  for (const int s : {4, 8, 16, 24, 32, 48}) {
    const Image occ = bosal::blank_window(clean, 30, 30, s);
    const double y = bosal::delta(model, clean, occ).y;
    CHECK(y >= prev);
    prev = y;
  }
}

TEST_CASE("synthetic scoring is pure") {
  const BoundingBox box{4, 4, 8, 8};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image img = bosal::blank_window(
      bosal::uniform_random_image(32, 32, 1, 4, bosal::kDefaultFill), 6, 6, 5);
  const double first = bosal::score(model, img);
  for (int i = 0; i < 999; ++i) {
    CHECK(bosal::score(model, img) == first);
  }
}

TEST_CASE("the base score is cached per image identity") {
  const BoundingBox box{4, 4, 8, 8};
  const ModelHandle model = bosal::make_synthetic_box(32, 32, box);
  const Image clean = bosal::uniform_random_image(32, 32, 1, 5, bosal::kDefaultFill);
  CHECK(model.query_count() == 0);
  const Image occ1 = bosal::blank_window(clean, 8, 8, 4);
  bosal::delta(model, clean, occ1);
  CHECK(model.query_count() == 2);  // base + occluded
  const Image occ2 = bosal::blank_window(clean, 9, 9, 4);
  bosal::delta(model, clean, occ2);
  CHECK(model.query_count() == 3);  // base was cached
}

TEST_CASE("synthetic models reject mismatched input sizes") {
  const ModelHandle model =
      bosal::make_synthetic_box(64, 64, BoundingBox{0, 0, 8, 8});
  const Image wrong = Image::constant(32, 32, 1, 0.2);
  CHECK_THROWS_AS(bosal::score(model, wrong), std::invalid_argument);
}

TEST_CASE("two-box model blends weighted visibilities") {
  const BoundingBox a{0, 0, 8, 8};
  const BoundingBox b{16, 16, 8, 8};
  const ModelHandle model =
      bosal::make_synthetic_two_box(32, 32, a, 0.75, b, 0.25);
  const Image clean = bosal::uniform_random_image(32, 32, 1, 6, bosal::kDefaultFill);
  CHECK(bosal::score(model, clean) == 1.0);
  const Image blank_a = bosal::blank_window(clean, 4, 4, 8);
  CHECK(bosal::score(model, blank_a) == 0.25);
  const Image blank_b = bosal::blank_window(blank_a, 20, 20, 8);
  CHECK(bosal::score(model, blank_b) == 0.0);
}

TEST_CASE("two-box construction validates weights and overlap") {
  const BoundingBox a{0, 0, 8, 8};
  const BoundingBox b{16, 16, 8, 8};
  CHECK_THROWS_AS(bosal::make_synthetic_two_box(32, 32, a, 0.9, b, 0.2),
                  std::invalid_argument);
  const BoundingBox overlapping{4, 4, 8, 8};
  CHECK_THROWS_AS(
      bosal::make_synthetic_two_box(32, 32, a, 0.5, overlapping, 0.5),
      std::invalid_argument);
}

TEST_CASE("model spec parsing") {
  using std::chrono::seconds;
  const ModelHandle box = bosal::parse_model_spec(
      "synthetic:box:4,5,10,12", 64, 64, "t", bosal::kDefaultFill, seconds(5));
  CHECK(box.kind() == bosal::ModelKind::synthetic_box);

  const ModelHandle two = bosal::parse_model_spec(
      "synthetic:two-box:0,0,8,8,0.6;16,16,8,8,0.4", 64, 64, "t",
      bosal::kDefaultFill, seconds(5));
  CHECK(two.kind() == bosal::ModelKind::synthetic_two_box);

  const ModelHandle cmd = bosal::parse_model_spec(
      "cmd:python3 stub.py", 64, 64, "t", bosal::kDefaultFill, seconds(5));
  CHECK(cmd.kind() == bosal::ModelKind::subprocess);

  const ModelHandle url = bosal::parse_model_spec(
      "url:http://localhost:1/score", 64, 64, "t", bosal::kDefaultFill,
      seconds(5));
  CHECK(url.kind() == bosal::ModelKind::http);

  for (const std::string bad :
       {"synthetic:box:1,2,3", "synthetic:sphere:1,2,3,4", "cmd:", "nope",
        "url:ftp://x"}) {
    CHECK_THROWS_AS(bosal::parse_model_spec(bad, 64, 64, "t",
                                            bosal::kDefaultFill, seconds(5)),
                    std::invalid_argument);
  }
}

TEST_CASE("subprocess adapter round-trips scores") {
  const ModelHandle model =
      bosal::make_subprocess_model(stub_argv(), "class-0");
  const Image img = Image::constant(8, 8, 1, 0.5);
  // Pixel byte 128 everywhere: the stub returns 128/255.
  const double got = bosal::score(model, img);
  CHECK(got == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
  CHECK(bosal::score(model, img) == got);
  CHECK(model.query_count() == 2);
}

TEST_CASE("subprocess adapter times out on slow children") {
  const ModelHandle model = bosal::make_subprocess_model(
      stub_argv("slow"), "t", std::chrono::seconds(1));
  const Image img = Image::constant(4, 4, 1, 0.5);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(bosal::score(model, img), QueryError);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed)
            .count() < 2500);
}

TEST_CASE("subprocess adapter surfaces malformed replies with payload") {
  const ModelHandle model =
      bosal::make_subprocess_model(stub_argv("garbage"), "t");
  const Image img = Image::constant(4, 4, 1, 0.5);
  try {
    bosal::score(model, img);
    FAIL("expected QueryError");
  } catch (const QueryError& e) {
    CHECK(e.payload().find("not json at all") != std::string::npos);
  }
}

TEST_CASE("subprocess adapter rejects mismatched response ids") {
  const ModelHandle model =
      bosal::make_subprocess_model(stub_argv("badid"), "t");
  const Image img = Image::constant(4, 4, 1, 0.5);
  CHECK_THROWS_AS(bosal::score(model, img), QueryError);
}

TEST_CASE("subprocess adapter reports children that exit") {
  const ModelHandle model =
      bosal::make_subprocess_model(stub_argv("die"), "t");
  const Image img = Image::constant(4, 4, 1, 0.5);
  CHECK_THROWS_AS(bosal::score(model, img), QueryError);
}

TEST_CASE("subprocess adapter reports unlaunchable commands") {
  const ModelHandle model = bosal::make_subprocess_model(
      {"/nonexistent/bosal-test-binary"}, "t");
  const Image img = Image::constant(4, 4, 1, 0.5);
  CHECK_THROWS_AS(bosal::score(model, img), QueryError);
}

TEST_CASE("subprocess adapter survives children that never read") {
  // The broken-pipe write must raise QueryError, not a fatal SIGPIPE.
  const ModelHandle model = bosal::make_subprocess_model({"/bin/false"}, "t");
  const Image img = Image::constant(4, 4, 1, 0.5);
  CHECK_THROWS_AS(bosal::score(model, img), QueryError);
}

namespace {

// Serves the stub protocol over HTTP on an ephemeral localhost port.
class ScoreServer {
public:
  ScoreServer() {
    server_.Post("/score", [](const httplib::Request& req,
                              httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const nlohmann::json reply{{"id", body.at("id")}, {"score", 0.25}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("backend exploded", "text/plain");
    });
    server_.Post("/garbage",
                 [](const httplib::Request&, httplib::Response& res) {
                   res.set_content("<html>hi</html>", "text/html");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScoreServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_CASE("http adapter round-trips scores and errors") {
  const ScoreServer server;
  const Image img = Image::constant(4, 4, 1, 0.5);

  const ModelHandle good = bosal::make_http_model(server.url("/score"), "t");
  CHECK(bosal::score(good, img) == 0.25);
  CHECK(good.query_count() == 1);

  const ModelHandle bad = bosal::make_http_model(server.url("/bad"), "t");
  try {
    bosal::score(bad, img);
    FAIL("expected QueryError");
  } catch (const QueryError& e) {
    CHECK(e.payload().find("backend exploded") != std::string::npos);
  }

  const ModelHandle garbage =
      bosal::make_http_model(server.url("/garbage"), "t");
  CHECK_THROWS_AS(bosal::score(garbage, img), QueryError);

  const ModelHandle unreachable =
      bosal::make_http_model("http://127.0.0.1:1/score", "t");
  CHECK_THROWS_AS(bosal::score(unreachable, img), QueryError);
}
