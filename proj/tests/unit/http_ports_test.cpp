#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "rexha/error.hpp"
#include "rexha/http_ports.hpp"
#include "rexha/profiler.hpp"
#include "rexha/prompt.hpp"

// after Eigen: <resolv.h> defines _res. Must match the core library's build.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace {

using namespace rexha::http;
using nlohmann::json;
using rexha::Error;
using rexha::ErrorKind;

class LocalServer {
 public:
  LocalServer() {
    svr_.Post("/gen", [this](const httplib::Request& req, httplib::Response& res) {
      remember(req);
      res.set_content(R"({"text":"generated"})", "application/json");
    });
    svr_.Post("/summ", [this](const httplib::Request& req, httplib::Response& res) {
      remember(req);
      if (flaky_.fetch_add(1) < 2) {
        res.status = 503;
        return;
      }
      res.set_content(json{{"summary", "ok:" + req.get_header_value("Authorization")}}.dump(), "application/json");
    });
    svr_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
      const auto in = json::parse(req.body).at("inputs");
      json vectors = json::array();
      for (std::size_t k = 0; k < in.size(); ++k) vectors.push_back({static_cast<double>(k), 1.0});
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    svr_.Post("/judge", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"score":42.5})", "application/json");
    });
    svr_.Post("/forbidden", [](const httplib::Request&, httplib::Response& res) {
      res.status = 403;
      res.set_content("no", "text/plain");
    });
    svr_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>", "text/html");
    });
    svr_.Post("/nofield", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"other":1})", "application/json");
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }

  ~LocalServer() {
    svr_.stop();
    thread_.join();
  }

  Endpoint endpoint(const std::string& path, const std::string& env = "REXHA_TEST_UNSET_KEY") const {
    return Endpoint{"http://127.0.0.1:" + std::to_string(port_) + path, "m1", std::chrono::seconds(5), env};
  }

  json last_body() {
    std::lock_guard lock(mu_);
    return json::parse(bodies_.back());
  }
  std::size_t requests() {
    std::lock_guard lock(mu_);
    return bodies_.size();
  }

 private:
  void remember(const httplib::Request& req) {
    std::lock_guard lock(mu_);
    bodies_.push_back(req.body);
  }

  httplib::Server svr_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_{0};
  std::mutex mu_;
  std::vector<std::string> bodies_;
};

TEST(ParseUrl, SplitsOriginAndPath) {
  EXPECT_EQ(parse_url("http://h:8/a/b").origin, "http://h:8");
  EXPECT_EQ(parse_url("http://h:8/a/b").path, "/a/b");
  EXPECT_EQ(parse_url("https://h").path, "/");
  EXPECT_THROW(parse_url("ftp://h/x"), Error);
  EXPECT_THROW(parse_url("h/x"), Error);
  EXPECT_THROW(parse_url("http:///x"), Error);
}

TEST(HttpPorts, GeneratorPayload) {
  LocalServer server;
  HttpGenerator gen(server.endpoint("/gen"));
  rexha::prompt::PromptBundle b;
  b.user_id = "u";
  b.item_id = "i";
  b.text = "prompt text";
  b.sidecar = {{"<USER_EMBED>", {1.0, 2.0}}};
  EXPECT_EQ(gen.generate(b, rexha::prompt::GenerationSettings{0.0, 77}), "generated");
  const auto body = server.last_body();
  EXPECT_EQ(body.at("prompt"), "prompt text");
  EXPECT_EQ(body.at("temperature").get<double>(), 0.0);
  EXPECT_EQ(body.at("max_tokens").get<int>(), 77);
  EXPECT_EQ(body.at("model"), "m1");
  EXPECT_EQ(body.at("embeddings").at("<USER_EMBED>"), json::array({1.0, 2.0}));
}

TEST(HttpPorts, TransientFailuresRetriedAndKeyForwarded) {
  LocalServer server;
  ::setenv("REXHA_TEST_KEY", "sekrit", 1);
  HttpSummarizer summ(server.endpoint("/summ", "REXHA_TEST_KEY"), 0.0, 1000);
  const std::vector<std::string> texts = {"a", "b"};
  rexha::profiler::CallOptions opts;
  opts.retry = rexha::RetryPolicy::immediate(3);
  EXPECT_EQ(rexha::profiler::summarize_group(summ, texts, "sum up", opts), "ok:Bearer sekrit");
  EXPECT_EQ(server.requests(), 3u);
  const auto body = server.last_body();
  EXPECT_EQ(body.at("instruction"), "sum up");
  EXPECT_EQ(body.at("inputs"), json::array({"a", "b"}));
  ::unsetenv("REXHA_TEST_KEY");
}

TEST(HttpPorts, EmbedderAndJudge) {
  LocalServer server;
  HttpEmbedder emb(server.endpoint("/embed"), 2);
  const std::vector<std::string> texts = {"x", "y", "z"};
  const auto v = emb.embed(texts);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[2], (std::vector<float>{2.0f, 1.0f}));
  HttpJudge judge(server.endpoint("/judge"), 0.0);
  EXPECT_DOUBLE_EQ(judge.score("i", "r", "c"), 42.5);
}

TEST(HttpPorts, ErrorMapping) {
  LocalServer server;
  const auto kind = [](const Endpoint& e) {
    try {
      HttpJudge(e, 0.0).score("i", "r", "c");
    } catch (const Error& err) {
      return err.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind(server.endpoint("/forbidden")), ErrorKind::kValidation);
  EXPECT_EQ(kind(server.endpoint("/garbage")), ErrorKind::kParse);
  EXPECT_EQ(kind(server.endpoint("/nofield")), ErrorKind::kParse);
  EXPECT_EQ(kind(Endpoint{"http://127.0.0.1:1/x", "m", std::chrono::seconds(1)}), ErrorKind::kTransport);
}

}  // namespace
