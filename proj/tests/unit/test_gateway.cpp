#include <doctest.h>

#include <cstdlib>
#include <thread>

#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/prompt.hpp"
#include "draftcheck/gateway/gateway.hpp"
#include "draftcheck/gateway/http_provider.hpp"
#include "draftcheck/mock/mock_provider.hpp"
#include "stub_llm.hpp"

using namespace draftcheck;
using namespace draftcheck::gateway;
using fixtures::StubLlm;

namespace {

constexpr const char* kKeyVar = "DRAFTCHECK_TEST_LLM_KEY";

ProviderConfig http_config(const StubLlm& stub, PromptVersion v = PromptVersion::V1) {
  ::setenv(kKeyVar, "sk-test-123", 1);
  ProviderConfig c;
  c.provider_kind = ProviderKind::HttpLlm;
  c.endpoint_url = stub.url();
  c.model_name = "stub-model";
  c.api_key_ref = kKeyVar;
  c.timeout = std::chrono::milliseconds(2000);
  c.max_retries = 2;
  c.prompt_version = v;
  return c;
}

struct RecordingSleeper {
  std::shared_ptr<std::vector<std::chrono::milliseconds>> delays =
      std::make_shared<std::vector<std::chrono::milliseconds>>();
  Sleeper fn() {
    auto d = delays;
    return [d](std::chrono::milliseconds ms) { d->push_back(ms); };
  }
};

FeedbackGateway make_gateway(const ProviderConfig& c, RecordingSleeper& sleeper) {
  return FeedbackGateway(c, make_provider(c), sleeper.fn());
}

const ReportDraft kDraft{"- wrote the test plan (evidence: report)\n", "s1", "r1", {}};

}  // namespace

TEST_CASE("config validation") {
  ProviderConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.provider_id() == "mock-rules");
  c.provider_kind = ProviderKind::HttpLlm;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.endpoint_url = "http://localhost:1/x";
  c.model_name = "m";
  CHECK_THROWS_AS(c.validate(), ConfigError);  // api_key_ref still missing
  c.api_key_ref = "K";
  CHECK_NOTHROW(c.validate());
  CHECK(c.provider_id() == "m");
  c.timeout = std::chrono::milliseconds(0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.timeout = std::chrono::milliseconds(1);
  c.max_retries = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("url parsing") {
  auto u = parse_url("https://api.example.com/v1/chat/completions");
  CHECK(u.scheme == "https");
  CHECK(u.host == "api.example.com");
  CHECK(u.port == 443);
  CHECK(u.path == "/v1/chat/completions");
  u = parse_url("http://127.0.0.1:8081");
  CHECK(u.port == 8081);
  CHECK(u.path == "/");
  CHECK_THROWS_AS(parse_url("ftp://x/y"), ConfigError);
  CHECK_THROWS_AS(parse_url("localhost:80/x"), ConfigError);
  CHECK_THROWS_AS(parse_url("http://h:99999/"), ConfigError);
}

TEST_CASE("mock provider passes straight through") {
  ProviderConfig c;
  c.prompt_version = PromptVersion::V2;
  const auto table = request_feedback(c, kDraft);
  CHECK(table.raw_response == mock::mock_feedback(kDraft, PromptVersion::V2));
  CHECK(table.provider_id == "mock-rules");
  CHECK(table.prompt_version == PromptVersion::V2);
}

TEST_CASE("http provider sends one system and one user message with temperature 0") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) {
    res.set_content(StubLlm::completion(R"({"tasks":[]})"), "application/json");
  });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub, PromptVersion::V2), sleeper);
  const auto table = gw.request_feedback(kDraft);
  CHECK(table.tasks.empty());
  CHECK(table.provider_id == "stub-model");
  CHECK(table.raw_response == R"({"tasks":[]})");
  REQUIRE(stub.hits() == 1);

  const auto body = nlohmann::json::parse(stub.bodies()[0]);
  CHECK(body["model"] == "stub-model");
  CHECK(body["temperature"] == 0);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == std::string(system_prompt(PromptVersion::V2)));
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == kDraft.text);
  CHECK(stub.auth_headers()[0] == "Bearer sk-test-123");
  CHECK(sleeper.delays->empty());
}

TEST_CASE("transient failures are retried up to max_retries with exponential backoff") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 500; });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  try {
    gw.request_feedback(kDraft);
    FAIL("expected ProviderUnavailable");
  } catch (const ProviderUnavailable& e) {
    CHECK(e.attempts == 3);
  }
  CHECK(stub.hits() == 3);
  REQUIRE(sleeper.delays->size() == 2);
  CHECK((*sleeper.delays)[0].count() >= 800);
  CHECK((*sleeper.delays)[0].count() <= 1200);
  CHECK((*sleeper.delays)[1].count() >= 1600);
  CHECK((*sleeper.delays)[1].count() <= 2400);
}

TEST_CASE("recovery after transient errors") {
  for (int code : {408, 429, 503}) {
    StubLlm stub([code](int hit, const httplib::Request&, httplib::Response& res) {
      if (hit == 1) {
        res.status = code;
        return;
      }
      res.set_content(StubLlm::completion(R"({"tasks":[{"Task":"a b c","Evidence":"code","Status":"OK"}]})"),
                      "application/json");
    });
    RecordingSleeper sleeper;
    auto gw = make_gateway(http_config(stub), sleeper);
    CHECK(gw.request_feedback(kDraft).tasks.size() == 1);
    CHECK(stub.hits() == 2);
    CHECK(sleeper.delays->size() == 1);
  }
}

TEST_CASE("unparseable responses are never retried and keep the raw text") {
  const std::string content = "I could not find any tasks, sorry! {\"tasks\": \"none\"}";
  StubLlm stub([&](int, const httplib::Request&, httplib::Response& res) {
    res.set_content(StubLlm::completion(content), "application/json");
  });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  try {
    gw.request_feedback(kDraft);
    FAIL("expected ProviderResponseUnparseable");
  } catch (const ProviderResponseUnparseable& e) {
    CHECK(e.raw_response == content);
    CHECK(e.excerpt().size() <= e.raw_response.size());
  }
  CHECK(stub.hits() == 1);
  CHECK(sleeper.delays->empty());
}

TEST_CASE("non chat-completions bodies are parsed and kept whole") {
  const std::string body = "{\"tasks\": [{\"Task\": \"wrote x y\", \"Evidence\": \"report\", \"Status\": \"ERROR\"}]}";
  StubLlm stub([&](int, const httplib::Request&, httplib::Response& res) {
    res.set_content(body, "application/json");
  });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  const auto table = gw.request_feedback(kDraft);
  CHECK(table.raw_response == body);
  CHECK(table.tasks.at(0).status == TaskStatus::Error);
}

TEST_CASE("credential failures") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 401; });
  RecordingSleeper sleeper;
  auto config = http_config(stub);
  auto gw = make_gateway(config, sleeper);
  CHECK_THROWS_AS(gw.request_feedback(kDraft), AuthFailure);
  CHECK(stub.hits() == 1);

  ::unsetenv(kKeyVar);
  CHECK_THROWS_AS(gw.request_feedback(kDraft), AuthFailure);
  CHECK(stub.hits() == 1);  // no request without a key
}

TEST_CASE("other client errors fail immediately") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 400; });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  CHECK_THROWS_AS(gw.request_feedback(kDraft), ProviderUnavailable);
  CHECK(stub.hits() == 1);
}

TEST_CASE("timeouts count as transient") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(StubLlm::completion(R"({"tasks":[]})"), "application/json");
  });
  RecordingSleeper sleeper;
  auto config = http_config(stub);
  config.timeout = std::chrono::milliseconds(150);
  config.max_retries = 1;
  auto gw = make_gateway(config, sleeper);
  CHECK_THROWS_AS(gw.request_feedback(kDraft), ProviderUnavailable);
  CHECK(stub.hits() == 2);
}

TEST_CASE("connection refused is retried then reported") {
  ProviderConfig c;
  c.provider_kind = ProviderKind::HttpLlm;
  c.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  c.model_name = "m";
  c.api_key_ref = kKeyVar;
  c.max_retries = 1;
  ::setenv(kKeyVar, "k", 1);
  RecordingSleeper sleeper;
  auto gw = make_gateway(c, sleeper);
  CHECK_THROWS_AS(gw.request_feedback(kDraft), ProviderUnavailable);
  CHECK(sleeper.delays->size() == 1);
}

TEST_CASE("invalid drafts never reach the provider") {
  StubLlm stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 500; });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  CHECK_THROWS_AS(gw.request_feedback({"", "s", "r", {}}), EmptyDraft);
  CHECK_THROWS_AS(gw.request_feedback({std::string(2101, 'a'), "s", "r", {}}), DraftTooLong);
  CHECK(stub.hits() == 0);
}

TEST_CASE("backoff delays stay within jitter bounds and the cap") {
  RecordingSleeper sleeper;
  ProviderConfig c;
  FeedbackGateway gw(c, make_provider(c), sleeper.fn(), 99);
  for (int i = 0; i < 200; ++i) {
    for (int retry = 0; retry < 8; ++retry) {
      const double nominal = 1000.0 * std::pow(2.0, retry);
      const auto d = gw.backoff_delay(retry).count();
      CHECK(d <= 30000);
      CHECK(static_cast<double>(d) >= std::min(30000.0, 0.8 * nominal) - 1);
      CHECK(static_cast<double>(d) <= 1.2 * nominal + 1);
    }
  }
  CHECK(gw.backoff_delay(20).count() == 30000);
}

TEST_CASE("concurrent calls share one gateway safely") {
  StubLlm stub([](int, const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const std::string draft = body["messages"][1]["content"];
    res.set_content(StubLlm::completion(
                        nlohmann::json{{"tasks", {{{"Task", draft}, {"Evidence", "code"}, {"Status", "OK"}}}}}.dump()),
                    "application/json");
  });
  RecordingSleeper sleeper;
  auto gw = make_gateway(http_config(stub), sleeper);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      const std::string text = "draft number " + std::to_string(i);
      const auto t = gw.request_feedback({text, "s", "r", {}});
      if (t.tasks.size() == 1 && t.tasks[0].task == text) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 8);
  CHECK(stub.hits() == 8);
}
