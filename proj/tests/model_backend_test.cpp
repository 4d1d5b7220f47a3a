#include "mtc/model_backend.hpp"

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mtc/errors.hpp"
#include "mtc/http_backend.hpp"
#include "mtc/mock_backend.hpp"
#include "mtc/orchestrator.hpp"
#include "test_util.hpp"

using namespace mtc;
using nlohmann::json;

namespace {

std::vector<Question> fixture_bank() {
    return load_questions(testutil::fixture("fixture_bank.jsonl").string());
}

const Question& by_id(const std::vector<Question>& bank, const std::string& id) {
    for (const Question& q : bank) {
        if (q.id == id) return q;
    }
    throw std::runtime_error("no such question: " + id);
}

std::vector<ChatTurn> question_conversation(const Question& q) {
    return {{Role::user, initial_prompt(q)}};
}

}  // namespace

TEST_CASE("parse_answer handles the structured forms") {
    CHECK(parse_answer("The correct answer: B. Mars.\n\nMars is known as the Red Planet...") ==
          AnswerLabel::B);
    CHECK(parse_answer("The correct answer: A") == AnswerLabel::A);
    CHECK(parse_answer("I believe it is Mars.") == std::nullopt);
    // Last occurrence wins.
    CHECK(parse_answer("The correct answer: A. Hmm, wait.\nThe correct answer: C.") ==
          AnswerLabel::C);
    // Extra spaces before the label are fine; missing label is not.
    CHECK(parse_answer("The correct answer:   D") == AnswerLabel::D);
    CHECK(parse_answer("The correct answer: maybe B") == std::nullopt);
    // A label glued to more letters is not a label.
    CHECK(parse_answer("The correct answer: Obviously") == std::nullopt);
    // An unparseable final marker falls back to an earlier valid one.
    CHECK(parse_answer("The correct answer: B.\nThe correct answer: unclear") == AnswerLabel::B);
}

TEST_CASE("mock: always-correct profile answers the correct label") {
    auto bank = fixture_bank();
    BehaviorProfile profile;
    profile.initial_correct_prob = 1.0;
    MockBackend backend(profile, bank);

    for (const Question& q : bank) {
        ModelReply reply = backend.send(question_conversation(q), {});
        auto parsed = parse_answer(reply.text);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == q.correct);
        std::string expected_fragment =
            std::string(kAnswerMarker) + " " + label_char(q.correct);
        CHECK(reply.text.find(expected_fragment) != std::string::npos);
    }
}

TEST_CASE("mock: initial_correct_prob 0 answers incorrectly") {
    auto bank = fixture_bank();
    BehaviorProfile profile;
    profile.initial_correct_prob = 0.0;
    MockBackend backend(profile, bank);

    for (const Question& q : bank) {
        ModelReply reply = backend.send(question_conversation(q), {});
        auto parsed = parse_answer(reply.text);
        REQUIRE(parsed.has_value());
        CHECK(*parsed != q.correct);
    }
}

TEST_CASE("mock: flip prob 1 on A3 asserts the suggested distractor") {
    auto bank = fixture_bank();
    const Question& q = by_id(bank, "fx-003");  // correct C
    BehaviorProfile profile;
    profile.flip_prob[AttackKind::A3] = 1.0;
    MockBackend backend(profile, bank);
    auto templates = AttackTemplates::builtin();

    auto conversation = question_conversation(q);
    ModelReply initial = backend.send(conversation, {});
    REQUIRE(parse_answer(initial.text) == q.correct);
    conversation.push_back({Role::assistant, initial.text});
    conversation.push_back({Role::user, templates.render(AttackKind::A3, AnswerLabel::B)});

    ModelReply flipped = backend.send(conversation, {});
    CHECK(parse_answer(flipped.text) == AnswerLabel::B);

    // Attacks without flip probability leave the answer alone.
    conversation.back() = {Role::user, templates.render(AttackKind::A1)};
    ModelReply steady = backend.send(conversation, {});
    CHECK(parse_answer(steady.text) == q.correct);
}

TEST_CASE("mock: determinism over 1000 repeated sends") {
    auto bank = fixture_bank();
    BehaviorProfile profile;
    profile.initial_correct_prob = 0.5;
    profile.flip_prob[AttackKind::A1] = 0.5;
    profile.seed = 99;
    MockBackend backend(profile, bank);

    auto conversation = question_conversation(by_id(bank, "fx-007"));
    ModelReply first = backend.send(conversation, {});
    for (int i = 0; i < 999; ++i) {
        ModelReply again = backend.send(conversation, {});
        REQUIRE(again.text == first.text);
        REQUIRE(again.token_logprobs == first.token_logprobs);
    }
}

TEST_CASE("mock: tokenization is substring-faithful and logprobs are non-positive") {
    auto bank = fixture_bank();
    MockBackend backend(BehaviorProfile{}, bank);
    ModelReply reply = backend.send(question_conversation(bank[0]), {});
    REQUIRE(reply.token_logprobs.has_value());
    std::string concat;
    for (const TokenLogprob& t : *reply.token_logprobs) {
        concat += t.token;
        CHECK(t.logprob <= 0.0);
    }
    CHECK(concat == reply.text);
    CHECK(parse_answer(reply.text).has_value());
}

TEST_CASE("mock: emit_logprobs=false yields replies without logprobs") {
    auto bank = fixture_bank();
    BehaviorProfile profile;
    profile.emit_logprobs = false;
    MockBackend backend(profile, bank);
    CHECK_FALSE(backend.supports_logprobs());
    ModelReply reply = backend.send(question_conversation(bank[0]), {});
    CHECK_FALSE(reply.token_logprobs.has_value());
}

TEST_CASE("mock: profile file round trip and validation") {
    testutil::TempDir dir("profiles");
    BehaviorProfile profile;
    profile.profile_id = "flaky";
    profile.initial_correct_prob = 0.9;
    profile.flip_prob[AttackKind::A3] = 0.25;
    profile.recovery_prob = 0.5;
    profile.seed = 7;
    auto path = testutil::write_file(dir.path() / "profiles.jsonl",
                                     serialize_profile(profile) + "\n");
    auto loaded = load_profiles(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].profile_id == "flaky");
    CHECK(loaded[0].flip_prob.at(AttackKind::A3) == 0.25);
    CHECK(serialize_profile(loaded[0]) == serialize_profile(profile));

    auto bad = testutil::write_file(dir.path() / "bad.jsonl",
                                    R"({"profile_id":"x","initial_correct_prob":1.5})"
                                    "\n");
    CHECK_THROWS_AS(load_profiles(bad), FileFormatError);
}

TEST_CASE("http: request body and response parsing") {
    std::vector<ChatTurn> conversation = {{Role::system, "be terse"},
                                          {Role::user, "2+2? The options..."}};
    json body = json::parse(HttpBackend::build_request_body("m1", conversation, true));
    CHECK(body["model"] == "m1");
    CHECK(body["logprobs"] == true);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "2+2? The options...");

    json response = {
        {"choices",
         {{{"message", {{"role", "assistant"}, {"content", "The correct answer: A"}}},
           {"logprobs",
            {{"content", {{{"token", "The"}, {"logprob", -0.1}},
                          {{"token", " correct"}, {"logprob", -0.2}}}}}}}}}};
    ModelReply reply = HttpBackend::parse_response_body(response.dump(), "live:m1");
    CHECK(reply.text == "The correct answer: A");
    REQUIRE(reply.token_logprobs.has_value());
    CHECK(reply.token_logprobs->size() == 2);
    CHECK((*reply.token_logprobs)[1].logprob == -0.2);

    // Shapes without logprobs degrade to an absent field.
    json no_lp = {{"choices", {{{"message", {{"content", "hi"}}}}}}};
    CHECK_FALSE(HttpBackend::parse_response_body(no_lp.dump(), "x").token_logprobs.has_value());

    CHECK_THROWS_AS(HttpBackend::parse_response_body("not json", "x"), MalformedPayloadError);
    CHECK_THROWS_AS(HttpBackend::parse_response_body(R"({"choices":[]})", "x"),
                    MalformedPayloadError);
    json positive_lp = {{"choices",
                         {{{"message", {{"content", "hi"}}},
                           {"logprobs", {{"content", {{{"token", "hi"}, {"logprob", 0.5}}}}}}}}}};
    CHECK_THROWS_AS(HttpBackend::parse_response_body(positive_lp.dump(), "x"),
                    MalformedPayloadError);
}

TEST_CASE("http: unreachable host is a transport failure") {
    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:1/v1";  // nothing listens on port 1
    config.api_key = "k";
    config.model = "m";
    HttpBackend backend(config);
    RequestOptions options;
    options.max_retries = 0;
    options.timeout = std::chrono::milliseconds(2000);
    CHECK_THROWS_AS(backend.send({{Role::user, "hello"}}, options), TransportError);
}

TEST_CASE("http: round trip against a local server, with retry after 500") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++hits;
        json body = json::parse(req.body);
        REQUIRE(req.get_header_value("Authorization") == "Bearer secret");
        REQUIRE(body["model"] == "m-test");
        if (n == 1) {
            res.status = 500;
            res.set_content("transient", "text/plain");
            return;
        }
        json reply = {
            {"choices",
             {{{"message", {{"content", "The correct answer: C"}}},
               {"logprobs", {{"content", {{{"token", "The correct answer: C"}, {"logprob", -0.25}}}}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.api_key = "secret";
    config.model = "m-test";
    HttpBackend backend(config);

    RequestOptions options;
    options.max_retries = 2;
    options.initial_backoff = std::chrono::milliseconds(10);
    ModelReply reply = backend.send({{Role::user, "question text"}}, options);
    CHECK(reply.text == "The correct answer: C");
    REQUIRE(reply.token_logprobs.has_value());
    CHECK(hits.load() == 2);  // one failed attempt, one success -> one reply

    server.stop();
    server_thread.join();
}

TEST_CASE("http: rate-limited requests retry then give up") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 429;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.api_key = "k";
    config.model = "m";
    HttpBackend backend(config);

    RequestOptions options;
    options.max_retries = 2;
    options.initial_backoff = std::chrono::milliseconds(5);
    CHECK_THROWS_AS(backend.send({{Role::user, "q"}}, options), RateLimitedError);
    CHECK(hits.load() == 3);  // initial attempt + 2 retries

    server.stop();
    server_thread.join();
}

TEST_CASE("http: missing env vars fail fast") {
    unsetenv("MTC_BASE_URL");
    unsetenv("MTC_API_KEY");
    CHECK_THROWS_AS(http_config_from_env("m"), ConfigError);
}
