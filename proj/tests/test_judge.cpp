#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <fstream>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "lc/judge/judge.hpp"

using namespace lc;
using namespace lc::judge;

#ifndef LC_GOLDEN_DIR
#define LC_GOLDEN_DIR "tests/golden"
#endif

namespace {
std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), {});
}
JudgeTask make_task(Metric m, uint64_t seed = 0) {
    JudgeTask t;
    t.metric = m;
    t.references = (m == Metric::affordance || m == Metric::overall)
                       ? std::vector<std::string>{"fg_ref.y4m", "bg_ref.y4m"}
                       : std::vector<std::string>{"ref.y4m"};
    t.candidate_a = "ours.y4m";
    t.candidate_b = "baseline.y4m";
    t.shuffle_seed = seed;
    return t;
}
}  // namespace

TEST_CASE("prompts: byte-exact against the golden files") {
    const std::pair<Metric, const char*> cases[] = {
        {Metric::fg_identity, "prompt_fg_identity.txt"},
        {Metric::fg_motion, "prompt_fg_motion.txt"},
        {Metric::bg_identity, "prompt_bg_identity.txt"},
        {Metric::bg_motion, "prompt_bg_motion.txt"},
        {Metric::affordance, "prompt_affordance.txt"},
        {Metric::overall, "prompt_overall.txt"},
    };
    for (const auto& [metric, file] : cases) {
        std::string want = read_file(std::string(LC_GOLDEN_DIR) + "/" + file);
        CHECK(prompt_for(metric) == want);
    }
}

TEST_CASE("prompts: anchors from the catalog") {
    CHECK(prompt_for(Metric::fg_identity).rfind("You are a video analysis tool.", 0) == 0);
    CHECK(prompt_for(Metric::fg_identity).find("Foreground Identity Consistency") !=
          std::string::npos);
    CHECK(prompt_for(Metric::overall)
              .find("fewest visual artifacts (like flickering, blurring, or blockiness)") !=
          std::string::npos);
}

TEST_CASE("build_prompt: deterministic given task and seed") {
    auto t = make_task(Metric::bg_motion, 42);
    BuiltPrompt p1 = build_prompt(t);
    BuiltPrompt p2 = build_prompt(t);
    CHECK(p1.text == p2.text);
    CHECK(p1.media == p2.media);
    CHECK(p1.a_first == p2.a_first);
}

TEST_CASE("build_prompt: validates the reference set per metric") {
    JudgeTask t = make_task(Metric::affordance);
    t.references = {"only_one.y4m"};
    CHECK_THROWS_AS(build_prompt(t), contract_error);
    JudgeTask t2 = make_task(Metric::fg_identity);
    t2.references = {};
    CHECK_THROWS_AS(build_prompt(t2), contract_error);
}

TEST_CASE("judge: un-shuffling maps presented verdicts to canonical order") {
    // find seeds that place ours first and second
    uint64_t seed_first = 0, seed_second = 0;
    bool got_first = false, got_second = false;
    for (uint64_t s = 0; s < 64 && (!got_first || !got_second); ++s) {
        auto t = make_task(Metric::fg_identity, s);
        if (build_prompt(t).a_first) {
            if (!got_first) seed_first = s, got_first = true;
        } else {
            if (!got_second) seed_second = s, got_second = true;
        }
    }
    REQUIRE(got_first);
    REQUIRE(got_second);

    // stub answers "B"; ours presented second -> ours wins
    {
        StubTransport stub({"B"});
        auto v = lc::judge::judge(make_task(Metric::fg_identity, seed_second), stub, {3, 0});
        CHECK(v.choice == Choice::A);
        CHECK(v.attempts == 1);
    }
    // stub answers "B"; ours presented first -> baseline wins
    {
        StubTransport stub({"B"});
        auto v = lc::judge::judge(make_task(Metric::fg_identity, seed_first), stub, {3, 0});
        CHECK(v.choice == Choice::B);
    }
    // N stays a tie regardless of order
    {
        StubTransport stub({"N"});
        CHECK(lc::judge::judge(make_task(Metric::fg_identity, seed_first), stub, {3, 0}).choice == Choice::N);
    }
}

TEST_CASE("judge: sanitization accepts noisy single-letter responses") {
    StubTransport stub({"sure! N"});
    auto v = lc::judge::judge(make_task(Metric::bg_identity, 7), stub, {3, 0});
    CHECK(v.choice == Choice::N);
    CHECK(v.raw_response == "sure! N");

    CHECK(parse_choice("B") == Choice::B);
    CHECK(parse_choice(" A \n") == Choice::A);
    CHECK_FALSE(parse_choice("maybe").has_value());   // lowercase b does not count
    CHECK_FALSE(parse_choice("A or B").has_value());  // ambiguous
    CHECK_FALSE(parse_choice("").has_value());
}

TEST_CASE("judge: retry exhaustion raises judge-unavailable with attempts=3") {
    StubTransport stub({"maybe", "maybe", "maybe"});
    try {
        lc::judge::judge(make_task(Metric::fg_motion, 1), stub, {3, 0});
        FAIL("expected judge_unavailable");
    } catch (const judge_unavailable& e) {
        CHECK(e.attempts == 3);
        CHECK(e.raw_responses.size() == 3);
        CHECK(e.raw_responses[0] == "maybe");
    }
    CHECK(stub.calls() == 3);
}

TEST_CASE("judge: parse failure then success counts attempts") {
    StubTransport stub({"hmm", "A"});
    auto t = make_task(Metric::overall, 3);
    auto v = lc::judge::judge(t, stub, {3, 0});
    CHECK(v.attempts == 2);
}

TEST_CASE("shuffle: candidate A first 50% +- 2% over 1e4 seeds") {
    int first = 0;
    const int n = 10000;
    for (uint64_t s = 0; s < n; ++s)
        if (build_prompt(make_task(Metric::fg_identity, s)).a_first) ++first;
    CHECK(double(first) / n == doctest::Approx(0.5).epsilon(0.04));
    CHECK(std::fabs(double(first) / n - 0.5) <= 0.02);
}

TEST_CASE("shuffle: presented<->canonical mapping is an involution") {
    auto map_once = [](Choice c, bool a_first) {
        if (c == Choice::N) return Choice::N;
        bool first_won = (c == Choice::A);
        bool a_won = first_won == a_first;
        return a_won ? Choice::A : Choice::B;
    };
    for (bool a_first : {true, false})
        for (Choice c : {Choice::A, Choice::B, Choice::N})
            CHECK(map_once(map_once(c, a_first), a_first) == c);
}

TEST_CASE("win_rate: percentages") {
    auto mk = [](Choice c) {
        Verdict v;
        v.choice = c;
        return v;
    };
    std::vector<Verdict> all_wins = {mk(Choice::A), mk(Choice::A), mk(Choice::A)};
    auto wr = win_rate(all_wins);
    CHECK(wr.win_pct == 100.0);

    std::vector<Verdict> mixed = {mk(Choice::A), mk(Choice::N), mk(Choice::B)};
    wr = win_rate(mixed);
    CHECK(wr.win_pct == doctest::Approx(33.3333).epsilon(1e-3));
    CHECK(wr.tie_pct == doctest::Approx(33.3333).epsilon(1e-3));
    CHECK(wr.lose_pct == doctest::Approx(33.3333).epsilon(1e-3));

    std::vector<Verdict> seven;
    for (int i = 0; i < 7; ++i) seven.push_back(mk(Choice::A));
    for (int i = 0; i < 2; ++i) seven.push_back(mk(Choice::N));
    seven.push_back(mk(Choice::B));
    wr = win_rate(seven);
    CHECK(wr.win_pct == 70.0);
    CHECK(wr.tie_pct == 20.0);
    CHECK(wr.lose_pct == 10.0);

    CHECK_THROWS_AS(win_rate({}), contract_error);
}

TEST_CASE("http transport: loopback round trip") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/judge", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        // sanity: body carries the prompt and media payloads
        if (req.body.find("video analysis tool") == std::string::npos) {
            res.status = 400;
            return;
        }
        res.set_content("A", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    // small media files
    std::string d = "/tmp/lc_judge_media";
    std::filesystem::create_directories(d);
    for (const char* n : {"ref.y4m", "ours.y4m", "baseline.y4m"})
        std::ofstream(d + "/" + n) << "media-bytes";
    JudgeTask t = make_task(Metric::fg_identity, 2);
    t.references = {d + "/ref.y4m"};
    t.candidate_a = d + "/ours.y4m";
    t.candidate_b = d + "/baseline.y4m";

    HttpTransport http("http://127.0.0.1:" + std::to_string(port) + "/judge", "test-key");
    auto v = lc::judge::judge(t, http, {3, 0});
    CHECK(hits == 1);
    CHECK(v.attempts == 1);
    // "A" refers to the presented order; canonical choice depends on the shuffle
    bool a_first = build_prompt(t).a_first;
    CHECK(v.choice == (a_first ? Choice::A : Choice::B));

    server.stop();
    th.join();
}
