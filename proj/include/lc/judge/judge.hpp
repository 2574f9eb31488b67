#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lc/core/error.hpp"
#include "lc/core/rng.hpp"

namespace lc::judge {

enum class Metric { fg_identity, fg_motion, bg_identity, bg_motion, affordance, overall };

Metric metric_from_string(const std::string& s);
const char* to_string(Metric m);

// The verbatim pairwise-comparison instruction for a metric. These strings
// are golden-file tested; do not reflow or edit them.
const std::string& prompt_for(Metric m);

struct JudgeTask {
    Metric metric = Metric::fg_identity;
    std::vector<std::string> references;  // fg and/or bg reference media
    std::string candidate_a;              // canonical order: A is "ours"
    std::string candidate_b;
    uint64_t shuffle_seed = 0;

    void validate() const;
};

struct BuiltPrompt {
    std::string text;
    std::vector<std::string> media;  // references..., then the two candidates as presented
    bool a_first = true;             // candidate_a presented as "Video A"
};

// Constant prompt text; presentation order of the candidates is shuffled by
// shuffle_seed, mirroring the randomized side-by-side study layout.
BuiltPrompt build_prompt(const JudgeTask& task);

struct Response {
    bool ok = false;
    std::string body;
    std::string error;
};

class Transport {
  public:
    virtual ~Transport() = default;
    virtual Response send(const std::string& prompt, const std::vector<std::string>& media) = 0;
};

// Deterministic scripted transport for tests and offline runs.
class StubTransport : public Transport {
  public:
    explicit StubTransport(std::vector<std::string> script) : script_(std::move(script)) {}
    Response send(const std::string&, const std::vector<std::string>&) override {
        if (script_.empty()) return {false, "", "stub: script exhausted"};
        std::string body = script_[std::min(cursor_, script_.size() - 1)];
        ++cursor_;
        return {true, body, ""};
    }
    size_t calls() const { return cursor_; }

  private:
    std::vector<std::string> script_;
    size_t cursor_ = 0;
};

// Minimal HTTP transport: POST {prompt, media paths as base64 payloads} to a
// configured endpoint. Endpoint and key come from the environment
// (LC_JUDGE_ENDPOINT, LC_JUDGE_API_KEY) and are never persisted.
class HttpTransport : public Transport {
  public:
    HttpTransport(std::string endpoint, std::string api_key)
        : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}
    static std::unique_ptr<HttpTransport> from_env();
    Response send(const std::string& prompt, const std::vector<std::string>& media) override;

  private:
    std::string endpoint_, api_key_;
};

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 250;  // doubled per attempt; 0 in tests
};

enum class Choice { A, B, N };

struct Verdict {
    Choice choice = Choice::N;  // canonical (un-shuffled) order
    std::string raw_response;
    double latency_s = 0;
    int attempts = 0;
};

// Sanitize: keep only {A, B, N}; valid iff exactly one character remains.
std::optional<Choice> parse_choice(const std::string& raw);

// Sends the prompt and media, parses the sanitized single-character verdict,
// restores canonical candidate order, and retries with exponential backoff
// on transport or parse failures. Throws judge_unavailable after exhausting
// max_attempts.
Verdict judge(const JudgeTask& task, Transport& transport, const RetryPolicy& retry = {});

struct WinRate {
    double win_pct = 0, tie_pct = 0, lose_pct = 0;
    int wins = 0, ties = 0, losses = 0;
};
WinRate win_rate(const std::vector<Verdict>& verdicts);

}  // namespace lc::judge
