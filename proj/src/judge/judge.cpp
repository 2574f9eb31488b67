#include "lc/judge/judge.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace lc::judge {

Metric metric_from_string(const std::string& s) {
    if (s == "fg_identity") return Metric::fg_identity;
    if (s == "fg_motion") return Metric::fg_motion;
    if (s == "bg_identity") return Metric::bg_identity;
    if (s == "bg_motion") return Metric::bg_motion;
    if (s == "affordance") return Metric::affordance;
    if (s == "overall") return Metric::overall;
    throw config_error("unknown judge metric: " + s);
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::fg_identity: return "fg_identity";
        case Metric::fg_motion: return "fg_motion";
        case Metric::bg_identity: return "bg_identity";
        case Metric::bg_motion: return "bg_motion";
        case Metric::affordance: return "affordance";
        default: return "overall";
    }
}

const std::string& prompt_for(Metric m) {
    static const std::string fg_identity =
        "You are a video analysis tool. You will be given a Reference Foreground video and two "
        "generated videos (Video A, Video B). IMPORTANT: Judge *only* this specific metric. Do "
        "not let overall visual quality influence your choice. Metric: Foreground Identity "
        "Consistency. Question: Which generated video (Video A or Video B) better preserves the "
        "appearance of the subject (person, animal, object) from the Reference Foreground video?";
    static const std::string fg_motion =
        "You are a video analysis tool. You will be given a Reference Foreground video and two "
        "generated videos (Video A, Video B). IMPORTANT: Judge *only* this specific metric. Do "
        "not let overall visual quality influence your choice. Metric: Foreground Motion "
        "Consistency. Question: Which generated video (Video A or Video B) better preserves the "
        "subject's motion from the Reference Foreground video and looks more physically "
        "believable?";
    static const std::string bg_identity =
        "You are a video analysis tool. You will be given a Reference Background video and two "
        "generated videos (Video A, Video B). IMPORTANT: Judge *only* this specific metric. Do "
        "not let overall visual quality influence your choice. Metric: Background Identity "
        "Consistency. Question: Which generated video (Video A or Video B) better preserves the "
        "appearance of the background scene from the Reference Background video?";
    static const std::string bg_motion =
        "You are a video analysis tool. You will be given a Reference Background video and two "
        "generated videos (Video A, Video B). IMPORTANT: Judge *only* this specific metric. Do "
        "not let overall visual quality influence your choice. Metric: Background Motion "
        "Consistency. Question: Which generated video (Video A or Video B) better preserves the "
        "background's motion (or camera movement) from the Reference Background video, and which "
        "looks smoother?";
    static const std::string affordance =
        "You are a video analysis tool. You will be given a Reference Foreground, a Reference "
        "Background, and two generated videos (Video A, Video B). IMPORTANT: Judge *only* this "
        "specific metric. Do not let overall visual quality influence your choice. Metric: "
        "Affordance-aware Generation. Question: Which generated video (Video A or Video B) shows "
        "a more believable interaction between the subject and the background? (e.g., sitting "
        "*on* a chair, not *through* it; not walking through walls).";
    static const std::string overall =
        "You are a video analysis tool. You will be given a Reference Foreground, a Reference "
        "Background, and two generated videos (Video A, Video B). Metric: Overall Quality. "
        "Question: Which generated video (Video A or Video B) has the best overall visual "
        "quality, clarity, and fewest visual artifacts (like flickering, blurring, or "
        "blockiness)?";
    switch (m) {
        case Metric::fg_identity: return fg_identity;
        case Metric::fg_motion: return fg_motion;
        case Metric::bg_identity: return bg_identity;
        case Metric::bg_motion: return bg_motion;
        case Metric::affordance: return affordance;
        default: return overall;
    }
}

void JudgeTask::validate() const {
    size_t need = (metric == Metric::affordance || metric == Metric::overall) ? 2 : 1;
    if (references.size() != need)
        throw contract_error(std::string("judge task: metric ") + to_string(metric) + " needs " +
                             std::to_string(need) + " reference(s)");
    require(!candidate_a.empty() && !candidate_b.empty(), "judge task: missing candidates");
}

BuiltPrompt build_prompt(const JudgeTask& task) {
    task.validate();
    BuiltPrompt out;
    out.text = prompt_for(task.metric);
    Rng rng(Rng::mix({task.shuffle_seed, 0x0a0bull}));
    out.a_first = rng.bernoulli(0.5);
    out.media = task.references;
    out.media.push_back(out.a_first ? task.candidate_a : task.candidate_b);
    out.media.push_back(out.a_first ? task.candidate_b : task.candidate_a);
    return out;
}

std::optional<Choice> parse_choice(const std::string& raw) {
    std::string kept;
    for (char c : raw)
        if (c == 'A' || c == 'B' || c == 'N') kept += c;
    if (kept.size() != 1) return std::nullopt;
    switch (kept[0]) {
        case 'A': return Choice::A;
        case 'B': return Choice::B;
        default: return Choice::N;
    }
}

Verdict judge(const JudgeTask& task, Transport& transport, const RetryPolicy& retry) {
    BuiltPrompt built = build_prompt(task);
    std::vector<std::string> raws;
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        auto t0 = std::chrono::steady_clock::now();
        Response resp = transport.send(built.text, built.media);
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        raws.push_back(resp.ok ? resp.body : ("<transport error: " + resp.error + ">"));
        if (resp.ok) {
            auto parsed = parse_choice(resp.body);
            if (parsed) {
                Verdict v;
                v.raw_response = resp.body;
                v.latency_s = dt;
                v.attempts = attempt;
                if (*parsed == Choice::N) {
                    v.choice = Choice::N;
                } else {
                    bool first_won = (*parsed == Choice::A);
                    bool a_won = first_won == built.a_first;
                    v.choice = a_won ? Choice::A : Choice::B;
                }
                return v;
            }
        }
        if (attempt < retry.max_attempts && retry.backoff_ms > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(retry.backoff_ms << (attempt - 1)));
    }
    throw judge_unavailable("judge unavailable after " + std::to_string(retry.max_attempts) +
                                " attempts",
                            retry.max_attempts, std::move(raws));
}

WinRate win_rate(const std::vector<Verdict>& verdicts) {
    require(!verdicts.empty(), "win_rate: empty verdict list");
    WinRate wr;
    for (const auto& v : verdicts) {
        if (v.choice == Choice::A)
            ++wr.wins;
        else if (v.choice == Choice::N)
            ++wr.ties;
        else
            ++wr.losses;
    }
    double n = double(verdicts.size());
    wr.win_pct = 100.0 * wr.wins / n;
    wr.tie_pct = 100.0 * wr.ties / n;
    wr.lose_pct = 100.0 * wr.losses / n;
    return wr;
}

std::unique_ptr<HttpTransport> HttpTransport::from_env() {
    const char* ep = std::getenv("LC_JUDGE_ENDPOINT");
    const char* key = std::getenv("LC_JUDGE_API_KEY");
    if (!ep) throw config_error("http transport: LC_JUDGE_ENDPOINT not set");
    return std::make_unique<HttpTransport>(ep, key ? key : "");
}

namespace {
std::string b64encode(const std::string& in) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    for (size_t i = 0; i < in.size(); i += 3) {
        uint32_t v = uint32_t((unsigned char)in[i]) << 16;
        if (i + 1 < in.size()) v |= uint32_t((unsigned char)in[i + 1]) << 8;
        if (i + 2 < in.size()) v |= uint32_t((unsigned char)in[i + 2]);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += i + 1 < in.size() ? tbl[(v >> 6) & 63] : '=';
        out += i + 2 < in.size() ? tbl[v & 63] : '=';
    }
    return out;
}
}  // namespace

Response HttpTransport::send(const std::string& prompt, const std::vector<std::string>& media) {
    // split endpoint into host part and path
    std::string url = endpoint_;
    std::string path = "/";
    size_t scheme = url.find("://");
    size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        path = url.substr(slash);
        url = url.substr(0, slash);
    }
    nlohmann::json body{{"prompt", prompt}};
    nlohmann::json files = nlohmann::json::array();
    for (const auto& m : media) {
        std::ifstream in(m, std::ios::binary);
        if (!in) return {false, "", "cannot read media file: " + m};
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        files.push_back({{"name", m}, {"data_b64", b64encode(bytes)}});
    }
    body["media"] = files;

    httplib::Client cli(url);
    cli.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.insert({"Authorization", "Bearer " + api_key_});
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) return {false, "", "http error: " + httplib::to_string(res.error())};
    if (res->status != 200) return {false, "", "http status " + std::to_string(res->status)};
    return {true, res->body, ""};
}

}  // namespace lc::judge
