#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lc {

// Violated precondition / malformed argument.
struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training aborted (e.g. non-finite loss).
struct training_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Judge service could not produce a verdict.
struct judge_unavailable : std::runtime_error {
    judge_unavailable(const std::string& msg, int attempts_, std::vector<std::string> raw)
        : std::runtime_error(msg), attempts(attempts_), raw_responses(std::move(raw)) {}
    int attempts;
    std::vector<std::string> raw_responses;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

}  // namespace lc
