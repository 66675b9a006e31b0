#pragma once

#include <stdexcept>
#include <string>

namespace cycmpdr {

// Contract violations and unusable inputs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Error surfaced by the pipeline, tagged with the stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace cycmpdr
