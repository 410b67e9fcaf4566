#pragma once

#include <stdexcept>
#include <string>

namespace fgts {

/// Malformed input: bad files, manifests, configs or out-of-range arguments.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A pipeline stage failed. The message is prefixed with "[stage] ".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what);

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace fgts
