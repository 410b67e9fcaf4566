#include "fgts/error.hpp"

namespace fgts {

StageError::StageError(std::string stage, const std::string& what)
    : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

}  // namespace fgts
