#pragma once

#include <string>

#include "fgts/error.hpp"
#include "fgts/harness.hpp"

namespace fgts::detail {

EvalReport run_experiment(const ExperimentConfig& cfg, const std::string& parent_fingerprint);

// Runs `body` and tags its failures with `stage`. Validation errors stay
// validation errors so the CLI can tell bad input from a failed stage.
template <class F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ValidationError& e) {
        if (e.what()[0] == '[') throw;
        throw ValidationError(std::string("[") + stage + "] " + e.what());
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace fgts::detail
