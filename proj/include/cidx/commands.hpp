#pragma once

// Batch commands behind the CLI and the C API: a JSON request in, a JSON result (and optional CSV) out.
// Request and result layouts are documented in docs/.

#include <string>
#include <vector>

#include "cidx/io.hpp"

namespace cidx {

struct CommandOutput {
    json result;
    std::string csv;  // empty when the command has no plot data
};

const std::vector<std::string>& command_names();

// model may be null only for "calibrate", whose request is the calibration spec.
CommandOutput run_command(const std::string& name, const MarketData& market, const ModelFile* model,
                          const RunConfig& cfg, const json& request);

// Exit status for an error code: 3 for numerical-quality failures, 1 otherwise.
int exit_status(ErrorCode code);

}  // namespace cidx
