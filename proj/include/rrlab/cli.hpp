#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rrlab/rational.hpp"

namespace rrlab {

enum ExitCode : int { kExitOk = 0, kExitAuditFailure = 1, kExitInputError = 2 };

struct ExperimentConfig {
    std::string system = "builtin:odometer";
    std::string joining = "builtin:shift1";
    std::optional<int> max_stage;  // build depth override
    int k_min = 1;
    std::optional<int> k_max;
    std::vector<Rational> eps;
    int grid = 8;
    int tests = 2;
    std::string out = ".";
    int den_cap_bits = 256;
    std::size_t digits = 4096;
};

int cmd_verify(const ExperimentConfig& cfg);
int cmd_approx(const ExperimentConfig& cfg);
int cmd_audit(const ExperimentConfig& cfg);
int cmd_towers(const ExperimentConfig& cfg);

// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace rrlab
