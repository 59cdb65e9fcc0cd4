#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mixrisk {

struct TableReport;

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitConvergence = 3, kExitTableMismatch = 4 };

struct RunConfig {
    std::string command;  // var | es | quantile | tables | mc-check | aggregate
    std::string input;
    std::vector<double> alphas;  // empty: 0.01 (tables: every built-in table)
    std::uint64_t seed = 42;
    std::size_t draws = 1'000'000;
    std::string format = "json";  // json | csv
    bool paper_literal_es = false;
    int split = 0;             // aggregate: first index of market 2
    std::string es_report;     // tables: also write the ES discrepancy report here
    int threads = 0;           // mc-check workers; 0 = MIXRISK_THREADS / hardware
};

/// Checks RunConfig invariants; throws ValidationError naming the field.
void check_config(const RunConfig& config);

/// kExitTableMismatch if any match-required cell is out of tolerance, else kExitOk.
int tables_exit_code(const std::vector<TableReport>& reports);

/// Executes one command.  Reports go to `out`, diagnostics to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and dispatches to run().
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixrisk
