#pragma once

#include <string>
#include <vector>

#include "mtsim/config.hpp"
#include "mtsim/linalg.hpp"

namespace mtsim {

inline constexpr const char* kMtsimVersion = "1.0.0";

// Shortest decimal representation that round-trips the double (RFC-4180
// cells; never more than 17 significant digits).
std::string csv_number(double x);

struct RunReport {
    std::vector<std::string> outputs;  // files written, manifest last
    int verify_failures = 0;           // nonzero only for the verify experiment
    std::string summary;               // human-readable one-liner per artifact
};

/*
 * Execute the configured experiment: compute, then write one CSV per curve
 * plus manifest.json into out_dir (single writer, after all computation).
 * Identical configs produce byte-identical CSVs. Throws ConfigError,
 * PhysicsGuard, or ConvergenceError; the CLI maps those to exit codes.
 */
RunReport run_experiment(const RunConfig& cfg);

// ── verify suites ───────────────────────────────────────────────────────────
// Shared by the verify experiment and the acceptance harness.

struct VerifySuiteResult {
    std::string name;
    bool pass;
    double measured;     // the quantity gated
    double gate;         // threshold it must stay under
    std::string detail;  // extra figures worth printing
};

// Max anticommutator residual over all pairs: ||{c_i, c_j^dag} - delta|| and
// ||{c_i, c_j}||, entrywise max norm. dim is the register dimension.
double jw_anticommutator_residual(const std::vector<SparseMatrix>& annihilators,
                                  std::size_t dim);

struct BdgOracleReport {
    int sets;                   // parameter sets checked
    double worst_spectrum_dev;  // BdG-reconstructed vs brute-force many-body
    double worst_sweet_eps0;    // |eps_0| at the sweet spot, lengths 2..12
};

// Random topological chains (fixed seed, lengths 2 and 3) compared against
// brute-force diagonalization, plus the sweet-spot zero-mode check.
BdgOracleReport bdg_oracle_sweep(int sets_per_length, unsigned seed, double w_f);

// frame-transform, jw-anticommutator, bdg-oracle, projection-facts
std::vector<VerifySuiteResult> run_verify_suites(const RunConfig& cfg);

}  // namespace mtsim
