#pragma once

#include <utility>
#include <vector>

#include "mtsim/hilbert.hpp"
#include "mtsim/linalg.hpp"
#include "mtsim/model.hpp"

namespace mtsim {

/*
 * Positive-energy Bogoliubov solution of one Kitaev chain in the +|Delta|
 * pairing gauge, Nambu convention H = (1/2) Psi^dag H_BdG Psi + (1/2) tr A
 * with Psi = (c_1..c_L, c_1^dag..c_L^dag). Column j of the (alpha; psi)
 * block pair is the +eps_j eigenvector, so the quasiparticle reads
 *     d_j = sum_x alpha(x, j)^* c_x + psi(x, j)^* c_x^dag
 * and the 2L x 2L block matrix [[alpha, psi^*], [psi, alpha^*]] is unitary.
 * A left-chain solution stores the same blocks; downstream they play the
 * (beta, phi) roles. All entries are real because the Hamiltonian is.
 *
 * A +-eps pair within zero_tol of zero (the topological end mode) is rotated
 * to the fixed combination (particle-hole even + odd Majorana) / sqrt(2),
 * which pins the junction-side Majorana content of the mode; its energy is
 * recorded as exactly zero.
 */
struct BdgSolution {
    Chain side = Chain::right;
    int length = 0;
    std::vector<double> energies;  // eps_j >= 0, ascending
    std::vector<double> alpha;     // row-major L x L, site row, mode column
    std::vector<double> psi;
    double e_vac = 0.0;            // many-body ground energy, (tr A - sum eps) / 2
    double unitarity_error = 0.0;  // max deviation of the Nambu block unitary
    bool zero_mode = false;        // whether a near-zero pair was rotated

    double u(int site, int mode) const {
        return alpha[std::size_t(site) * std::size_t(length) + std::size_t(mode)];
    }
    double v(int site, int mode) const {
        return psi[std::size_t(site) * std::size_t(length) + std::size_t(mode)];
    }
};

/*
 * Diagonalize one chain. The chain need not be topological; in the trivial
 * phase no near-zero pair appears and all L positive energies are kept as
 * is. Throws PhysicsGuard when the near-zero subspace is not a clean
 * particle-hole closed pair and ConvergenceError when the assembled Nambu
 * transformation misses unitarity by more than 1e-10.
 */
BdgSolution bdg_solve(const ChainParams& cp, Chain side, double zero_tol = 1e-8);

/*
 * Tunneling matrix elements between the junction vacuum and the
 * quasiparticle-resolved final states: delta H factorizes per (n, m) channel
 * into  A_nm e^{i phi/2} + B_nm e^{-i phi/2}  on the transmon factor. The
 * tables are built from the right chain's site-1 and the left chain's
 * site-L coefficient rows, with the n = 0 / m = 0 rows carrying the
 * zero-mode combinations that survive dropping the far-end Majorana.
 */
struct CoefficientTables {
    int length = 0;
    std::vector<cx> a;  // row-major n x m
    std::vector<cx> b;
    std::vector<double> eps_right;  // quasiparticle energies entering Delta E
    std::vector<double> eps_left;

    cx a_at(int n, int m) const {
        return a[std::size_t(n) * std::size_t(length) + std::size_t(m)];
    }
    cx b_at(int n, int m) const {
        return b[std::size_t(n) * std::size_t(length) + std::size_t(m)];
    }
};

CoefficientTables coefficients_ab(const BdgSolution& left, const BdgSolution& right);

/*
 * Junction charge-noise power spectrum, either white at a constant level or
 * linearly interpolated through tabulated samples (clamped to the end
 * samples outside the tabulated range). Levels are in 1/ueV; the white
 * level matching the master-equation strength alpha is alpha / 2 pi.
 */
class NoiseSpectrum {
  public:
    static NoiseSpectrum white(double level);
    static NoiseSpectrum tabulated(std::vector<double> omega, std::vector<double> s);

    bool is_white() const { return white_; }
    double at(double omega) const;

  private:
    NoiseSpectrum() = default;

    bool white_ = true;
    double level_ = 0.0;
    std::vector<double> omega_, s_;
};

struct LeakageResult {
    int length = 0;
    int initial = 0;        // transmon level the rate leaves from
    double gamma = 0.0;     // per natural time hbar/ueV
    double gamma_per_ns = 0.0;
    int f_max = 0;          // highest transmon level summed, after escalation
    double residual = 0.0;  // larger of the last two f shells over the total
    bool converged = true;  // residual at or below the threshold

    // per-channel rates, (f_max + 1) x L x L; the f in {0, 1}, n = m = 0
    // entries are zero because transitions inside the computational doublet
    // with no quasiparticles created are not leakage
    std::vector<double> channels;

    double channel(int f, int n, int m) const {
        return channels[(std::size_t(f) * std::size_t(length) + std::size_t(n)) *
                            std::size_t(length) +
                        std::size_t(m)];
    }
};

/*
 * Golden-rule rate out of computational level i (0 or 1):
 *     Gamma_i = 2 pi sum_{f <= f_max} sum_{n,m} S(dE) |x_f A_nm + y_f B_nm|^2
 * minus the computational-doublet f in {0, 1}, (n, m) = (0, 0) terms, with
 * x_f = <i| e^{i phi/2} |f> and y_f its conjugate shift on the half-integer
 * charge grid, and dE = (E_f + eps_n + eps'_m) - E_i. Even f shells vanish
 * identically (the half-charge shift swaps sublattices), so convergence is
 * judged on the larger of the last two shells; f_max is raised in steps of
 * two until the residual passes shell_threshold or the basis is exhausted,
 * in which case the result is flagged unconverged.
 */
LeakageResult golden_rule_rate(const TransmonEigenbasis& basis, const CoefficientTables& ab,
                               const NoiseSpectrum& spectrum, int initial, int f_max = 12,
                               double shell_threshold = 1e-6);

struct LeakageScanRow {
    double mu;
    double w_f;  // chain coupling scale, t = |Delta| = w_f
    int length;
    double gamma;
    double gamma_per_ns;
    int f_max;
    double residual;
    bool untrusted;  // detuned parameters with L < 5: the dropped far-end
                     // Majorana still overlaps the junction there
};

/*
 * Rate-vs-length table: one row per (mu, w_F) pair and chain length, each
 * from a fresh per-chain solve against the shared transmon basis. Pairs
 * outside the topological phase (|mu| >= 2t) are rejected.
 */
std::vector<LeakageScanRow> leakage_scan(const TransmonEigenbasis& basis,
                                         const std::vector<std::pair<double, double>>& detunings,
                                         const std::vector<int>& lengths,
                                         const NoiseSpectrum& spectrum, int initial = 0,
                                         int f_max = 12, double shell_threshold = 1e-6);

}  // namespace mtsim
