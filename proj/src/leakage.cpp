#include "mtsim/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "mtsim/dynamics.hpp"
#include "mtsim/errors.hpp"

namespace mtsim {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

BdgSolution bdg_solve(const ChainParams& cp, Chain side, double zero_tol) {
    const int L = cp.length;
    if (L < 2) throw PhysicsGuard("bdg_solve needs at least two sites, got " + std::to_string(L));

    // H_BdG = [[A, B], [-B, -A]] for real A, B; A carries -mu on the diagonal
    // and -t off it, B is antisymmetric with +|Delta| above the diagonal.
    const std::size_t n = std::size_t(L);
    DenseHermitian h(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        h(j, j) = -cp.mu;
        h(n + j, n + j) = cp.mu;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        h(j, j + 1) = h(j + 1, j) = -cp.t_hop;
        h(n + j, n + j + 1) = h(n + j + 1, n + j) = cp.t_hop;
        h(j, n + j + 1) = cp.delta_abs;
        h(n + j + 1, j) = cp.delta_abs;
        h(j + 1, n + j) = -cp.delta_abs;
        h(n + j, j + 1) = -cp.delta_abs;
    }

    EigenDecomposition ed = eigh(h);

    // restore machine-precision orthogonality inside degenerate clusters
    // (the solver's columns can drift to ~1e-9 there); within a cluster any
    // orthonormal basis is equivalent for what follows
    for (std::size_t j = 0; j < 2 * n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t x = 0; x < 2 * n; ++x) {
                dot += ed.vectors(x, k).real() * ed.vectors(x, j).real();
            }
            for (std::size_t x = 0; x < 2 * n; ++x) ed.vectors(x, j) -= dot * ed.vectors(x, k);
        }
        double nrm = 0.0;
        for (std::size_t x = 0; x < 2 * n; ++x) nrm += std::norm(ed.vectors(x, j));
        nrm = std::sqrt(nrm);
        for (std::size_t x = 0; x < 2 * n; ++x) ed.vectors(x, j) *= 1.0 / nrm;
    }

    const double scale =
        std::max({std::abs(cp.t_hop), std::abs(cp.delta_abs), std::abs(cp.mu), 1e-300});
    const double tol = zero_tol * scale;

    std::vector<std::size_t> positive, near_zero;
    for (std::size_t k = 0; k < 2 * n; ++k) {
        if (ed.eigenvalues[k] > tol) {
            positive.push_back(k);
        } else if (std::abs(ed.eigenvalues[k]) <= tol) {
            near_zero.push_back(k);
        }
    }

    BdgSolution sol;
    sol.side = side;
    sol.length = L;
    sol.alpha.assign(n * n, 0.0);
    sol.psi.assign(n * n, 0.0);

    std::vector<std::vector<double>> columns;
    if (!near_zero.empty()) {
        if (near_zero.size() != 2 || positive.size() != n - 1) {
            throw PhysicsGuard("bdg_solve: near-zero subspace has dimension " +
                               std::to_string(near_zero.size()) + ", expected a single +-pair");
        }
        /*
         * The pair is degenerate within tolerance, so the eigensolver's
         * basis for it is arbitrary. The particle-hole involution
         * (u; v) -> (v; u) maps the pair onto itself; diagonalizing it
         * inside the pair splits off the even (+1) and odd (-1) Majorana
         * vectors, and their fixed combination defines the zero-energy
         * quasiparticle with the odd Majorana on the junction-side end.
         */
        DenseHermitian m(2);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 2; ++c) {
                double acc = 0.0;
                for (std::size_t x = 0; x < n; ++x) {
                    acc += ed.vectors(x, near_zero[r]).real() *
                           ed.vectors(n + x, near_zero[c]).real();
                    acc += ed.vectors(n + x, near_zero[r]).real() *
                           ed.vectors(x, near_zero[c]).real();
                }
                m(r, c) = acc;
            }
        }
        EigenDecomposition md = eigh(m);
        if (std::abs(md.eigenvalues[0] + 1.0) > 1e-9 || std::abs(md.eigenvalues[1] - 1.0) > 1e-9) {
            throw PhysicsGuard("bdg_solve: zero-energy pair is not particle-hole closed, "
                               "involution eigenvalues " +
                               fmt(md.eigenvalues[0]) + ", " + fmt(md.eigenvalues[1]));
        }
        std::vector<double> col(2 * n, 0.0);
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        for (std::size_t x = 0; x < 2 * n; ++x) {
            double odd = 0.0, even = 0.0;
            for (std::size_t r = 0; r < 2; ++r) {
                odd += ed.vectors(x, near_zero[r]).real() * md.vectors(r, 0).real();
                even += ed.vectors(x, near_zero[r]).real() * md.vectors(r, 1).real();
            }
            col[x] = (even + odd) * inv_sqrt2;
        }
        sol.energies.push_back(0.0);
        sol.zero_mode = true;
        columns.push_back(std::move(col));
    } else if (positive.size() != n) {
        throw PhysicsGuard("bdg_solve: found " + std::to_string(positive.size()) +
                           " positive energies for " + std::to_string(L) + " sites");
    }
    for (std::size_t k : positive) {
        sol.energies.push_back(ed.eigenvalues[k]);
        std::vector<double> col(2 * n);
        for (std::size_t x = 0; x < 2 * n; ++x) col[x] = ed.vectors(x, k).real();
        columns.push_back(std::move(col));
    }

    /*
     * A nearly-degenerate +-eps pair (a long chain's end mode just above
     * zero_tol) leaves each returned eigenvector contaminated by its own
     * particle-hole image at the level machine_eps * ||H|| / (2 eps), which
     * breaks the anomalous orthogonality the Nambu unitary needs. One
     * Newton step cancels the self-term col^T Sigma col to third order;
     * the rotated zero column already has it zero by construction.
     */
    for (auto& col : columns) {
        double s = 0.0;
        for (std::size_t x = 0; x < n; ++x) s += 2.0 * col[x] * col[n + x];
        for (std::size_t x = 0; x < n; ++x) {
            const double cu = col[x], cv = col[n + x];
            col[x] = cu - 0.5 * s * cv;
            col[n + x] = cv - 0.5 * s * cu;
        }
        double nrm = 0.0;
        for (double e : col) nrm += e * e;
        nrm = std::sqrt(nrm);
        for (double& e : col) e /= nrm;
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t x = 0; x < 2 * n; ++x) dot += columns[k][x] * columns[j][x];
            for (std::size_t x = 0; x < 2 * n; ++x) columns[j][x] -= dot * columns[k][x];
        }
        double nrm = 0.0;
        for (double e : columns[j]) nrm += e * e;
        nrm = std::sqrt(nrm);
        for (double& e : columns[j]) e /= nrm;
    }

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t x = 0; x < n; ++x) {
            sol.alpha[x * n + j] = columns[j][x];
            sol.psi[x * n + j] = columns[j][n + x];
        }
    }

    // the full Nambu transformation [[alpha, psi], [psi, alpha]] (real case)
    // must be unitary for the quasiparticles to be canonical
    double uerr = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        for (std::size_t j = 0; j < 2 * n; ++j) {
            double acc = 0.0;
            for (std::size_t x = 0; x < n; ++x) {
                const double ri = i < n ? sol.alpha[x * n + i] : sol.psi[x * n + (i - n)];
                const double rj = j < n ? sol.alpha[x * n + j] : sol.psi[x * n + (j - n)];
                const double si = i < n ? sol.psi[x * n + i] : sol.alpha[x * n + (i - n)];
                const double sj = j < n ? sol.psi[x * n + j] : sol.alpha[x * n + (j - n)];
                acc += ri * rj + si * sj;
            }
            uerr = std::max(uerr, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    }
    sol.unitarity_error = uerr;
    if (uerr > 1e-10) {
        throw ConvergenceError("bdg_solve: Nambu transformation unitarity off by " + fmt(uerr));
    }

    double eps_sum = 0.0;
    for (double e : sol.energies) eps_sum += e;
    sol.e_vac = (-cp.mu * double(L) - eps_sum) / 2.0;
    return sol;
}

CoefficientTables coefficients_ab(const BdgSolution& left, const BdgSolution& right) {
    if (left.length != right.length) {
        throw PhysicsGuard("coefficients_ab: chain lengths differ, " +
                           std::to_string(left.length) + " vs " + std::to_string(right.length));
    }
    if (left.side != Chain::left || right.side != Chain::right) {
        throw PhysicsGuard("coefficients_ab: arguments must be a left and a right solution");
    }
    const int L = left.length;
    const std::size_t n = std::size_t(L);

    CoefficientTables t;
    t.length = L;
    t.a.assign(n * n, cx(0.0, 0.0));
    t.b.assign(n * n, cx(0.0, 0.0));
    t.eps_right = right.energies;
    t.eps_left = left.energies;

    // junction-side coefficient rows: site 1 of the right chain, site L of
    // the left chain (where the tunneling term acts)
    auto a1 = [&](int j) { return cx(right.u(0, j), 0.0); };
    auto p1 = [&](int j) { return cx(right.v(0, j), 0.0); };
    auto bL = [&](int j) { return cx(left.u(L - 1, j), 0.0); };
    auto fL = [&](int j) { return cx(left.v(L - 1, j), 0.0); };

    const cx ih(0.0, 0.5);
    for (int nn = 0; nn < L; ++nn) {
        for (int mm = 0; mm < L; ++mm) {
            cx av, bv;
            if (nn != 0 && mm != 0) {
                av = std::conj(a1(nn)) * std::conj(fL(mm));
                bv = -std::conj(bL(mm)) * std::conj(p1(nn));
            } else if (nn != 0) {
                // the m = 0 slot flips the zero-pair occupation; only the
                // even Majorana content of the left zero mode survives
                av = ih * (std::conj(fL(0)) + bL(0)) * std::conj(a1(nn));
                bv = -ih * (fL(0) + std::conj(bL(0))) * std::conj(p1(nn));
            } else if (mm != 0) {
                av = ih * (p1(0) - std::conj(a1(0))) * std::conj(fL(mm));
                bv = ih * (std::conj(p1(0)) - a1(0)) * std::conj(bL(mm));
            } else {
                av = -0.25 * (p1(0) - std::conj(a1(0))) * (std::conj(fL(0)) + bL(0));
                bv = -0.25 * (std::conj(p1(0)) - a1(0)) * (fL(0) + std::conj(bL(0)));
            }
            t.a[std::size_t(nn) * n + std::size_t(mm)] = av;
            t.b[std::size_t(nn) * n + std::size_t(mm)] = bv;
        }
    }
    return t;
}

NoiseSpectrum NoiseSpectrum::white(double level) {
    if (level < 0.0) throw PhysicsGuard("noise level must be non-negative, got " + fmt(level));
    NoiseSpectrum s;
    s.white_ = true;
    s.level_ = level;
    return s;
}

NoiseSpectrum NoiseSpectrum::tabulated(std::vector<double> omega, std::vector<double> s) {
    if (omega.size() < 2 || omega.size() != s.size()) {
        throw PhysicsGuard("tabulated spectrum needs matching omega/S samples, at least two");
    }
    for (std::size_t k = 0; k + 1 < omega.size(); ++k) {
        if (!(omega[k] < omega[k + 1])) {
            throw PhysicsGuard("tabulated spectrum frequencies must increase strictly");
        }
    }
    for (double v : s) {
        if (v < 0.0) throw PhysicsGuard("spectrum sample is negative: " + fmt(v));
    }
    NoiseSpectrum out;
    out.white_ = false;
    out.omega_ = std::move(omega);
    out.s_ = std::move(s);
    return out;
}

double NoiseSpectrum::at(double omega) const {
    if (white_) return level_;
    if (omega <= omega_.front()) return s_.front();
    if (omega >= omega_.back()) return s_.back();
    const auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
    const std::size_t hi = std::size_t(it - omega_.begin());
    const double w = (omega - omega_[hi - 1]) / (omega_[hi] - omega_[hi - 1]);
    return s_[hi - 1] * (1.0 - w) + s_[hi] * w;
}

namespace {

// one full channel table at a fixed f ceiling; the f in {0, 1}, n = m = 0
// entries stay zero: the subtracted computational-doublet terms carry the
// same spectral weight under the dE convention, so they cancel exactly
void fill_channels(const TransmonEigenbasis& basis, const CoefficientTables& ab,
                   const NoiseSpectrum& spectrum, int initial, int f_max, LeakageResult& out) {
    const int L = ab.length;
    const double e_i = basis.energies[std::size_t(initial)];
    out.channels.assign(std::size_t(f_max + 1) * std::size_t(L) * std::size_t(L), 0.0);
    out.f_max = f_max;
    out.gamma = 0.0;
    for (int f = 0; f <= f_max; ++f) {
        const double x = charge_shift_element(basis, +1, std::size_t(initial), std::size_t(f));
        const double y = charge_shift_element(basis, -1, std::size_t(initial), std::size_t(f));
        const double e_f = basis.energies[std::size_t(f)];
        for (int nq = 0; nq < L; ++nq) {
            for (int mq = 0; mq < L; ++mq) {
                if (f <= 1 && nq == 0 && mq == 0) continue;
                const cx amp = x * ab.a_at(nq, mq) + y * ab.b_at(nq, mq);
                const double de = e_f + ab.eps_right[std::size_t(nq)] +
                                  ab.eps_left[std::size_t(mq)] - e_i;
                const double rate = 2.0 * std::numbers::pi * spectrum.at(de) * std::norm(amp);
                out.channels[(std::size_t(f) * std::size_t(L) + std::size_t(nq)) * std::size_t(L) +
                             std::size_t(mq)] = rate;
                out.gamma += rate;
            }
        }
    }
}

double shell_sum(const LeakageResult& r, int f) {
    const std::size_t L = std::size_t(r.length);
    double acc = 0.0;
    for (std::size_t k = 0; k < L * L; ++k) acc += r.channels[std::size_t(f) * L * L + k];
    return acc;
}

}  // namespace

LeakageResult golden_rule_rate(const TransmonEigenbasis& basis, const CoefficientTables& ab,
                               const NoiseSpectrum& spectrum, int initial, int f_max,
                               double shell_threshold) {
    if (initial != 0 && initial != 1) {
        throw PhysicsGuard("golden_rule_rate: initial level must be 0 or 1");
    }
    if (f_max < 4) throw PhysicsGuard("golden_rule_rate: f_max must be at least 4");
    const int ceiling = int(basis.count()) - 1;
    if (f_max > ceiling) {
        throw PhysicsGuard("golden_rule_rate: f_max " + std::to_string(f_max) +
                           " exceeds the basis ceiling " + std::to_string(ceiling));
    }

    LeakageResult out;
    out.length = ab.length;
    out.initial = initial;
    for (;;) {
        fill_channels(basis, ab, spectrum, initial, f_max, out);
        if (out.gamma <= 0.0) {
            out.residual = 0.0;  // a vanishing spectrum is converged trivially
        } else {
            out.residual = std::max(shell_sum(out, f_max), shell_sum(out, f_max - 1)) / out.gamma;
        }
        if (out.residual <= shell_threshold) break;
        if (f_max + 2 > ceiling) {
            out.converged = false;  // f sum still moving at the basis ceiling
            break;
        }
        f_max += 2;
    }
    out.converged = out.converged && out.residual <= shell_threshold;
    out.gamma_per_ns = out.gamma / kHbarUevNs;
    return out;
}

std::vector<LeakageScanRow> leakage_scan(const TransmonEigenbasis& basis,
                                         const std::vector<std::pair<double, double>>& detunings,
                                         const std::vector<int>& lengths,
                                         const NoiseSpectrum& spectrum, int initial, int f_max,
                                         double shell_threshold) {
    std::vector<LeakageScanRow> rows;
    rows.reserve(detunings.size() * lengths.size());
    for (const auto& [mu, w_f] : detunings) {
        for (int L : lengths) {
            ChainParams cp{mu, w_f, w_f, L};
            if (!cp.topological()) {
                throw PhysicsGuard("leakage_scan: mu = " + fmt(mu) + ", t = " + fmt(w_f) +
                                   " is outside the topological phase (|mu| >= 2t)");
            }
            auto right = bdg_solve(cp, Chain::right);
            auto left = bdg_solve(cp, Chain::left);
            auto result =
                golden_rule_rate(basis, coefficients_ab(left, right), spectrum, initial, f_max,
                                 shell_threshold);
            rows.push_back({mu, w_f, L, result.gamma, result.gamma_per_ns, result.f_max,
                            result.residual, !cp.sweet_spot() && L < 5});
        }
    }
    return rows;
}

}  // namespace mtsim
