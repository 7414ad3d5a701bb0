#include "mtsim/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "mtsim/errors.hpp"

namespace mtsim {
namespace {

double sq(double x) { return x * x; }

void validate_transmon(const TransmonParams& tp) {
    if (!(tp.e_c > 0.0))
        throw PhysicsGuard("charging energy must be positive, got " + std::to_string(tp.e_c));
    if (tp.e_j < 0.0)
        throw PhysicsGuard("Josephson energy must be non-negative, got " + std::to_string(tp.e_j));
}

void validate_chain(const ChainParams& cp) {
    if (cp.length < 1 || cp.length > 12)
        throw PhysicsGuard("chain length out of range [1, 12]: " + std::to_string(cp.length));
    if (cp.t_hop < 0.0 || cp.delta_abs < 0.0)
        throw PhysicsGuard("chain couplings t_hop and delta_abs must be non-negative");
}

// Jordan-Wigner annihilator on a register of arbitrary site count. Matches
// jw_annihilator, but does not insist on the even site count a junction
// register has, so standalone chains of odd length work too.
SparseMatrix raw_annihilator(int count, int site) {
    const std::size_t dim = std::size_t{1} << count;
    const std::uint64_t bit = std::uint64_t{1} << (count - site);
    const std::uint64_t string_mask = (dim - 1) & ~(2 * bit - 1);
    SparseMatrix op(dim, dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
        if (!(b & bit)) continue;
        const int par = std::popcount(b & string_mask) & 1;
        op.add(b & ~bit, b, cx(par ? -1.0 : 1.0, 0.0));
    }
    op.coalesce();
    return op;
}

/*
 * Chain terms on sites [first, first + L) of a 2^count register:
 *   sum_j [ -(mu/2) c_j^dag c_j - t c_j^dag c_{j+1}
 *           + delta_abs * pairing * c_j^dag c_{j+1}^dag + h.c. ]
 * The onsite term doubles to -mu n_j once its conjugate is added.
 */
SparseMatrix kitaev_sites(const ChainParams& cp, int count, int first, cx pairing) {
    const std::size_t dim = std::size_t{1} << count;
    SparseMatrix h(dim, dim);
    for (int j = 0; j < cp.length; ++j) {
        SparseMatrix a = raw_annihilator(count, first + j);
        SparseMatrix n = matmul(a.adjoint(), a);
        n *= cx(-cp.mu, 0.0);
        h += n;
    }
    for (int j = 0; j + 1 < cp.length; ++j) {
        const SparseMatrix a0 = raw_annihilator(count, first + j);
        const SparseMatrix a1 = raw_annihilator(count, first + j + 1);
        SparseMatrix hop = matmul(a0.adjoint(), a1);
        hop *= cx(-cp.t_hop, 0.0);
        h += hop;
        h += hop.adjoint();
        SparseMatrix pair = matmul(a0.adjoint(), a1.adjoint());
        pair *= cp.delta_abs * pairing;
        h += pair;
        h += pair.adjoint();
    }
    h.coalesce();
    return h;
}

SparseMatrix transmon_sparse(const TransmonParams& tp, const ChargeGrid& grid) {
    const std::size_t K = grid.size();
    SparseMatrix h(K, K);
    for (std::size_t k = 0; k < K; ++k)
        h.add(k, k, cx(tp.e_c * sq(grid.value(k) - tp.n_g), 0.0));
    for (std::size_t k = 0; k + 2 < K; ++k) {
        h.add(k + 2, k, cx(-0.5 * tp.e_j, 0.0));
        h.add(k, k + 2, cx(-0.5 * tp.e_j, 0.0));
    }
    h.coalesce();
    return h;
}

DenseHermitian two_qubit_matrix(const EffectiveTwoQubit& m, double sgn) {
    DenseHermitian h(4);
    h(0, 0) = 2.0 * m.e01;
    h(3, 3) = -2.0 * m.e01;
    const cx x1(sgn * 0.5 * m.w1 * m.c10, 0.0);
    const cx x2(sgn * 0.5 * m.w2 * m.c10, 0.0);
    const cx xx(sgn * 0.5 * m.w12 * m.c2, 0.0);
    h(0, 2) = h(2, 0) = x1;
    h(1, 3) = h(3, 1) = x1;
    h(0, 1) = h(1, 0) = x2;
    h(2, 3) = h(3, 2) = x2;
    h(0, 3) = h(3, 0) = xx;
    h(1, 2) = h(2, 1) = xx;
    return h;
}

}  // namespace

double charge_shift_element(const TransmonEigenbasis& basis, int halfsteps, std::size_t bra,
                            std::size_t ket) {
    if (bra >= basis.count() || ket >= basis.count())
        throw PhysicsGuard("eigenbasis index out of range");
    const auto& vb = basis.states[bra];
    const auto& vk = basis.states[ket];
    const long long K = static_cast<long long>(vb.size());
    double acc = 0.0;
    for (long long k = 0; k < K; ++k) {
        const long long r = k + halfsteps;
        if (r >= 0 && r < K) acc += vb[std::size_t(r)] * vk[std::size_t(k)];
    }
    return acc;
}

double cos_half_element(const TransmonEigenbasis& basis, std::size_t bra, std::size_t ket) {
    return 0.5 * (charge_shift_element(basis, 1, bra, ket) +
                  charge_shift_element(basis, -1, bra, ket));
}

DenseHermitian build_transmon_charge(const TransmonParams& tp, const ChargeGrid& grid) {
    validate_transmon(tp);
    return transmon_sparse(tp, grid).to_dense();
}

DenseHermitian build_transmon_charge(const TransmonParams& tp, const ChargeGrid& grid,
                                     const std::vector<double>& chain_offset_diag) {
    validate_transmon(tp);
    if (chain_offset_diag.empty()) throw PhysicsGuard("chain offset diagonal is empty");
    const std::size_t K = grid.size();
    const std::size_t C = chain_offset_diag.size();
    DenseHermitian h(K * C);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t s = 0; s < C; ++s)
            h(k * C + s, k * C + s) =
                tp.e_c * sq(grid.value(k) - chain_offset_diag[s] - tp.n_g);
    for (std::size_t k = 0; k + 2 < K; ++k)
        for (std::size_t s = 0; s < C; ++s) {
            h((k + 2) * C + s, k * C + s) = -0.5 * tp.e_j;
            h(k * C + s, (k + 2) * C + s) = -0.5 * tp.e_j;
        }
    return h;
}

BlochTable bloch_bands(const TransmonParams& tp, const std::vector<double>& kappa_grid,
                       int integer_cutoff) {
    validate_transmon(tp);
    if (integer_cutoff < 10)
        throw PhysicsGuard("integer charge cutoff below 10 distorts the lowest bands, got " +
                           std::to_string(integer_cutoff));
    const std::size_t m = std::size_t(2 * integer_cutoff + 1);
    BlochTable out;
    out.kappa.reserve(kappa_grid.size());
    out.e0.reserve(kappa_grid.size());
    out.e1.reserve(kappa_grid.size());
    for (double kap : kappa_grid) {
        DenseHermitian h(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double n = double(i) - double(integer_cutoff);
            h(i, i) = tp.e_c * sq(n - kap);  // kappa plays the gate-charge role
        }
        for (std::size_t i = 0; i + 1 < m; ++i) {
            h(i + 1, i) = -0.5 * tp.e_j;
            h(i, i + 1) = -0.5 * tp.e_j;
        }
        const EigenDecomposition ed = eigh(h);
        out.kappa.push_back(kap);
        out.e0.push_back(ed.eigenvalues[0]);
        out.e1.push_back(ed.eigenvalues[1]);
    }
    return out;
}

SparseMatrix build_kitaev_fermionic(const ChainParams& cp, cx pairing_phase) {
    validate_chain(cp);
    return kitaev_sites(cp, cp.length, 1, pairing_phase);
}

SparseMatrix build_kitaev_fermionic(const ChainParams& cp, const SpinRegister& reg,
                                    int first_site, cx pairing_phase) {
    validate_chain(cp);
    if (first_site < 1 || first_site + cp.length - 1 > reg.count)
        throw PhysicsGuard("chain does not fit the register at site " +
                           std::to_string(first_site));
    return kitaev_sites(cp, reg.count, first_site, pairing_phase);
}

SparseMatrix build_kitaev_fermionic(const ChainParams& cp, const SpinRegister& reg,
                                    int first_site, const SparseMatrix& creation_pair_phase,
                                    const ChargeGrid& grid) {
    validate_chain(cp);
    if (first_site < 1 || first_site + cp.length - 1 > reg.count)
        throw PhysicsGuard("chain does not fit the register at site " +
                           std::to_string(first_site));
    if (creation_pair_phase.rows() != grid.size() || creation_pair_phase.cols() != grid.size())
        throw PhysicsGuard("pairing phase operator does not act on the charge grid");
    ChainParams no_pair = cp;
    no_pair.delta_abs = 0.0;
    SparseMatrix h = kron(sparse_identity(grid.size()),
                          kitaev_sites(no_pair, reg.count, first_site, cx(1.0, 0.0)));
    for (int j = 0; j + 1 < cp.length; ++j) {
        const SparseMatrix a0 = raw_annihilator(reg.count, first_site + j);
        const SparseMatrix a1 = raw_annihilator(reg.count, first_site + j + 1);
        SparseMatrix term = kron(creation_pair_phase, matmul(a0.adjoint(), a1.adjoint()));
        term *= cx(cp.delta_abs, 0.0);
        h += term;
        h += term.adjoint();
    }
    h.coalesce();
    return h;
}

HilbertSpace mt_single_space(const ChargeGrid& grid, int L) {
    const std::size_t half = std::size_t{1} << L;
    return HilbertSpace({{"charge", grid.size()}, {"left", half}, {"right", half}});
}

DenseHermitian build_mt_single(const TransmonParams& tp, const ChainParams& cp,
                               const JunctionParams& jp, const ChargeGrid& grid,
                               bool include_charge_offset) {
    validate_transmon(tp);
    validate_chain(cp);
    const int L = cp.length;
    const int count = 2 * L;
    const std::size_t K = grid.size();
    const std::size_t sdim = std::size_t{1} << count;
    const std::size_t dim = K * sdim;
    if (dim > 6000)
        throw PhysicsGuard("single-qubit dense space has dimension " + std::to_string(dim) +
                           "; reduce the charge cutoff or chain length");
    const std::uint64_t right_mask = (std::uint64_t{1} << L) - 1;

    SparseMatrix h(dim, dim);
    // transmon diagonal, shifted by half the right-chain charge when the
    // rotated-frame offset is kept
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t s = 0; s < sdim; ++s) {
            const double off =
                include_charge_offset ? 0.5 * std::popcount(std::uint64_t(s) & right_mask) : 0.0;
            h.add(k * sdim + s, k * sdim + s,
                  cx(tp.e_c * sq(grid.value(k) - off - tp.n_g), 0.0));
        }
    SparseMatrix cos_k = charge_shift(grid, 2);
    cos_k += charge_shift(grid, -2);
    cos_k *= cx(-0.5 * tp.e_j, 0.0);
    h += kron(cos_k, sparse_identity(sdim));

    h += kron(sparse_identity(K), kitaev_sites(cp, count, 1, cx(-1.0, 0.0)));
    h += kron(sparse_identity(K), kitaev_sites(cp, count, L + 1, cx(-1.0, 0.0)));

    // -w e^{-i phi/2} b_L^dag a_1 + h.c.
    SparseMatrix hop = matmul(raw_annihilator(count, L).adjoint(), raw_annihilator(count, L + 1));
    SparseMatrix tun = kron(charge_shift(grid, -1), hop);
    tun *= cx(-jp.w, 0.0);
    h += tun;
    h += tun.adjoint();

    h.coalesce();
    return h.to_dense();
}

FrameReport verify_frame_transform(const TransmonParams& tp, const ChainParams& cp,
                                   const JunctionParams& jp, const ChargeGrid& grid) {
    validate_transmon(tp);
    validate_chain(cp);
    const int L = cp.length;
    const int count = 2 * L;
    const std::size_t K = grid.size();
    const std::size_t sdim = std::size_t{1} << count;
    const std::size_t dim = K * sdim;
    if (dim > 6000)
        throw PhysicsGuard("frame check space has dimension " + std::to_string(dim) +
                           "; reduce the charge cutoff or chain length");
    const std::uint64_t right_mask = (std::uint64_t{1} << L) - 1;

    const DenseHermitian rotated = build_mt_single(tp, cp, jp, grid, true);

    // Original frame: plain transmon, phase-free tunneling, and the pairing
    // phase e^{-i phi} riding on the ungrounded right chain.
    SparseMatrix orig(dim, dim);
    orig += kron(transmon_sparse(tp, grid), sparse_identity(sdim));
    orig += kron(sparse_identity(K), kitaev_sites(cp, count, 1, cx(-1.0, 0.0)));
    SparseMatrix pair_phase = charge_shift(grid, -2);
    pair_phase *= cx(-1.0, 0.0);
    orig += build_kitaev_fermionic(cp, SpinRegister(count), L + 1, pair_phase, grid);
    SparseMatrix hop = matmul(raw_annihilator(count, L).adjoint(), raw_annihilator(count, L + 1));
    SparseMatrix tun = kron(sparse_identity(K), hop);
    tun *= cx(-jp.w, 0.0);
    orig += tun;
    orig += tun.adjoint();
    orig.coalesce();

    // U = sum_s shift(n_r(s)) (x) |s><s|
    SparseMatrix u(dim, dim);
    for (std::size_t s = 0; s < sdim; ++s) {
        const int nr = std::popcount(std::uint64_t(s) & right_mask);
        for (std::size_t k = 0; k + nr < K; ++k)
            u.add((k + nr) * sdim + s, k * sdim + s, cx(1.0, 0.0));
    }
    u.coalesce();

    const DenseHermitian orig_d = orig.to_dense();
    const DenseHermitian u_d = u.to_dense();
    const DenseHermitian conjugated = matmul(matmul(u_d, orig_d), u_d.adjoint());

    FrameReport rep{};
    rep.norm_scale = rotated.max_abs();
    const std::size_t margin = 2;
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t ki = i / sdim;
        if (ki < margin || ki + margin >= K) continue;
        for (std::size_t j = 0; j < dim; ++j) {
            const std::size_t kj = j / sdim;
            if (kj < margin || kj + margin >= K) continue;
            worst = std::max(worst, std::abs(conjugated(i, j) - rotated(i, j)));
        }
    }
    rep.interior_deviation = worst;

    const EigenDecomposition eo = eigh(orig_d);
    const EigenDecomposition er = eigh(rotated);
    double low4 = 0.0, full = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = std::abs(eo.eigenvalues[i] - er.eigenvalues[i]);
        full = std::max(full, d);
        if (i < 4) low4 = std::max(low4, d);
    }
    rep.lowest4_deviation = low4;
    rep.full_spectrum_deviation = full;
    return rep;
}

std::vector<JunctionSpectrumRow> junction_effective_spectrum(
    double w, const std::vector<double>& theta_grid) {
    if (w < 0.0) throw PhysicsGuard("junction amplitude w must be non-negative");
    std::vector<JunctionSpectrumRow> rows;
    rows.reserve(theta_grid.size());
    for (double th : theta_grid) {
        const double e = 0.5 * w * std::cos(0.5 * th);
        rows.push_back({th, -e, e});
    }
    return rows;
}

TransmonEigenbasis transmon_eigenbasis(const TransmonParams& tp, const ChargeGrid& grid) {
    validate_transmon(tp);
    const std::size_t K = grid.size();
    const std::size_t tc = std::size_t(grid.twice_cutoff);

    std::vector<double> sub_energy[2];
    std::vector<std::vector<double>> sub_state[2];
    for (int par = 0; par < 2; ++par) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < K; ++k)
            if (((k + tc) % 2) == std::size_t(par)) idx.push_back(k);
        const std::size_t m = idx.size();
        DenseHermitian sub(m);
        for (std::size_t a = 0; a < m; ++a)
            sub(a, a) = tp.e_c * sq(grid.value(idx[a]) - tp.n_g);
        for (std::size_t a = 0; a + 1 < m; ++a) {
            sub(a + 1, a) = -0.5 * tp.e_j;
            sub(a, a + 1) = -0.5 * tp.e_j;
        }
        const EigenDecomposition ed = eigh(sub);
        sub_energy[par] = ed.eigenvalues;
        sub_state[par].reserve(m);
        for (std::size_t col = 0; col < m; ++col) {
            std::vector<double> full(K, 0.0);
            for (std::size_t a = 0; a < m; ++a) full[idx[a]] = ed.vectors(a, col).real();
            sub_state[par].push_back(std::move(full));
        }
    }

    TransmonEigenbasis out;
    out.twice_cutoff = grid.twice_cutoff;
    const std::size_t n0 = sub_energy[0].size();
    const std::size_t n1 = sub_energy[1].size();
    const std::size_t nm = std::min(n0, n1);
    out.energies.reserve(K);
    out.states.reserve(K);
    out.parity.reserve(K);
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        int par;
        std::size_t j;
        if (i < 2 * nm) {
            par = int(i % 2);
            j = i / 2;
        } else {
            par = n0 > n1 ? 0 : 1;
            j = i - nm;
        }
        out.energies.push_back(sub_energy[par][j]);
        out.states.push_back(std::move(sub_state[par][j]));
        out.parity.push_back(par);
    }
    return out;
}

DenseHermitian EffectiveModel::h2() const {
    DenseHermitian h(2);
    h(0, 0) = e01;
    h(1, 1) = -e01;
    h(0, 1) = h(1, 0) = cx(0.5 * w * c10, 0.0);
    return h;
}

DenseHermitian EffectiveModel::h2_signed() const {
    DenseHermitian h(2);
    h(0, 0) = e01;
    h(1, 1) = -e01;
    h(0, 1) = h(1, 0) = cx(x_signed, 0.0);
    return h;
}

EffectiveModel effective_single(const TransmonParams& tp, const ChargeGrid& grid, double w) {
    const TransmonEigenbasis basis = transmon_eigenbasis(tp, grid);
    EffectiveModel m;
    m.e01 = basis.e01();
    m.c10 = cos_half_element(basis, 1, 0);
    m.w = w;
    m.x_signed = -0.5 * w * m.c10;
    return m;
}

TwoQubitModel build_two_qubit(const TransmonParams& tp, const ChainParams& cp,
                              const JunctionParams& jp, double w12, const ChargeGrid& grid,
                              bool include_charge_offset) {
    validate_transmon(tp);
    validate_chain(cp);
    if (cp.length != 2)
        throw PhysicsGuard("the two-qubit device couples length-2 chains, got length " +
                           std::to_string(cp.length));
    const std::size_t K = grid.size();
    const std::size_t sdim = 4096;
    const std::size_t dim = K * K * sdim;
    if (dim > 600000)
        throw PhysicsGuard("two-qubit space has dimension " + std::to_string(dim) +
                           "; lower the charge cutoff");
    SpinRegister reg(12);

    SparseMatrix h(dim, dim);
    const SparseMatrix i_k = sparse_identity(K);
    const SparseMatrix i_kk = sparse_identity(K * K);
    const SparseMatrix i_s = sparse_identity(sdim);

    // six sweet-spot chains: qubit 1 junction (1-2, 3-4), inter-qubit link
    // (5-6, 7-8), qubit 2 junction (9-10, 11-12)
    for (int first : {1, 3, 5, 7, 9, 11})
        h += kron(i_kk, kitaev_sites(cp, 12, first, cx(-1.0, 0.0)));

    // charge diagonals; each transmon's offset counts its ungrounded group:
    // right chain + first link chain for qubit 1, mirrored for qubit 2
    const std::uint64_t mask1 = (1ull << 9) | (1ull << 8) | (1ull << 7) | (1ull << 6);
    const std::uint64_t mask2 = (1ull << 5) | (1ull << 4) | (1ull << 3) | (1ull << 2);
    std::vector<double> off1(sdim, 0.0), off2(sdim, 0.0);
    if (include_charge_offset)
        for (std::size_t s = 0; s < sdim; ++s) {
            off1[s] = 0.5 * std::popcount(std::uint64_t(s) & mask1);
            off2[s] = 0.5 * std::popcount(std::uint64_t(s) & mask2);
        }
    for (std::size_t k1 = 0; k1 < K; ++k1)
        for (std::size_t k2 = 0; k2 < K; ++k2) {
            const std::size_t base = (k1 * K + k2) * sdim;
            for (std::size_t s = 0; s < sdim; ++s)
                h.add(base + s, base + s,
                      cx(tp.e_c * (sq(grid.value(k1) - off1[s] - tp.n_g) +
                                   sq(grid.value(k2) - off2[s] - tp.n_g)),
                         0.0));
        }
    SparseMatrix cos_k = charge_shift(grid, 2);
    cos_k += charge_shift(grid, -2);
    cos_k *= cx(-0.5 * tp.e_j, 0.0);
    h += kron(kron(cos_k, i_k), i_s);
    h += kron(kron(i_k, cos_k), i_s);

    const auto hop_from = [&reg](int site) {
        return matmul(jw_annihilator(reg, site).adjoint(), jw_annihilator(reg, site + 1));
    };
    const SparseMatrix up = charge_shift(grid, 1);
    const SparseMatrix down = charge_shift(grid, -1);

    SparseMatrix t1 = kron(kron(down, i_k), hop_from(2));
    t1 *= cx(-jp.w, 0.0);
    h += t1;
    h += t1.adjoint();
    // qubit 2's ungrounded chain sits on the left of its junction, so the
    // phase direction mirrors qubit 1's
    SparseMatrix t2 = kron(kron(i_k, up), hop_from(10));
    t2 *= cx(-jp.w, 0.0);
    h += t2;
    h += t2.adjoint();
    // -w12 e^{-i (phi_2 - phi_1)/2} c_6^dag c_7 + h.c.
    SparseMatrix t12 = kron(kron(up, down), hop_from(6));
    t12 *= cx(-w12, 0.0);
    h += t12;
    h += t12.adjoint();

    h.coalesce();
    TwoQubitModel out;
    out.space = HilbertSpace({{"charge1", K}, {"charge2", K}, {"spins", sdim}});
    out.h = SparseHermitian::from_general(h, 1e-12);
    return out;
}

DenseHermitian EffectiveTwoQubit::h4() const { return two_qubit_matrix(*this, 1.0); }

DenseHermitian EffectiveTwoQubit::h4_signed() const { return two_qubit_matrix(*this, -1.0); }

EffectiveTwoQubit effective_two_qubit(const TransmonParams& tp, const ChargeGrid& grid, double w1,
                                      double w2, double w12) {
    const TransmonEigenbasis basis = transmon_eigenbasis(tp, grid);
    const auto elem = [&basis](int hs, std::size_t bra, std::size_t ket) {
        return charge_shift_element(basis, hs, bra, ket);
    };
    // <a1 a2| cos((phi_2 - phi_1)/2) |b1 b2>
    const auto cos12 = [&elem](std::size_t a1, std::size_t b1, std::size_t a2, std::size_t b2) {
        return 0.5 * (elem(-1, a1, b1) * elem(1, a2, b2) + elem(1, a1, b1) * elem(-1, a2, b2));
    };

    EffectiveTwoQubit m;
    m.e01 = basis.e01();
    m.c10 = cos_half_element(basis, 1, 0);
    m.c2 = 0.5 * (elem(1, 1, 0) * elem(-1, 1, 0) + elem(-1, 1, 0) * elem(1, 1, 0));
    m.w1 = w1;
    m.w2 = w2;
    m.w12 = w12;
    m.anti_diagonal_elements[0] = cos12(0, 1, 0, 1);  // <00| . |11>
    m.anti_diagonal_elements[1] = cos12(0, 1, 1, 0);  // <01| . |10>
    m.anti_diagonal_elements[2] = cos12(1, 0, 0, 1);  // <10| . |01>
    m.anti_diagonal_elements[3] = cos12(1, 0, 1, 0);  // <11| . |00>
    return m;
}

}  // namespace mtsim
