#pragma once

#include <optional>
#include <vector>

#include "mtsim/hilbert.hpp"
#include "mtsim/linalg.hpp"

namespace mtsim {

// Charging energy is per Cooper pair; gate charge n_g is dimensionless.
struct TransmonParams {
    double e_c;
    double e_j;
    double n_g = 0.0;
};

struct ChainParams {
    double mu;
    double t_hop;
    double delta_abs;
    int length;

    bool topological() const { return std::abs(mu) < 2.0 * t_hop; }
    bool sweet_spot() const { return mu == 0.0 && t_hop == delta_abs; }
};

struct JunctionParams {
    double w;    // single-electron tunneling amplitude across the junction
    double w_f;  // sweet-spot chain coupling, t = |Delta| = w_f
};

/*
 * Eigenstates of the decoupled transmon on the half-integer grid. The grid
 * splits into integer and half-integer sublattices that cos(phi) never
 * couples; states are interleaved: index 0 is the integer-sublattice ground
 * state, index 1 the half-integer one, then the excited states alternate
 * while both sublattices last. Coefficients are real with the leading
 * nonzero entry positive, which makes both ground states strictly positive.
 */
struct TransmonEigenbasis {
    int twice_cutoff = 0;
    std::vector<double> energies;
    std::vector<std::vector<double>> states;  // states[i] on the full grid
    std::vector<int> parity;                  // 0 = integer sublattice, 1 = half-integer

    double e01() const { return 0.5 * (energies[0] - energies[1]); }
    std::size_t count() const { return energies.size(); }
};

// <bra| S(halfsteps) |ket> on the stored charge grid; real because the
// eigenvectors are real.
double charge_shift_element(const TransmonEigenbasis& basis, int halfsteps, std::size_t bra,
                            std::size_t ket);

// <bra| cos(phi/2) |ket> = (S+ + S-)/2 matrix element.
double cos_half_element(const TransmonEigenbasis& basis, std::size_t bra, std::size_t ket);

// Transmon in the charge basis: diagonal E_C (n - n_g)^2 plus the Josephson
// term -(E_J/2)(shift-by-one + adjoint).
DenseHermitian build_transmon_charge(const TransmonParams& tp, const ChargeGrid& grid);

// Same, on the composite (charge x chain) space with the diagonal replaced
// by E_C (n - offset - n_g)^2; chain_offset_diag holds the offset eigenvalue
// for each chain basis state (the chains conserve it, so it is diagonal).
DenseHermitian build_transmon_charge(const TransmonParams& tp, const ChargeGrid& grid,
                                     const std::vector<double>& chain_offset_diag);

struct BlochTable {
    std::vector<double> kappa;
    std::vector<double> e0, e1;  // two lowest bands, microeV
};

// Two lowest quasicharge bands E_b(kappa) from the integer charge grid.
BlochTable bloch_bands(const TransmonParams& tp, const std::vector<double>& kappa_grid,
                       int integer_cutoff);

/*
 * Kitaev chain H = sum_j [ -(mu/2) c_j^dag c_j - t c_j^dag c_{j+1}
 *                          + Delta c_j^dag c_{j+1}^dag + h.c. ]
 * with Delta = delta_abs * pairing_phase on the creation pair. Standalone
 * form lives on the chain's own 2^L space.
 */
SparseMatrix build_kitaev_fermionic(const ChainParams& cp, cx pairing_phase);

// Chain occupying sites [first_site, first_site + L) of a shared register.
SparseMatrix build_kitaev_fermionic(const ChainParams& cp, const SpinRegister& reg,
                                    int first_site, cx pairing_phase);

// Original-frame variant: the pairing phase is an operator on a charge
// factor (e^{-i phi} attached to the creation pair); returns the term on the
// composite (charge x register) space.
SparseMatrix build_kitaev_fermionic(const ChainParams& cp, const SpinRegister& reg,
                                    int first_site, const SparseMatrix& creation_pair_phase,
                                    const ChargeGrid& grid);

// Composite space of the single-qubit device, factors (charge, left, right).
HilbertSpace mt_single_space(const ChargeGrid& grid, int L);

/*
 * Rotated-frame device Hamiltonian on charge x 2^{2L}: transmon (optionally
 * with the E_C(n - n^(r)/2 - n_g)^2 charge offset), two phase-free chains,
 * and the junction tunneling -w (e^{-i phi/2} b_L^dag a_1 + h.c.) realized
 * with charge shifts.
 */
DenseHermitian build_mt_single(const TransmonParams& tp, const ChainParams& cp,
                               const JunctionParams& jp, const ChargeGrid& grid,
                               bool include_charge_offset = true);

struct FrameReport {
    double interior_deviation;      // max |U H U^dag - H~| away from the charge boundary
    double norm_scale;              // ||H||_max used to normalize the interior check
    double lowest4_deviation;       // max difference of the four lowest eigenvalues
    double full_spectrum_deviation; // max difference over the whole sorted spectra
};

// Builds the original-frame Hamiltonian (pairing carries e^{-i phi} as an
// operator, tunneling phase-free), the rotated-frame one, and the charge
// shift unitary conditioned on chain charge; reports how well conjugation
// maps one to the other. The charge boundary rows are excluded from the
// interior figure (two grid steps of margin); spectra are compared as is.
FrameReport verify_frame_transform(const TransmonParams& tp, const ChainParams& cp,
                                   const JunctionParams& jp, const ChargeGrid& grid);

struct JunctionSpectrumRow {
    double theta;
    double e_occupied;   // -(w/2) cos(theta/2), branch-continued
    double e_unoccupied; // +(w/2) cos(theta/2)
};

// Effective junction-fermion spectrum over a theta grid (typically [0, 4pi]);
// the two branches cross at theta = pi, 3pi without hybridizing.
std::vector<JunctionSpectrumRow> junction_effective_spectrum(double w,
                                                             const std::vector<double>& theta_grid);

TransmonEigenbasis transmon_eigenbasis(const TransmonParams& tp, const ChargeGrid& grid);

/*
 * Projected single-qubit model H_P = E01 Z + (w/2) c10 X in the qubit basis
 * (|0>, |1>). x_signed is the matrix element <psi~_1 Omega| H~ |psi~_0 Omega>
 * of the full model under the c10 >= 0 phase fixing; it equals -(w/2) c10,
 * so the H_P form above corresponds to the qubit basis (|psi~_0>, -|psi~_1>).
 * Observables depend only on |c10|.
 */
struct EffectiveModel {
    double e01;
    double c10;
    double w;
    double x_signed;

    DenseHermitian h2() const;         // canonical form, +(w/2) c10 X
    DenseHermitian h2_signed() const;  // raw projected sign; overlaps with full-device
                                       // states in the (psi~_0, psi~_1) basis need this one
};

EffectiveModel effective_single(const TransmonParams& tp, const ChargeGrid& grid, double w);

struct TwoQubitModel {
    HilbertSpace space;  // factors: charge1, charge2, spins (12 sites)
    SparseHermitian h;
};

/*
 * Rotated-frame two-qubit device: two junctions (chain sites 1-4 and 9-12)
 * plus the inter-qubit link chains (sites 5-8), tunneling at sites 6-7
 * carrying e^{-+i (phi_2 - phi_1)/2}. Qubit 2 has its left chain ungrounded,
 * so its junction phases and charge offset mirror qubit 1's.
 */
TwoQubitModel build_two_qubit(const TransmonParams& tp, const ChainParams& cp,
                              const JunctionParams& jp, double w12, const ChargeGrid& grid,
                              bool include_charge_offset = true);

struct EffectiveTwoQubit {
    double e01;
    double c10;
    double c2;
    double w1, w2, w12;
    double anti_diagonal_elements[4];  // the four cos elements, computed independently

    // sum_j [E01 Z_j + (w_j/2) c10 X_j] + (w12/2) c2 X1 X2. The raw projection
    // of the device gives all three transverse terms a minus sign, and the
    // sign product is invariant under qubit basis phases, so h4_signed() is
    // the form whose eigenvectors overlap correctly with full-device states.
    DenseHermitian h4() const;
    DenseHermitian h4_signed() const;
};

EffectiveTwoQubit effective_two_qubit(const TransmonParams& tp, const ChargeGrid& grid, double w1,
                                      double w2, double w12);

}  // namespace mtsim
