#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "mtsim/hilbert.hpp"
#include "mtsim/linalg.hpp"
#include "mtsim/model.hpp"

namespace mtsim {

// hbar in ueV * ns. Energies in ueV make hbar/ueV the natural time unit;
// traces report both.
inline constexpr double kHbarUevNs = 0.6582119569;

struct PulseSegment {
    double t_start;
    double t_end;
    double amplitude;  // tunneling amplitude in ueV, constant over [t_start, t_end)
};

/*
 * Piecewise-constant tunneling drive. Segments must be ascending and
 * non-overlapping with non-negative amplitudes; gaps between segments evolve
 * with the tunneling switched off.
 */
struct PulseSchedule {
    std::vector<PulseSegment> segments;

    static PulseSchedule constant(double amplitude, double duration);

    void validate() const;    // throws PhysicsGuard on a malformed schedule
    double duration() const;  // end of the last segment, 0 when empty
    double area() const;      // integral of the amplitude over time
};

// Ground state |Omega> of the two decoupled sweet-spot chains flanking a
// junction, (|Phi>|Phi> + |Psi>|Psi>)/sqrt(2) on the 16-dim spin factor.
// Only chains of length two have this explicit form.
std::vector<cx> chain_vacuum_state(int length = 2);

// |psi~_which> (x) |Omega>, normalized, on the charge (x) spin space.
std::vector<cx> prepare_initial(const TransmonEigenbasis& basis, int which);

// Junction tunneling operator at unit amplitude: the direction along which
// gate-charge noise enters, e^{-i phi/2} b_L^dag a_1 + h.c.
DenseHermitian tunneling_noise_operator(const ChargeGrid& grid);

struct SimulationTrace {
    std::vector<double> times;     // natural units, hbar/ueV
    std::vector<double> times_ns;
    std::vector<double> p0;        // |<psi~_0 Omega | state>|^2
    std::vector<double> p1;
    std::vector<double> purity;    // transmon-subsystem purity tr(rho_T^2)
    std::vector<double> g0_occupation;  // junction fermion <(1 - sx_2 sx_3)/2>
    std::vector<double> full_purity;    // tr(rho^2), filled by the noisy path only
};

// Uniform grid of n points covering [0, t_end], first point at 0.
std::vector<double> uniform_grid(double t_end, std::size_t n = 400);

// Peak of y(t) restricted to t >= t_min: quadratic fit through the discrete
// maximum and its neighbours. Returns the fitted peak value and optionally
// the peak time. Needs at least three points past t_min.
double trace_peak(const std::vector<double>& t, const std::vector<double>& y, double t_min,
                  double* t_at = nullptr);

// Spectral propagation of a pure state, observables sampled on t_grid.
SimulationTrace evolve_unitary(const DenseHermitian& h, const TransmonEigenbasis& basis,
                               const std::vector<cx>& state0,
                               const std::vector<double>& t_grid);

/*
 * Charge-noise master equation
 *     drho/dt = -i [h, rho] - (alpha/2) [l, [l, rho]]
 * integrated with fixed-step RK4; l_noise is the unit-amplitude perturbation
 * direction and alpha the white-noise strength in ueV^-1.
 */
SimulationTrace evolve_noisy(const DenseHermitian& h, const DenseHermitian& l_noise,
                             double alpha, const DenseHermitian& rho0,
                             const std::vector<double>& t_grid, const TransmonEigenbasis& basis,
                             const Rk4Options& opt = {});

struct GateOptions {
    int initial = 0;                // starting qubit state, 0 or 1
    std::size_t trace_points = 400;
    bool convergence_check = true;  // noisy path: rerun at half step, report |dF|
};

struct GateResult {
    double angle;           // rotation angle the schedule implements, c10 * area
    double fidelity;        // <target|rho_final|target> against the projected target
    double step_check;      // |F - F at half step|; 0 on the unitary path
    bool zeeman_in_target;  // whether the E01 Z term was kept in the target
    bool weak_drive;        // amplitude not well above the qubit splitting |2 E01|
    std::vector<cx> final_state;              // filled on the unitary path
    std::optional<DenseHermitian> final_rho;  // filled on the noisy path
    SimulationTrace trace;
};

/*
 * R_X protocol: drive the junction tunneling along the schedule and compare
 * the full-model final state against the projected two-level target. The
 * target keeps the Zeeman term when |2 E01| * duration exceeds 1e-3 rad and
 * carries the raw projected coupling sign throughout; populations are
 * insensitive to that sign but overlaps are not. The noisy path steps with
 * dt = min(0.02/|h|, duration/2000).
 */
GateResult rx_gate(const TransmonParams& tp, const ChainParams& cp, const ChargeGrid& grid,
                   const PulseSchedule& schedule, double alpha, const GateOptions& opt = {});

struct TwoQubitGateResult {
    double angle;                   // theta = (c2/2) * schedule area
    std::array<cx, 4> final_state;  // amplitudes on |00>, |01>, |10>, |11>
    double concurrence;
};

// Wootters concurrence of a normalized pure two-qubit state, 2|ad - bc|.
double concurrence_pure(const std::array<cx, 4>& state);

// R_XX on the projected four-level model: exp(-i theta X1 X2) applied to the
// initial state, theta accumulated from the w12 schedule. The Zeeman terms
// are dropped from the protocol, matching the entangling-gate convention.
TwoQubitGateResult rxx_gate(const EffectiveTwoQubit& model, const PulseSchedule& schedule,
                            const std::array<cx, 4>& initial);

struct TwoQubitTransfer {
    std::vector<double> times;
    std::vector<double> p00;  // |<psi~_0 psi~_0 Omega | state>|^2
    std::vector<double> p11;
    double period_measured;   // twice the fitted |11> peak time
    double period_predicted;  // 2 pi / (w12 c2)
};

/*
 * Full-device cross-check of the entangling gate: Krylov propagation of
 * |psi~_0 psi~_0 Omega> under the sparse two-qubit Hamiltonian with only the
 * inter-qubit tunneling on. Samples bracket the |11> population peak near
 * half the predicted period; window is the half-width of that bracket as a
 * fraction of the predicted half-period.
 */
TwoQubitTransfer two_qubit_transfer(const TransmonParams& tp, const ChainParams& cp, double w12,
                                    const ChargeGrid& grid, std::size_t n_samples = 13,
                                    double window = 0.25);

}  // namespace mtsim
