#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "mtsim/dynamics.hpp"
#include "mtsim/errors.hpp"
#include "mtsim/hilbert.hpp"
#include "mtsim/model.hpp"

using namespace mtsim;

namespace {

TransmonParams device_tp() { return {0.005, 1.0, 0.0}; }
ChainParams sweet_cp() { return {0.0, 12.0, 12.0, 2}; }

constexpr double kPi = std::numbers::pi;

// Junction matrix elements c10 = <psi~_1|cos(phi/2)|psi~_0> at E_J/E_C = 200,
// frozen in the model tests.
constexpr double C10_TC5 = 0.958942833027;
constexpr double C10_TC9 = 0.985673226251;

// Frozen dynamics references at the device point (E_J = 1 microeV,
// E_J/E_C = 200, w_F = 12, w = 3, charge cutoff 5/2 unless stated).
// Values marked [proto] were cross-checked against an independent
// dense-propagation prototype; the rest are regression pins of this code.
constexpr double MIN_P_SUM_TC5 = 0.981973905;    // [proto] exact to 9 digits
constexpr double MIN_P_SUM_TC9 = 0.991853834;    // cutoff 9/2 rerun
constexpr double MIN_PURITY_TC5 = 0.989497334;   // [proto] exact to 9 digits
constexpr double T_MEAS_TC5 = 2.189061450;       // fitted full-model period
constexpr double T_MEAS_TC5_PROTO = 2.188665966; // same quantity, coarser fit grid
constexpr double T_MEAS_TC9 = 2.107343984;
constexpr double T_MEAS_TC9_PROTO = 2.107535943;
constexpr double REVIVAL_TC5 = 0.957177631;      // [proto] 0.957178
constexpr double RX_HALF_F_TC9 = 0.995014423;    // [proto] 0.995014
constexpr double RX_HALF_P1_TC9 = 0.995014802;   // [proto] 0.995015
constexpr double RX_HALF_F_TC5 = 0.982391;       // [proto]
constexpr double RX_FULL_F_TC9 = 0.966505020;    // [proto] 0.966491 at its own fit
constexpr double RX_QUARTER_F_TC5 = 0.983013864;
constexpr double TRANSFER_PERIOD_TC3 = 2.433440;
constexpr double TRANSFER_PEAK_TC3 = 0.924123;

double rabi_period(double c10) { return 2.0 * kPi / (3.0 * c10); }

// Dynamics run on the junction form of the device Hamiltonian, where the
// transmon term acts on the charge factor alone.
DenseHermitian device_h(const ChargeGrid& grid, double w) {
    return build_mt_single(device_tp(), sweet_cp(), {w, 12.0}, grid, false);
}

DenseHermitian outer(const std::vector<cx>& v) {
    DenseHermitian m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_entry_diff(const DenseHermitian& a, const DenseHermitian& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

}  // namespace

TEST_CASE("pulse schedule: bookkeeping and validation") {
    const PulseSchedule flat = PulseSchedule::constant(3.0, 2.5);
    flat.validate();
    CHECK(flat.duration() == doctest::Approx(2.5));
    CHECK(flat.area() == doctest::Approx(7.5));

    // gaps between segments are legal; they evolve with the drive off
    const PulseSchedule gapped{{{0.0, 1.0, 2.0}, {2.0, 3.0, 1.0}}};
    gapped.validate();
    CHECK(gapped.duration() == doctest::Approx(3.0));
    CHECK(gapped.area() == doctest::Approx(3.0));

    const PulseSchedule empty{};
    CHECK(empty.duration() == 0.0);

    const PulseSchedule overlapping{{{0.0, 1.0, 1.0}, {0.5, 2.0, 1.0}}};
    const PulseSchedule zero_length{{{1.0, 1.0, 1.0}}};
    const PulseSchedule negative_start{{{-0.5, 1.0, 1.0}}};
    const PulseSchedule negative_amp{{{0.0, 1.0, -2.0}}};
    CHECK_THROWS_AS(overlapping.validate(), PhysicsGuard);
    CHECK_THROWS_AS(zero_length.validate(), PhysicsGuard);
    CHECK_THROWS_AS(negative_start.validate(), PhysicsGuard);
    CHECK_THROWS_AS(negative_amp.validate(), PhysicsGuard);
}

TEST_CASE("chain vacuum: structure and junction quantum number") {
    const std::vector<cx> omega = chain_vacuum_state();
    REQUIRE(omega.size() == 16);

    const double amp = 0.5 / std::sqrt(2.0);
    std::size_t support = 0;
    double norm = 0.0;
    for (std::size_t s = 0; s < 16; ++s) {
        norm += std::norm(omega[s]);
        if (std::abs(omega[s]) == 0.0) continue;
        ++support;
        CHECK(std::abs(omega[s] - cx(amp, 0.0)) <= 1e-15);
        // even occupation on each chain: bits {1,2} and {3,4} have equal parity
        const int left = int(s >> 2), right = int(s & 3);
        CHECK((std::popcount(unsigned(left)) + std::popcount(unsigned(right))) % 2 == 0);
    }
    CHECK(support == 8);
    CHECK(std::abs(norm - 1.0) <= 1e-14);

    // g0^dag g0 = (1 - sx_2 sx_3)/2 annihilates the vacuum
    const SpinRegister reg(4);
    const SparseMatrix sxsx = matmul(spin_pauli(reg, 2, PauliAxis::x), spin_pauli(reg, 3, PauliAxis::x));
    const std::vector<cx> gx = sxsx.apply(omega);
    double resid = 0.0;
    for (std::size_t s = 0; s < 16; ++s) resid += std::norm(0.5 * (omega[s] - gx[s]));
    CHECK(std::sqrt(resid) <= 1e-12);

    CHECK_THROWS_AS(chain_vacuum_state(3), PhysicsGuard);
}

TEST_CASE("prepared initial states: normalization and stationarity at zero drive") {
    const ChargeGrid grid(5);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const std::vector<cx> s0 = prepare_initial(basis, 0);
    const std::vector<cx> s1 = prepare_initial(basis, 1);

    CHECK(std::abs(norm2(s0) - 1.0) <= 1e-12);
    CHECK(std::abs(norm2(s1) - 1.0) <= 1e-12);
    CHECK(std::abs(inner(s0, s1)) <= 1e-12);

    // with the junction off the product state is an exact eigenstate: the
    // transmon contributes its level and each chain its condensate energy -2 w_F
    const DenseHermitian h0 = device_h(grid, 0.0);
    const double energy = basis.energies[0] - 24.0;
    const std::vector<cx> hv = h0.apply(s0);
    double resid = 0.0;
    for (std::size_t i = 0; i < s0.size(); ++i) resid += std::norm(hv[i] - energy * s0[i]);
    CHECK(std::sqrt(resid) <= 1e-9);

    CHECK_THROWS_AS(prepare_initial(basis, 2), PhysicsGuard);
}

TEST_CASE("tunneling direction operator: hermiticity and qubit matrix element") {
    const ChargeGrid grid(5);
    const DenseHermitian l = tunneling_noise_operator(grid);
    CHECK(l.hermiticity_error() <= 1e-13);

    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const EffectiveModel eff = effective_single(device_tp(), grid, 1.0);
    const std::vector<cx> s0 = prepare_initial(basis, 0);
    const std::vector<cx> s1 = prepare_initial(basis, 1);

    // <1|l|0> = c10/2 with the phase fixed real; the diagonal element vanishes
    // exactly because the half shift maps between charge sublattices
    const std::vector<cx> ls0 = l.apply(s0);
    const cx off = inner(s1, ls0);
    CHECK(std::abs(off.imag()) <= 1e-12);
    CHECK(std::abs(off.real() - 0.5 * eff.c10) <= 1e-10);
    CHECK(std::abs(inner(s0, ls0)) <= 1e-12);
}

TEST_CASE("uniform grid and quadratic peak refinement") {
    const std::vector<double> g = uniform_grid(2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(0.5));
    CHECK(uniform_grid(2.0, 1).size() == 1);
    CHECK(uniform_grid(-1.0, 9).size() == 1);

    // sampled parabola is recovered exactly by the quadratic fit
    std::vector<double> t, y;
    for (int k = 0; k <= 40; ++k) {
        t.push_back(0.1 * k);
        y.push_back(1.0 - (t.back() - 1.3) * (t.back() - 1.3));
    }
    double t_at = 0.0;
    const double peak = trace_peak(t, y, 0.0, &t_at);
    CHECK(std::abs(peak - 1.0) <= 1e-12);
    CHECK(std::abs(t_at - 1.3) <= 1e-12);

    // past the true maximum the data is monotone, so the refiner must not
    // extrapolate back out of its window; it reports the discrete maximum
    double t_late = 0.0;
    const double v_late = trace_peak(t, y, 2.5, &t_late);
    CHECK(std::abs(t_late - 2.5) <= 1e-12);
    CHECK(std::abs(v_late - (1.0 - 1.2 * 1.2)) <= 1e-12);

    CHECK_THROWS_AS(trace_peak({0.0, 1.0}, {1.0, 2.0}, 0.9, nullptr), PhysicsGuard);
}

TEST_CASE("full-device Rabi oscillation against the projected-model period") {
    const ChargeGrid grid(5);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const DenseHermitian h = device_h(grid, 3.0);
    const std::vector<cx> s0 = prepare_initial(basis, 0);
    const double period = rabi_period(C10_TC5);

    const SimulationTrace tr = evolve_unitary(h, basis, s0, uniform_grid(period, 400));
    CHECK(std::abs(tr.p0.front() - 1.0) <= 1e-12);
    double min_sum = 1e9;
    for (std::size_t i = 0; i < tr.p0.size(); ++i) {
        const double s = tr.p0[i] + tr.p1[i];
        CHECK(s <= 1.0 + 1e-8);
        min_sum = std::min(min_sum, s);
    }
    // the qubit subspace carries almost all weight through the cycle; at this
    // truncation the floor sits just below the 0.99 device target, which the
    // 9/2 rerun below recovers
    CHECK(std::abs(min_sum - MIN_P_SUM_TC5) <= 2e-6);
    CHECK(min_sum >= 0.98);

    const ChargeGrid grid9(9);
    const TransmonEigenbasis basis9 = transmon_eigenbasis(device_tp(), grid9);
    const SimulationTrace tr9 = evolve_unitary(device_h(grid9, 3.0), basis9,
                                               prepare_initial(basis9, 0),
                                               uniform_grid(rabi_period(C10_TC9), 400));
    double min_sum9 = 1e9;
    for (std::size_t i = 0; i < tr9.p0.size(); ++i)
        min_sum9 = std::min(min_sum9, tr9.p0[i] + tr9.p1[i]);
    CHECK(std::abs(min_sum9 - MIN_P_SUM_TC9) <= 5e-5);
    CHECK(min_sum9 >= 0.99);

    // measured oscillation period vs the projected-model prediction 2 pi/(w c10)
    const SimulationTrace fine = evolve_unitary(h, basis, s0, uniform_grid(1.12 * period, 1601));
    double t_peak = 0.0;
    trace_peak(fine.times, fine.p0, 0.8 * period, &t_peak);
    CHECK(std::abs(t_peak - T_MEAS_TC5) <= 5e-5);
    CHECK(std::abs(t_peak - T_MEAS_TC5_PROTO) <= 1e-3);
    CHECK(std::abs(t_peak / period - 1.0) <= 0.05);

    // no drive, no oscillation
    const SimulationTrace still = evolve_unitary(device_h(grid, 0.0), basis, s0,
                                                 uniform_grid(1.0, 11));
    for (double p : still.p0) CHECK(std::abs(p - 1.0) <= 1e-10);
}

TEST_CASE("transmon subsystem stays nearly pure over two cycles") {
    const ChargeGrid grid(5);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const SimulationTrace tr =
        evolve_unitary(device_h(grid, 3.0), basis, prepare_initial(basis, 0),
                       uniform_grid(2.0 * rabi_period(C10_TC5), 401));
    double min_purity = 1e9;
    for (double p : tr.purity) {
        CHECK(p <= 1.0 + 1e-8);
        min_purity = std::min(min_purity, p);
    }
    CHECK(std::abs(min_purity - MIN_PURITY_TC5) <= 2e-6);
    CHECK(min_purity >= 0.95);
}

TEST_CASE("noise-free master equation matches unitary evolution") {
    const ChargeGrid grid(5);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const DenseHermitian h = device_h(grid, 3.0);
    const std::vector<cx> s0 = prepare_initial(basis, 0);
    const std::vector<double> t_grid = uniform_grid(0.25 * rabi_period(C10_TC5), 21);

    const SimulationTrace uni = evolve_unitary(h, basis, s0, t_grid);
    const SimulationTrace noi =
        evolve_noisy(h, tunneling_noise_operator(grid), 0.0, outer(s0), t_grid, basis);

    CHECK(max_abs_diff(uni.p0, noi.p0) <= 1e-6);
    CHECK(max_abs_diff(uni.p1, noi.p1) <= 1e-6);
    CHECK(max_abs_diff(uni.purity, noi.purity) <= 1e-6);
    for (double f : noi.full_purity) CHECK(std::abs(f - 1.0) <= 1e-6);
}

TEST_CASE("charge noise damps the oscillation and caps the revival") {
    const ChargeGrid grid(5);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const std::vector<cx> s0 = prepare_initial(basis, 0);
    const double period = rabi_period(C10_TC5);

    const SimulationTrace tr =
        evolve_noisy(device_h(grid, 3.0), tunneling_noise_operator(grid), 0.03, outer(s0),
                     uniform_grid(1.12 * period, 121), basis);

    for (std::size_t i = 0; i < tr.p0.size(); ++i) CHECK(tr.p0[i] + tr.p1[i] <= 1.0 + 1e-8);
    // white tunneling noise only contracts the full-device state
    for (std::size_t i = 1; i < tr.full_purity.size(); ++i)
        CHECK(tr.full_purity[i] <= tr.full_purity[i - 1] + 1e-9);

    double t_at = 0.0;
    const double revival = trace_peak(tr.times, tr.p0, 0.8 * period, &t_at);
    // at this truncation the first-cycle revival lands below the 0.965..0.985
    // device band; the 9/2 rerun (see the acceptance runner) sits inside it
    CHECK(std::abs(revival - REVIVAL_TC5) <= 1e-4);
    CHECK(revival >= 0.95);
    CHECK(revival <= 0.988);  // strictly under the unitary revival
    CHECK(t_at >= 0.9 * period);
}

TEST_CASE("rotation gate bookkeeping: angle, flags, and guards") {
    const ChargeGrid grid(5);
    const EffectiveModel eff = effective_single(device_tp(), grid, 1.0);
    const double period = 2.0 * kPi / (3.0 * eff.c10);

    GateOptions opt;
    opt.convergence_check = false;

    const PulseSchedule no_pulse{};
    const GateResult idle = rx_gate(device_tp(), sweet_cp(), grid, no_pulse, 0.0, opt);
    CHECK(idle.fidelity == doctest::Approx(1.0));
    CHECK(idle.angle == 0.0);

    const GateResult full =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, period), 0.0, opt);
    CHECK(std::abs(full.angle - 2.0 * kPi) <= 1e-12);
    CHECK(full.zeeman_in_target);  // 2 E01 t ~ 0.07 rad over a full cycle
    CHECK_FALSE(full.weak_drive);

    const GateResult weak =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(0.2, 0.1), 0.0, opt);
    CHECK(weak.weak_drive);

    CHECK_THROWS_AS(rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, 1.0), -0.1,
                            opt),
                    PhysicsGuard);
    GateOptions bad = opt;
    bad.initial = 2;
    CHECK_THROWS_AS(rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, 1.0), 0.0,
                            bad),
                    PhysicsGuard);
    const PulseSchedule overlapping{{{0.0, 1.0, 1.0}, {0.5, 2.0, 1.0}}};
    CHECK_THROWS_AS(rx_gate(device_tp(), sweet_cp(), grid, overlapping, 0.0, opt), PhysicsGuard);
}

TEST_CASE("half-period pulse acts as an X gate") {
    GateOptions opt;
    opt.convergence_check = false;

    const ChargeGrid grid9(9);
    const double half9 = kPi / (3.0 * C10_TC9);
    const GateResult g9 =
        rx_gate(device_tp(), sweet_cp(), grid9, PulseSchedule::constant(3.0, half9), 0.0, opt);
    CHECK(std::abs(g9.angle - kPi) <= 1e-9);
    CHECK(g9.step_check == 0.0);  // spectral propagation, no step size involved
    CHECK(std::abs(g9.fidelity - RX_HALF_F_TC9) <= 1e-4);
    CHECK(g9.fidelity >= 0.99);
    CHECK(std::abs(g9.trace.p1.back() - RX_HALF_P1_TC9) <= 1e-4);
    CHECK(g9.trace.p1.back() >= 0.99);

    const ChargeGrid grid5(5);
    const double half5 = kPi / (3.0 * C10_TC5);
    const GateResult g5 =
        rx_gate(device_tp(), sweet_cp(), grid5, PulseSchedule::constant(3.0, half5), 0.0, opt);
    CHECK(std::abs(g5.fidelity - RX_HALF_F_TC5) <= 2e-4);
}

TEST_CASE("full-cycle gate fidelity under charge noise") {
    const ChargeGrid grid(9);
    const TransmonEigenbasis basis = transmon_eigenbasis(device_tp(), grid);
    const DenseHermitian h = device_h(grid, 3.0);
    const double period = rabi_period(C10_TC9);

    // calibrate the cycle time from the device itself, as the protocol would
    const SimulationTrace fine =
        evolve_unitary(h, basis, prepare_initial(basis, 0), uniform_grid(1.12 * period, 1601));
    double t_gate = 0.0;
    trace_peak(fine.times, fine.p0, 0.8 * period, &t_gate);
    CHECK(std::abs(t_gate - T_MEAS_TC9) <= 5e-5);
    CHECK(std::abs(t_gate - T_MEAS_TC9_PROTO) <= 1e-3);
    CHECK(std::abs(t_gate / period - 1.0) <= 0.05);

    GateOptions opt;
    opt.convergence_check = false;
    const GateResult g =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, t_gate), 0.03, opt);
    CHECK(std::abs(g.fidelity - RX_FULL_F_TC9) <= 7e-4);
    CHECK(g.fidelity >= 0.965);
    CHECK(g.fidelity <= 0.985);
    REQUIRE(g.final_rho.has_value());
    CHECK(std::abs(trace(*g.final_rho).real() - 1.0) <= 1e-8);
}

TEST_CASE("integrator convergence and pulse composition") {
    const ChargeGrid grid(5);
    const double quarter = 0.25 * rabi_period(C10_TC5);

    GateOptions checked;
    const GateResult q =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, quarter), 0.03,
                checked);
    CHECK(q.step_check <= 1e-5);
    CHECK(std::abs(q.fidelity - RX_QUARTER_F_TC5) <= 2e-4);

    GateOptions opt;
    opt.convergence_check = false;

    // a pulse split into back-to-back segments is the same pulse
    const double half = 2.0 * quarter;
    const GateResult one =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, half), 0.0, opt);
    const PulseSchedule split_half{{{0.0, quarter, 3.0}, {quarter, half, 3.0}}};
    const GateResult two = rx_gate(device_tp(), sweet_cp(), grid, split_half, 0.0, opt);
    double state_diff = 0.0;
    for (std::size_t i = 0; i < one.final_state.size(); ++i)
        state_diff = std::max(state_diff, std::abs(one.final_state[i] - two.final_state[i]));
    CHECK(state_diff <= 1e-9);

    const double eighth = 0.5 * quarter;
    const GateResult nq =
        rx_gate(device_tp(), sweet_cp(), grid, PulseSchedule::constant(3.0, quarter), 0.03, opt);
    const PulseSchedule split_quarter{{{0.0, eighth, 3.0}, {eighth, quarter, 3.0}}};
    const GateResult ns = rx_gate(device_tp(), sweet_cp(), grid, split_quarter, 0.03, opt);
    REQUIRE(nq.final_rho.has_value());
    REQUIRE(ns.final_rho.has_value());
    CHECK(max_entry_diff(*nq.final_rho, *ns.final_rho) <= 1e-8);
    CHECK(std::abs(nq.fidelity - ns.fidelity) <= 1e-8);
}

TEST_CASE("gate fidelity decreases with noise strength") {
    const ChargeGrid grid(5);
    const PulseSchedule pulse = PulseSchedule::constant(3.0, 0.25 * rabi_period(C10_TC5));
    GateOptions opt;
    opt.convergence_check = false;

    std::vector<double> f;
    for (double alpha : {0.0, 0.01, 0.03, 0.06})
        f.push_back(rx_gate(device_tp(), sweet_cp(), grid, pulse, alpha, opt).fidelity);
    for (std::size_t k = 1; k < f.size(); ++k) CHECK(f[k] < f[k - 1]);
    CHECK(f.front() - f.back() >= 0.01);
}

TEST_CASE("entangling gate closed form") {
    const ChargeGrid grid(5);
    const EffectiveTwoQubit model = effective_two_qubit(device_tp(), grid, 0.0, 0.0, 3.0);
    REQUIRE(model.c2 > 0.0);

    const std::array<cx, 4> zz{cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)};

    // quarter turn from |00>: an equal superposition with |11>, maximally entangled
    const double area = 0.5 * kPi / model.c2;
    const PulseSchedule quarter = PulseSchedule::constant(3.0, area / 3.0);
    const TwoQubitGateResult bell = rxx_gate(model, quarter, zz);
    CHECK(std::abs(bell.angle - 0.25 * kPi) <= 1e-12);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(bell.final_state[0] - cx(r, 0.0)) <= 1e-12);
    CHECK(std::abs(bell.final_state[1]) <= 1e-15);
    CHECK(std::abs(bell.final_state[2]) <= 1e-15);
    CHECK(std::abs(bell.final_state[3] - cx(0.0, -r)) <= 1e-12);
    CHECK(std::abs(bell.concurrence - 1.0) <= 1e-9);

    // zero area is the identity
    const PulseSchedule no_pulse{};
    const TwoQubitGateResult none = rxx_gate(model, no_pulse, zz);
    CHECK(none.angle == 0.0);
    CHECK(std::abs(none.final_state[0] - cx(1.0, 0.0)) <= 1e-15);
    CHECK(none.concurrence <= 1e-12);

    // the same quarter turn entangles |01> with |10>
    const std::array<cx, 4> zo{cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)};
    CHECK(std::abs(rxx_gate(model, quarter, zo).concurrence - 1.0) <= 1e-9);

    // a half turn maps |00> to |11>: a product state again
    const TwoQubitGateResult flip =
        rxx_gate(model, PulseSchedule::constant(3.0, 2.0 * area / 3.0), zz);
    CHECK(std::abs(std::abs(flip.final_state[3]) - 1.0) <= 1e-12);
    CHECK(flip.concurrence <= 1e-12);

    const std::array<cx, 4> unnormalized{cx(2.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)};
    CHECK_THROWS_AS(concurrence_pure(unnormalized), PhysicsGuard);
}

TEST_CASE("resonant two-qubit transfer matches the effective prediction") {
    const ChargeGrid grid(3);
    const TwoQubitTransfer res = two_qubit_transfer(device_tp(), sweet_cp(), 3.0, grid);

    CHECK(std::abs(res.p00.front() - 1.0) <= 1e-12);
    CHECK(std::abs(res.period_measured - TRANSFER_PERIOD_TC3) <= 2e-3);
    CHECK(std::abs(res.period_measured / res.period_predicted - 1.0) <= 0.10);

    double peak = 0.0;
    for (std::size_t i = 0; i < res.p11.size(); ++i) {
        CHECK(res.p00[i] + res.p11[i] <= 1.0 + 1e-8);
        peak = std::max(peak, res.p11[i]);
    }
    CHECK(std::abs(peak - TRANSFER_PEAK_TC3) <= 1e-3);
    CHECK(peak >= 0.85);

    CHECK_THROWS_AS(two_qubit_transfer(device_tp(), sweet_cp(), 3.0, grid, 2, 0.25), PhysicsGuard);
    CHECK_THROWS_AS(two_qubit_transfer(device_tp(), sweet_cp(), 3.0, grid, 13, 1.5), PhysicsGuard);
    CHECK_THROWS_AS(two_qubit_transfer(device_tp(), sweet_cp(), -1.0, grid), PhysicsGuard);
}
