#include "mtsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "mtsim/errors.hpp"

namespace mtsim {
namespace {

constexpr std::size_t kSpinDim = 16;  // two length-2 chains around one junction

SparseHermitian sparsify(const DenseHermitian& m) {
    SparseMatrix s(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j)
            if (m(i, j) != cx(0.0, 0.0)) s.add(i, j, m(i, j));
    return SparseHermitian::from_general(s);
}

// Power-iteration estimate of the spectral norm, deterministic start vector.
// RK4 step control wants the actual norm rather than the looser row-sum bound.
double spectral_norm_estimate(const SparseHermitian& h) {
    const std::size_t n = h.dim();
    std::vector<cx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cx(1.0 + 1e-3 * double(i % 7), 0.0);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;
    double lambda = 0.0;
    std::vector<cx> u(n);
    for (int it = 0; it < 40; ++it) {
        std::fill(u.begin(), u.end(), cx(0.0, 0.0));
        h.apply_into(v.data(), u.data());
        lambda = norm2(u);
        if (lambda == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] / lambda;
    }
    return 1.05 * lambda;
}

struct TimelinePiece {
    double t0, t1, amplitude;
};

// Expand a schedule into contiguous pieces over [0, duration], filling gaps
// with amplitude zero.
std::vector<TimelinePiece> timeline(const PulseSchedule& schedule) {
    std::vector<TimelinePiece> pieces;
    double cursor = 0.0;
    for (const auto& seg : schedule.segments) {
        if (seg.t_start > cursor) pieces.push_back({cursor, seg.t_start, 0.0});
        pieces.push_back({seg.t_start, seg.t_end, seg.amplitude});
        cursor = seg.t_end;
    }
    return pieces;
}

// exp(-i (a Z + b X) dt) applied to (u0, u1) in place.
void apply_two_level(double a, double b, double dt, cx& u0, cx& u1) {
    double om = std::hypot(a, b);
    double c = std::cos(om * dt);
    double s = om > 0.0 ? std::sin(om * dt) / om : dt;
    cx v0 = (c - cx(0.0, 1.0) * a * s) * u0 - cx(0.0, 1.0) * b * s * u1;
    cx v1 = -cx(0.0, 1.0) * b * s * u0 + (c + cx(0.0, 1.0) * a * s) * u1;
    u0 = v0;
    u1 = v1;
}

// Shared observable context: reference product states, the junction-fermion
// occupation matrix on the spin factor, and the factor layout.
struct Observables {
    std::size_t k_dim;
    std::vector<cx> psi0, psi1;
    DenseHermitian g0;  // 16x16, (1 - sx_2 sx_3)/2
    HilbertSpace space;

    explicit Observables(const TransmonEigenbasis& basis)
        : k_dim(basis.states.empty() ? 0 : basis.states[0].size()),
          psi0(prepare_initial(basis, 0)),
          psi1(prepare_initial(basis, 1)),
          g0(kSpinDim),
          space(mt_single_space(ChargeGrid(basis.twice_cutoff), 2)) {
        SpinRegister reg{4};
        auto sxsx = matmul(spin_pauli(reg, 2, PauliAxis::x), spin_pauli(reg, 3, PauliAxis::x));
        DenseHermitian d = sxsx.to_dense();
        for (std::size_t i = 0; i < kSpinDim; ++i)
            for (std::size_t j = 0; j < kSpinDim; ++j)
                g0(i, j) = (i == j ? cx(0.5, 0.0) : cx(0.0, 0.0)) - 0.5 * d(i, j);
    }

    void append_pure(SimulationTrace& tr, double t, const std::vector<cx>& state) const {
        tr.times.push_back(t);
        tr.times_ns.push_back(t * kHbarUevNs);
        tr.p0.push_back(std::norm(inner(psi0, state)));
        tr.p1.push_back(std::norm(inner(psi1, state)));
        double pur = 0.0;
        for (std::size_t a = 0; a < k_dim; ++a)
            for (std::size_t b = 0; b < k_dim; ++b) {
                cx r = 0.0;
                for (std::size_t s = 0; s < kSpinDim; ++s)
                    r += state[a * kSpinDim + s] * std::conj(state[b * kSpinDim + s]);
                pur += std::norm(r);
            }
        tr.purity.push_back(pur);
        cx occ = 0.0;
        for (std::size_t a = 0; a < k_dim; ++a)
            for (std::size_t s = 0; s < kSpinDim; ++s) {
                cx acc = 0.0;
                for (std::size_t sp = 0; sp < kSpinDim; ++sp)
                    acc += g0(s, sp) * state[a * kSpinDim + sp];
                occ += std::conj(state[a * kSpinDim + s]) * acc;
            }
        tr.g0_occupation.push_back(occ.real());
    }

    void append_density(SimulationTrace& tr, double t, const DenseHermitian& rho) const {
        tr.times.push_back(t);
        tr.times_ns.push_back(t * kHbarUevNs);
        tr.p0.push_back(inner(psi0, rho.apply(psi0)).real());
        tr.p1.push_back(inner(psi1, rho.apply(psi1)).real());
        DenseHermitian rt = partial_trace(rho, space, 0);
        double pur = 0.0;
        for (std::size_t a = 0; a < k_dim; ++a)
            for (std::size_t b = 0; b < k_dim; ++b) pur += std::norm(rt(a, b));
        tr.purity.push_back(pur);
        cx occ = 0.0;
        double full = 0.0;
        const std::size_t n = rho.dim();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) full += std::norm(rho(i, j));
        for (std::size_t a = 0; a < k_dim; ++a)
            for (std::size_t s = 0; s < kSpinDim; ++s)
                for (std::size_t sp = 0; sp < kSpinDim; ++sp)
                    occ += rho(a * kSpinDim + s, a * kSpinDim + sp) * g0(sp, s);
        tr.g0_occupation.push_back(occ.real());
        tr.full_purity.push_back(full);
    }
};

// Spectral propagation helper: caches one eigendecomposition and produces
// exp(-i h t) state for arbitrary t from a fixed start state.
struct SpectralPropagator {
    EigenDecomposition eig;
    DenseHermitian vdag;
    std::vector<cx> coeffs;

    SpectralPropagator(const DenseHermitian& h, const std::vector<cx>& start)
        : eig(eigh(h)), vdag(eig.vectors.adjoint()), coeffs(vdag.apply(start)) {}

    std::vector<cx> at(double t) const {
        std::vector<cx> phased(coeffs.size());
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            phased[k] = coeffs[k] * std::exp(cx(0.0, -eig.eigenvalues[k] * t));
        return eig.vectors.apply(phased);
    }
};

}  // namespace

PulseSchedule PulseSchedule::constant(double amplitude, double duration) {
    return PulseSchedule{{{0.0, duration, amplitude}}};
}

void PulseSchedule::validate() const {
    double cursor = 0.0;
    for (const auto& seg : segments) {
        if (!(seg.t_end > seg.t_start))
            throw PhysicsGuard("pulse segment has non-positive length");
        if (seg.t_start < cursor)
            throw PhysicsGuard("pulse segments overlap or are out of order");
        if (seg.t_start < 0.0) throw PhysicsGuard("pulse segment starts before t = 0");
        if (seg.amplitude < 0.0) throw PhysicsGuard("pulse amplitude must be non-negative");
        cursor = seg.t_end;
    }
}

double PulseSchedule::duration() const {
    return segments.empty() ? 0.0 : segments.back().t_end;
}

double PulseSchedule::area() const {
    double a = 0.0;
    for (const auto& seg : segments) a += seg.amplitude * (seg.t_end - seg.t_start);
    return a;
}

std::vector<cx> chain_vacuum_state(int length) {
    if (length != 2)
        throw PhysicsGuard("explicit chain vacuum is only available for length 2, got " +
                           std::to_string(length));
    std::vector<cx> omega(kSpinDim, cx(0.0, 0.0));
    const double amp = 0.5 / std::sqrt(2.0);
    for (std::size_t idx : {0u, 3u, 12u, 15u, 5u, 6u, 9u, 10u}) omega[idx] = amp;
    return omega;
}

std::vector<cx> prepare_initial(const TransmonEigenbasis& basis, int which) {
    if (which != 0 && which != 1)
        throw PhysicsGuard("initial transmon level must be 0 or 1, got " + std::to_string(which));
    if (basis.count() < 2) throw PhysicsGuard("eigenbasis holds fewer than two states");
    const auto& psi = basis.states[std::size_t(which)];
    auto omega = chain_vacuum_state();
    std::vector<cx> state(psi.size() * kSpinDim);
    for (std::size_t k = 0; k < psi.size(); ++k)
        for (std::size_t s = 0; s < kSpinDim; ++s) state[k * kSpinDim + s] = psi[k] * omega[s];
    double n = norm2(state);
    for (auto& x : state) x /= n;
    return state;
}

DenseHermitian tunneling_noise_operator(const ChargeGrid& grid) {
    SpinRegister reg{4};
    auto hop = matmul(jw_annihilator(reg, 2).adjoint(), jw_annihilator(reg, 3));
    SparseMatrix op = kron(charge_shift(grid, -1), hop);
    op += op.adjoint();
    return op.to_dense();
}

std::vector<double> uniform_grid(double t_end, std::size_t n) {
    if (n < 2 || !(t_end > 0.0)) return {0.0};
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = t_end * double(i) / double(n - 1);
    return grid;
}

double trace_peak(const std::vector<double>& t, const std::vector<double>& y, double t_min,
                  double* t_at) {
    if (t.size() != y.size()) throw PhysicsGuard("trace_peak: mismatched arrays");
    std::size_t lo = 0;
    while (lo < t.size() && t[lo] < t_min) ++lo;
    if (t.size() - lo < 3) throw PhysicsGuard("trace_peak: fewer than three points past t_min");
    std::size_t k = lo;
    for (std::size_t i = lo; i < t.size(); ++i)
        if (y[i] > y[k]) k = i;
    std::size_t a = std::max(k >= 2 ? k - 2 : lo, lo);
    std::size_t b = std::min(k + 3, t.size());
    if (b - a < 3) {
        if (t_at) *t_at = t[k];
        return y[k];
    }
    // least-squares quadratic through the bracketing points, centered for
    // conditioning; the vertex is reported in the original time variable
    double tc = t[k];
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, r0 = 0, r1 = 0, r2 = 0;
    for (std::size_t i = a; i < b; ++i) {
        double x = t[i] - tc, x2 = x * x;
        s0 += 1;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        r0 += y[i];
        r1 += y[i] * x;
        r2 += y[i] * x2;
    }
    double det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2) + s2 * (s3 * s1 - s2 * s2);
    if (std::abs(det) < 1e-30) {
        if (t_at) *t_at = t[k];
        return y[k];
    }
    double ca = (r2 * (s2 * s0 - s1 * s1) - s3 * (r1 * s0 - s1 * r0) + s2 * (r1 * s1 - s2 * r0)) /
                det;
    double cb = (s4 * (r1 * s0 - r0 * s1) - s3 * (r2 * s0 - r0 * s2) + s2 * (r2 * s1 - r1 * s2)) /
                det;
    if (ca >= 0.0) {  // not concave; fall back to the discrete maximum
        if (t_at) *t_at = t[k];
        return y[k];
    }
    double xv = -cb / (2.0 * ca);
    // a vertex outside the bracketing window means the data has no interior
    // peak here (e.g. monotone past t_min); keep the discrete maximum
    if (tc + xv < t[a] || tc + xv > t[b - 1]) {
        if (t_at) *t_at = t[k];
        return y[k];
    }
    double cc = (r0 - cb * s1 - ca * s2) / s0;
    if (t_at) *t_at = tc + xv;
    return cc + cb * xv + ca * xv * xv;
}

SimulationTrace evolve_unitary(const DenseHermitian& h, const TransmonEigenbasis& basis,
                               const std::vector<cx>& state0,
                               const std::vector<double>& t_grid) {
    Observables obs(basis);
    if (h.dim() != obs.k_dim * kSpinDim)
        throw PhysicsGuard("evolve_unitary: operator dimension does not match the eigenbasis");
    if (state0.size() != h.dim())
        throw PhysicsGuard("evolve_unitary: state dimension mismatch");
    SimulationTrace tr;
    SpectralPropagator prop(h, state0);
    for (double t : t_grid) obs.append_pure(tr, t, prop.at(t));
    return tr;
}

SimulationTrace evolve_noisy(const DenseHermitian& h, const DenseHermitian& l_noise, double alpha,
                             const DenseHermitian& rho0, const std::vector<double>& t_grid,
                             const TransmonEigenbasis& basis, const Rk4Options& opt) {
    Observables obs(basis);
    if (h.dim() != obs.k_dim * kSpinDim)
        throw PhysicsGuard("evolve_noisy: operator dimension does not match the eigenbasis");
    SimulationTrace tr;
    auto hs = sparsify(h);
    auto ls = sparsify(l_noise);
    rk4_lindblad(hs, ls, alpha, rho0, t_grid,
                 [&](std::size_t g, const DenseHermitian& rho) {
                     obs.append_density(tr, t_grid[g], rho);
                 },
                 opt);
    return tr;
}

GateResult rx_gate(const TransmonParams& tp, const ChainParams& cp, const ChargeGrid& grid,
                   const PulseSchedule& schedule, double alpha, const GateOptions& opt) {
    schedule.validate();
    if (alpha < 0.0) throw PhysicsGuard("rx_gate: negative noise strength");
    if (opt.initial != 0 && opt.initial != 1)
        throw PhysicsGuard("rx_gate: initial qubit state must be 0 or 1");

    auto basis = transmon_eigenbasis(tp, grid);
    auto eff = effective_single(tp, grid, 1.0);
    Observables obs(basis);
    const double t_total = schedule.duration();

    GateResult out;
    out.angle = eff.c10 * schedule.area();
    out.zeeman_in_target = std::abs(2.0 * eff.e01) * t_total > 1e-3;
    out.weak_drive = false;
    for (const auto& seg : schedule.segments)
        if (seg.amplitude < 10.0 * std::abs(2.0 * eff.e01)) out.weak_drive = true;

    // projected two-level target with the raw coupling sign
    cx u0 = opt.initial == 0 ? 1.0 : 0.0;
    cx u1 = opt.initial == 0 ? 0.0 : 1.0;
    auto pieces = timeline(schedule);
    for (const auto& p : pieces)
        apply_two_level(out.zeeman_in_target ? eff.e01 : 0.0, -0.5 * p.amplitude * eff.c10,
                        p.t1 - p.t0, u0, u1);
    std::vector<cx> target(obs.psi0.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = u0 * obs.psi0[i] + u1 * obs.psi1[i];

    std::vector<cx> start = prepare_initial(basis, opt.initial);
    if (t_total <= 0.0) {
        out.fidelity = 1.0;
        out.step_check = 0.0;
        out.final_state = start;
        obs.append_pure(out.trace, 0.0, start);
        return out;
    }
    auto t_grid = uniform_grid(t_total, opt.trace_points);

    if (alpha == 0.0) {
        const double eps = 1e-12 * std::max(1.0, t_total);
        std::vector<cx> state = start;
        std::size_t g = 0;
        for (const auto& p : pieces) {
            // junction form: the transmon term acts on the charge factor alone, so
            // the prepared product state is stationary whenever the drive is off
            DenseHermitian h = build_mt_single(tp, cp, {p.amplitude, cp.t_hop}, grid, false);
            SpectralPropagator prop(h, state);
            while (g < t_grid.size() && t_grid[g] <= p.t1 + eps) {
                obs.append_pure(out.trace, t_grid[g], prop.at(t_grid[g] - p.t0));
                ++g;
            }
            state = prop.at(p.t1 - p.t0);
        }
        out.fidelity = std::norm(inner(target, state));
        out.step_check = 0.0;
        out.final_state = std::move(state);
        return out;
    }

    DenseHermitian rho0(start.size());
    for (std::size_t i = 0; i < start.size(); ++i)
        for (std::size_t j = 0; j < start.size(); ++j) rho0(i, j) = start[i] * std::conj(start[j]);
    auto ls = sparsify(tunneling_noise_operator(grid));
    const double lnorm = ls.norm_bound();

    // one end-to-end integration; requested grid points are flagged so the
    // piece-boundary waypoints stay out of the trace
    auto run = [&](double halving, SimulationTrace& tr, std::optional<DenseHermitian>* rho_out) {
        const double eps = 1e-12 * std::max(1.0, t_total);
        DenseHermitian rho = rho0;
        std::size_t g = 0;
        bool first = true;
        for (const auto& p : pieces) {
            DenseHermitian h = build_mt_single(tp, cp, {p.amplitude, cp.t_hop}, grid, false);
            auto hs = sparsify(h);
            double hnorm = spectral_norm_estimate(hs);
            double want = std::min(0.02 / std::max(hnorm, 1e-30), t_total / 2000.0) * halving;
            double rate_scale = std::max({hs.norm_bound(), alpha * lnorm * lnorm, 1e-30});
            Rk4Options ro;
            ro.dt_factor = want * rate_scale / 0.025;
            ro.check_rho0 = first;
            std::vector<double> sub{p.t0};
            std::vector<char> requested{0};
            if (first && g < t_grid.size() && t_grid[g] <= p.t0 + eps) {
                requested[0] = 1;
                ++g;
            }
            while (g < t_grid.size() && t_grid[g] <= p.t1 + eps) {
                sub.push_back(t_grid[g]);
                requested.push_back(1);
                ++g;
            }
            if (sub.back() < p.t1 - eps) {
                sub.push_back(p.t1);
                requested.push_back(0);
            }
            DenseHermitian rho_end(rho.dim());
            rk4_lindblad(hs, ls, alpha, rho, sub,
                         [&](std::size_t k, const DenseHermitian& r) {
                             if (requested[k]) obs.append_density(tr, sub[k], r);
                             if (k + 1 == sub.size()) rho_end = r;
                         },
                         ro);
            rho = std::move(rho_end);
            first = false;
        }
        if (rho_out) *rho_out = rho;
        return inner(target, rho.apply(target)).real();
    };

    out.fidelity = run(1.0, out.trace, &out.final_rho);
    out.step_check = 0.0;
    if (opt.convergence_check) {
        SimulationTrace scratch;
        double f_half = run(0.5, scratch, nullptr);
        out.step_check = std::abs(out.fidelity - f_half);
    }
    return out;
}

double concurrence_pure(const std::array<cx, 4>& state) {
    double n = 0.0;
    for (const auto& a : state) n += std::norm(a);
    if (std::abs(n - 1.0) > 1e-9)
        throw PhysicsGuard("concurrence_pure: state is not normalized");
    return 2.0 * std::abs(state[0] * state[3] - state[1] * state[2]);
}

TwoQubitGateResult rxx_gate(const EffectiveTwoQubit& model, const PulseSchedule& schedule,
                            const std::array<cx, 4>& initial) {
    schedule.validate();
    TwoQubitGateResult out;
    out.angle = 0.5 * model.c2 * schedule.area();
    cx c = std::cos(out.angle);
    cx ms = cx(0.0, -1.0) * std::sin(out.angle);
    // X1 X2 swaps |00> <-> |11> and |01> <-> |10>
    out.final_state = {c * initial[0] + ms * initial[3], c * initial[1] + ms * initial[2],
                       c * initial[2] + ms * initial[1], c * initial[3] + ms * initial[0]};
    out.concurrence = concurrence_pure(out.final_state);
    return out;
}

TwoQubitTransfer two_qubit_transfer(const TransmonParams& tp, const ChainParams& cp, double w12,
                                    const ChargeGrid& grid, std::size_t n_samples,
                                    double window) {
    if (n_samples < 3) throw PhysicsGuard("two_qubit_transfer: need at least three samples");
    if (!(window > 0.0 && window < 1.0))
        throw PhysicsGuard("two_qubit_transfer: window must lie in (0, 1)");
    if (!(w12 > 0.0)) throw PhysicsGuard("two_qubit_transfer: w12 must be positive");

    auto eff = effective_two_qubit(tp, grid, 0.0, 0.0, w12);
    auto model = build_two_qubit(tp, cp, {0.0, cp.t_hop}, w12, grid, false);
    auto basis = transmon_eigenbasis(tp, grid);
    const std::size_t k = basis.states[0].size();
    const std::size_t sdim = 4096;

    auto omega = chain_vacuum_state();
    std::vector<cx> om3(sdim);
    for (std::size_t i = 0; i < kSpinDim; ++i)
        for (std::size_t j = 0; j < kSpinDim; ++j)
            for (std::size_t l = 0; l < kSpinDim; ++l)
                om3[(i << 8) | (j << 4) | l] = omega[i] * omega[j] * omega[l];

    auto product = [&](int a, int b) {
        std::vector<cx> v(k * k * sdim);
        for (std::size_t k1 = 0; k1 < k; ++k1)
            for (std::size_t k2 = 0; k2 < k; ++k2) {
                cx w = basis.states[std::size_t(a)][k1] * basis.states[std::size_t(b)][k2];
                if (w == cx(0.0, 0.0)) continue;
                for (std::size_t s = 0; s < sdim; ++s)
                    v[(k1 * k + k2) * sdim + s] = w * om3[s];
            }
        return v;
    };
    auto ref00 = product(0, 0);
    auto ref11 = product(1, 1);

    TwoQubitTransfer out;
    out.period_predicted = 2.0 * std::numbers::pi / (w12 * eff.c2);
    const double t_half = 0.5 * out.period_predicted;
    std::vector<double> ts{0.0};
    for (std::size_t i = 0; i < n_samples; ++i)
        ts.push_back(t_half * (1.0 - window) +
                     t_half * 2.0 * window * double(i) / double(n_samples - 1));

    std::vector<cx> state = ref00;
    double prev = 0.0;
    for (double t : ts) {
        if (t > prev) state = expmv(model.h, state, t - prev);
        prev = t;
        out.times.push_back(t);
        out.p00.push_back(std::norm(inner(ref00, state)));
        out.p11.push_back(std::norm(inner(ref11, state)));
    }
    double t_peak = 0.0;
    trace_peak(out.times, out.p11, t_half * (1.0 - window) * 0.999, &t_peak);
    out.period_measured = 2.0 * t_peak;
    return out;
}

}  // namespace mtsim
