#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtsim/hilbert.hpp"

using namespace mtsim;

namespace {

constexpr double ANTICOMM_TOL = 1e-14;

DenseHermitian dense_kron(const DenseHermitian& a, const DenseHermitian& b) {
    DenseHermitian m(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            for (std::size_t k = 0; k < b.dim(); ++k)
                for (std::size_t l = 0; l < b.dim(); ++l)
                    m(i * b.dim() + k, j * b.dim() + l) = a(i, j) * b(k, l);
    return m;
}

double max_entry_diff(const DenseHermitian& a, const DenseHermitian& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

// {A, B} as dense matrices
DenseHermitian anticommutator(const SparseMatrix& a, const SparseMatrix& b) {
    auto ab = matmul(a, b).to_dense();
    auto ba = matmul(b, a).to_dense();
    ab += ba;
    return ab;
}

DenseHermitian annihilate2() {
    DenseHermitian m(2);
    m(0, 1) = 1.0;  // |occupied> -> |empty>, bit 0 = empty
    return m;
}

DenseHermitian create2() {
    DenseHermitian m(2);
    m(1, 0) = 1.0;
    return m;
}

DenseHermitian pauli_z2() {
    DenseHermitian m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

}  // namespace

TEST_CASE("ChargeGrid: counts, spacing, endpoints") {
    ChargeGrid g(5);
    CHECK(g.size() == 11);
    CHECK(g.cutoff() == doctest::Approx(2.5));
    CHECK(g.value(0) == doctest::Approx(-2.5));
    CHECK(g.value(10) == doctest::Approx(2.5));
    for (std::size_t k = 1; k < g.size(); ++k)
        CHECK(g.value(k) - g.value(k - 1) == doctest::Approx(0.5));

    ChargeGrid g9(9);
    CHECK(g9.size() == 19);

    CHECK_THROWS_AS(ChargeGrid(4), PhysicsGuard);   // integer cutoff
    CHECK_THROWS_AS(ChargeGrid(0), PhysicsGuard);
    CHECK_THROWS_AS(ChargeGrid(-3), PhysicsGuard);
}

TEST_CASE("charge_shift: explicit 3-state raising matrix") {
    ChargeGrid g(1);
    auto s = charge_shift(g, +1).to_dense();
    // S|n> = |n + 1/2>: the entry sits at (row of n+1/2, column of n)
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(s(i, j) == (i == j + 1 ? cx(1.0, 0.0) : cx(0.0, 0.0)));
}

TEST_CASE("charge_shift: cos(phi/2) combination is Hermitian") {
    ChargeGrid g(5);
    auto sp = charge_shift(g, +1);
    auto cosm = sp.to_dense();
    cosm += sp.adjoint().to_dense();
    cosm *= cx(0.5, 0.0);
    CHECK(cosm.hermiticity_error() == 0.0);
    // couples only adjacent grid points with weight 1/2
    CHECK(cosm(3, 4).real() == doctest::Approx(0.5));
    CHECK(cosm(3, 3) == cx(0.0, 0.0));
}

TEST_CASE("charge_shift: composition and boundary projector") {
    ChargeGrid g(3);
    auto sp = charge_shift(g, +1);
    auto spsq = matmul(sp, sp).to_dense();
    auto s2 = charge_shift(g, +2).to_dense();
    CHECK(max_entry_diff(spsq, s2) == 0.0);

    // S+ S- = identity minus the projector on the lowest grid state
    auto sm = charge_shift(g, -1);
    auto prod = matmul(sp, sm).to_dense();
    auto expect = DenseHermitian::identity(g.size());
    expect(0, 0) = 0.0;
    CHECK(max_entry_diff(prod, expect) == 0.0);

    CHECK_THROWS_AS(charge_shift(g, 0), PhysicsGuard);
    CHECK_THROWS_AS(charge_shift(g, 3), PhysicsGuard);
    CHECK_THROWS_AS(charge_shift(g, -5), PhysicsGuard);
}

TEST_CASE("jw_ladder: explicit strings for L = 2") {
    SpinRegister reg(4);
    auto id2 = DenseHermitian::identity(2);

    // left site 1: annihilator with no string
    auto left1 = jw_ladder(reg, 1, Chain::left, 2).to_dense();
    auto expect1 = dense_kron(annihilate2(), dense_kron(id2, dense_kron(id2, id2)));
    CHECK(max_entry_diff(left1, expect1) == 0.0);

    // left site 2: sigma1^z sigma2^-
    auto left2 = jw_ladder(reg, 2, Chain::left, 2).to_dense();
    auto expect2 = dense_kron(pauli_z2(), dense_kron(annihilate2(), dense_kron(id2, id2)));
    CHECK(max_entry_diff(left2, expect2) == 0.0);

    // right site 1: sigma1^z sigma2^z sigma3^-
    auto right1 = jw_ladder(reg, 1, Chain::right, 2).to_dense();
    auto expect3 = dense_kron(pauli_z2(), dense_kron(pauli_z2(), dense_kron(annihilate2(), id2)));
    CHECK(max_entry_diff(right1, expect3) == 0.0);

    // right site 2: full string
    auto right2 = jw_ladder(reg, 2, Chain::right, 2).to_dense();
    auto expect4 =
        dense_kron(pauli_z2(), dense_kron(pauli_z2(), dense_kron(pauli_z2(), annihilate2())));
    CHECK(max_entry_diff(right2, expect4) == 0.0);

    CHECK_THROWS_AS(jw_ladder(reg, 3, Chain::left, 2), PhysicsGuard);
    CHECK_THROWS_AS(jw_ladder(reg, 0, Chain::right, 2), PhysicsGuard);
}

TEST_CASE("jw_ladder: canonical anticommutation relations for L = 2, 3") {
    for (int L : {2, 3}) {
        SpinRegister reg(2 * L);
        std::vector<SparseMatrix> c;
        for (int j = 1; j <= L; ++j) c.push_back(jw_ladder(reg, j, Chain::left, L));
        for (int j = 1; j <= L; ++j) c.push_back(jw_ladder(reg, j, Chain::right, L));

        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j) {
                auto cc = anticommutator(c[i], c[j]);
                CHECK(cc.max_abs() <= ANTICOMM_TOL);
                auto ccd = anticommutator(c[i], c[j].adjoint());
                auto expect = (i == j) ? DenseHermitian::identity(reg.dim())
                                       : DenseHermitian(reg.dim());
                CHECK(max_entry_diff(ccd, expect) <= ANTICOMM_TOL);
            }
    }
}

TEST_CASE("jw_ladder: number operator and charge strings") {
    SpinRegister reg(4);
    // occupation c^dagger c has eigenvalues {0, 1}
    for (int site = 1; site <= 4; ++site) {
        auto a = jw_annihilator(reg, site);
        auto num = matmul(a.adjoint(), a).to_dense();
        for (std::size_t b = 0; b < reg.dim(); ++b) {
            double d = num(b, b).real();
            CHECK((std::abs(d) < 1e-15 || std::abs(d - 1.0) < 1e-15));
        }
        CHECK(num.hermiticity_error() == 0.0);
    }

    // total right-chain charge commutes with every sigma^z string
    DenseHermitian nr(reg.dim());
    for (int j = 1; j <= 2; ++j) {
        auto a = jw_ladder(reg, j, Chain::right, 2);
        nr += matmul(a.adjoint(), a).to_dense();
    }
    for (int m = 1; m <= 4; ++m) {
        auto str = sparse_identity(reg.dim());
        for (int k = 1; k <= m; ++k) str = matmul(str, spin_pauli(reg, k, PauliAxis::z));
        auto sd = str.to_dense();
        auto comm = matmul(nr, sd);
        auto comm2 = matmul(sd, nr);
        comm2 *= cx(-1.0, 0.0);
        comm += comm2;
        CHECK(comm.max_abs() == 0.0);
    }
}

TEST_CASE("HilbertSpace: index maps and named factors") {
    HilbertSpace space({{"charge", 3}, {"left", 4}, {"right", 2}});
    CHECK(space.dim() == 24);
    CHECK(space.factor_index("left") == 1);
    CHECK_THROWS_AS(space.factor_index("nope"), PhysicsGuard);

    for (std::size_t f = 0; f < space.dim(); ++f) {
        auto m = space.multi(f);
        CHECK(space.flat(m) == f);
        CHECK(m[0] < 3);
        CHECK(m[1] < 4);
        CHECK(m[2] < 2);
    }
    CHECK(space.flat({1, 2, 1}) == 1 * 8 + 2 * 2 + 1);
}

TEST_CASE("embed: identity, disjoint commutation, trace recovery") {
    HilbertSpace space({{"a", 3}, {"b", 4}});
    auto id_emb = embed(sparse_identity(3), 0, space).to_dense();
    CHECK(max_entry_diff(id_emb, DenseHermitian::identity(12)) == 0.0);

    std::mt19937 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    SparseMatrix a(3, 3), b(4, 4);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) a.add(i, j, cx(g(rng), g(rng)));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) b.add(i, j, cx(g(rng), g(rng)));
    a.coalesce();
    b.coalesce();

    auto ea = embed(a, 0, space);
    auto eb = embed(b, 1, space);
    auto ab = matmul(ea, eb).to_dense();
    auto ba = matmul(eb, ea).to_dense();
    CHECK(max_entry_diff(ab, ba) < 1e-14);

    // Hermitian A: tracing the identity factor recovers A / normalization
    SparseMatrix ah(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        ah.add(i, i, cx(g(rng), 0.0));
        for (std::size_t j = i + 1; j < 3; ++j) {
            cx v(g(rng), g(rng));
            ah.add(i, j, v);
            ah.add(j, i, std::conj(v));
        }
    }
    ah.coalesce();
    auto emb = embed(ah, 0, space).to_dense();
    emb *= cx(1.0 / 4.0, 0.0);
    auto rec = partial_trace(emb, space, 0);
    CHECK(max_entry_diff(rec, ah.to_dense()) < 1e-14);

    CHECK_THROWS_AS(embed(a, 1, space), PhysicsGuard);
}

TEST_CASE("partial_trace: product, Bell, and random states") {
    HilbertSpace space2({{"a", 2}, {"b", 2}});

    DenseHermitian rho_a(2), rho_b(2);
    rho_a(0, 0) = 0.7;
    rho_a(1, 1) = 0.3;
    rho_a(0, 1) = cx(0.1, 0.05);
    rho_a(1, 0) = std::conj(rho_a(0, 1));
    rho_b(0, 0) = 0.4;
    rho_b(1, 1) = 0.6;
    auto prod = dense_kron(rho_a, rho_b);
    CHECK(max_entry_diff(partial_trace(prod, space2, 0), rho_a) < 1e-15);
    CHECK(max_entry_diff(partial_trace(prod, space2, 1), rho_b) < 1e-15);

    // Bell state: either reduction is maximally mixed
    DenseHermitian bell(4);
    for (std::size_t i : {0u, 3u})
        for (std::size_t j : {0u, 3u}) bell(i, j) = 0.5;
    for (std::size_t keep : {0u, 1u}) {
        auto red = partial_trace(bell, space2, keep);
        DenseHermitian half = DenseHermitian::identity(2);
        half *= cx(0.5, 0.0);
        CHECK(max_entry_diff(red, half) < 1e-15);
    }

    // random 4x4-factor state against a brute-force index-summation oracle
    HilbertSpace space4({{"a", 4}, {"b", 4}});
    std::mt19937 rng(41);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cx> psi(16);
    double nn = 0.0;
    for (auto& z : psi) {
        z = cx(g(rng), g(rng));
        nn += std::norm(z);
    }
    for (auto& z : psi) z /= std::sqrt(nn);
    DenseHermitian rho(16);
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) rho(i, j) = psi[i] * std::conj(psi[j]);

    auto red = partial_trace(rho, space4, 0);
    DenseHermitian oracle(4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            cx acc(0.0, 0.0);
            for (std::size_t k = 0; k < 4; ++k) acc += rho(a * 4 + k, b * 4 + k);
            oracle(a, b) = acc;
        }
    CHECK(max_entry_diff(red, oracle) < 1e-12);
    CHECK(trace(red).real() == doctest::Approx(1.0).epsilon(1e-12));

    DenseHermitian wrong(5);
    CHECK_THROWS_AS(partial_trace(wrong, space2, 0), PhysicsGuard);
}

TEST_CASE("chain vacuum: junction hop expectation is 1/4") {
    // two L = 2 chains at the sweet spot; vacuum = (|Phi>|Phi> + |Psi>|Psi>)/sqrt(2)
    // with Phi, Psi the even/odd Bell pairs on each chain
    SpinRegister reg(4);
    std::vector<cx> omega(16, cx(0.0, 0.0));
    const double amp = 1.0 / (2.0 * std::sqrt(2.0));
    for (std::size_t idx : {0u, 3u, 12u, 15u, 5u, 6u, 9u, 10u}) omega[idx] = amp;

    // b_2^dagger a_1 in spin language: creation on site 2, annihilation on site 3
    auto hop = matmul(jw_ladder(reg, 2, Chain::left, 2).adjoint(), jw_ladder(reg, 1, Chain::right, 2));
    auto expect = dense_kron(DenseHermitian::identity(2),
                             dense_kron(create2(), dense_kron(annihilate2(), DenseHermitian::identity(2))));
    CHECK(max_entry_diff(hop.to_dense(), expect) == 0.0);

    auto hv = hop.apply(omega);
    cx val = inner(omega, hv);
    CHECK(val.real() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(val.imag()) < 1e-15);
}
