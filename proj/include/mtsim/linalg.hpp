#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "mtsim/errors.hpp"

namespace mtsim {

using cx = std::complex<double>;

/*
 * Dense square complex matrix, row-major.  Most builders return one of
 * these; Hermiticity is a property of the content, checked where a routine
 * requires it, not enforced by the type.
 */
class DenseHermitian {
  public:
    DenseHermitian() = default;
    explicit DenseHermitian(std::size_t dim) : n_(dim), a_(dim * dim, cx(0.0, 0.0)) {}

    static DenseHermitian identity(std::size_t dim);

    std::size_t dim() const { return n_; }

    cx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const cx& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    cx* data() { return a_.data(); }
    const cx* data() const { return a_.data(); }

    cx* row(std::size_t i) { return a_.data() + i * n_; }
    const cx* row(std::size_t i) const { return a_.data() + i * n_; }

    DenseHermitian adjoint() const;

    // max_ij |a_ij - conj(a_ji)|
    double hermiticity_error() const;
    double max_abs() const;

    DenseHermitian& operator+=(const DenseHermitian& other);
    DenseHermitian& operator*=(cx scale);

    std::vector<cx> apply(const std::vector<cx>& v) const;

  private:
    std::size_t n_ = 0;
    std::vector<cx> a_;
};

DenseHermitian matmul(const DenseHermitian& a, const DenseHermitian& b);
cx trace(const DenseHermitian& a);
cx inner(const std::vector<cx>& a, const std::vector<cx>& b);
double norm2(const std::vector<cx>& v);

struct Triplet {
    std::size_t r, c;
    cx v;
};

/*
 * General sparse matrix in coalesced triplet form.  Used for shift and
 * ladder operators which need not be Hermitian.
 */
class SparseMatrix {
  public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<Triplet>& triplets() const { return trip_; }

    void add(std::size_t r, std::size_t c, cx v);
    void coalesce(double drop_tol = 0.0);

    SparseMatrix adjoint() const;
    SparseMatrix transpose() const;

    std::vector<cx> apply(const std::vector<cx>& v) const;
    DenseHermitian to_dense() const;

    SparseMatrix& operator+=(const SparseMatrix& other);
    SparseMatrix& operator*=(cx scale);

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Triplet> trip_;
    bool coalesced_ = false;
};

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix sparse_identity(std::size_t dim);

/*
 * Hermitian sparse matrix.  Stores one triangle plus the diagonal; the
 * mirrored conjugate entries are implied.  add() folds upper-triangle
 * entries onto the stored lower triangle.
 */
class SparseHermitian {
  public:
    SparseHermitian() = default;
    explicit SparseHermitian(std::size_t dim) : n_(dim) {}

    static SparseHermitian from_general(const SparseMatrix& m, double herm_tol = 1e-12);

    std::size_t dim() const { return n_; }
    const std::vector<Triplet>& lower_triplets() const { return trip_; }

    void add(std::size_t r, std::size_t c, cx v);
    void coalesce(double drop_tol = 0.0);

    std::vector<cx> apply(const std::vector<cx>& v) const;
    void apply_into(const cx* v, cx* out) const;
    DenseHermitian to_dense() const;

    // Gershgorin bound on the spectral radius; cheap and safe for step control.
    double norm_bound() const;

  private:
    std::size_t n_ = 0;
    std::vector<Triplet> trip_;  // r >= c only
    bool coalesced_ = false;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    DenseHermitian vectors;           // orthonormal columns, vectors(:,k) <-> eigenvalues[k]
};

/*
 * Full Hermitian eigendecomposition.  Real-symmetric input takes a direct
 * Householder tridiagonalization + implicit QL path with real eigenvectors
 * whose first nonzero component is positive; complex input goes through the
 * 2N x 2N real-symmetric embedding.  Rejects non-Hermitian input beyond
 * tolerance, naming the max asymmetry.
 */
EigenDecomposition eigh(const DenseHermitian& h, double herm_tol_rel = 1e-9);

// Eigenvalues and eigenvectors of a real symmetric tridiagonal matrix
// (diag d, off-diagonal e, e[k] couples k and k+1).  Exposed for Krylov use.
void tridiag_eigh(std::vector<double>& d, std::vector<double> e, std::vector<double>& z_colmajor);

// u(t) = exp(-i h t) v, dense path through the full eigendecomposition.
std::vector<cx> expmv(const DenseHermitian& h, const std::vector<cx>& v, double t);

struct KrylovOptions {
    int subspace = 30;      // Lanczos basis size per step
    double rtol = 1e-10;    // per-step residual target, relative to the input norm
    int max_halvings = 60;  // step subdivision limit before giving up
};

// u(t) = exp(-i h t) v via Lanczos with full reorthogonalization and
// adaptive step splitting.  Throws ConvergenceError naming the achieved
// residual when the subdivision limit is hit.
std::vector<cx> expmv(const SparseHermitian& h, const std::vector<cx>& v, double t,
                      const KrylovOptions& opt = {});

struct Rk4Options {
    double dt_factor = 1.0;    // multiply the automatically chosen step (0.5 = halving check)
    double trace_tol = 1e-8;   // per-output-point trace drift guard
    bool check_rho0 = true;    // validate Hermiticity / trace / positivity of rho0
};

/*
 * Fixed-step RK4 for  drho/dt = -i[h, rho] - (alpha/2) [l, [l, rho]].
 * The step satisfies dt * (spectral norm bound of h) <= 0.05, subdividing
 * each output interval as needed.  rho is re-symmetrized after every step.
 * The observer is called once per t_grid entry (including t_grid[0]).
 */
void rk4_lindblad(const DenseHermitian& h, const DenseHermitian& l, double alpha,
                  const DenseHermitian& rho0, const std::vector<double>& t_grid,
                  const std::function<void(std::size_t, const DenseHermitian&)>& observer,
                  const Rk4Options& opt = {});

void rk4_lindblad(const SparseHermitian& h, const SparseHermitian& l, double alpha,
                  const DenseHermitian& rho0, const std::vector<double>& t_grid,
                  const std::function<void(std::size_t, const DenseHermitian&)>& observer,
                  const Rk4Options& opt = {});

// Convenience wrapper returning the density matrix at every grid point.
std::vector<DenseHermitian> rk4_lindblad(const DenseHermitian& h, const DenseHermitian& l,
                                         double alpha, const DenseHermitian& rho0,
                                         const std::vector<double>& t_grid,
                                         const Rk4Options& opt = {});

}  // namespace mtsim
