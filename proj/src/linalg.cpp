#include "mtsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace mtsim {

namespace {

std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(6);
    os << std::scientific << x;
    return os.str();
}

std::size_t worker_count(std::size_t rows) {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    hw = std::min<std::size_t>(hw, 8);
    // below ~64 rows the dispatch overhead dominates
    if (rows < 64) return 1;
    return std::min(hw, rows);
}

template <class Fn>
void parallel_rows(std::size_t rows, Fn&& fn) {
    std::size_t nw = worker_count(rows);
    if (nw <= 1) {
        fn(std::size_t{0}, rows);
        return;
    }
    std::vector<std::future<void>> futs;
    std::size_t chunk = (rows + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(rows, lo + chunk);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [lo, hi, &fn] { fn(lo, hi); }));
    }
    for (auto& f : futs) f.get();
}

}  // namespace

// ── DenseHermitian ──────────────────────────────────────────────────────────

DenseHermitian DenseHermitian::identity(std::size_t dim) {
    DenseHermitian m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

DenseHermitian DenseHermitian::adjoint() const {
    DenseHermitian m(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

double DenseHermitian::hermiticity_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j)
            err = std::max(err, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return err;
}

double DenseHermitian::max_abs() const {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
}

DenseHermitian& DenseHermitian::operator+=(const DenseHermitian& other) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
    return *this;
}

DenseHermitian& DenseHermitian::operator*=(cx scale) {
    for (auto& z : a_) z *= scale;
    return *this;
}

std::vector<cx> DenseHermitian::apply(const std::vector<cx>& v) const {
    std::vector<cx> y(n_, cx(0.0, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
        cx acc(0.0, 0.0);
        const cx* r = row(i);
        for (std::size_t j = 0; j < n_; ++j) acc += r[j] * v[j];
        y[i] = acc;
    }
    return y;
}

DenseHermitian matmul(const DenseHermitian& a, const DenseHermitian& b) {
    std::size_t n = a.dim();
    DenseHermitian c(n);
    parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            cx* ci = c.row(i);
            const cx* ai = a.row(i);
            for (std::size_t k = 0; k < n; ++k) {
                cx aik = ai[k];
                if (aik == cx(0.0, 0.0)) continue;
                const cx* bk = b.row(k);
                for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
            }
        }
    });
    return c;
}

cx trace(const DenseHermitian& a) {
    cx t(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) t += a(i, i);
    return t;
}

cx inner(const std::vector<cx>& a, const std::vector<cx>& b) {
    cx s(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm2(const std::vector<cx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// ── SparseMatrix ────────────────────────────────────────────────────────────

void SparseMatrix::add(std::size_t r, std::size_t c, cx v) {
    if (v == cx(0.0, 0.0)) return;
    trip_.push_back({r, c, v});
    coalesced_ = false;
}

void SparseMatrix::coalesce(double drop_tol) {
    std::sort(trip_.begin(), trip_.end(), [](const Triplet& a, const Triplet& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    std::vector<Triplet> out;
    out.reserve(trip_.size());
    for (const auto& t : trip_) {
        if (!out.empty() && out.back().r == t.r && out.back().c == t.c)
            out.back().v += t.v;
        else
            out.push_back(t);
    }
    trip_.clear();
    for (const auto& t : out)
        if (std::abs(t.v) > drop_tol) trip_.push_back(t);
    coalesced_ = true;
}

SparseMatrix SparseMatrix::adjoint() const {
    SparseMatrix m(cols_, rows_);
    for (const auto& t : trip_) m.add(t.c, t.r, std::conj(t.v));
    m.coalesce();
    return m;
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix m(cols_, rows_);
    for (const auto& t : trip_) m.add(t.c, t.r, t.v);
    m.coalesce();
    return m;
}

std::vector<cx> SparseMatrix::apply(const std::vector<cx>& v) const {
    std::vector<cx> y(rows_, cx(0.0, 0.0));
    for (const auto& t : trip_) y[t.r] += t.v * v[t.c];
    return y;
}

DenseHermitian SparseMatrix::to_dense() const {
    DenseHermitian m(std::max(rows_, cols_));
    for (const auto& t : trip_) m(t.r, t.c) += t.v;
    return m;
}

SparseMatrix& SparseMatrix::operator+=(const SparseMatrix& other) {
    for (const auto& t : other.trip_) trip_.push_back(t);
    coalesced_ = false;
    coalesce();
    return *this;
}

SparseMatrix& SparseMatrix::operator*=(cx scale) {
    for (auto& t : trip_) t.v *= scale;
    return *this;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (const auto& ta : a.triplets())
        for (const auto& tb : b.triplets())
            m.add(ta.r * b.rows() + tb.r, ta.c * b.cols() + tb.c, ta.v * tb.v);
    m.coalesce();
    return m;
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
    // group b by row for the inner join
    std::unordered_map<std::size_t, std::vector<const Triplet*>> brow;
    for (const auto& t : b.triplets()) brow[t.r].push_back(&t);
    std::unordered_map<std::uint64_t, cx> acc;
    for (const auto& ta : a.triplets()) {
        auto it = brow.find(ta.c);
        if (it == brow.end()) continue;
        for (const Triplet* tb : it->second)
            acc[(std::uint64_t(ta.r) << 32) | std::uint64_t(tb->c)] += ta.v * tb->v;
    }
    SparseMatrix m(a.rows(), b.cols());
    for (const auto& [key, v] : acc) m.add(key >> 32, key & 0xffffffffu, v);
    m.coalesce(1e-300);
    return m;
}

SparseMatrix sparse_identity(std::size_t dim) {
    SparseMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m.add(i, i, cx(1.0, 0.0));
    m.coalesce();
    return m;
}

// ── SparseHermitian ─────────────────────────────────────────────────────────

void SparseHermitian::add(std::size_t r, std::size_t c, cx v) {
    if (v == cx(0.0, 0.0)) return;
    if (r < c)
        trip_.push_back({c, r, std::conj(v)});
    else
        trip_.push_back({r, c, v});
    coalesced_ = false;
}

void SparseHermitian::coalesce(double drop_tol) {
    std::sort(trip_.begin(), trip_.end(), [](const Triplet& a, const Triplet& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    std::vector<Triplet> out;
    out.reserve(trip_.size());
    for (const auto& t : trip_) {
        if (!out.empty() && out.back().r == t.r && out.back().c == t.c)
            out.back().v += t.v;
        else
            out.push_back(t);
    }
    trip_.clear();
    for (auto& t : out) {
        if (t.r == t.c) t.v = cx(t.v.real(), 0.0);
        if (std::abs(t.v) > drop_tol) trip_.push_back(t);
    }
    coalesced_ = true;
}

SparseHermitian SparseHermitian::from_general(const SparseMatrix& m, double herm_tol) {
    SparseMatrix g = m;
    g.coalesce();
    SparseMatrix diff = g;
    diff += g.adjoint() *= cx(-1.0, 0.0);
    double scale = 0.0;
    for (const auto& t : g.triplets()) scale = std::max(scale, std::abs(t.v));
    double asym = 0.0;
    for (const auto& t : diff.triplets()) asym = std::max(asym, std::abs(t.v));
    if (asym > herm_tol * std::max(1.0, scale))
        throw PhysicsGuard("SparseHermitian: input not Hermitian, max asymmetry " + fmt_double(asym));
    SparseHermitian h(m.rows());
    for (const auto& t : g.triplets()) {
        if (t.r > t.c)
            h.trip_.push_back({t.r, t.c, t.v});
        else if (t.r == t.c)
            h.trip_.push_back({t.r, t.c, cx(t.v.real(), 0.0)});
        // upper-triangle entries are the conjugates of stored ones; skip
    }
    h.coalesce();
    return h;
}

std::vector<cx> SparseHermitian::apply(const std::vector<cx>& v) const {
    std::vector<cx> y(n_, cx(0.0, 0.0));
    apply_into(v.data(), y.data());
    return y;
}

void SparseHermitian::apply_into(const cx* v, cx* out) const {
    for (const auto& t : trip_) {
        out[t.r] += t.v * v[t.c];
        if (t.r != t.c) out[t.c] += std::conj(t.v) * v[t.r];
    }
}

DenseHermitian SparseHermitian::to_dense() const {
    DenseHermitian m(n_);
    for (const auto& t : trip_) {
        m(t.r, t.c) += t.v;
        if (t.r != t.c) m(t.c, t.r) += std::conj(t.v);
    }
    return m;
}

double SparseHermitian::norm_bound() const {
    std::vector<double> rowsum(n_, 0.0);
    for (const auto& t : trip_) {
        rowsum[t.r] += std::abs(t.v);
        if (t.r != t.c) rowsum[t.c] += std::abs(t.v);
    }
    double m = 0.0;
    for (double s : rowsum) m = std::max(m, s);
    return m;
}

// ── Real symmetric eigensolver (Householder + implicit QL) ──────────────────
//
// Classic EISPACK tred2/tql2 pair. V holds the symmetric input on entry and
// the orthonormal eigenvector columns on exit.

namespace {

void tred2(std::vector<double>& V, int n, std::vector<double>& d, std::vector<double>& e) {
    auto at = [&](int i, int j) -> double& { return V[std::size_t(i) * n + j]; };

    for (int j = 0; j < n; ++j) d[j] = at(n - 1, j);

    for (int i = n - 1; i > 0; --i) {
        double scale = 0.0, h = 0.0;
        for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (int j = 0; j < i; ++j) {
                d[j] = at(i - 1, j);
                at(i, j) = 0.0;
                at(j, i) = 0.0;
            }
        } else {
            for (int k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0.0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (int j = 0; j < i; ++j) e[j] = 0.0;

            for (int j = 0; j < i; ++j) {
                f = d[j];
                at(j, i) = f;
                g = e[j] + at(j, j) * f;
                for (int k = j + 1; k <= i - 1; ++k) {
                    g += at(k, j) * d[k];
                    e[k] += at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (int j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            double hh = f / (h + h);
            for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (int j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (int k = j; k <= i - 1; ++k) at(k, j) -= (f * e[k] + g * d[k]);
                d[j] = at(i - 1, j);
                at(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for (int i = 0; i < n - 1; ++i) {
        at(n - 1, i) = at(i, i);
        at(i, i) = 1.0;
        double h = d[i + 1];
        if (h != 0.0) {
            for (int k = 0; k <= i; ++k) d[k] = at(k, i + 1) / h;
            for (int j = 0; j <= i; ++j) {
                double g = 0.0;
                for (int k = 0; k <= i; ++k) g += at(k, i + 1) * at(k, j);
                for (int k = 0; k <= i; ++k) at(k, j) -= g * d[k];
            }
        }
        for (int k = 0; k <= i; ++k) at(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
        d[j] = at(n - 1, j);
        at(n - 1, j) = 0.0;
    }
    at(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

void tql2(std::vector<double>& V, int n, std::vector<double>& d, std::vector<double>& e) {
    auto at = [&](int i, int j) -> double& { return V[std::size_t(i) * n + j]; };

    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (int l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        int m = l;
        while (m < n && std::abs(e[m]) > eps * tst1) ++m;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 50)
                    throw ConvergenceError("eigh: QL iteration failed to converge after 50 sweeps");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0.0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                double dl1 = d[l + 1];
                double h = g - d[l];
                for (int i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = c, c3 = c;
                double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (int k = 0; k < n; ++k) {
                        h = at(k, i + 1);
                        at(k, i + 1) = s * at(k, i) + c * h;
                        at(k, i) = c * at(k, i) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    for (int i = 0; i < n - 1; ++i) {
        int k = i;
        double p = d[i];
        for (int j = i + 1; j < n; ++j)
            if (d[j] < p) {
                k = j;
                p = d[j];
            }
        if (k != i) {
            d[k] = d[i];
            d[i] = p;
            for (int j = 0; j < n; ++j) std::swap(at(j, i), at(j, k));
        }
    }
}

void fix_real_column_sign(double* col_strided, std::size_t n, std::size_t stride) {
    for (std::size_t k = 0; k < n; ++k) {
        double v = col_strided[k * stride];
        if (std::abs(v) > 1e-12) {
            if (v < 0.0)
                for (std::size_t j = 0; j < n; ++j) col_strided[j * stride] = -col_strided[j * stride];
            return;
        }
    }
}

}  // namespace

void tridiag_eigh(std::vector<double>& d, std::vector<double> e, std::vector<double>& z_colmajor) {
    int n = int(d.size());
    std::vector<double> V(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i) V[std::size_t(i) * n + i] = 1.0;
    // tql2 consumes e[1..n-1]; shift the couplings up by one slot
    std::vector<double> ejama(n, 0.0);
    for (int i = 1; i < n; ++i) ejama[i] = e[std::size_t(i) - 1];
    tql2(V, n, d, ejama);
    // return column-major: z[k*n + i] = component i of eigenvector k
    z_colmajor.assign(std::size_t(n) * n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) z_colmajor[std::size_t(k) * n + i] = V[std::size_t(i) * n + k];
}

EigenDecomposition eigh(const DenseHermitian& h, double herm_tol_rel) {
    const std::size_t n = h.dim();
    if (n == 0) return {};

    const double scale = std::max(1.0, h.max_abs());
    const double asym = h.hermiticity_error();
    if (asym > herm_tol_rel * scale)
        throw PhysicsGuard("eigh: input not Hermitian, max asymmetry " + fmt_double(asym) +
                           " exceeds tolerance " + fmt_double(herm_tol_rel * scale));

    // work on the Hermitized copy so both triangles agree exactly
    double max_imag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            max_imag = std::max(max_imag, std::abs(h(i, j).imag()));

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.vectors = DenseHermitian(n);

    if (max_imag <= 1e-14 * scale) {
        // real symmetric: direct path, real eigenvectors
        std::vector<double> V(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                V[i * n + j] = 0.5 * (h(i, j).real() + h(j, i).real());
        std::vector<double> d(n), e(n);
        tred2(V, int(n), d, e);
        tql2(V, int(n), d, e);
        for (std::size_t k = 0; k < n; ++k) {
            fix_real_column_sign(V.data() + k, n, n);
            out.eigenvalues[k] = d[k];
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = cx(V[i * n + k], 0.0);
        }
        return out;
    }

    // complex Hermitian: 2N x 2N real-symmetric embedding M = [[A, -B], [B, A]]
    // with H = A + iB. Each complex eigenvector appears twice as (x; y) and
    // (-y; x); Gram-Schmidt within eigenvalue clusters picks one copy of each.
    const std::size_t n2 = 2 * n;
    std::vector<double> M(n2 * n2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cx z = 0.5 * (h(i, j) + std::conj(h(j, i)));
            M[i * n2 + j] = z.real();
            M[(i + n) * n2 + (j + n)] = z.real();
            M[i * n2 + (j + n)] = -z.imag();
            M[(i + n) * n2 + j] = z.imag();
        }
    std::vector<double> d(n2), e(n2);
    tred2(M, int(n2), d, e);
    tql2(M, int(n2), d, e);

    double spec_scale = std::max({1.0, std::abs(d[0]), std::abs(d[n2 - 1])});
    const double window = 1e-8 * spec_scale;

    std::vector<std::vector<cx>> accepted;
    std::vector<double> accepted_ev;
    for (std::size_t k = 0; k < n2 && accepted.size() < n; ++k) {
        std::vector<cx> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = cx(M[i * n2 + k], M[(i + n) * n2 + k]);
        for (std::size_t j = 0; j < accepted.size(); ++j) {
            if (std::abs(accepted_ev[j] - d[k]) > window) continue;
            cx ov = inner(accepted[j], z);
            for (std::size_t i = 0; i < n; ++i) z[i] -= ov * accepted[j][i];
        }
        double nz = norm2(z);
        if (nz > 0.5) {
            for (auto& zi : z) zi /= nz;
            accepted.push_back(std::move(z));
            accepted_ev.push_back(d[k]);
        }
    }
    if (accepted.size() != n)
        throw ConvergenceError("eigh: embedding extraction recovered " +
                               std::to_string(accepted.size()) + " of " + std::to_string(n) +
                               " eigenvectors");

    for (std::size_t k = 0; k < n; ++k) {
        // deterministic phase: largest-modulus component made real positive
        std::size_t imax = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = std::abs(accepted[k][i]);
            if (m > best) {
                best = m;
                imax = i;
            }
        }
        cx ph = accepted[k][imax] / best;
        out.eigenvalues[k] = accepted_ev[k];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = accepted[k][i] * std::conj(ph);
    }
    return out;
}

// ── Matrix exponential actions ──────────────────────────────────────────────

std::vector<cx> expmv(const DenseHermitian& h, const std::vector<cx>& v, double t) {
    EigenDecomposition ed = eigh(h);
    const std::size_t n = h.dim();
    std::vector<cx> c(n, cx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        cx acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) acc += std::conj(ed.vectors(i, k)) * v[i];
        c[k] = acc * std::exp(cx(0.0, -ed.eigenvalues[k] * t));
    }
    std::vector<cx> out(n, cx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        cx acc(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) acc += ed.vectors(i, k) * c[k];
        out[i] = acc;
    }
    return out;
}

std::vector<cx> expmv(const SparseHermitian& h, const std::vector<cx>& v, double t,
                      const KrylovOptions& opt) {
    const std::size_t n = h.dim();
    if (v.size() != n) throw PhysicsGuard("expmv: vector length does not match operator dimension");
    double beta0 = norm2(v);
    if (beta0 == 0.0 || t == 0.0) return v;

    const int m = std::min<std::size_t>(std::size_t(opt.subspace), n);
    double hnorm = std::max(h.norm_bound(), 1e-30);

    std::vector<cx> cur = v;
    double remaining = t;
    double sgn = (t >= 0.0) ? 1.0 : -1.0;
    double tau = sgn * std::min(std::abs(t), double(m) / hnorm);
    int halvings = 0;
    double last_err = 0.0;

    std::vector<std::vector<cx>> V;
    V.reserve(m);

    while (std::abs(remaining) > 1e-300 * std::abs(t)) {
        if (std::abs(tau) > std::abs(remaining)) tau = remaining;

        double beta = norm2(cur);
        V.clear();
        std::vector<double> alphas, betas;
        {
            std::vector<cx> v0 = cur;
            for (auto& z : v0) z /= beta;
            V.push_back(std::move(v0));
        }
        bool happy = false;
        double beta_res = 0.0;
        for (int j = 0; j < m; ++j) {
            std::vector<cx> w(n, cx(0.0, 0.0));
            h.apply_into(V[std::size_t(j)].data(), w.data());
            // two orthogonalization sweeps against the whole basis
            double alpha_j = 0.0;
            for (int sweep = 0; sweep < 2; ++sweep) {
                for (int i = 0; i <= j; ++i) {
                    cx ov = inner(V[std::size_t(i)], w);
                    if (sweep == 0 && i == j) alpha_j = ov.real();
                    for (std::size_t x = 0; x < n; ++x) w[x] -= ov * V[std::size_t(i)][x];
                }
            }
            alphas.push_back(alpha_j);
            double b = norm2(w);
            if (j == m - 1) {
                beta_res = b;
                break;
            }
            if (b <= 1e-13 * beta) {
                happy = true;  // invariant subspace, result exact in it
                break;
            }
            betas.push_back(b);
            for (auto& z : w) z /= b;
            V.push_back(std::move(w));
        }

        const int k = int(alphas.size());
        std::vector<double> dsmall(alphas.begin(), alphas.end());
        std::vector<double> esmall(betas.begin(), betas.end());
        std::vector<double> Z;
        tridiag_eigh(dsmall, esmall, Z);

        // u = exp(-i tau T) e1, in the Lanczos basis
        std::vector<cx> u(std::size_t(k), cx(0.0, 0.0));
        for (int s = 0; s < k; ++s) {
            cx ph = std::exp(cx(0.0, -dsmall[std::size_t(s)] * tau)) * Z[std::size_t(s) * k];
            for (int j = 0; j < k; ++j) u[std::size_t(j)] += Z[std::size_t(s) * k + j] * ph;
        }

        double err = happy ? 0.0 : beta * beta_res * std::abs(u[std::size_t(k) - 1]);
        last_err = err;
        if (!happy && err > opt.rtol * beta0) {
            tau *= 0.5;
            if (++halvings > opt.max_halvings)
                throw ConvergenceError("expmv: Krylov step did not reach tolerance, achieved residual " +
                                       fmt_double(err / beta0));
            continue;
        }

        std::vector<cx> next(n, cx(0.0, 0.0));
        for (int j = 0; j < k; ++j) {
            cx cj = beta * u[std::size_t(j)];
            const auto& Vj = V[std::size_t(j)];
            for (std::size_t x = 0; x < n; ++x) next[x] += cj * Vj[x];
        }
        cur = std::move(next);
        remaining -= tau;
        if (happy) break;
        if (err < 0.01 * opt.rtol * beta0 && std::abs(tau) < std::abs(remaining)) tau *= 2.0;
    }
    (void)last_err;
    return cur;
}

// ── RK4 double-commutator integrator ────────────────────────────────────────

namespace {

// CSR with both triangles explicit, for threaded left-multiplication.
// Purely real operators (every model Hamiltonian in the gauge used here)
// take a real-valued fast path in the multiply.
struct Csr {
    std::size_t n = 0;
    std::vector<std::size_t> ptr, col;
    std::vector<cx> val;
    std::vector<double> rval;
    bool all_real = false;

    void detect_real() {
        all_real = true;
        for (const auto& v : val)
            if (v.imag() != 0.0) {
                all_real = false;
                return;
            }
        rval.resize(val.size());
        for (std::size_t k = 0; k < val.size(); ++k) rval[k] = val[k].real();
    }
};

Csr to_csr(const SparseHermitian& h) {
    std::size_t n = h.dim();
    std::vector<std::vector<std::pair<std::size_t, cx>>> rows(n);
    for (const auto& t : h.lower_triplets()) {
        rows[t.r].push_back({t.c, t.v});
        if (t.r != t.c) rows[t.c].push_back({t.r, std::conj(t.v)});
    }
    Csr a;
    a.n = n;
    a.ptr.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) a.ptr[i + 1] = a.ptr[i] + rows[i].size();
    a.col.resize(a.ptr[n]);
    a.val.resize(a.ptr[n]);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t o = a.ptr[i];
        for (const auto& [c, v] : rows[i]) {
            a.col[o] = c;
            a.val[o] = v;
            ++o;
        }
    }
    a.detect_real();
    return a;
}

// C = A * B with B, C dense n x n row-major
void csr_mm(const Csr& a, const DenseHermitian& b, DenseHermitian& c) {
    const std::size_t n = a.n;
    parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            cx* ci = c.row(i);
            std::fill(ci, ci + n, cx(0.0, 0.0));
            if (a.all_real) {
                double* cd = reinterpret_cast<double*>(ci);
                for (std::size_t o = a.ptr[i]; o < a.ptr[i + 1]; ++o) {
                    double v = a.rval[o];
                    const double* bd = reinterpret_cast<const double*>(b.row(a.col[o]));
                    for (std::size_t j = 0; j < 2 * n; ++j) cd[j] += v * bd[j];
                }
            } else {
                for (std::size_t o = a.ptr[i]; o < a.ptr[i + 1]; ++o) {
                    cx v = a.val[o];
                    const cx* br = b.row(a.col[o]);
                    for (std::size_t j = 0; j < n; ++j) ci[j] += v * br[j];
                }
            }
        }
    });
}

struct LindbladWork {
    DenseHermitian A, B, D, E, Bdag;
};

// out = -i[h, rho] - (alpha/2)[l, [l, rho]], valid for Hermitian rho
void lindblad_rhs(const Csr& hc, const Csr& lc, double alpha, const DenseHermitian& rho,
                  DenseHermitian& out, LindbladWork& w) {
    const std::size_t n = hc.n;
    csr_mm(hc, rho, w.A);  // A = H rho, rho H = A^dagger
    parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                cx a = w.A(i, j) - std::conj(w.A(j, i));
                out(i, j) = cx(a.imag(), -a.real());  // -i * a
            }
    });
    if (alpha == 0.0) return;
    csr_mm(lc, rho, w.B);   // B = l rho
    csr_mm(lc, w.B, w.D);   // D = l l rho, rho l l = D^dagger
    parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = 0; j < n; ++j) w.Bdag(i, j) = std::conj(w.B(j, i));
    });
    csr_mm(lc, w.Bdag, w.E);  // E = l rho l
    const double g = 0.5 * alpha;
    parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) -= g * (w.D(i, j) + std::conj(w.D(j, i)) - 2.0 * w.E(i, j));
    });
}

void validate_rho0(const DenseHermitian& rho0) {
    if (rho0.hermiticity_error() > 1e-9 * std::max(1.0, rho0.max_abs()))
        throw PhysicsGuard("rk4_lindblad: rho0 is not Hermitian within tolerance");
    double tr = trace(rho0).real();
    if (std::abs(tr - 1.0) > 1e-8)
        throw PhysicsGuard("rk4_lindblad: rho0 trace off by " + fmt_double(std::abs(tr - 1.0)));
    if (rho0.dim() <= 2048) {
        EigenDecomposition ed = eigh(rho0, 1e-6);
        if (ed.eigenvalues.front() < -1e-9)
            throw PhysicsGuard("rk4_lindblad: rho0 has negative eigenvalue " +
                               fmt_double(ed.eigenvalues.front()));
    }
}

void rk4_run(const Csr& hc, const Csr& lc, double hnorm, double lnorm, double alpha,
             const DenseHermitian& rho0, const std::vector<double>& t_grid,
             const std::function<void(std::size_t, const DenseHermitian&)>& observer,
             const Rk4Options& opt) {
    if (alpha < 0.0) throw PhysicsGuard("rk4_lindblad: negative noise strength");
    if (opt.check_rho0) validate_rho0(rho0);
    if (t_grid.empty()) return;

    const std::size_t n = rho0.dim();
    double rate_scale = std::max({hnorm, alpha * lnorm * lnorm, 1e-30});
    // half the 0.05 contract ceiling; keeps the unitary limit accurate to ~1e-8
    double dt_max = 0.025 / rate_scale * opt.dt_factor;

    DenseHermitian rho = rho0;
    LindbladWork w{DenseHermitian(n), DenseHermitian(n), DenseHermitian(n), DenseHermitian(n),
                   DenseHermitian(n)};
    DenseHermitian k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double tr0 = trace(rho).real();

    observer(0, rho);
    for (std::size_t g = 1; g < t_grid.size(); ++g) {
        double span = t_grid[g] - t_grid[g - 1];
        if (span < 0.0) throw PhysicsGuard("rk4_lindblad: time grid not increasing");
        if (span > 0.0) {
            std::size_t steps = std::size_t(std::ceil(span / dt_max));
            double dt = span / double(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                lindblad_rhs(hc, lc, alpha, rho, k1, w);
                parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            tmp(i, j) = rho(i, j) + 0.5 * dt * k1(i, j);
                });
                lindblad_rhs(hc, lc, alpha, tmp, k2, w);
                parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            tmp(i, j) = rho(i, j) + 0.5 * dt * k2(i, j);
                });
                lindblad_rhs(hc, lc, alpha, tmp, k3, w);
                parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (std::size_t j = 0; j < n; ++j) tmp(i, j) = rho(i, j) + dt * k3(i, j);
                });
                lindblad_rhs(hc, lc, alpha, tmp, k4, w);
                parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            rho(i, j) += dt / 6.0 *
                                         (k1(i, j) + 2.0 * k2(i, j) + 2.0 * k3(i, j) + k4(i, j));
                });
                // re-symmetrize; RK4 drift is tiny but compounds over long runs
                parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (std::size_t j = i; j < n; ++j) {
                            cx m = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
                            rho(i, j) = m;
                            rho(j, i) = std::conj(m);
                        }
                });
            }
        }
        double drift = std::abs(trace(rho).real() - tr0);
        if (drift > opt.trace_tol)
            throw ConvergenceError("rk4_lindblad: trace drift " + fmt_double(drift) +
                                   " exceeds tolerance at t = " + fmt_double(t_grid[g]));
        observer(g, rho);
    }
}

Csr dense_to_csr(const DenseHermitian& m) {
    Csr a;
    a.n = m.dim();
    a.ptr.resize(a.n + 1, 0);
    for (std::size_t i = 0; i < a.n; ++i) {
        std::size_t cnt = 0;
        for (std::size_t j = 0; j < a.n; ++j)
            if (m(i, j) != cx(0.0, 0.0)) ++cnt;
        a.ptr[i + 1] = a.ptr[i] + cnt;
    }
    a.col.resize(a.ptr[a.n]);
    a.val.resize(a.ptr[a.n]);
    std::size_t o = 0;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.n; ++j)
            if (m(i, j) != cx(0.0, 0.0)) {
                a.col[o] = j;
                a.val[o] = m(i, j);
                ++o;
            }
    a.detect_real();
    return a;
}

double dense_norm_bound(const DenseHermitian& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.dim(); ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

void rk4_lindblad(const DenseHermitian& h, const DenseHermitian& l, double alpha,
                  const DenseHermitian& rho0, const std::vector<double>& t_grid,
                  const std::function<void(std::size_t, const DenseHermitian&)>& observer,
                  const Rk4Options& opt) {
    if (h.hermiticity_error() > 1e-9 * std::max(1.0, h.max_abs()))
        throw PhysicsGuard("rk4_lindblad: h is not Hermitian within tolerance");
    rk4_run(dense_to_csr(h), dense_to_csr(l), dense_norm_bound(h), dense_norm_bound(l), alpha,
            rho0, t_grid, observer, opt);
}

void rk4_lindblad(const SparseHermitian& h, const SparseHermitian& l, double alpha,
                  const DenseHermitian& rho0, const std::vector<double>& t_grid,
                  const std::function<void(std::size_t, const DenseHermitian&)>& observer,
                  const Rk4Options& opt) {
    rk4_run(to_csr(h), to_csr(l), h.norm_bound(), l.norm_bound(), alpha, rho0, t_grid, observer,
            opt);
}

std::vector<DenseHermitian> rk4_lindblad(const DenseHermitian& h, const DenseHermitian& l,
                                         double alpha, const DenseHermitian& rho0,
                                         const std::vector<double>& t_grid,
                                         const Rk4Options& opt) {
    std::vector<DenseHermitian> out(t_grid.size());
    rk4_lindblad(h, l, alpha, rho0, t_grid,
                 [&](std::size_t i, const DenseHermitian& r) { out[i] = r; }, opt);
    return out;
}

}  // namespace mtsim
