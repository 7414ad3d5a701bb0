#include "mtsim/hilbert.hpp"

#include <stdexcept>

namespace mtsim {

ChargeGrid::ChargeGrid(int twice_cutoff_) : twice_cutoff(twice_cutoff_) {
    if (twice_cutoff < 1 || twice_cutoff % 2 == 0)
        throw PhysicsGuard("ChargeGrid: cutoff must be a positive half-integer (odd twice_cutoff), got " +
                           std::to_string(twice_cutoff) + "/2");
}

SpinRegister::SpinRegister(int count_) : count(count_) {
    if (count < 2 || count % 2 != 0)
        throw PhysicsGuard("SpinRegister: site count must be even and at least 2, got " +
                           std::to_string(count));
    if (count > 24) throw PhysicsGuard("SpinRegister: site count too large for dense bookkeeping");
}

HilbertSpace::HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw PhysicsGuard("HilbertSpace: no factors");
    strides_.assign(factors_.size(), 1);
    for (std::size_t k = factors_.size(); k-- > 1;)
        strides_[k - 1] = strides_[k] * factors_[k].dim;
    dim_ = strides_[0] * factors_[0].dim;
}

std::size_t HilbertSpace::factor_index(const std::string& name) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
        if (factors_[k].name == name) return k;
    throw PhysicsGuard("HilbertSpace: no factor named '" + name + "'");
}

std::size_t HilbertSpace::flat(const std::vector<std::size_t>& multi) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k) idx += multi[k] * strides_[k];
    return idx;
}

std::vector<std::size_t> HilbertSpace::multi(std::size_t flat) const {
    std::vector<std::size_t> m(factors_.size());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        m[k] = flat / strides_[k];
        flat %= strides_[k];
    }
    return m;
}

SparseMatrix charge_shift(const ChargeGrid& grid, int halfsteps) {
    if (halfsteps == 0 || std::abs(halfsteps) > 2)
        throw PhysicsGuard("charge_shift: |halfsteps| must be 1 or 2, got " +
                           std::to_string(halfsteps));
    const std::size_t n = grid.size();
    SparseMatrix s(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        long long target = (long long)k + halfsteps;
        if (target >= 0 && target < (long long)n) s.add(std::size_t(target), k, cx(1.0, 0.0));
    }
    s.coalesce();
    return s;
}

SparseMatrix jw_annihilator(const SpinRegister& reg, int global_site) {
    if (global_site < 1 || global_site > reg.count)
        throw PhysicsGuard("jw_annihilator: site " + std::to_string(global_site) +
                           " outside register of " + std::to_string(reg.count) + " sites");
    const std::size_t dim = reg.dim();
    const int shift = reg.count - global_site;  // site 1 = most significant bit
    const std::size_t bit = std::size_t(1) << shift;
    SparseMatrix a(dim, dim);
    for (std::size_t b = 0; b < dim; ++b) {
        if (!(b & bit)) continue;  // site empty, annihilation gives zero
        int string_parity = 0;
        for (int k = 1; k < global_site; ++k)
            string_parity ^= int((b >> (reg.count - k)) & 1u);
        a.add(b & ~bit, b, cx(string_parity ? -1.0 : 1.0, 0.0));
    }
    a.coalesce();
    return a;
}

SparseMatrix jw_ladder(const SpinRegister& reg, int fermion_site, Chain chain, int L) {
    if (fermion_site < 1 || fermion_site > L)
        throw PhysicsGuard("jw_ladder: chain site " + std::to_string(fermion_site) +
                           " outside chain of length " + std::to_string(L));
    if (2 * L != reg.count)
        throw PhysicsGuard("jw_ladder: register holds " + std::to_string(reg.count) +
                           " sites, expected " + std::to_string(2 * L));
    int global = (chain == Chain::left) ? fermion_site : fermion_site + L;
    return jw_annihilator(reg, global);
}

SparseMatrix spin_pauli(const SpinRegister& reg, int global_site, PauliAxis axis) {
    if (global_site < 1 || global_site > reg.count)
        throw PhysicsGuard("spin_pauli: site out of range");
    const std::size_t dim = reg.dim();
    const std::size_t bit = std::size_t(1) << (reg.count - global_site);
    SparseMatrix p(dim, dim);
    for (std::size_t b = 0; b < dim; ++b) {
        bool set = (b & bit) != 0;
        switch (axis) {
            case PauliAxis::z:
                p.add(b, b, cx(set ? -1.0 : 1.0, 0.0));
                break;
            case PauliAxis::x:
                p.add(b ^ bit, b, cx(1.0, 0.0));
                break;
            case PauliAxis::y:
                p.add(b ^ bit, b, cx(0.0, set ? -1.0 : 1.0));
                break;
        }
    }
    p.coalesce();
    return p;
}

SparseMatrix embed(const SparseMatrix& op, std::size_t factor_index, const HilbertSpace& space) {
    const std::size_t fd = space.factor(factor_index).dim;
    if (op.rows() != fd || op.cols() != fd)
        throw PhysicsGuard("embed: operator dimension " + std::to_string(op.rows()) +
                           " does not match factor '" + space.factor(factor_index).name +
                           "' of dimension " + std::to_string(fd));
    const std::size_t inner = space.stride(factor_index);
    const std::size_t outer = space.dim() / (inner * fd);
    SparseMatrix m(space.dim(), space.dim());
    for (const auto& t : op.triplets())
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t i = 0; i < inner; ++i) {
                std::size_t base = o * fd * inner + i;
                m.add(base + t.r * inner, base + t.c * inner, t.v);
            }
    m.coalesce();
    return m;
}

DenseHermitian partial_trace(const DenseHermitian& rho, const HilbertSpace& space,
                             std::size_t keep) {
    if (rho.dim() != space.dim())
        throw PhysicsGuard("partial_trace: density matrix dimension " + std::to_string(rho.dim()) +
                           " does not match space dimension " + std::to_string(space.dim()));
    const std::size_t fd = space.factor(keep).dim;
    const std::size_t inner = space.stride(keep);
    const std::size_t outer = space.dim() / (inner * fd);
    DenseHermitian red(fd);
    for (std::size_t a = 0; a < fd; ++a)
        for (std::size_t b = 0; b < fd; ++b) {
            cx acc(0.0, 0.0);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < inner; ++i) {
                    std::size_t base = o * fd * inner + i;
                    acc += rho(base + a * inner, base + b * inner);
                }
            red(a, b) = acc;
        }
    return red;
}

}  // namespace mtsim
