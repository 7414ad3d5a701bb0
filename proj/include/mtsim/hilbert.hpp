#pragma once

#include <string>
#include <vector>

#include "mtsim/linalg.hpp"

namespace mtsim {

/*
 * Half-integer charge grid n = -cutoff, -cutoff + 1/2, ..., +cutoff.
 * Constructed from twice the cutoff so the half-integer constraint is an
 * integer parity check: twice_cutoff = 5 means cutoff 5/2 and 11 states.
 */
struct ChargeGrid {
    int twice_cutoff;

    explicit ChargeGrid(int twice_cutoff_);

    std::size_t size() const { return std::size_t(2 * twice_cutoff + 1); }
    double cutoff() const { return 0.5 * twice_cutoff; }
    double value(std::size_t k) const { return 0.5 * (double(k) - double(twice_cutoff)); }
};

// Register of spin-1/2 sites carrying the Jordan-Wigner image of the chain
// fermions. Site 1 is the leftmost tensor factor (most significant bit).
struct SpinRegister {
    int count;

    explicit SpinRegister(int count_);

    std::size_t dim() const { return std::size_t(1) << count; }
};

/*
 * Ordered tensor product of named factors. Observables address factors by
 * name so reorderings stay local to the builders.
 */
class HilbertSpace {
  public:
    struct Factor {
        std::string name;
        std::size_t dim;
    };

    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<Factor> factors);

    std::size_t dim() const { return dim_; }
    std::size_t factor_count() const { return factors_.size(); }
    const Factor& factor(std::size_t k) const { return factors_[k]; }
    std::size_t factor_index(const std::string& name) const;
    std::size_t stride(std::size_t k) const { return strides_[k]; }

    std::size_t flat(const std::vector<std::size_t>& multi) const;
    std::vector<std::size_t> multi(std::size_t flat) const;

  private:
    std::vector<Factor> factors_;
    std::vector<std::size_t> strides_;
    std::size_t dim_ = 0;
};

enum class Chain { left, right };

// Charge shift S with S|n> = |n + halfsteps/2>, truncated at the grid edge.
// |halfsteps| must be 1 or 2; combine S with its adjoint for cos terms.
SparseMatrix charge_shift(const ChargeGrid& grid, int halfsteps);

// Jordan-Wigner annihilation operator for the fermion at the given global
// site (1-based): (prod_{k < s} sigma_k^z) sigma_s^-, with c^dagger c = (1 - sigma^z)/2
// so bit 0 is an empty site.
SparseMatrix jw_annihilator(const SpinRegister& reg, int global_site);

// Chain-local JW ladder: left site j sits at global site j, right site j at
// global site j + L.
SparseMatrix jw_ladder(const SpinRegister& reg, int fermion_site, Chain chain, int L);

enum class PauliAxis { x, y, z };

SparseMatrix spin_pauli(const SpinRegister& reg, int global_site, PauliAxis axis);

// Operator on one factor, identity on the rest.
SparseMatrix embed(const SparseMatrix& op, std::size_t factor_index, const HilbertSpace& space);

// Reduced density matrix on the kept factor.
DenseHermitian partial_trace(const DenseHermitian& rho, const HilbertSpace& space,
                             std::size_t keep);

}  // namespace mtsim
