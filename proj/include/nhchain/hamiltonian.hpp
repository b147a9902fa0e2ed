#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nhchain/fock.hpp"

namespace nhchain {

using Complex = std::complex<double>;

// Physical parameters of the dimerized Kitaev-Hubbard chain with a
// complex interaction U - i*delta_nh. `t` sets the energy unit.
struct ModelParams {
  double t = 1.0;
  double delta_pair = 1.0;  // superconducting pairing amplitude
  double u = 0.0;           // Hubbard strength
  double delta_nh = 0.0;    // non-Hermiticity
  double eta = 0.0;         // dimerization, |eta| < 1
  int length = 8;

  void validate() const {
    if (!(t > 0.0)) throw std::invalid_argument("ModelParams: t must be > 0");
    if (!(eta > -1.0 && eta < 1.0))
      throw std::invalid_argument("ModelParams: |eta| must be < 1");
    if (length < 2 || length > kMaxSites)
      throw std::invalid_argument("ModelParams: length out of range");
  }
};

// Couplings alternate between strong (1+eta) and weak (1-eta) bonds;
// bond j joins sites j and j+1, and odd bonds are the strong ones.
inline double dimerized(double coupling, double eta, int bond) {
  return (bond % 2 == 1) ? coupling * (1.0 + eta) : coupling * (1.0 - eta);
}

// Sparse complex matrix in a fixed basis; duplicate entries are summed.
class SparseComplexMatrix {
 public:
  SparseComplexMatrix() = default;

  SparseComplexMatrix(Eigen::Index dim,
                      const std::vector<Eigen::Triplet<Complex>>& triplets)
      : matrix_(dim, dim) {
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    matrix_.makeCompressed();
  }

  Eigen::Index dim() const { return matrix_.rows(); }

  const Eigen::SparseMatrix<Complex>& sparse() const { return matrix_; }

  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }

  // Summed COO entries in column-major order.
  std::vector<std::tuple<Eigen::Index, Eigen::Index, Complex>> entries() const {
    std::vector<std::tuple<Eigen::Index, Eigen::Index, Complex>> out;
    out.reserve(matrix_.nonZeros());
    for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(matrix_, k); it; ++it)
        out.emplace_back(it.row(), it.col(), it.value());
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(matrix_, k); it; ++it)
        m = std::max(m, std::abs(it.value()));
    return m;
  }

 private:
  Eigen::SparseMatrix<Complex> matrix_;
};

namespace detail {

// Accumulates every term of the chain Hamiltonian over the given basis.
// All four couplings are dimerized by the bond index.
inline void accumulate_terms(const ModelParams& p, const SectorBasis& basis,
                             std::vector<Eigen::Triplet<Complex>>& out) {
  const int length = p.length;
  for (int col = 0; col < basis.dim(); ++col) {
    const FockState ket = basis.states[col];
    Complex diagonal = 0.0;
    for (int bond = 1; bond < length; ++bond) {
      const double tj = dimerized(p.t, p.eta, bond);
      const double dj = dimerized(p.delta_pair, p.eta, bond);
      const Complex uj(dimerized(p.u, p.eta, bond),
                       -dimerized(p.delta_nh, p.eta, bond));
      const int site = bond;

      // (U_j - i delta_j) (2 n_j - 1) (2 n_{j+1} - 1): diagonal.
      const double zj = (ket >> (site - 1)) & 1 ? 1.0 : -1.0;
      const double zj1 = (ket >> site) & 1 ? 1.0 : -1.0;
      diagonal += uj * zj * zj1;

      // -t_j (c^dag_j c_{j+1} + c^dag_{j+1} c_j)
      auto hop = [&](int from, int to) {
        if (auto a = apply_annihilation(ket, from, length)) {
          if (auto c = apply_creation(a->state, to, length)) {
            out.emplace_back(basis.index_of(c->state), col,
                             Complex(-tj * a->sign * c->sign, 0.0));
          }
        }
      };
      hop(site + 1, site);
      hop(site, site + 1);

      // -Delta_j (c^dag_j c^dag_{j+1} + c_{j+1} c_j)
      if (auto c1 = apply_creation(ket, site + 1, length)) {
        if (auto c2 = apply_creation(c1->state, site, length)) {
          out.emplace_back(basis.index_of(c2->state), col,
                           Complex(-dj * c1->sign * c2->sign, 0.0));
        }
      }
      if (auto a1 = apply_annihilation(ket, site, length)) {
        if (auto a2 = apply_annihilation(a1->state, site + 1, length)) {
          out.emplace_back(basis.index_of(a2->state), col,
                           Complex(-dj * a1->sign * a2->sign, 0.0));
        }
      }
    }
    out.emplace_back(col, col, diagonal);
  }
}

}  // namespace detail

inline SparseComplexMatrix build_hamiltonian(const ModelParams& p,
                                             const SectorBasis& basis) {
  p.validate();
  if (basis.length != p.length)
    throw std::invalid_argument("build_hamiltonian: basis length mismatch");
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(basis.dim()) * (3 * p.length));
  detail::accumulate_terms(p, basis, triplets);
  return SparseComplexMatrix(basis.dim(), triplets);
}

inline SparseComplexMatrix build_hamiltonian(const ModelParams& p,
                                             Parity parity) {
  return build_hamiltonian(p, build_sector(p.length, parity));
}

// Full 2^L-space assembly (no parity blocking); used by tests and by the
// brute-force correlator reference.
inline SparseComplexMatrix build_hamiltonian_full(const ModelParams& p) {
  p.validate();
  SectorBasis basis;
  basis.length = p.length;
  FockState total = FockState{1} << p.length;
  basis.states.resize(total);
  basis.index.resize(total);
  for (FockState mask = 0; mask < total; ++mask) {
    basis.states[mask] = mask;
    basis.index[mask] = static_cast<std::int32_t>(mask);
  }
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(total) * (3 * p.length));
  detail::accumulate_terms(p, basis, triplets);
  return SparseComplexMatrix(total, triplets);
}

}  // namespace nhchain
