#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "nhchain/hamiltonian.hpp"
#include "nhchain/rng.hpp"

namespace nhchain {

struct DiagOptions {
  int n_keep = 16;               // retained low-lying states
  bool want_vectors = true;
  Eigen::Index dense_threshold = 8192;  // per sector; above this, Arnoldi
  int max_restarts = 60;
  double arnoldi_tol = 1e-10;
};

// Merged spectrum of both parity sectors, sorted ascending by real part
// (ties by imaginary part, then sector). Right eigenvectors of the
// lowest retained states are kept sector-local and unit normalized.
struct EigenSystem {
  std::vector<Complex> energies;
  std::vector<Eigen::VectorXcd> vectors;
  std::vector<Parity> sector_of;
  int n_keep = 0;
  double max_residual = 0.0;   // max ||H v - e v||_2 over retained vectors
  double residual_bound = 0.0; // 1e-8 * max|H_ij| * dim
  bool near_defective = false; // a retained same-sector pair is near-parallel
  bool converged = true;
};

namespace detail {

struct SectorEigen {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // empty unless requested
  bool ok = true;
};

inline SectorEigen dense_eigensolve(Eigen::MatrixXcd a, bool want_vectors) {
  SectorEigen out;
  const lapack_int n = static_cast<lapack_int>(a.rows());
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n,
      out.values.data(), nullptr, 1,
      want_vectors ? out.vectors.data() : nullptr, want_vectors ? n : 1);
  if (info < 0) throw std::logic_error("zgeev: illegal argument");
  out.ok = (info == 0);
  return out;
}

// Gershgorin estimate of the left edge of the spectrum; the shift for
// the shift-invert transform sits strictly left of every eigenvalue.
inline Complex shift_left_of_spectrum(const Eigen::SparseMatrix<Complex>& h) {
  double left = 0.0, right = 0.0;
  bool first = true;
  for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
    double radius = 0.0;
    Complex diag = 0.0;
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(h, k); it; ++it) {
      if (it.row() == it.col())
        diag = it.value();
      else
        radius += std::abs(it.value());
    }
    double lo = diag.real() - radius, hi = diag.real() + radius;
    left = first ? lo : std::min(left, lo);
    right = first ? hi : std::max(right, hi);
    first = false;
  }
  double margin = 0.05 * (right - left) + 1.0;
  return Complex(left - margin, 0.0);
}

// Restarted Arnoldi on (H - sigma)^-1 targeting the eigenvalues closest
// to sigma. Returns false when the wanted Ritz pairs fail to converge.
inline bool shift_invert_arnoldi(const Eigen::SparseMatrix<Complex>& h,
                                 Complex sigma, int n_want, double tol,
                                 int max_restarts,
                                 std::vector<Complex>& values,
                                 Eigen::MatrixXcd& vectors) {
  const Eigen::Index dim = h.rows();
  n_want = std::min<int>(n_want, static_cast<int>(dim));
  const Eigen::Index m =
      std::min<Eigen::Index>(dim, std::max<Eigen::Index>(2 * n_want + 16, 48));

  Eigen::SparseMatrix<Complex> shifted = h;
  for (Eigen::Index i = 0; i < dim; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) return false;

  // Deterministic start vector.
  Eigen::VectorXcd v0(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v0[i] = Complex(uniform_at(0x5eed, 2 * i, -1.0, 1.0),
                    uniform_at(0x5eed, 2 * i + 1, -1.0, 1.0));
  }
  v0.normalize();

  Eigen::MatrixXcd basis(dim, m + 1);
  Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);

  for (int restart = 0; restart < max_restarts; ++restart) {
    basis.col(0) = v0;
    hess.setZero();
    Eigen::Index k = 0;
    bool breakdown = false;
    for (; k < m; ++k) {
      Eigen::VectorXcd w = lu.solve(basis.col(k));
      // Modified Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j <= k; ++j) {
          Complex proj = basis.col(j).dot(w);
          w -= proj * basis.col(j);
          hess(j, k) += proj;
        }
      }
      double norm = w.norm();
      hess(k + 1, k) = norm;
      if (norm < 1e-14) {  // invariant subspace: Ritz pairs are exact
        breakdown = true;
        ++k;
        break;
      }
      basis.col(k + 1) = w / norm;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> small(
        hess.topLeftCorner(k, k), true);
    if (small.info() != Eigen::Success) return false;

    std::vector<Eigen::Index> order(k);
    for (Eigen::Index i = 0; i < k; ++i) order[i] = i;
    const auto& theta = small.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(theta[a]) > std::abs(theta[b]);
    });

    const int take = std::min<int>(n_want, static_cast<int>(k));
    double beta = std::abs(hess(k, k - 1));
    bool all_converged = true;
    if (!breakdown) {
      for (int i = 0; i < take; ++i) {
        Eigen::Index idx = order[i];
        double resid = beta * std::abs(small.eigenvectors()(k - 1, idx));
        if (resid > tol * std::max(1.0, std::abs(theta[idx])))
          all_converged = false;
      }
    }

    if (all_converged || breakdown) {
      values.resize(take);
      vectors.resize(dim, take);
      for (int i = 0; i < take; ++i) {
        Eigen::Index idx = order[i];
        values[i] = sigma + 1.0 / theta[idx];
        vectors.col(i) =
            basis.leftCols(k) * small.eigenvectors().col(idx);
        vectors.col(i).normalize();
      }
      return true;
    }

    // Polynomial restart: collapse onto the wanted Ritz directions.
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < take; ++i)
      next += basis.leftCols(k) * small.eigenvectors().col(order[i]);
    double norm = next.norm();
    if (norm < 1e-14) return false;
    v0 = next / norm;
  }
  return false;
}

inline SectorEigen sector_eigensolve(const SparseComplexMatrix& h,
                                     const DiagOptions& opts) {
  if (h.dim() <= opts.dense_threshold)
    return dense_eigensolve(h.dense(), opts.want_vectors);
  SectorEigen out;
  std::vector<Complex> values;
  Eigen::MatrixXcd vectors;
  Complex sigma = shift_left_of_spectrum(h.sparse());
  int n_want = std::min<int>(opts.n_keep + 8, static_cast<int>(h.dim()));
  out.ok = shift_invert_arnoldi(h.sparse(), sigma, n_want, opts.arnoldi_tol,
                                opts.max_restarts, values, vectors);
  if (out.ok) {
    out.values = Eigen::Map<Eigen::VectorXcd>(values.data(), values.size());
    out.vectors = std::move(vectors);
  }
  return out;
}

inline bool energy_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace detail

inline EigenSystem diagonalize(const SparseComplexMatrix& h_even,
                               const SparseComplexMatrix& h_odd,
                               const DiagOptions& opts = {}) {
  EigenSystem sys;
  sys.n_keep = opts.n_keep;

  detail::SectorEigen even = detail::sector_eigensolve(h_even, opts);
  detail::SectorEigen odd = detail::sector_eigensolve(h_odd, opts);
  if (!even.ok || !odd.ok) {
    sys.converged = false;
    return sys;
  }

  struct Entry {
    Complex energy;
    Parity sector;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  entries.reserve(even.values.size() + odd.values.size());
  for (Eigen::Index i = 0; i < even.values.size(); ++i)
    entries.push_back({even.values[i], Parity::Even, i});
  for (Eigen::Index i = 0; i < odd.values.size(); ++i)
    entries.push_back({odd.values[i], Parity::Odd, i});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.energy.real() != b.energy.real())
      return a.energy.real() < b.energy.real();
    if (a.energy.imag() != b.energy.imag())
      return a.energy.imag() < b.energy.imag();
    if (a.sector != b.sector) return a.sector == Parity::Even;
    return a.column < b.column;
  });

  sys.energies.reserve(entries.size());
  for (const Entry& e : entries) sys.energies.push_back(e.energy);

  if (!opts.want_vectors || opts.n_keep <= 0) return sys;

  const int retained =
      std::min<int>(opts.n_keep, static_cast<int>(entries.size()));
  const double h_max = std::max(h_even.max_abs(), h_odd.max_abs());
  sys.residual_bound = 1e-8 * h_max * (h_even.dim() + h_odd.dim());
  for (int i = 0; i < retained; ++i) {
    const Entry& e = entries[i];
    const detail::SectorEigen& src = e.sector == Parity::Even ? even : odd;
    const SparseComplexMatrix& h = e.sector == Parity::Even ? h_even : h_odd;
    Eigen::VectorXcd v = src.vectors.col(e.column);
    v.normalize();
    double residual = (h.sparse() * v - e.energy * v).norm();
    sys.max_residual = std::max(sys.max_residual, residual);
    sys.vectors.push_back(std::move(v));
    sys.sector_of.push_back(e.sector);
  }

  // Near-parallel retained vectors in one sector signal proximity to an
  // exceptional point; such samples are flagged, never silently used.
  for (int a = 0; a < retained && !sys.near_defective; ++a)
    for (int b = a + 1; b < retained; ++b) {
      if (sys.sector_of[a] != sys.sector_of[b]) continue;
      if (std::abs(sys.vectors[a].dot(sys.vectors[b])) > 1.0 - 1e-6) {
        sys.near_defective = true;
        break;
      }
    }
  return sys;
}

// chi = sum_alpha exp(-lambda |e_alpha - e_0|) over the supplied energies.
inline double quasi_degeneracy(std::span<const Complex> energies,
                               double lambda) {
  if (energies.empty())
    throw std::invalid_argument("quasi_degeneracy: no energies");
  if (!(lambda > 0.0))
    throw std::invalid_argument("quasi_degeneracy: lambda must be > 0");
  const Complex ground = energies[0];
  double chi = 0.0;
  for (const Complex& e : energies) chi += std::exp(-lambda * std::abs(e - ground));
  return chi;
}

// chi restricted to the retained low-lying subset of the spectrum.
inline double chi_of(const EigenSystem& sys, double lambda) {
  const std::size_t subset =
      std::min<std::size_t>(sys.n_keep > 0 ? sys.n_keep : 16,
                            sys.energies.size());
  return quasi_degeneracy(std::span(sys.energies.data(), subset), lambda);
}

// Nearest integer (half away from zero), clamped to [1, n_keep].
inline int chi_nearest_int(double chi, int n_keep) {
  long r = std::llround(chi);
  if (r < 1) r = 1;
  if (r > n_keep) r = n_keep;
  return static_cast<int>(r);
}

// Snaps [chi] to the analytical degeneracy orders {1, 2, 4}; the tie at
// 3 resolves downward to 2.
inline int chi_class_of(int chi_int) {
  if (chi_int < 1) throw std::invalid_argument("chi_class_of: chi_int < 1");
  int best = 1;
  for (int c : {2, 4})
    if (std::abs(chi_int - c) < std::abs(chi_int - best)) best = c;
  return best;
}

// The [chi] lowest eigenstates embedded in the full 2^L space.
struct GroundManifold {
  double chi = 1.0;
  int chi_int = 1;
  int chi_class = 1;
  std::vector<Eigen::VectorXcd> states;  // full-space, unit norm
};

inline Eigen::VectorXcd embed_in_full_space(const SectorBasis& basis,
                                            const Eigen::VectorXcd& v) {
  Eigen::VectorXcd full =
      Eigen::VectorXcd::Zero(Eigen::Index{1} << basis.length);
  for (int i = 0; i < basis.dim(); ++i) full[basis.states[i]] = v[i];
  return full;
}

inline GroundManifold ground_manifold(const EigenSystem& sys,
                                      const SectorBasis& even,
                                      const SectorBasis& odd, double lambda) {
  if (sys.vectors.empty())
    throw std::invalid_argument("ground_manifold: eigensystem has no vectors");
  GroundManifold manifold;
  manifold.chi = chi_of(sys, lambda);
  manifold.chi_int =
      chi_nearest_int(manifold.chi, static_cast<int>(sys.vectors.size()));
  manifold.chi_class = chi_class_of(manifold.chi_int);
  manifold.states.reserve(manifold.chi_int);
  for (int l = 0; l < manifold.chi_int; ++l) {
    const SectorBasis& basis = sys.sector_of[l] == Parity::Even ? even : odd;
    manifold.states.push_back(embed_in_full_space(basis, sys.vectors[l]));
  }
  return manifold;
}

}  // namespace nhchain
