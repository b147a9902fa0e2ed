#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nhchain/spectra.hpp"

namespace nhchain {

// Operators act on full 2^L-space vectors indexed by occupation mask, so
// matrix elements between states of different parity sectors come out as
// exact zeros without special casing.

inline Eigen::VectorXcd apply_elementary(const Eigen::VectorXcd& v, int site,
                                         bool dagger, int length) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index mask = 0; mask < v.size(); ++mask) {
    if (v[mask] == Complex(0.0, 0.0)) continue;
    auto applied =
        dagger ? apply_creation(static_cast<FockState>(mask), site, length)
               : apply_annihilation(static_cast<FockState>(mask), site, length);
    if (applied) out[applied->state] += static_cast<double>(applied->sign) * v[mask];
  }
  return out;
}

// Applies a product of elementary operators, rightmost factor first.
struct OpFactor {
  int site;
  bool dagger;
};

inline Eigen::VectorXcd apply_product(const Eigen::VectorXcd& v,
                                      std::initializer_list<OpFactor> factors,
                                      int length) {
  Eigen::VectorXcd out = v;
  for (auto it = std::rbegin(factors); it != std::rend(factors); ++it)
    out = apply_elementary(out, it->site, it->dagger, length);
  return out;
}

// |det| of the [chi] x [chi] matrix of manifold matrix elements.
inline double manifold_expectation(const Eigen::MatrixXcd& elements) {
  if (elements.rows() != elements.cols())
    throw std::invalid_argument("manifold_expectation: matrix not square");
  if (elements.rows() == 1) return std::abs(elements(0, 0));
  return std::abs(elements.determinant());
}

namespace detail {

// <Psi_l | A | Psi_l'> for every manifold pair, with A|psi> supplied as a
// callable so products are applied once per ket.
template <typename ApplyOp>
inline Eigen::MatrixXcd manifold_elements(const GroundManifold& manifold,
                                          ApplyOp&& apply) {
  const int n = manifold.chi_int;
  Eigen::MatrixXcd elements(n, n);
  for (int r = 0; r < n; ++r) {
    Eigen::VectorXcd applied = apply(manifold.states[r]);
    for (int l = 0; l < n; ++l)
      elements(l, r) = manifold.states[l].dot(applied);
  }
  return elements;
}

}  // namespace detail

// Four neighboring sites in the middle of the chain, 1-indexed.
inline std::array<int, 4> middle_window(int length) {
  if (length < 4)
    throw std::invalid_argument("middle_window: need at least 4 sites");
  int c = length / 2;
  return {c - 1, c, c + 1, c + 2};
}

// Short-range correlator features: two-point d, f and four-point k, p
// over all ordered site pairs of the middle window. Every entry is a
// manifold expectation, hence non-negative; f and k vanish on the
// diagonal identically.
struct FeatureVector {
  std::array<int, 4> window{};
  Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  bool two_point_only = false;

  // Fixed layout: d row-major (16), f (16), k (16), p (16).
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(two_point_only ? 32 : 64);
    for (const Eigen::Matrix4d* m : {&d, &f})
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out.push_back((*m)(a, b));
    if (!two_point_only)
      for (const Eigen::Matrix4d* m : {&k, &p})
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) out.push_back((*m)(a, b));
    return out;
  }
};

inline FeatureVector feature_vector(const GroundManifold& manifold, int length,
                                    bool include_four_point = true) {
  FeatureVector fv;
  fv.window = middle_window(length);
  fv.two_point_only = !include_four_point;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int i = fv.window[a], j = fv.window[b];
      fv.d(a, b) = manifold_expectation(detail::manifold_elements(
          manifold, [&](const Eigen::VectorXcd& v) {
            return apply_product(v, {{i, true}, {j, false}}, length);
          }));
      // c^dag_i c^dag_i = 0, so the diagonal stays an exact zero.
      if (i != j) {
        fv.f(a, b) = manifold_expectation(detail::manifold_elements(
            manifold, [&](const Eigen::VectorXcd& v) {
              return apply_product(v, {{i, true}, {j, true}}, length);
            }));
      }
      if (include_four_point) {
        // k_ij = <kappa kappa^dag> with kappa = c_i c_j; zero for i = j.
        if (i != j) {
          fv.k(a, b) = manifold_expectation(detail::manifold_elements(
              manifold, [&](const Eigen::VectorXcd& v) {
                return apply_product(
                    v, {{i, false}, {j, false}, {j, true}, {i, true}}, length);
              }));
        }
        fv.p(a, b) = manifold_expectation(detail::manifold_elements(
            manifold, [&](const Eigen::VectorXcd& v) {
              return apply_product(
                  v, {{i, true}, {i, false}, {j, true}, {j, false}}, length);
            }));
      }
    }
  }
  return fv;
}

// Eigenvalues of the L x L correlation matrix plus the entropy
// -(1/L) sum_j s_j ln(s_j). Eigenvalues are clamped to [0, 1];
// excursions beyond a 1e-6 guard band are surfaced as a warning flag.
struct CorrelationSpectrum {
  Eigen::VectorXd s;
  double c_corr = 0.0;
  double raw_min = 0.0;
  double raw_max = 0.0;
  bool clamp_warning = false;
};

inline double entropy_from_spectrum(const Eigen::VectorXd& s, int length) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s[j] > 0.0) sum += s[j] * std::log(s[j]);
  return -sum / length;
}

// C_ij = |det rho_ij| with rho_ij^{ll'} = <c_i Psi_l, c_j Psi_l'>.
inline Eigen::MatrixXd correlation_matrix(const GroundManifold& manifold,
                                          int length) {
  const int n = manifold.chi_int;
  // Precompute c_j applied to every manifold state.
  std::vector<std::vector<Eigen::VectorXcd>> lowered(length);
  for (int j = 0; j < length; ++j) {
    lowered[j].reserve(n);
    for (int l = 0; l < n; ++l)
      lowered[j].push_back(
          apply_elementary(manifold.states[l], j + 1, false, length));
  }

  Eigen::MatrixXd c_mat(length, length);
  Eigen::MatrixXcd rho(n, n);
  for (int i = 0; i < length; ++i) {
    for (int j = 0; j < length; ++j) {
      for (int l = 0; l < n; ++l)
        for (int lp = 0; lp < n; ++lp)
          rho(l, lp) = lowered[i][l].dot(lowered[j][lp]);
      c_mat(i, j) = manifold_expectation(rho);
    }
  }
  return c_mat;
}

inline CorrelationSpectrum correlation_entropy(const GroundManifold& manifold,
                                               int length) {
  Eigen::MatrixXd c_mat = correlation_matrix(manifold, length);

  // Entrywise moduli need not be symmetric in the non-Hermitian case;
  // symmetrizing keeps the eigenvalues real.
  Eigen::MatrixXd sym = 0.5 * (c_mat + c_mat.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);

  CorrelationSpectrum spectrum;
  spectrum.s = solver.eigenvalues();
  spectrum.raw_min = spectrum.s.minCoeff();
  spectrum.raw_max = spectrum.s.maxCoeff();
  spectrum.clamp_warning =
      spectrum.raw_min < -1e-6 || spectrum.raw_max > 1.0 + 1e-6;
  spectrum.s = spectrum.s.cwiseMax(0.0).cwiseMin(1.0);
  spectrum.c_corr = entropy_from_spectrum(spectrum.s, length);
  return spectrum;
}

}  // namespace nhchain
