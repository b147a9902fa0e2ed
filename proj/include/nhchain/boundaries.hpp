#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhchain/hamiltonian.hpp"
#include "nhchain/io.hpp"

namespace nhchain {

// Closed-form thermodynamic-limit boundaries, valid only at the exactly
// solvable point Delta = t. Two families: closure of the real-line gap,
//   U/t = +- sqrt(|delta^2/t^2 - (1 +- eta)^2 / (1 -+ eta)^2|),
// and zero degeneracies in the imaginary part,
//   U/t = +- (1 +- eta) / (1 -+ eta).
// The families coincide at delta = 0.

namespace detail {
inline void check_eta(double eta) {
  if (!(std::abs(eta) < 1.0))
    throw std::invalid_argument("boundaries: |eta| must be < 1");
}
inline std::vector<double> dedupe(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || std::abs(x - out.back()) > 1e-12) out.push_back(x);
  return out;
}
// r_+ = (1+eta)/(1-eta) for branch +1, r_- for branch -1.
inline double coupling_ratio(double eta, int branch) {
  return (1.0 + branch * eta) / (1.0 - branch * eta);
}
}  // namespace detail

inline std::vector<double> real_gap_boundary(double eta, double delta_nh,
                                             double t = 1.0) {
  detail::check_eta(eta);
  if (!(t > 0.0)) throw std::invalid_argument("boundaries: t must be > 0");
  std::vector<double> values;
  for (int branch : {+1, -1}) {
    double r = detail::coupling_ratio(eta, branch);
    double u = std::sqrt(std::abs(delta_nh * delta_nh / (t * t) - r * r));
    values.push_back(u);
    values.push_back(-u);
  }
  return detail::dedupe(values);
}

inline std::vector<double> imag_zero_boundary(double eta) {
  detail::check_eta(eta);
  std::vector<double> values;
  for (int branch : {+1, -1}) {
    double r = detail::coupling_ratio(eta, branch);
    values.push_back(r);
    values.push_back(-r);
  }
  return detail::dedupe(values);
}

struct BoundarySet {
  std::vector<double> real_gap;   // U/t values
  std::vector<double> imag_zero;  // U/t values
};

// Refuses evaluation away from the solvable point Delta = t.
inline std::optional<BoundarySet> analytic_boundaries(const ModelParams& p,
                                                      double eta) {
  if (std::abs(p.delta_pair - p.t) > 1e-12 * p.t) return std::nullopt;
  return BoundarySet{real_gap_boundary(eta, p.delta_nh, p.t),
                     imag_zero_boundary(eta)};
}

struct BoundaryPolyline {
  std::string branch_id;
  std::vector<std::array<double, 2>> vertices;  // (eta, U/t)
};

// Ordered vertex lists per branch for plot overlays and CSV export.
// At delta = 0 the imag-zero family duplicates the real-gap one and is
// omitted.
inline std::vector<BoundaryPolyline> boundary_polylines(double eta_min,
                                                        double eta_max,
                                                        double delta_over_t,
                                                        int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("boundary_polylines: resolution must be >= 2");
  std::vector<BoundaryPolyline> lines;
  if (eta_min > eta_max) return lines;
  detail::check_eta(eta_min);
  detail::check_eta(eta_max);

  auto add_family = [&](const std::string& family, bool imag_family) {
    for (int inner : {+1, -1}) {
      for (int outer : {+1, -1}) {
        BoundaryPolyline line;
        line.branch_id = family + (outer > 0 ? "_p" : "_m") +
                         (inner > 0 ? "p" : "m");
        line.vertices.reserve(resolution);
        for (int i = 0; i < resolution; ++i) {
          double eta =
              eta_min + (eta_max - eta_min) * i / double(resolution - 1);
          double r = detail::coupling_ratio(eta, inner);
          double u = imag_family
                         ? r
                         : std::sqrt(std::abs(delta_over_t * delta_over_t -
                                              r * r));
          line.vertices.push_back({eta, outer * u});
        }
        lines.push_back(std::move(line));
      }
    }
  };
  add_family("real_gap", false);
  if (delta_over_t != 0.0) add_family("imag_zero", true);
  return lines;
}

inline void write_boundaries_csv(const std::vector<BoundaryPolyline>& lines,
                                 const std::string& path) {
  std::ofstream out = open_output(path);
  out << "branch_id,eta,u_over_t\n";
  for (const auto& line : lines)
    for (const auto& v : line.vertices)
      out << line.branch_id << ',' << format_double(v[0]) << ','
          << format_double(v[1]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace nhchain
