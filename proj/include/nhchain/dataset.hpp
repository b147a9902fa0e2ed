#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nhchain/correlators.hpp"
#include "nhchain/hamiltonian.hpp"
#include "nhchain/io.hpp"
#include "nhchain/rng.hpp"
#include "nhchain/spectra.hpp"

namespace nhchain {

constexpr int kFeatureCount = 64;  // d(16), f(16), k(16), p(16) row-major

struct SampleRecord {
  double u_over_t = 0.0;
  double eta = 0.0;
  double delta_over_t = 0.0;
  double chi = 0.0;
  int chi_class = 0;  // 0 only on invalid records
  double c_corr = 0.0;
  bool valid = true;
  std::array<double, kFeatureCount> features{};
};

enum class Sampling { RandomUniform, RegularGrid };

struct SweepSpec {
  double u_min = -4.0, u_max = 4.0;  // in units of t
  double eta_min = -0.95, eta_max = 0.95;
  double delta_over_t = 0.0;
  double delta_pair_over_t = 1.0;
  Sampling sampling = Sampling::RandomUniform;
  int count = 20000;              // random-uniform point count
  int grid_eta = 0, grid_u = 0;   // regular-grid shape (eta outer, u inner)
  std::uint64_t seed = 1;
  int length = 8;
  int n_keep = 16;
  double lambda_inv = 0.005;  // 1/lambda in units of t
  int workers = 1;

  int total_points() const {
    return sampling == Sampling::RegularGrid ? grid_eta * grid_u : count;
  }

  void validate() const {
    if (!(eta_min <= eta_max) || eta_min <= -1.0 || eta_max >= 1.0)
      throw std::invalid_argument("sweep: eta range must lie inside (-1, 1)");
    if (std::abs(eta_min) > 0.95 || std::abs(eta_max) > 0.95)
      throw std::invalid_argument("sweep: |eta| > 0.95 is rejected");
    if (!(u_min <= u_max)) throw std::invalid_argument("sweep: bad U range");
    if (sampling == Sampling::RegularGrid) {
      if (grid_eta < 1 || grid_u < 1)
        throw std::invalid_argument("sweep: grid shape must be >= 1x1");
    } else if (count < 1) {
      throw std::invalid_argument("sweep: count must be >= 1");
    }
    if (length < 4 || length > kMaxSites)
      throw std::invalid_argument("sweep: length out of range");
    if (n_keep < 1) throw std::invalid_argument("sweep: n_keep must be >= 1");
    if (!(lambda_inv > 0.0))
      throw std::invalid_argument("sweep: lambda_inv must be > 0");
    if (workers < 1) throw std::invalid_argument("sweep: workers must be >= 1");
  }
};

struct GenerateStats {
  int total = 0;
  int invalid = 0;          // flagged by the solver (see below)
  int near_defective = 0;   // near-parallel retained eigenvectors
  int not_converged = 0;    // iterative solver gave up
  int clamp_warnings = 0;   // correlation eigenvalues outside the tolerance band
};

namespace detail {
inline double linspace_at(double lo, double hi, int i, int n) {
  return n > 1 ? lo + (hi - lo) * i / double(n - 1) : lo;
}
}  // namespace detail

// Parameter point i of the sweep, independent of evaluation order.
inline std::pair<double, double> sweep_point(const SweepSpec& spec, int i) {
  if (spec.sampling == Sampling::RegularGrid) {
    int row = i / spec.grid_u, col = i % spec.grid_u;
    return {detail::linspace_at(spec.u_min, spec.u_max, col, spec.grid_u),
            detail::linspace_at(spec.eta_min, spec.eta_max, row, spec.grid_eta)};
  }
  return {uniform_at(spec.seed, 2 * std::uint64_t(i), spec.u_min, spec.u_max),
          uniform_at(spec.seed, 2 * std::uint64_t(i) + 1, spec.eta_min,
                     spec.eta_max)};
}

// Full single-point pipeline: Hamiltonian, low-lying spectrum, chi labels,
// window correlators, correlation entropy. Solver trouble flags the record
// invalid (labels nan, features zero) instead of aborting the sweep.
inline SampleRecord compute_sample(const SweepSpec& spec, double u_over_t,
                                   double eta, GenerateStats* stats = nullptr) {
  SampleRecord rec;
  rec.u_over_t = u_over_t;
  rec.eta = eta;
  rec.delta_over_t = spec.delta_over_t;

  ModelParams p;
  p.t = 1.0;
  p.delta_pair = spec.delta_pair_over_t;
  p.u = u_over_t;
  p.delta_nh = spec.delta_over_t;
  p.eta = eta;
  p.length = spec.length;

  SectorBasis even = build_sector(p.length, Parity::Even);
  SectorBasis odd = build_sector(p.length, Parity::Odd);
  DiagOptions opts;
  opts.n_keep = spec.n_keep;
  EigenSystem sys =
      diagonalize(build_hamiltonian(p, even), build_hamiltonian(p, odd), opts);

  bool usable = sys.converged && !sys.near_defective &&
                sys.max_residual <= std::max(sys.residual_bound, 1e-12);
  if (stats) {
    if (!sys.converged) ++stats->not_converged;
    if (sys.near_defective) ++stats->near_defective;
  }
  if (!usable) {
    rec.valid = false;
    rec.chi = std::nan("");
    rec.c_corr = std::nan("");
    return rec;
  }

  const double lambda = 1.0 / spec.lambda_inv;
  GroundManifold manifold = ground_manifold(sys, even, odd, lambda);
  rec.chi = manifold.chi;
  rec.chi_class = manifold.chi_class;

  FeatureVector fv = feature_vector(manifold, p.length, true);
  std::vector<double> flat = fv.flatten();
  std::copy(flat.begin(), flat.end(), rec.features.begin());

  CorrelationSpectrum corr = correlation_entropy(manifold, p.length);
  rec.c_corr = corr.c_corr;
  if (stats && corr.clamp_warning) ++stats->clamp_warnings;
  return rec;
}

// Independent point computations on a small worker pool; results land in
// canonical point order, so output bytes do not depend on worker count.
inline std::vector<SampleRecord> generate(const SweepSpec& spec,
                                          GenerateStats* stats = nullptr) {
  spec.validate();
  const int n = spec.total_points();
  std::vector<SampleRecord> records(n);
  GenerateStats local;
  local.total = n;

  const int pool = std::min(spec.workers, n);
  if (pool <= 1) {
    for (int i = 0; i < n; ++i) {
      auto [u, eta] = sweep_point(spec, i);
      records[i] = compute_sample(spec, u, eta, &local);
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<int> invalid{0}, near_defective{0}, not_converged{0},
        clamp_warnings{0};
    auto worker = [&] {
      GenerateStats mine;
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        auto [u, eta] = sweep_point(spec, i);
        records[i] = compute_sample(spec, u, eta, &mine);
      }
      near_defective += mine.near_defective;
      not_converged += mine.not_converged;
      clamp_warnings += mine.clamp_warnings;
    };
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    local.near_defective = near_defective;
    local.not_converged = not_converged;
    local.clamp_warnings = clamp_warnings;
  }
  for (const SampleRecord& r : records)
    if (!r.valid) ++local.invalid;
  if (stats) *stats = local;
  return records;
}

inline std::string dataset_csv_header() {
  std::string h = "u_over_t,eta,delta_over_t,chi,chi_class,c_corr,valid";
  const char* groups[] = {"d", "f", "k", "p"};
  for (const char* g : groups)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        h += std::string(",") + g + "_" + std::to_string(a) + std::to_string(b);
  return h;
}

inline void write_csv(const std::vector<SampleRecord>& records,
                      const std::string& path) {
  std::ofstream out = open_output(path);
  out << dataset_csv_header() << '\n';
  for (const SampleRecord& r : records) {
    out << format_double(r.u_over_t) << ',' << format_double(r.eta) << ','
        << format_double(r.delta_over_t) << ',' << format_double(r.chi) << ','
        << r.chi_class << ',' << format_double(r.c_corr) << ','
        << (r.valid ? 1 : 0);
    for (double f : r.features) out << ',' << format_double(f);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<SampleRecord> read_csv_stream(std::istream& in,
                                                 const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != dataset_csv_header()) {
    std::vector<std::string> got = split_csv_line(line);
    std::vector<std::string> want = split_csv_line(dataset_csv_header());
    for (std::size_t i = 0; i < want.size(); ++i)
      if (i >= got.size() || got[i] != want[i])
        throw std::runtime_error(path + ":1: header column " +
                                 std::to_string(i + 1) + " must be '" +
                                 want[i] + "'");
    throw std::runtime_error(path + ":1: unexpected header");
  }

  std::vector<SampleRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (f.size() != 7 + kFeatureCount)
      throw std::runtime_error(ctx + ": expected " +
                               std::to_string(7 + kFeatureCount) +
                               " fields, got " + std::to_string(f.size()));
    SampleRecord r;
    r.u_over_t = parse_double(f[0], ctx);
    r.eta = parse_double(f[1], ctx);
    r.delta_over_t = parse_double(f[2], ctx);
    r.chi = parse_double(f[3], ctx);
    r.chi_class = static_cast<int>(parse_long(f[4], ctx));
    r.c_corr = parse_double(f[5], ctx);
    long valid = parse_long(f[6], ctx);
    if (valid != 0 && valid != 1)
      throw std::runtime_error(ctx + ": valid flag must be 0 or 1");
    r.valid = valid == 1;
    if (r.valid && r.chi_class != 1 && r.chi_class != 2 && r.chi_class != 4)
      throw std::runtime_error(ctx + ": chi_class must be one of 1, 2, 4");
    for (int i = 0; i < kFeatureCount; ++i)
      r.features[i] = parse_double(f[7 + i], ctx);
    records.push_back(r);
  }
  return records;
}

inline std::vector<SampleRecord> read_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_csv_stream(in, path);
}

// Parses from an in-memory buffer; `name` only labels error messages.
inline std::vector<SampleRecord> read_csv(const std::string& name,
                                          const std::string& text) {
  std::istringstream in(text);
  return read_csv_stream(in, name);
}

}  // namespace nhchain
