#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nhchain/dataset.hpp"
#include "nhchain/io.hpp"

using namespace nhchain;

namespace {

std::filesystem::path temp_csv(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

SweepSpec tiny_grid_spec() {
  SweepSpec spec;
  spec.sampling = Sampling::RegularGrid;
  spec.grid_eta = 2;
  spec.grid_u = 3;
  spec.u_min = -1.0;
  spec.u_max = 1.0;
  spec.eta_min = -0.5;
  spec.eta_max = 0.5;
  spec.length = 4;
  return spec;
}

}  // namespace

TEST_CASE("grid sweep enumerates eta rows then u columns") {
  SweepSpec spec = tiny_grid_spec();
  REQUIRE(spec.total_points() == 6);
  // Row-major: eta outer, u inner.
  auto [u0, e0] = sweep_point(spec, 0);
  auto [u1, e1] = sweep_point(spec, 1);
  auto [u2, e2] = sweep_point(spec, 2);
  auto [u3, e3] = sweep_point(spec, 3);
  CHECK(e0 == Catch::Approx(-0.5));
  CHECK(e1 == Catch::Approx(-0.5));
  CHECK(e2 == Catch::Approx(-0.5));
  CHECK(e3 == Catch::Approx(0.5));
  CHECK(u0 == Catch::Approx(-1.0));
  CHECK(u1 == Catch::Approx(0.0));
  CHECK(u2 == Catch::Approx(1.0));
  CHECK(u3 == Catch::Approx(-1.0));
}

TEST_CASE("singleton grid axes sit at the lower edge") {
  SweepSpec spec = tiny_grid_spec();
  spec.grid_eta = 1;
  spec.grid_u = 1;
  auto [u, eta] = sweep_point(spec, 0);
  CHECK(u == spec.u_min);
  CHECK(eta == spec.eta_min);
}

TEST_CASE("random sweep draws from the declared box") {
  SweepSpec spec;
  spec.sampling = Sampling::RandomUniform;
  spec.count = 200;
  spec.seed = 99;
  for (std::size_t i = 0; i < spec.total_points(); ++i) {
    auto [u, eta] = sweep_point(spec, i);
    CHECK(u >= spec.u_min);
    CHECK(u < spec.u_max);
    CHECK(eta >= spec.eta_min);
    CHECK(eta < spec.eta_max);
  }
  // Same spec, same points.
  auto [ua, ea] = sweep_point(spec, 7);
  auto [ub, eb] = sweep_point(spec, 7);
  CHECK(ua == ub);
  CHECK(ea == eb);
}

TEST_CASE("spec validation rejects bad boxes") {
  SweepSpec spec;
  spec.eta_min = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.u_min = 2.0;
  spec.u_max = -2.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.length = 3;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.sampling = Sampling::RegularGrid;
  spec.grid_eta = 0;
  spec.grid_u = 4;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.count = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  CHECK_NOTHROW(tiny_grid_spec().validate());
}

TEST_CASE("known point labels") {
  SweepSpec spec;
  spec.sampling = Sampling::RegularGrid;
  spec.grid_eta = 1;
  spec.grid_u = 1;
  spec.u_min = spec.u_max = 0.0;
  spec.eta_min = spec.eta_max = 0.0;
  spec.length = 8;
  GenerateStats stats;
  std::vector<SampleRecord> records = generate(spec, &stats);
  REQUIRE(records.size() == 1);
  const SampleRecord& r = records[0];
  CHECK(r.valid);
  CHECK(r.chi_class == 2);
  CHECK(std::abs(r.chi - 2.0) < 1e-6);
  CHECK(r.c_corr > 0.0);
  CHECK(r.c_corr <= 1.0 / std::exp(1.0) + 1e-12);
  CHECK(stats.total == 1);
  CHECK(stats.invalid == 0);
}

TEST_CASE("csv round trip preserves every byte-level value") {
  SweepSpec spec = tiny_grid_spec();
  std::vector<SampleRecord> records = generate(spec, nullptr);
  std::filesystem::path path = temp_csv("nhchain_roundtrip.csv");
  write_csv(records, path.string());
  std::vector<SampleRecord> back = read_csv(path.string());
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SampleRecord& a = records[i];
    const SampleRecord& b = back[i];
    CHECK(a.u_over_t == b.u_over_t);
    CHECK(a.eta == b.eta);
    CHECK(a.delta_over_t == b.delta_over_t);
    CHECK(a.valid == b.valid);
    CHECK(a.chi_class == b.chi_class);
    if (a.valid) {
      CHECK(a.chi == b.chi);
      CHECK(a.c_corr == b.c_corr);
    } else {
      CHECK(std::isnan(b.chi));
      CHECK(std::isnan(b.c_corr));
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      CHECK(a.features[j] == b.features[j]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("identical specs give identical csv bytes") {
  SweepSpec spec = tiny_grid_spec();
  std::filesystem::path a = temp_csv("nhchain_det_a.csv");
  std::filesystem::path b = temp_csv("nhchain_det_b.csv");
  write_csv(generate(spec, nullptr), a.string());
  write_csv(generate(spec, nullptr), b.string());
  CHECK(read_file(a.string()) == read_file(b.string()));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("worker count does not change output bytes") {
  SweepSpec spec = tiny_grid_spec();
  spec.workers = 1;
  std::vector<SampleRecord> serial = generate(spec, nullptr);
  spec.workers = 3;
  std::vector<SampleRecord> parallel = generate(spec, nullptr);
  std::filesystem::path a = temp_csv("nhchain_w1.csv");
  std::filesystem::path b = temp_csv("nhchain_w3.csv");
  write_csv(serial, a.string());
  write_csv(parallel, b.string());
  CHECK(read_file(a.string()) == read_file(b.string()));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("header layout is fixed") {
  std::string header = dataset_csv_header();
  CHECK(header.rfind("u_over_t,eta,delta_over_t,chi,chi_class,c_corr,valid,",
                     0) == 0);
  CHECK(header.find("d_00") != std::string::npos);
  CHECK(header.find("p_33") == header.size() - 4);
  std::vector<std::string> cols = split_csv_line(header);
  CHECK(cols.size() == 7 + kFeatureCount);

  std::vector<SampleRecord> empty;
  std::filesystem::path path = temp_csv("nhchain_empty.csv");
  write_csv(empty, path.string());
  std::istringstream in(read_file(path.string()));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == header);
  CHECK_FALSE(std::getline(in, line));
  CHECK(read_csv(path.string()).empty());
  std::filesystem::remove(path);
}

TEST_CASE("csv reader reports malformed input with line numbers") {
  std::string header = dataset_csv_header();

  // Wrong column name.
  std::string bad_header = header;
  bad_header.replace(bad_header.find("chi_class"), 9, "chi_klass");
  CHECK_THROWS_WITH(read_csv("mem", bad_header + "\n"),
                    Catch::Matchers::ContainsSubstring("chi_class"));

  // Row with too few fields.
  std::string short_row = header + "\n1,2,3\n";
  CHECK_THROWS_WITH(read_csv("mem", short_row),
                    Catch::Matchers::ContainsSubstring(":2:"));

  // Unparsable number in the third row.
  std::ostringstream good;
  good << header << '\n';
  SampleRecord rec;
  rec.valid = true;
  rec.chi = 1.0;
  rec.chi_class = 1;
  rec.c_corr = 0.1;
  std::filesystem::path path = temp_csv("nhchain_badnum.csv");
  write_csv({rec, rec}, path.string());
  std::string text = read_file(path.string());
  std::string::size_type pos = text.rfind("0.1");
  text.replace(pos, 3, "bogus");
  CHECK_THROWS_WITH(read_csv(path.string(), text),
                    Catch::Matchers::ContainsSubstring(":3:"));
  std::filesystem::remove(path);

  // Valid flag outside {0, 1}.
  std::string row = header + "\n";
  row += "0,0,0,1,1,0.1,2";
  for (std::size_t i = 0; i < kFeatureCount; ++i) row += ",0";
  row += "\n";
  CHECK_THROWS_WITH(read_csv("mem", row),
                    Catch::Matchers::ContainsSubstring("valid"));

  // Valid rows must carry a legal class label.
  row = header + "\n";
  row += "0,0,0,1,3,0.1,1";
  for (std::size_t i = 0; i < kFeatureCount; ++i) row += ",0";
  row += "\n";
  CHECK_THROWS_WITH(read_csv("mem", row),
                    Catch::Matchers::ContainsSubstring("chi_class"));
}
