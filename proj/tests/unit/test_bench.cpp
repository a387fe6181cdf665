#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "sparseinr/bench.hpp"
#include "sparseinr/error.hpp"

using namespace sparseinr;

namespace {

BenchRecord rec(const std::string& suite, double mse) {
  BenchRecord r;
  r.suite = suite;
  r.volume = "v";
  r.width = 128;
  r.depth = 3;
  r.full_mse = mse;
  return r;
}

const OrderingCheck& find(const std::vector<OrderingCheck>& checks, const std::string& prefix) {
  for (const auto& c : checks)
    if (c.name.rfind(prefix, 0) == 0) return c;
  FAIL("no check named " << prefix);
  return checks.front();
}

}  // namespace

TEST_CASE("scale factors") {
  CHECK(scale_for(1).factors == Factors{1, 1, 1});
  CHECK(scale_for(4).factors == Factors{2, 2, 1});
  CHECK(scale_for(8).factors == Factors{2, 2, 2});
  CHECK(scale_for(16).factors == Factors{4, 4, 1});
  for (std::uint32_t s : {1U, 4U, 8U, 16U}) {
    const Factors f = scale_for(s).factors;
    CHECK(f.c * f.z * f.r == s);
  }
  CHECK_THROWS_AS(scale_for(2), ValidationError);
}

TEST_CASE("median and R^2") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), ValidationError);
  CHECK(linear_r2({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(1.0));
  // y = x^2 on 0..4: Sxy = 40, Sxx = 10, Syy = 174
  CHECK(linear_r2({0, 1, 2, 3, 4}, {0, 1, 4, 9, 16}) == doctest::Approx(1600.0 / 1740.0));
  CHECK_THROWS_AS(linear_r2({1, 2}, {1}), ValidationError);
}

TEST_CASE("sweep cells") {
  SweepSpec s;
  s.seeds = {0, 1};
  CHECK(reconstruction_cells(s).size() == 4 * 2);
  CHECK(sampling_cells(s).size() == 3 * 3 * 2);
  s.widths = {32, 64};
  s.kinds = {ModelKind::Siren, ModelKind::Mlp};
  CHECK(rate_distortion_cells(s).size() == 2 * 2 * 2);
  CHECK_FALSE(describe(sampling_cells(s).front(), s).empty());
  s.rhos = {0.0};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.scales = {3};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.seeds.clear();
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("synthetic volume labels") {
  SynthConfig c{{96, 125, 16}, 20, 0.01, {64, 1023}, 0};
  CHECK(label(VolumeSource{c}) == "synth:96x125x16:t20:o0.01:s0");
  CHECK(label(VolumeSource{std::filesystem::path("a/b.inrv")}) == "b.inrv");
  CHECK(materialize(VolumeSource{c}) == synth_tracks(c));
}

TEST_CASE("CSV round trip is exact") {
  BenchRecord a = rec("sampling", 1.0 / 3.0);
  a.volume = "dir, with \"quotes\"/x.inrv";
  a.kind = ModelKind::Wire;
  a.method = SamplerMethod::Entropy;
  a.rho = 0.05;
  a.scale = 8;
  a.factors = {2, 2, 2};
  a.seed = 18446744073709551615ULL;
  a.epochs = 200;
  a.raw_mse = 1e-300;
  a.psnr = std::numeric_limits<double>::infinity();
  a.artifact_bytes = 134762;
  a.compression_ratio = 1529856.0 / 134762.0;
  a.total_wall_ms = 0.1;
  BenchRecord b = rec("rate", 2.0);
  const std::string csv = to_csv({a, b});
  CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
  const auto back = parse_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
  CHECK_THROWS_AS(parse_csv("nope\n"), FormatError);
  CHECK_THROWS_AS(parse_csv(csv_header() + "\nreconstruction,v\n"), FormatError);
}

TEST_CASE("reconstruction orderings") {
  std::vector<BenchRecord> rs;
  auto add = [&](std::uint32_t s, double m) {
    BenchRecord r = rec("reconstruction", m);
    r.scale = s;
    rs.push_back(r);
  };
  add(1, 1.0);
  add(4, 2.0);
  add(16, 3.0);
  add(8, 4.0);
  auto checks = check_orderings(rs);
  CHECK(find(checks, "reconstruction: median MSE non-decreasing").pass);
  CHECK(find(checks, "reconstruction: median MSE non-decreasing").applicable);
  CHECK(find(checks, "reconstruction: median MSE at S=8").pass);
  rs[3].full_mse = 2.5;
  rs[1].full_mse = 0.5;
  checks = check_orderings(rs);
  CHECK_FALSE(find(checks, "reconstruction: median MSE non-decreasing").pass);
  CHECK_FALSE(find(checks, "reconstruction: median MSE at S=8").pass);
  CHECK_FALSE(find(check_orderings({}), "reconstruction: median MSE at S=8").applicable);
}

TEST_CASE("rate and sampling orderings") {
  std::vector<BenchRecord> rs;
  for (std::uint32_t w : {32U, 64U, 128U}) {
    for (auto kind : {ModelKind::Siren, ModelKind::Mlp}) {
      BenchRecord r = rec("rate", (kind == ModelKind::Siren ? 1.0 : 2.0) / w);
      r.kind = kind;
      r.width = w;
      r.compression_ratio = 1000.0 / w;
      rs.push_back(r);
    }
  }
  for (double rho : {0.1, 0.2, 0.3, 0.4}) {
    for (auto m : {SamplerMethod::Importance, SamplerMethod::Random, SamplerMethod::Entropy}) {
      BenchRecord r = rec("sampling", m == SamplerMethod::Importance ? 1.0 : 2.0);
      r.method = m;
      r.rho = rho;
      r.per_epoch_wall_ms = 10.0 * rho + 1.0;
      r.per_epoch_sample_ms = m == SamplerMethod::Entropy ? 5.0 : 1.0;
      rs.push_back(r);
    }
  }
  auto checks = check_orderings(rs);
  for (const auto& c : checks) {
    if (c.name.rfind("reconstruction", 0) == 0) continue;
    CAPTURE(c.name);
    CHECK(c.applicable);
    CHECK(c.pass);
  }
  for (auto& r : rs) {
    if (r.suite == "sampling" && r.method == SamplerMethod::Random && r.rho == 0.2) r.full_mse = 0.5;
    if (r.suite == "sampling" && r.method == SamplerMethod::Importance) r.per_epoch_wall_ms = r.rho == 0.2 ? 50.0 : 1.0;
  }
  checks = check_orderings(rs);
  CHECK_FALSE(find(checks, "sampling: IMPORTANCE median MSE").pass);
  CHECK_FALSE(find(checks, "sampling: per-epoch time linear in rho for importance").pass);
  CHECK(find(checks, "sampling: per-epoch time linear in rho for random").pass);
  CHECK(find(checks, "sampling: ENTROPY").pass);
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / "sparseinr_test_report";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "out.csv";
  const auto md = emit_report({rec("rate", 1.0)}, csv);
  CHECK(md == dir / "out.md");
  CHECK(std::filesystem::exists(csv));
  std::ifstream in(md);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# Benchmark summary");
  CHECK_THROWS_AS(emit_report({}, csv), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a sweep cell is reproducible") {
  SweepSpec s;
  SynthConfig c{{16, 20, 4}, 3, 0.05, {64, 1023}, 2};
  s.volumes = {c};
  s.widths = {16};
  s.depth = 2;
  s.epochs = 4;
  s.train.batch_size = 256;
  s.seeds = {5};
  const Volume3D v = materialize(s.volumes[0]);
  const SweepCell cell{"reconstruction", 0, ModelKind::Siren, 16, SamplerMethod::Full, 1.0, 4, 5};
  BenchRecord a = run_cell(cell, s, v);
  BenchRecord b = run_cell(cell, s, v);
  CHECK(a.factors == Factors{2, 2, 1});
  CHECK(a.full_mse == b.full_mse);
  CHECK(a.raw_mse == b.raw_mse);
  CHECK(a.artifact_bytes == b.artifact_bytes);
  CHECK(a.full_mse > 0.0);
  CHECK(a.epochs == 4);

  const SweepCell samp{"sampling", 0, ModelKind::Siren, 16, SamplerMethod::Importance, 0.25, 1, 5};
  const BenchRecord r = run_cell(samp, s, v);
  CHECK(r.method == SamplerMethod::Importance);
  CHECK(r.per_epoch_sample_ms >= 0.0);
  CHECK(r.per_epoch_wall_ms >= r.per_epoch_sample_ms);
}
