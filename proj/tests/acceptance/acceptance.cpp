// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance [--only N[,M...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sparseinr/bench.hpp"
#include "sparseinr/cli.hpp"
#include "sparseinr/codec.hpp"
#include "sparseinr/config.hpp"
#include "sparseinr/error.hpp"
#include "sparseinr/models.hpp"
#include "sparseinr/nncore.hpp"
#include "sparseinr/sampling.hpp"
#include "sparseinr/train.hpp"
#include "sparseinr/volume.hpp"

using namespace sparseinr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SynthConfig desk_volume() { return SynthConfig{{96, 125, 16}, 20, 0.01, {64, 1023}, 0}; }

// Smallest |preactivation| over the ReLU units of an MLP/FFNet on x.
double relu_margin(const ModelParams& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a = m.fourier_B ? fourier_features(x, *m.fourier_B) : x;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
    const Eigen::MatrixXd u = (m.layers[l].W * a).colwise() + m.layers[l].b;
    margin = std::min(margin, u.cwiseAbs().minCoeff());
    a = u.cwiseMax(0.0);
  }
  return margin;
}

// 1. Analytic gradients agree with central differences.
Outcome gradients() {
  Rng rng(101);
  double worst[4] = {0, 0, 0, 0};
  double fine[4] = {0, 0, 0, 0};
  int redrawn = 0;
  const ModelKind kinds[] = {ModelKind::Mlp, ModelKind::FfNet, ModelKind::Siren, ModelKind::Wire};
  for (int k = 0; k < 4; ++k) {
    for (int trial = 0; trial < 20; ++trial) {
      for (;;) {
        ModelSpec s;
        s.kind = kinds[k];
        s.hidden_dims.resize(1 + rng.uniform_index(2));
        for (auto& h : s.hidden_dims) h = static_cast<std::uint32_t>(2 + rng.uniform_index(15));
        s.fourier.n_features = static_cast<std::uint32_t>(1 + rng.uniform_index(8));
        s.init_seed = rng.next_u64();
        s.fourier.seed = rng.next_u64();
        const ModelParams m = build_model(s);
        const Eigen::Index n = 8;
        Eigen::MatrixXd x(3, n);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.uniform();
        // A ReLU unit within reach of the step straddles the kink, where the
        // derivative is undefined and the difference quotient is no oracle.
        if (k < 2 && relu_margin(m, x) < 1e-2) {
          ++redrawn;
          continue;
        }
        worst[k] = std::max(worst[k], gradcheck(m, x, y, 1e-4));
        fine[k] = std::max(fine[k], gradcheck(m, x, y, 1e-5));
        break;
      }
    }
  }
  Outcome o;
  o.pass = worst[0] < 1e-4 && worst[1] < 1e-4 && worst[2] < 1e-4 && worst[3] < 1e-3;
  o.detail = "max rel err at h=1e-4: mlp " + fmt(worst[0]) + " ffnet " + fmt(worst[1]) + " siren " + fmt(worst[2]) +
             " wire " + fmt(worst[3]) + "; diagnostic at h=1e-5: mlp " + fmt(fine[0]) + " ffnet " + fmt(fine[1]) +
             " siren " + fmt(fine[2]) + " wire " + fmt(fine[3]) + "; near-kink ReLU draws redrawn " +
             std::to_string(redrawn);
  return o;
}

// 2. Importance sampler frequencies match |y| (epsilon for zeros).
Outcome sampler_law() {
  const std::vector<double> y{0.0, 2.0, 0.0, 3.0};
  const ImportanceWeights w = importance_weights(y, 0.5);
  Rng rng(202);
  const std::size_t n = 1000000;
  std::vector<double> freq(4, 0.0);
  for (auto d : weighted_sample(w, n, rng)) freq[d] += 1.0;
  const double p[4] = {1.0 / 12.0, 1.0 / 3.0, 1.0 / 12.0, 1.0 / 2.0};
  Outcome o{true, "z-scores"};
  for (int k = 0; k < 4; ++k) {
    const double z = (freq[k] - n * p[k]) / std::sqrt(n * p[k] * (1.0 - p[k]));
    if (!(std::abs(z) < 4.0)) o.pass = false;
    o.detail += " " + fmt(z);
  }
  return o;
}

HistogramModel hist_of(const std::vector<std::uint64_t>& counts) {
  HistogramModel h;
  h.counts = counts;
  h.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  h.lo = 0.0;
  h.hi = 1.0;
  for (std::size_t k = 0; k <= counts.size(); ++k) h.edges.push_back(static_cast<double>(k) / counts.size());
  return h;
}

// 3. Entropy allocation on enumerated cases and budget exactness.
Outcome entropy_allocation() {
  Outcome o{true, ""};
  auto expect = [&](const std::vector<std::uint64_t>& counts, double rho, const std::vector<std::uint64_t>& want) {
    if (entropy_allocate(hist_of(counts), rho).take != want) {
      o.pass = false;
      o.detail += "hand case mismatch at rho=" + fmt(rho) + "; ";
    }
  };
  expect({50, 50, 50, 50}, 0.2, {10, 10, 10, 10});
  expect({5, 95}, 0.2, {5, 15});
  expect({5, 95}, 1.0, {5, 95});
  expect({3, 0, 40, 7}, 1.0, {3, 0, 40, 7});

  Rng rng(303);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint64_t> counts(1 + rng.uniform_index(64));
    for (auto& c : counts) c = rng.uniform_index(3) == 0 ? rng.uniform_index(4) : rng.uniform_index(5000);
    if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 0) counts[0] = 1;
    const HistogramModel h = hist_of(counts);
    const double rho = std::max(1e-4, rng.uniform());
    const auto take = entropy_allocate(h, rho).take;
    const auto sum = std::accumulate(take.begin(), take.end(), std::uint64_t{0});
    if (sum != round_half_even(static_cast<double>(h.total) * rho)) ++bad;
  }
  if (bad) o.pass = false;
  o.detail += "random budget mismatches " + std::to_string(bad) + "/1000";
  return o;
}

// 4. Default SIREN fits the desk volume with FULL sampling.
Outcome fit_capability() {
  const Volume3D v = synth_tracks(desk_volume());
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.loss_eval_every = 50;
  const TrainResult r = train(v, ModelSpec{}, cfg, [](const EpochRecord& e) {
    if (e.full_mse) std::cerr << "  [4] epoch " << e.epoch + 1 << " full_mse " << fmt(*e.full_mse) << "\n";
  });
  const double mse = *r.log.final_full_mse();
  return {mse < 1e-4, "occupancy " + fmt(occupancy(v)) + ", full MSE " + fmt(mse) + " (raw " + fmt(mse * 1023 * 1023) +
                          "), " + fmt(r.log.total_wall_ms() / 1000.0) + " s"};
}

SweepSpec desk_sweep(std::uint32_t epochs) {
  SweepSpec s;
  s.volumes = {desk_volume()};
  s.epochs = epochs;
  return s;
}

void progress(const BenchRecord& r) {
  std::cerr << "  " << r.suite << " " << to_string(r.method) << " rho " << fmt(r.rho) << " S" << r.scale << " seed "
            << r.seed << ": full_mse " << fmt(r.full_mse) << " epoch_ms " << fmt(r.per_epoch_wall_ms) << "\n";
}

// 5. IMPORTANCE is at least as good as RANDOM at every rho.
Outcome sampling_efficiency() {
  SweepSpec s = desk_sweep(200);
  s.methods = {SamplerMethod::Importance, SamplerMethod::Random};
  s.rhos = {0.05, 0.1, 0.25};
  const auto records = run_sampling_efficiency(s, progress);
  std::map<std::pair<double, SamplerMethod>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.rho, r.method}].push_back(r.full_mse);
  Outcome o{true, ""};
  for (double rho : s.rhos) {
    const double is = median(groups[{rho, SamplerMethod::Importance}]);
    const double rs = median(groups[{rho, SamplerMethod::Random}]);
    if (!(is <= rs)) o.pass = false;
    o.detail += "rho " + fmt(rho) + ": IS " + fmt(is) + " RS " + fmt(rs) + "; ";
  }
  return o;
}

// 6. Per-epoch time is linear in rho; ENTROPY's per-epoch overhead exceeds IMPORTANCE's.
Outcome time_scaling() {
  SweepSpec s = desk_sweep(5);
  s.methods = {SamplerMethod::Importance, SamplerMethod::Random};
  s.rhos.clear();
  for (int k = 1; k <= 10; ++k) s.rhos.push_back(k / 10.0);
  s.seeds = {0};
  const auto records = run_sampling_efficiency(s, progress);
  std::map<SamplerMethod, std::pair<std::vector<double>, std::vector<double>>> xy;
  for (const auto& r : records) {
    xy[r.method].first.push_back(r.rho);
    xy[r.method].second.push_back(r.per_epoch_wall_ms);
  }
  const double r2_is = linear_r2(xy[SamplerMethod::Importance].first, xy[SamplerMethod::Importance].second);
  const double r2_rs = linear_r2(xy[SamplerMethod::Random].first, xy[SamplerMethod::Random].second);

  SweepSpec e = desk_sweep(5);
  e.methods = {SamplerMethod::Importance, SamplerMethod::Entropy};
  e.rhos = {0.05};
  e.seeds = {0};
  double ent_ms = 0.0;
  double imp_ms = 0.0;
  double imp_setup = 0.0;
  for (const auto& r : run_sampling_efficiency(e, progress)) {
    if (r.method == SamplerMethod::Entropy) ent_ms = r.per_epoch_sample_ms;
    if (r.method == SamplerMethod::Importance) {
      imp_ms = r.per_epoch_sample_ms;
      imp_setup = r.setup_ms;
    }
  }
  Outcome o;
  o.pass = r2_is > 0.95 && r2_rs > 0.95 && ent_ms > imp_ms;
  o.detail = "R^2 IS " + fmt(r2_is) + " RS " + fmt(r2_rs) + "; rho 0.05 per-epoch sampling: entropy " + fmt(ent_ms) +
             " ms, importance " + fmt(imp_ms) + " ms (importance one-off table " + fmt(imp_setup) + " ms)";
  return o;
}

// 7. Super-resolution error grows with S; decimating r (S=8) hurts more than S=16.
Outcome super_resolution() {
  SweepSpec s = desk_sweep(100);
  s.scales = {1, 4, 16, 8};
  const auto records = run_reconstruction_suite(s, progress);
  std::map<std::uint32_t, std::vector<double>> by_s;
  for (const auto& r : records) by_s[r.scale].push_back(r.full_mse);
  const double m1 = median(by_s[1]);
  const double m4 = median(by_s[4]);
  const double m16 = median(by_s[16]);
  const double m8 = median(by_s[8]);
  Outcome o;
  o.pass = m1 <= m4 && m4 <= m16 && m8 > m16;
  o.detail = "median MSE S1 " + fmt(m1) + " S4 " + fmt(m4) + " S16 " + fmt(m16) + " S8 " + fmt(m8);
  return o;
}

// 8. Raw size, artifact ratio against the file on disk, fp16 doubling.
Outcome compression_accounting() {
  const Dims d{192, 249, 16};
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::create_directories(dir);
  const ModelParams m = build_model(ModelSpec{});
  const CompressedArtifact a32 = package(m, d, {}, WeightPrecision::Fp32);
  const CompressedArtifact a16 = package(m, d, {}, WeightPrecision::Fp16);
  save_artifact(a32, dir / "c8_fp32.inrc");
  save_artifact(a16, dir / "c8_fp16.inrc");
  const auto b32 = fs::file_size(dir / "c8_fp32.inrc");
  const auto b16 = fs::file_size(dir / "c8_fp16.inrc");
  const double r32 = 1529856.0 / static_cast<double>(b32);
  const double r16 = 1529856.0 / static_cast<double>(b16);
  const double doubling = r16 / r32;
  Outcome o;
  o.pass = raw_bytes(d) == 1529856 && compression_ratio(a32) == r32 && compression_ratio(a16) == r16 &&
           std::abs(doubling - 2.0) <= 0.1;
  o.detail = "raw " + std::to_string(raw_bytes(d)) + " B, fp32 " + std::to_string(b32) + " B ratio " + fmt(r32) +
             ", fp16 " + std::to_string(b16) + " B ratio " + fmt(r16) + " (x" + fmt(doubling) + ")";
  return o;
}

// 9. Bit-exact round trips and explicit rejection of corrupted headers.
Outcome round_trips() {
  Rng rng(909);
  int vol_bad = 0;
  int art_bad = 0;
  for (int n = 0; n < 1000; ++n) {
    const Dims d{static_cast<std::uint32_t>(1 + rng.uniform_index(12)), static_cast<std::uint32_t>(1 + rng.uniform_index(12)),
                 static_cast<std::uint32_t>(1 + rng.uniform_index(6))};
    std::vector<std::uint16_t> values(d.cells());
    for (auto& v : values) v = static_cast<std::uint16_t>(rng.uniform_index(1024));
    const Volume3D v(d, std::move(values));
    const auto bytes = encode_volume(v);
    if (!(decode_volume(bytes) == v) || encode_volume(decode_volume(bytes)) != bytes) ++vol_bad;

    ModelSpec s;
    const ModelKind kinds[] = {ModelKind::Mlp, ModelKind::FfNet, ModelKind::Siren, ModelKind::Wire};
    s.kind = kinds[rng.uniform_index(4)];
    s.hidden_dims.resize(1 + rng.uniform_index(3));
    for (auto& h : s.hidden_dims) h = static_cast<std::uint32_t>(1 + rng.uniform_index(24));
    s.fourier.n_features = static_cast<std::uint32_t>(1 + rng.uniform_index(8));
    s.siren_omega0 = rng.uniform(1.0, 60.0);
    s.init_seed = rng.next_u64();
    s.fourier.seed = rng.next_u64();
    const auto p = rng.uniform_index(2) ? WeightPrecision::Fp16 : WeightPrecision::Fp32;
    const CompressedArtifact a = package(build_model(s), d, {}, p);
    const auto ab = encode_artifact(a);
    if (!(decode_artifact(ab) == a) || encode_artifact(decode_artifact(ab)) != ab) ++art_bad;
  }

  // Flip each header byte in turn. Every INRV header byte is structural. The
  // INRC layout carries no checksum, so only bytes that fix the shape of the
  // payload can be detected; value fields (omega0, sigma, s0, seeds, source
  // dims, factors) that stay in range decode as a different valid artifact and
  // are only counted.
  int accepted = 0;
  int tried = 0;
  int value_detected = 0;
  int value_tried = 0;
  const Volume3D v(Dims{4, 4, 4}, std::vector<std::uint16_t>(64, 100));
  const auto vb = encode_volume(v);
  for (std::size_t off = 0; off < kInrvHeaderBytes; ++off) {
    auto bad = vb;
    bad[off] ^= 0x5A;
    ++tried;
    try {
      decode_volume(bad);
      ++accepted;
    } catch (const FormatError&) {
    }
  }
  const CompressedArtifact a = package(build_model(ModelSpec{}), {16, 16, 4}, {}, WeightPrecision::Fp32);
  const auto ab = encode_artifact(a);
  const std::size_t header = artifact_header_bytes(a.model.spec);
  // magic, version, kind, precision, in_dim, out_dim, layer count, widths | weight count
  auto structural = [](std::size_t off) { return off < 34 || off >= 94; };
  for (std::size_t off = 0; off < header; ++off) {
    auto bad = ab;
    bad[off] ^= 0x5A;
    bool rejected = false;
    try {
      decode_artifact(bad);
    } catch (const FormatError&) {
      rejected = true;
    }
    if (structural(off)) {
      ++tried;
      if (!rejected) ++accepted;
    } else {
      ++value_tried;
      if (rejected) ++value_detected;
    }
  }
  Outcome o;
  o.pass = vol_bad == 0 && art_bad == 0 && accepted == 0;
  o.detail = "volume mismatches " + std::to_string(vol_bad) + "/1000, artifact mismatches " + std::to_string(art_bad) +
             "/1000, corrupted structural header bytes accepted " + std::to_string(accepted) + "/" +
             std::to_string(tried) + " (INRC value-field flips detected " + std::to_string(value_detected) + "/" +
             std::to_string(value_tried) + ")";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 10. The CLI pipeline is reproducible byte for byte.
Outcome determinism() {
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::create_directories(dir);
  const std::string src = (dir / "c10_src.inrv").string();
  const std::string model = (dir / "c10_model.inrc").string();
  const std::string dec = (dir / "c10_dec.inrv").string();
  const std::string up = (dir / "c10_up.inrv").string();
  const std::vector<std::vector<std::string>> steps{
      {"synth", "--seed", "77", "--dims", "48x64x8", "--tracks", "6", "--occupancy", "0.02", "-o", src},
      {"compress", src, "--seed", "77", "--width", "32", "--depth", "2", "--epochs", "20", "--sampler", "importance",
       "--rho", "0.5", "--batch-size", "1024", "-o", model},
      {"decompress", model, "-o", dec},
      {"decompress", model, "--dims", "96x127x8", "-o", up},
      {"eval", dec, src},
      {"eval", model, src}};
  auto run_pipeline = [&](std::vector<std::string>& files) {
    std::string printed;
    for (const auto& args : steps) {
      std::ostringstream out;
      std::ostringstream err;
      const int code = run_cli(args, out, err);
      printed += args.front() + " exit " + std::to_string(code) + "\n" + out.str();
    }
    for (const auto& p : {src, model, dec, up}) files.push_back(slurp(p));
    return printed;
  };
  std::vector<std::string> first;
  std::vector<std::string> second;
  const std::string out1 = run_pipeline(first);
  const std::string out2 = run_pipeline(second);
  const bool all_ok = out1.find("exit 1") == std::string::npos && out1.find("exit 2") == std::string::npos &&
                      out1.find("exit 3") == std::string::npos;
  Outcome o;
  o.pass = all_ok && first == second && out1 == out2;
  std::size_t total = 0;
  for (const auto& f : first) total += f.size();
  o.detail = std::string(all_ok ? "pipeline ok" : "pipeline step failed") + ", files " +
             (first == second ? "identical" : "differ") + " (" + std::to_string(total) + " B), printouts " +
             (out1 == out2 ? "identical" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      for (auto n : parse_u32_list(argv[++i])) only.insert(static_cast<int>(n));
    } else {
      std::cerr << "usage: acceptance [--only N[,M...]]\n";
      return 1;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"importance sampler law", sampler_law},
      {"entropy allocation exactness", entropy_allocation},
      {"fit capability", fit_capability},
      {"sampling-efficiency ordering", sampling_efficiency},
      {"linear time scaling", time_scaling},
      {"super-resolution degradation ordering", super_resolution},
      {"compression accounting", compression_accounting},
      {"format round trips", round_trips},
      {"CLI determinism", determinism}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
