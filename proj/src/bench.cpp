#include "sparseinr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "sparseinr/error.hpp"

namespace sparseinr {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("bench CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_uint(const std::string& s, std::size_t line) {
  T v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("bench CSV line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception wins.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<BenchRecord> run_cells(const std::vector<SweepCell>& cells, const SweepSpec& spec,
                                   const ProgressFn& progress) {
  spec.validate();
  std::vector<Volume3D> volumes;
  for (const auto& src : spec.volumes) volumes.push_back(materialize(src));
  std::vector<BenchRecord> out(cells.size());
  std::mutex progress_mutex;
  parallel_for(cells.size(), spec.jobs, [&](std::size_t i) {
    out[i] = run_cell(cells[i], spec, volumes[cells[i].volume]);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(out[i]);
    }
  });
  return out;
}

struct Medians {
  std::map<std::string, std::vector<double>> by_key;
  void add(const std::string& key, double v) { by_key[key].push_back(v); }
  double get(const std::string& key) const { return median(by_key.at(key)); }
  bool has(const std::string& key) const { return by_key.count(key) != 0; }
};

OrderingCheck make_check(std::string name) {
  OrderingCheck c;
  c.name = std::move(name);
  return c;
}

std::string row_label(const BenchRecord& r) {
  return r.suite + "/" + r.volume + "/" + to_string(r.kind) + "/w" + std::to_string(r.width) + "/" +
         to_string(r.method) + "/rho" + fmt(r.rho) + "/S" + std::to_string(r.scale);
}

}  // namespace

Volume3D materialize(const VolumeSource& src) {
  if (const auto* path = std::get_if<std::filesystem::path>(&src)) return load_volume(*path);
  return synth_tracks(std::get<SynthConfig>(src));
}

std::string label(const VolumeSource& src) {
  if (const auto* path = std::get_if<std::filesystem::path>(&src)) return path->filename().string();
  const auto& cfg = std::get<SynthConfig>(src);
  return "synth:" + to_string(cfg.dims) + ":t" + std::to_string(cfg.n_tracks) + ":o" + fmt(cfg.target_occupancy) +
         ":s" + std::to_string(cfg.seed);
}

Scale scale_for(std::uint32_t s) {
  switch (s) {
    case 1: return {1, {1, 1, 1}};
    case 4: return {4, {2, 2, 1}};
    case 8: return {8, {2, 2, 2}};
    case 16: return {16, {4, 4, 1}};
    default: throw ValidationError("unsupported scale S=" + std::to_string(s) + " (expected 1, 4, 8, 16)");
  }
}

void SweepSpec::validate() const {
  if (volumes.empty()) throw ValidationError("sweep: no volumes");
  if (kinds.empty()) throw ValidationError("sweep: no model kinds");
  if (widths.empty()) throw ValidationError("sweep: no widths");
  if (methods.empty()) throw ValidationError("sweep: no sampler methods");
  if (rhos.empty()) throw ValidationError("sweep: no sampling ratios");
  if (scales.empty()) throw ValidationError("sweep: no scales");
  if (seeds.empty()) throw ValidationError("sweep: no seeds");
  if (depth == 0) throw ValidationError("sweep: depth must be >= 1");
  if (epochs == 0) throw ValidationError("sweep: epochs must be >= 1");
  for (auto w : widths)
    if (w == 0) throw ValidationError("sweep: widths must be >= 1");
  for (double rho : rhos)
    if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("sweep: rho must lie in (0, 1]");
  for (auto s : scales) scale_for(s);
  for (const auto& src : volumes)
    if (const auto* cfg = std::get_if<SynthConfig>(&src)) cfg->validate();
  model.validate();
  train.validate();
}

std::string describe(const SweepCell& cell, const SweepSpec& spec) {
  std::ostringstream os;
  os << cell.suite << " volume=" << label(spec.volumes.at(cell.volume)) << " kind=" << to_string(cell.kind)
     << " width=" << cell.width << " depth=" << spec.depth << " sampler=" << to_string(cell.method)
     << " rho=" << fmt(cell.rho) << " S=" << cell.scale << " seed=" << cell.seed << " epochs=" << spec.epochs;
  return os.str();
}

std::vector<SweepCell> reconstruction_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < spec.volumes.size(); ++v)
    for (auto kind : spec.kinds)
      for (auto width : spec.widths)
        for (auto s : spec.scales)
          for (auto seed : spec.seeds) cells.push_back({"reconstruction", v, kind, width, SamplerMethod::Full, 1.0, s, seed});
  return cells;
}

std::vector<SweepCell> rate_distortion_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < spec.volumes.size(); ++v)
    for (auto kind : spec.kinds)
      for (auto width : spec.widths)
        for (auto seed : spec.seeds)
          cells.push_back({"rate", v, kind, width, spec.train.sampler.method, spec.train.sampler.rho, 1, seed});
  return cells;
}

std::vector<SweepCell> sampling_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < spec.volumes.size(); ++v)
    for (auto method : spec.methods)
      for (double rho : spec.rhos)
        for (auto seed : spec.seeds)
          cells.push_back({"sampling", v, ModelKind::Siren, spec.widths.front(), method, rho, 1, seed});
  return cells;
}

BenchRecord run_cell(const SweepCell& cell, const SweepSpec& spec, const Volume3D& volume) {
  ModelSpec ms = spec.model;
  ms.kind = cell.kind;
  ms.hidden_dims.assign(spec.depth, cell.width);
  ms.init_seed = cell.seed;
  ms.fourier.seed = cell.seed;

  TrainConfig tc = spec.train;
  tc.epochs = spec.epochs;
  tc.seed = cell.seed;
  tc.loss_eval_every = spec.epochs;
  tc.sampler.method = cell.method;
  tc.sampler.rho = cell.rho;

  const Scale scale = scale_for(cell.scale);
  const bool decimate = !(scale.factors == Factors{});
  const Volume3D train_volume = decimate ? downsample(volume, scale.factors) : Volume3D{};
  CompressOptions opts;
  opts.precision = spec.precision;
  opts.source_dims = volume.dims();
  opts.factors = scale.factors;
  const CompressResult cr = compress(decimate ? train_volume : volume, ms, tc, opts);

  BenchRecord rec;
  rec.suite = cell.suite;
  rec.volume = label(spec.volumes.at(cell.volume));
  rec.kind = cell.kind;
  rec.width = cell.width;
  rec.depth = spec.depth;
  rec.method = cell.method;
  rec.rho = cell.rho;
  rec.scale = cell.scale;
  rec.factors = scale.factors;
  rec.seed = cell.seed;
  rec.epochs = spec.epochs;

  rec.full_mse = evaluate_full(cr.artifact.model, volume);
  const ErrorReport err = error_map(decompress(cr.artifact, volume.dims()), volume);
  rec.raw_mse = err.raw_mse;
  rec.l1_mean = err.l1_mean;
  rec.psnr = err.psnr;
  rec.artifact_bytes = encode_artifact(cr.artifact).size();
  rec.compression_ratio = compression_ratio(volume.dims(), rec.artifact_bytes);
  rec.total_wall_ms = cr.log.total_wall_ms();
  rec.per_epoch_wall_ms = cr.log.mean_epoch_ms();
  rec.per_epoch_sample_ms = cr.log.mean_sample_ms();
  rec.setup_ms = cr.log.setup_ms;
  return rec;
}

std::vector<BenchRecord> run_reconstruction_suite(const SweepSpec& spec, const ProgressFn& progress) {
  return run_cells(reconstruction_cells(spec), spec, progress);
}

std::vector<BenchRecord> run_rate_distortion(const SweepSpec& spec, const ProgressFn& progress) {
  return run_cells(rate_distortion_cells(spec), spec, progress);
}

std::vector<BenchRecord> run_sampling_efficiency(const SweepSpec& spec, const ProgressFn& progress) {
  return run_cells(sampling_cells(spec), spec, progress);
}

std::string csv_header() {
  return "suite,volume,kind,width,depth,method,rho,scale,factor_c,factor_z,factor_r,seed,epochs,"
         "full_mse,raw_mse,l1_mean,psnr,artifact_bytes,compression_ratio,total_wall_ms,per_epoch_wall_ms,"
         "per_epoch_sample_ms,setup_ms";
}

std::string to_csv(const std::vector<BenchRecord>& records) {
  std::string out = csv_header() + "\n";
  for (const auto& r : records) {
    const std::vector<std::string> fields{
        csv_field(r.suite), csv_field(r.volume), to_string(r.kind), fmt_int(r.width), fmt_int(r.depth),
        to_string(r.method), fmt(r.rho), fmt_int(r.scale), fmt_int(r.factors.c), fmt_int(r.factors.z),
        fmt_int(r.factors.r), fmt_int(r.seed), fmt_int(r.epochs), fmt(r.full_mse), fmt(r.raw_mse),
        fmt(r.l1_mean), fmt(r.psnr), fmt_int(r.artifact_bytes), fmt(r.compression_ratio), fmt(r.total_wall_ms),
        fmt(r.per_epoch_wall_ms), fmt(r.per_epoch_sample_ms), fmt(r.setup_ms)};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<BenchRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw FormatError("bench CSV: missing or unexpected header");
  const std::size_t n_cols = split_csv_line(csv_header()).size();
  std::vector<BenchRecord> out;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != n_cols) {
      throw FormatError("bench CSV line " + std::to_string(lineno) + ": expected " + std::to_string(n_cols) +
                        " fields, got " + std::to_string(f.size()));
    }
    BenchRecord r;
    std::size_t i = 0;
    r.suite = f[i++];
    r.volume = f[i++];
    r.kind = parse_model_kind(f[i++]);
    r.width = parse_uint<std::uint32_t>(f[i++], lineno);
    r.depth = parse_uint<std::uint32_t>(f[i++], lineno);
    r.method = parse_sampler_method(f[i++]);
    r.rho = parse_double(f[i++], lineno);
    r.scale = parse_uint<std::uint32_t>(f[i++], lineno);
    r.factors.c = parse_uint<std::uint32_t>(f[i++], lineno);
    r.factors.z = parse_uint<std::uint32_t>(f[i++], lineno);
    r.factors.r = parse_uint<std::uint32_t>(f[i++], lineno);
    r.seed = parse_uint<std::uint64_t>(f[i++], lineno);
    r.epochs = parse_uint<std::uint32_t>(f[i++], lineno);
    r.full_mse = parse_double(f[i++], lineno);
    r.raw_mse = parse_double(f[i++], lineno);
    r.l1_mean = parse_double(f[i++], lineno);
    r.psnr = parse_double(f[i++], lineno);
    r.artifact_bytes = parse_uint<std::uint64_t>(f[i++], lineno);
    r.compression_ratio = parse_double(f[i++], lineno);
    r.total_wall_ms = parse_double(f[i++], lineno);
    r.per_epoch_wall_ms = parse_double(f[i++], lineno);
    r.per_epoch_sample_ms = parse_double(f[i++], lineno);
    r.setup_ms = parse_double(f[i++], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("linear_r2: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("linear_r2: x is constant");
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

std::vector<OrderingCheck> check_orderings(const std::vector<BenchRecord>& records) {
  std::vector<OrderingCheck> checks;

  // Reconstruction: quality falls with S; S=8 (decimating r) is worse than S=16.
  {
    std::map<std::string, std::map<std::uint32_t, std::vector<double>>> groups;
    for (const auto& r : records)
      if (r.suite == "reconstruction")
        groups[r.volume + "/" + to_string(r.kind) + "/w" + std::to_string(r.width)][r.scale].push_back(r.full_mse);
    OrderingCheck mono = make_check("reconstruction: median MSE non-decreasing over S=1,4,16");
    OrderingCheck layer = make_check("reconstruction: median MSE at S=8 exceeds S=16");
    for (const auto& [key, by_s] : groups) {
      std::vector<std::uint32_t> chain;
      for (std::uint32_t s : {1U, 4U, 16U})
        if (by_s.count(s)) chain.push_back(s);
      if (chain.size() >= 2) {
        mono.applicable = true;
        for (std::size_t i = 1; i < chain.size(); ++i) {
          const double a = median(by_s.at(chain[i - 1]));
          const double b = median(by_s.at(chain[i]));
          if (!(a <= b)) {
            mono.pass = false;
            mono.detail += key + ": S=" + std::to_string(chain[i - 1]) + " " + fmt(a) + " > S=" +
                           std::to_string(chain[i]) + " " + fmt(b) + "; ";
          }
        }
      }
      if (by_s.count(8) && by_s.count(16)) {
        layer.applicable = true;
        const double m8 = median(by_s.at(8));
        const double m16 = median(by_s.at(16));
        if (!(m8 > m16)) {
          layer.pass = false;
          layer.detail += key + ": S=8 " + fmt(m8) + " <= S=16 " + fmt(m16) + "; ";
        }
      }
    }
    checks.push_back(mono);
    checks.push_back(layer);
  }

  // Rate-distortion: ratio rises as width falls; MSE does not rise with bytes;
  // SIREN at least as good as MLP at matched width.
  {
    std::map<std::string, std::map<std::uint32_t, std::vector<const BenchRecord*>>> groups;
    for (const auto& r : records)
      if (r.suite == "rate") groups[r.volume + "/" + to_string(r.kind)][r.width].push_back(&r);
    OrderingCheck ratio = make_check("rate: compression ratio strictly increases as width decreases");
    OrderingCheck rd = make_check("rate: median MSE non-increasing in model bytes");
    for (const auto& [key, by_w] : groups) {
      if (by_w.size() < 2) continue;
      ratio.applicable = rd.applicable = true;
      const BenchRecord* prev = nullptr;
      double prev_mse = 0.0;
      for (const auto& [w, rows] : by_w) {  // ascending width
        std::vector<double> mses;
        for (const auto* r : rows) mses.push_back(r->full_mse);
        const double m = median(mses);
        if (prev) {
          if (!(rows.front()->compression_ratio < prev->compression_ratio)) {
            ratio.pass = false;
            ratio.detail += key + ": w" + std::to_string(w) + " ratio " + fmt(rows.front()->compression_ratio) +
                            " >= w" + std::to_string(prev->width) + " ratio " + fmt(prev->compression_ratio) + "; ";
          }
          if (!(m <= prev_mse)) {
            rd.pass = false;
            rd.detail += key + ": w" + std::to_string(w) + " MSE " + fmt(m) + " > w" + std::to_string(prev->width) +
                         " MSE " + fmt(prev_mse) + "; ";
          }
        }
        prev = rows.front();
        prev_mse = m;
      }
    }
    checks.push_back(ratio);
    checks.push_back(rd);

    Medians med;
    std::set<std::string> matched;
    for (const auto& r : records) {
      if (r.suite != "rate" || (r.kind != ModelKind::Siren && r.kind != ModelKind::Mlp)) continue;
      const std::string base = r.volume + "/w" + std::to_string(r.width);
      med.add(base + "/" + to_string(r.kind), r.full_mse);
      matched.insert(base);
    }
    OrderingCheck siren = make_check("rate: SIREN median MSE <= MLP median MSE at matched width");
    for (const auto& base : matched) {
      if (!med.has(base + "/siren") || !med.has(base + "/mlp")) continue;
      siren.applicable = true;
      const double s = med.get(base + "/siren");
      const double m = med.get(base + "/mlp");
      if (!(s <= m)) {
        siren.pass = false;
        siren.detail += base + ": siren " + fmt(s) + " > mlp " + fmt(m) + "; ";
      }
    }
    checks.push_back(siren);
  }

  // Sampling: IMPORTANCE beats RANDOM per rho; time linear in rho; ENTROPY's
  // per-epoch sampling overhead exceeds IMPORTANCE's at the smallest rho.
  {
    Medians mse;
    Medians sample_ms;
    std::map<std::string, std::map<std::string, std::map<double, std::vector<double>>>> epoch_ms;
    std::map<std::string, std::set<double>> rhos;
    for (const auto& r : records) {
      if (r.suite != "sampling") continue;
      const std::string key = r.volume + "/" + to_string(r.method) + "/" + fmt(r.rho);
      mse.add(key, r.full_mse);
      sample_ms.add(key, r.per_epoch_sample_ms);
      epoch_ms[r.volume][to_string(r.method)][r.rho].push_back(r.per_epoch_wall_ms);
      rhos[r.volume].insert(r.rho);
    }
    OrderingCheck is_vs_rs = make_check("sampling: IMPORTANCE median MSE <= RANDOM at every rho");
    OrderingCheck overhead = make_check("sampling: ENTROPY per-epoch sampling time exceeds IMPORTANCE at smallest rho");
    for (const auto& [vol, set] : rhos) {
      for (double rho : set) {
        const std::string i = vol + "/importance/" + fmt(rho);
        const std::string rs = vol + "/random/" + fmt(rho);
        if (mse.has(i) && mse.has(rs)) {
          is_vs_rs.applicable = true;
          if (!(mse.get(i) <= mse.get(rs))) {
            is_vs_rs.pass = false;
            is_vs_rs.detail += vol + " rho=" + fmt(rho) + ": importance " + fmt(mse.get(i)) + " > random " +
                               fmt(mse.get(rs)) + "; ";
          }
        }
      }
      const double lo = *set.begin();
      const std::string e = vol + "/entropy/" + fmt(lo);
      const std::string i = vol + "/importance/" + fmt(lo);
      if (sample_ms.has(e) && sample_ms.has(i)) {
        overhead.applicable = true;
        overhead.detail += vol + " rho=" + fmt(lo) + ": entropy " + fmt(sample_ms.get(e)) + " ms vs importance " +
                           fmt(sample_ms.get(i)) + " ms; ";
        if (!(sample_ms.get(e) > sample_ms.get(i))) overhead.pass = false;
      }
    }
    checks.push_back(is_vs_rs);
    for (const char* method : {"importance", "random"}) {
      OrderingCheck lin = make_check(std::string("sampling: per-epoch time linear in rho for ") + method + " (R^2 > 0.95)");
      for (const auto& [vol, by_method] : epoch_ms) {
        const auto it = by_method.find(method);
        if (it == by_method.end() || it->second.size() < 3) continue;
        lin.applicable = true;
        std::vector<double> x;
        std::vector<double> y;
        for (const auto& [rho, ms] : it->second) {
          x.push_back(rho);
          y.push_back(median(ms));
        }
        const double r2 = linear_r2(x, y);
        lin.detail += vol + ": R^2 " + fmt(r2) + "; ";
        if (!(r2 > 0.95)) lin.pass = false;
      }
      checks.push_back(lin);
    }
    checks.push_back(overhead);
  }
  return checks;
}

std::string summary_markdown(const std::vector<BenchRecord>& records) {
  std::ostringstream os;
  os << "# Benchmark summary\n\n" << records.size() << " records.\n\n";
  os << "## Medians over seeds\n\n";
  os << "| suite | volume | kind | width | method | rho | S | seeds | full_mse | raw_mse | l1_mean | ratio | epoch_ms | "
        "sample_ms |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  std::map<std::string, std::vector<const BenchRecord*>> groups;
  std::vector<std::string> order;
  for (const auto& r : records) {
    const std::string key = row_label(r) + "/" + r.volume;
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& rows = groups[key];
    auto med = [&](double BenchRecord::*field) {
      std::vector<double> v;
      for (const auto* r : rows) v.push_back(r->*field);
      return median(v);
    };
    const BenchRecord& r = *rows.front();
    os << "| " << r.suite << " | " << r.volume << " | " << to_string(r.kind) << " | " << r.width << " | "
       << to_string(r.method) << " | " << fmt(r.rho) << " | " << r.scale << " | " << rows.size() << " | "
       << fmt(med(&BenchRecord::full_mse)) << " | " << fmt(med(&BenchRecord::raw_mse)) << " | "
       << fmt(med(&BenchRecord::l1_mean)) << " | " << fmt(med(&BenchRecord::compression_ratio)) << " | "
       << fmt(med(&BenchRecord::per_epoch_wall_ms)) << " | " << fmt(med(&BenchRecord::per_epoch_sample_ms))
       << " |\n";
  }
  os << "\n## Orderings\n\n";
  for (const auto& c : check_orderings(records)) {
    if (!c.applicable) continue;
    os << "- " << (c.pass ? "PASS" : "FAIL") << ": " << c.name;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

std::filesystem::path emit_report(const std::vector<BenchRecord>& records, const std::filesystem::path& csv_path) {
  if (records.empty()) throw ValidationError("emit_report: no records");
  auto write_text = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failure on '" + p.string() + "'");
  };
  write_text(csv_path, to_csv(records));
  std::filesystem::path summary = csv_path;
  summary.replace_extension(".md");
  write_text(summary, summary_markdown(records));
  return summary;
}

}  // namespace sparseinr
