#include "sparseinr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "sparseinr/bench.hpp"
#include "sparseinr/codec.hpp"
#include "sparseinr/config.hpp"
#include "sparseinr/detail/binary_io.hpp"
#include "sparseinr/error.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Factors parse_factors(const std::string& text) {
  const Dims d = parse_dims(text);
  return {d.c, d.z, d.r};
}

// Flags shared by several subcommands. Unset optionals leave config values alone.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> dims;
  std::optional<std::uint32_t> tracks;
  std::optional<double> occupancy;
  std::optional<std::uint16_t> intensity_min;
  std::optional<std::uint16_t> intensity_max;

  std::optional<std::string> model;
  std::optional<std::uint32_t> width;
  std::optional<std::uint32_t> depth;
  std::optional<std::string> hidden;
  std::optional<double> omega0;
  std::optional<std::uint32_t> ff_features;
  std::optional<double> ff_sigma;
  std::optional<double> wire_omega0;
  std::optional<double> wire_s0;
  std::optional<std::uint64_t> init_seed;

  std::optional<std::string> sampler;
  std::optional<double> rho;
  std::optional<double> epsilon;
  std::optional<std::uint32_t> bins;
  std::optional<std::uint32_t> epochs;
  std::optional<std::uint32_t> steps_per_epoch;
  std::optional<std::uint32_t> batch_size;
  std::optional<double> lr;
  std::optional<std::uint32_t> loss_eval_every;
  std::optional<std::uint64_t> train_seed;
  bool shuffle = false;

  std::optional<std::string> precision;
  std::optional<std::string> downsample;
  std::optional<std::string> log;
  bool resuppress = false;

  std::string input;
  std::string reference;
  std::string output;
  std::optional<std::string> error_map;

  std::string suite;
  bool dry_run = false;
  std::optional<unsigned> jobs;
  std::optional<std::string> seeds;
  std::optional<std::string> rhos;
  std::optional<std::string> widths;
  std::optional<std::string> kinds;
  std::optional<std::string> methods;
  std::optional<std::string> scales;
  std::optional<std::string> volumes;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "INI config file; flags override its values");
  cmd->add_option("--seed", f.seed, "Master seed (random and printed when omitted)");
}

void add_model(CLI::App* cmd, Flags& f) {
  cmd->add_option("--model", f.model, "mlp, ffnet, siren or wire");
  cmd->add_option("--width", f.width, "Hidden width");
  cmd->add_option("--depth", f.depth, "Number of hidden layers");
  cmd->add_option("--hidden", f.hidden, "Comma-separated hidden widths (overrides --width/--depth)");
  cmd->add_option("--omega0", f.omega0, "SIREN omega0");
  cmd->add_option("--ff-features", f.ff_features, "FFNet Fourier feature count");
  cmd->add_option("--ff-sigma", f.ff_sigma, "FFNet frequency scale");
  cmd->add_option("--wire-omega0", f.wire_omega0, "WIRE frequency");
  cmd->add_option("--wire-s0", f.wire_s0, "WIRE envelope scale");
  cmd->add_option("--init-seed", f.init_seed, "Weight initialization seed");
}

void add_train(CLI::App* cmd, Flags& f) {
  cmd->add_option("--sampler", f.sampler, "full, importance, entropy or random");
  cmd->add_option("--rho", f.rho, "Sampling ratio in (0, 1]");
  cmd->add_option("--epsilon", f.epsilon, "Importance weight of zero cells");
  cmd->add_option("--bins", f.bins, "Entropy histogram bins");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--steps-per-epoch", f.steps_per_epoch, "Fixed optimizer steps per epoch (0: from rho)");
  cmd->add_option("--batch-size", f.batch_size, "Points per optimizer step");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--loss-eval-every", f.loss_eval_every, "Full-volume MSE every N epochs");
  cmd->add_option("--train-seed", f.train_seed, "Sampling seed");
  cmd->add_flag("--shuffle", f.shuffle, "FULL sampler: new visiting order every epoch");
}

CliConfig resolve(const Flags& f) {
  CliConfig cfg;
  if (f.config) cfg = load_config(*f.config);
  if (f.seed) cfg.master_seed = f.seed;

  if (f.dims) cfg.synth.dims = parse_dims(*f.dims);
  if (f.tracks) cfg.synth.n_tracks = *f.tracks;
  if (f.occupancy) cfg.synth.target_occupancy = *f.occupancy;
  if (f.intensity_min) cfg.synth.intensity_range.first = *f.intensity_min;
  if (f.intensity_max) cfg.synth.intensity_range.second = *f.intensity_max;

  if (f.model) cfg.model.kind = parse_model_kind(*f.model);
  if (f.depth) {
    const std::uint32_t w = cfg.model.hidden_dims.empty() ? 128 : cfg.model.hidden_dims.front();
    cfg.model.hidden_dims.assign(*f.depth, w);
  }
  if (f.width)
    for (auto& h : cfg.model.hidden_dims) h = *f.width;
  if (f.hidden) cfg.model.hidden_dims = parse_u32_list(*f.hidden);
  if (f.omega0) cfg.model.siren_omega0 = *f.omega0;
  if (f.ff_features) cfg.model.fourier.n_features = *f.ff_features;
  if (f.ff_sigma) cfg.model.fourier.sigma = *f.ff_sigma;
  if (f.wire_omega0) cfg.model.wire.omega0 = *f.wire_omega0;
  if (f.wire_s0) cfg.model.wire.s0 = *f.wire_s0;
  if (f.init_seed) cfg.init_seed = f.init_seed;

  if (f.sampler) cfg.train.sampler.method = parse_sampler_method(*f.sampler);
  if (f.rho) cfg.train.sampler.rho = *f.rho;
  if (f.epsilon) cfg.train.sampler.epsilon = f.epsilon;
  if (f.bins) cfg.train.sampler.bins = *f.bins;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.steps_per_epoch) cfg.train.steps_per_epoch = *f.steps_per_epoch;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.lr) cfg.train.adam.lr = *f.lr;
  if (f.loss_eval_every) cfg.train.loss_eval_every = *f.loss_eval_every;
  if (f.train_seed) cfg.train_seed = f.train_seed;
  if (f.shuffle) cfg.train.shuffle = true;

  if (f.precision) cfg.codec.precision = parse_precision(*f.precision);
  if (f.resuppress) cfg.codec.resuppress = true;

  if (f.epochs) cfg.sweep.epochs = *f.epochs;
  if (f.jobs) cfg.sweep.jobs = *f.jobs;
  if (f.seeds) cfg.sweep.seeds = parse_u64_list(*f.seeds);
  if (f.rhos) cfg.sweep.rhos = parse_double_list(*f.rhos);
  if (f.widths) cfg.sweep.widths = parse_u32_list(*f.widths);
  if (f.depth) cfg.sweep.depth = *f.depth;
  if (f.kinds) {
    cfg.sweep.kinds.clear();
    for (const auto& k : split_list(*f.kinds)) cfg.sweep.kinds.push_back(parse_model_kind(k));
  }
  if (f.methods) {
    cfg.sweep.methods.clear();
    for (const auto& m : split_list(*f.methods)) cfg.sweep.methods.push_back(parse_sampler_method(m));
  }
  if (f.scales) cfg.sweep.scales = parse_u32_list(*f.scales);
  if (f.volumes) {
    cfg.sweep.volumes.clear();
    for (const auto& v : split_list(*f.volumes)) {
      if (v == "synth") {
        cfg.sweep.volumes.emplace_back(cfg.synth);
      } else {
        cfg.sweep.volumes.emplace_back(fs::path(v));
      }
    }
  }

  if (!cfg.master_seed) cfg.master_seed = std::random_device{}() * 0x100000000ULL + std::random_device{}();
  const std::uint64_t master = *cfg.master_seed;
  cfg.synth.seed = cfg.synth_seed.value_or(derive_seed(master, "synth"));
  cfg.model.init_seed = cfg.init_seed.value_or(derive_seed(master, "init"));
  cfg.model.fourier.seed = cfg.fourier_seed.value_or(derive_seed(master, "fourier"));
  cfg.train.seed = cfg.train_seed.value_or(derive_seed(master, "train"));
  cfg.sweep.model = cfg.model;
  cfg.sweep.train = cfg.train;
  cfg.sweep.precision = cfg.codec.precision;
  cfg.validate();
  return cfg;
}

bool has_magic(const fs::path& path, std::string_view magic) {
  const auto bytes = detail::read_file(path);
  return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
}

void print_volume_stats(std::ostream& out, const Volume3D& v) {
  std::uint16_t lo = 0;
  std::uint16_t hi = 0;
  bool any = false;
  for (auto x : v.values()) {
    if (x == 0) continue;
    lo = any ? std::min(lo, x) : x;
    hi = std::max(hi, x);
    any = true;
  }
  out << "dims=" << to_string(v.dims()) << "\n"
      << "cells=" << v.size() << "\n"
      << "nonzero=" << count_nonzero(v) << "\n"
      << "occupancy=" << num(occupancy(v)) << "\n"
      << "min_nonzero=" << lo << "\n"
      << "max=" << hi << "\n"
      << "zero_suppressed=" << (v.is_zero_suppressed() ? "yes" : "no") << "\n"
      << "raw_bytes=" << raw_bytes(v.dims()) << "\n";
}

int cmd_synth(const Flags& f, std::ostream& out, std::ostream&) {
  const CliConfig cfg = resolve(f);
  out << "master_seed=" << *cfg.master_seed << "\n";
  const Volume3D v = synth_tracks(cfg.synth);
  save_volume(v, f.output);
  out << "wrote=" << f.output << "\n";
  print_volume_stats(out, v);
  return kExitOk;
}

int cmd_info(const Flags& f, std::ostream& out, std::ostream&) {
  if (has_magic(f.input, "INRC")) {
    const CompressedArtifact a = load_artifact(f.input);
    const ModelSpec& s = a.model.spec;
    out << "format=INRC\n"
        << "version=" << a.format_version << "\n"
        << "kind=" << to_string(s.kind) << "\n"
        << "hidden=";
    for (std::size_t i = 0; i < s.hidden_dims.size(); ++i) out << (i ? "," : "") << s.hidden_dims[i];
    out << "\n"
        << "precision=" << to_string(a.precision) << "\n"
        << "params=" << s.param_count() << "\n"
        << "source_dims=" << to_string(a.source_dims) << "\n"
        << "factors=" << a.factors.c << "x" << a.factors.z << "x" << a.factors.r << "\n"
        << "artifact_bytes=" << fs::file_size(f.input) << "\n"
        << "compression_ratio=" << num(compression_ratio(a.source_dims, fs::file_size(f.input))) << "\n";
    return kExitOk;
  }
  const Volume3D v = load_volume(f.input);
  out << "format=INRV\n";
  print_volume_stats(out, v);
  return kExitOk;
}

int cmd_compress(const Flags& f, std::ostream& out, std::ostream& err) {
  const CliConfig cfg = resolve(f);
  out << "master_seed=" << *cfg.master_seed << "\n";
  const Volume3D source = load_volume(f.input);
  CompressOptions opts;
  opts.precision = cfg.codec.precision;
  opts.source_dims = source.dims();
  Volume3D train_volume;
  if (f.downsample) {
    opts.factors = parse_factors(*f.downsample);
    train_volume = downsample(source, opts.factors);
  }
  const Volume3D& fit = f.downsample ? train_volume : source;
  const CompressResult cr = compress(fit, cfg.model, cfg.train, opts, [&](const EpochRecord& e) {
    if (f.verbose || e.full_mse) {
      err << "epoch " << e.epoch << " train_loss " << num(e.train_loss);
      if (e.full_mse) err << " full_mse " << num(*e.full_mse);
      err << " wall_ms " << num(e.wall_ms) << "\n";
    }
  });
  save_artifact(cr.artifact, f.output);
  const fs::path log_path = f.log ? fs::path(*f.log) : fs::path(f.output).replace_extension(".csv");
  cr.log.write_csv(log_path);

  const auto bytes = fs::file_size(f.output);
  out << "wrote=" << f.output << "\n"
      << "log=" << log_path.string() << "\n"
      << "kind=" << to_string(cr.artifact.model.spec.kind) << "\n"
      << "params=" << cr.artifact.model.spec.param_count() << "\n"
      << "precision=" << to_string(cr.artifact.precision) << "\n"
      << "train_dims=" << to_string(fit.dims()) << "\n"
      << "final_full_mse=" << num(cr.log.final_full_mse().value_or(0.0)) << "\n"
      << "artifact_bytes=" << bytes << "\n"
      << "compression_ratio=" << num(compression_ratio(cr.artifact.source_dims, bytes)) << "\n";
  err << "train_wall_ms " << num(cr.log.total_wall_ms()) << "\n";
  return kExitOk;
}

int cmd_decompress(const Flags& f, std::ostream& out, std::ostream&) {
  const CliConfig cfg = resolve(f);
  const CompressedArtifact a = load_artifact(f.input);
  const Dims target = f.dims ? parse_dims(*f.dims) : a.source_dims;
  DecodeOptions opts;
  opts.resuppress = cfg.codec.resuppress;
  const Volume3D v = decompress(a, target, opts);
  save_volume(v, f.output);
  out << "wrote=" << f.output << "\n";
  print_volume_stats(out, v);
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream&) {
  const Volume3D reference = load_volume(f.reference);
  Volume3D decoded;
  if (has_magic(f.input, "INRC")) {
    DecodeOptions opts;
    opts.resuppress = f.resuppress;
    decoded = decompress(load_artifact(f.input), reference.dims(), opts);
  } else {
    decoded = load_volume(f.input);
  }
  const ErrorReport r = error_map(decoded, reference);
  out << "dims=" << to_string(reference.dims()) << "\n"
      << "mse=" << num(r.mse) << "\n"
      << "raw_mse=" << num(r.raw_mse) << "\n"
      << "l1_mean=" << num(r.l1_mean) << "\n"
      << "max_abs=" << num(r.max_abs) << "\n"
      << "psnr=" << num(r.psnr) << "\n";
  if (f.error_map) {
    save_volume(r.abs_error, *f.error_map);
    out << "error_map=" << *f.error_map << "\n";
  }
  return kExitOk;
}

int cmd_bench(const Flags& f, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> suites{"reconstruction", "rate", "sampling", "all"};
  if (std::find(suites.begin(), suites.end(), f.suite) == suites.end()) {
    throw ValidationError("unknown suite '" + f.suite + "' (valid: reconstruction, rate, sampling, all)");
  }
  const CliConfig cfg = resolve(f);
  out << "master_seed=" << *cfg.master_seed << "\n";
  const SweepSpec& spec = cfg.sweep;

  std::vector<SweepCell> cells;
  auto want = [&](const std::string& s) { return f.suite == s || f.suite == "all"; };
  if (want("reconstruction")) {
    auto c = reconstruction_cells(spec);
    cells.insert(cells.end(), c.begin(), c.end());
  }
  if (want("rate")) {
    auto c = rate_distortion_cells(spec);
    cells.insert(cells.end(), c.begin(), c.end());
  }
  if (want("sampling")) {
    auto c = sampling_cells(spec);
    cells.insert(cells.end(), c.begin(), c.end());
  }
  if (f.dry_run) {
    out << "cells=" << cells.size() << "\n";
    for (const auto& c : cells) out << describe(c, spec) << "\n";
    return kExitOk;
  }

  std::vector<BenchRecord> records;
  auto progress = [&](const BenchRecord& r) {
    err << r.suite << " " << to_string(r.kind) << " w" << r.width << " " << to_string(r.method) << " rho " << num(r.rho)
        << " S" << r.scale << " seed " << r.seed << ": full_mse " << num(r.full_mse) << " epoch_ms "
        << num(r.per_epoch_wall_ms) << "\n";
  };
  if (want("reconstruction")) {
    auto r = run_reconstruction_suite(spec, progress);
    records.insert(records.end(), r.begin(), r.end());
  }
  if (want("rate")) {
    auto r = run_rate_distortion(spec, progress);
    records.insert(records.end(), r.begin(), r.end());
  }
  if (want("sampling")) {
    auto r = run_sampling_efficiency(spec, progress);
    records.insert(records.end(), r.begin(), r.end());
  }
  const fs::path csv = f.output.empty() ? fs::path("bench_" + f.suite + ".csv") : fs::path(f.output);
  const fs::path summary = emit_report(records, csv);
  out << "csv=" << csv.string() << "\n" << "summary=" << summary.string() << "\n";
  for (const auto& c : check_orderings(records)) {
    if (c.applicable) out << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse detector volume compression with implicit neural representations", "sparseinr"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic sparse-track volume (INRV)");
  add_common(synth, f);
  synth->add_option("--dims", f.dims, "Grid as CxZxR");
  synth->add_option("--tracks", f.tracks, "Number of tracks");
  synth->add_option("--occupancy", f.occupancy, "Target fraction of nonzero cells");
  synth->add_option("--intensity-min", f.intensity_min, "Smallest stored ADC value");
  synth->add_option("--intensity-max", f.intensity_max, "Largest ADC value");
  synth->add_option("-o,--output", f.output, "Output INRV path")->required();

  auto* info = app.add_subcommand("info", "Describe an INRV volume or INRC artifact");
  info->add_option("input", f.input, "File to inspect")->required()->check(CLI::ExistingFile);

  auto* compress_cmd = app.add_subcommand("compress", "Fit a network to a volume and write an INRC artifact");
  add_common(compress_cmd, f);
  add_model(compress_cmd, f);
  add_train(compress_cmd, f);
  compress_cmd->add_option("input", f.input, "Source INRV volume")->required()->check(CLI::ExistingFile);
  compress_cmd->add_option("--precision", f.precision, "Stored weight precision: fp32 or fp16");
  compress_cmd->add_option("--downsample", f.downsample, "Train on the volume decimated by CxZxR factors");
  compress_cmd->add_option("--log", f.log, "Training log CSV (default: output with .csv extension)");
  compress_cmd->add_flag("-v,--verbose", f.verbose, "Report every epoch");
  compress_cmd->add_option("-o,--output", f.output, "Output INRC path")->required();

  auto* decompress_cmd = app.add_subcommand("decompress", "Decode an INRC artifact to an INRV volume");
  add_common(decompress_cmd, f);
  decompress_cmd->add_option("input", f.input, "INRC artifact")->required()->check(CLI::ExistingFile);
  decompress_cmd->add_option("--dims", f.dims, "Target grid CxZxR (default: source dims)");
  decompress_cmd->add_flag("--resuppress", f.resuppress, "Zero decoded values below 64");
  decompress_cmd->add_option("-o,--output", f.output, "Output INRV path")->required();

  auto* eval = app.add_subcommand("eval", "Compare a decoded volume (or artifact) with a reference");
  eval->add_option("decoded", f.input, "INRV volume or INRC artifact")->required()->check(CLI::ExistingFile);
  eval->add_option("reference", f.reference, "Reference INRV volume")->required()->check(CLI::ExistingFile);
  eval->add_option("--error-map", f.error_map, "Write |decoded - reference| as INRV");
  eval->add_flag("--resuppress", f.resuppress, "When decoding an artifact, zero values below 64");

  auto* bench = app.add_subcommand("bench", "Run an experiment sweep and write CSV plus summary");
  add_common(bench, f);
  bench->add_option("--suite", f.suite, "reconstruction, rate, sampling or all")->required();
  bench->add_option("-o,--output", f.output, "CSV path (default: bench_<suite>.csv)");
  bench->add_flag("--dry-run", f.dry_run, "Print the sweep grid without running it");
  bench->add_option("--jobs", f.jobs, "Sweep cells run in parallel");
  bench->add_option("--epochs", f.epochs, "Epoch budget per cell");
  bench->add_option("--seeds", f.seeds, "Comma-separated seeds");
  bench->add_option("--rhos", f.rhos, "Comma-separated sampling ratios");
  bench->add_option("--widths", f.widths, "Comma-separated hidden widths");
  bench->add_option("--depth", f.depth, "Hidden layers");
  bench->add_option("--kinds", f.kinds, "Comma-separated model kinds");
  bench->add_option("--methods", f.methods, "Comma-separated sampler methods");
  bench->add_option("--scales", f.scales, "Comma-separated super-resolution scales (1, 4, 8, 16)");
  bench->add_option("--volumes", f.volumes, "Comma-separated INRV paths, or 'synth' for the [synth] config");
  bench->add_option("--precision", f.precision, "Stored weight precision: fp32 or fp16");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(f, out, err);
    if (info->parsed()) return cmd_info(f, out, err);
    if (compress_cmd->parsed()) return cmd_compress(f, out, err);
    if (decompress_cmd->parsed()) return cmd_decompress(f, out, err);
    if (eval->parsed()) return cmd_eval(f, out, err);
    if (bench->parsed()) return cmd_bench(f, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sparseinr
