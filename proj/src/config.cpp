#include "sparseinr/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sparseinr/error.hpp"
#include "sparseinr/rng.hpp"

namespace sparseinr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(what + ": cannot parse '" + raw + "' as a number");
  }
  return v;
}

bool parse_bool(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError(what + ": expected a boolean, got '" + raw + "'");
}

using Setter = std::function<void(CliConfig&, const std::string&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto u32 = [](const std::string& v, const std::string& w) { return parse_number<std::uint32_t>(v, w); };
    auto u64 = [](const std::string& v, const std::string& w) { return parse_number<std::uint64_t>(v, w); };
    auto f64 = [](const std::string& v, const std::string& w) { return parse_number<double>(v, w); };

    t["run"]["seed"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.master_seed = u64(v, w); };

    auto& synth = t["synth"];
    synth["dims"] = [](CliConfig& c, const std::string& v, const std::string&) { c.synth.dims = parse_dims(trim(v)); };
    synth["tracks"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.synth.n_tracks = u32(v, w); };
    synth["occupancy"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.synth.target_occupancy = f64(v, w);
    };
    synth["intensity_min"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.synth.intensity_range.first = parse_number<std::uint16_t>(v, w);
    };
    synth["intensity_max"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.synth.intensity_range.second = parse_number<std::uint16_t>(v, w);
    };
    synth["seed"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.synth_seed = u64(v, w); };

    auto& model = t["model"];
    model["kind"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.model.kind = parse_model_kind(trim(v));
    };
    model["width"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      const std::uint32_t width = u32(v, w);
      for (auto& h : c.model.hidden_dims) h = width;
    };
    model["depth"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      const std::uint32_t width = c.model.hidden_dims.empty() ? 128 : c.model.hidden_dims.front();
      c.model.hidden_dims.assign(u32(v, w), width);
    };
    model["hidden"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.model.hidden_dims = parse_u32_list(v);
    };
    model["omega0"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.model.siren_omega0 = f64(v, w);
    };
    model["ff_features"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.model.fourier.n_features = u32(v, w);
    };
    model["ff_sigma"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.model.fourier.sigma = f64(v, w);
    };
    model["ff_seed"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.fourier_seed = u64(v, w);
    };
    model["wire_omega0"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.model.wire.omega0 = f64(v, w);
    };
    model["wire_s0"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.model.wire.s0 = f64(v, w); };
    model["init_seed"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.init_seed = u64(v, w); };

    auto& train = t["train"];
    train["epochs"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.epochs = u32(v, w); };
    train["steps_per_epoch"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.train.steps_per_epoch = u32(v, w);
    };
    train["batch_size"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.train.batch_size = u32(v, w);
    };
    train["lr"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.adam.lr = f64(v, w); };
    train["beta1"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.adam.beta1 = f64(v, w); };
    train["beta2"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.adam.beta2 = f64(v, w); };
    train["eps"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.adam.eps = f64(v, w); };
    train["sampler"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.train.sampler.method = parse_sampler_method(trim(v));
    };
    train["rho"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.sampler.rho = f64(v, w); };
    train["epsilon"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.train.sampler.epsilon = f64(v, w);
    };
    train["bins"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train.sampler.bins = u32(v, w); };
    train["hist_min"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      auto b = c.train.sampler.bounds.value_or(std::pair{0.0, 1.0});
      b.first = f64(v, w);
      c.train.sampler.bounds = b;
    };
    train["hist_max"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      auto b = c.train.sampler.bounds.value_or(std::pair{0.0, 1.0});
      b.second = f64(v, w);
      c.train.sampler.bounds = b;
    };
    train["seed"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.train_seed = u64(v, w); };
    train["loss_eval_every"] = [=](CliConfig& c, const std::string& v, const std::string& w) {
      c.train.loss_eval_every = u32(v, w);
    };
    train["shuffle"] = [](CliConfig& c, const std::string& v, const std::string& w) {
      c.train.shuffle = parse_bool(v, w);
    };

    auto& sweep = t["sweep"];
    sweep["volumes"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.sweep.volumes.clear();
      for (const auto& item : split_list(v)) {
        if (item == "synth") {
          c.sweep.volumes.emplace_back(c.synth);
        } else {
          c.sweep.volumes.emplace_back(std::filesystem::path(item));
        }
      }
    };
    sweep["kinds"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.sweep.kinds.clear();
      for (const auto& item : split_list(v)) c.sweep.kinds.push_back(parse_model_kind(item));
    };
    sweep["widths"] = [](CliConfig& c, const std::string& v, const std::string&) { c.sweep.widths = parse_u32_list(v); };
    sweep["depth"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.sweep.depth = u32(v, w); };
    sweep["methods"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.sweep.methods.clear();
      for (const auto& item : split_list(v)) c.sweep.methods.push_back(parse_sampler_method(item));
    };
    sweep["rhos"] = [](CliConfig& c, const std::string& v, const std::string&) { c.sweep.rhos = parse_double_list(v); };
    sweep["scales"] = [](CliConfig& c, const std::string& v, const std::string&) { c.sweep.scales = parse_u32_list(v); };
    sweep["seeds"] = [](CliConfig& c, const std::string& v, const std::string&) { c.sweep.seeds = parse_u64_list(v); };
    sweep["epochs"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.sweep.epochs = u32(v, w); };
    sweep["jobs"] = [=](CliConfig& c, const std::string& v, const std::string& w) { c.sweep.jobs = u32(v, w); };

    auto& codec = t["codec"];
    codec["precision"] = [](CliConfig& c, const std::string& v, const std::string&) {
      c.codec.precision = parse_precision(trim(v));
    };
    codec["resuppress"] = [](CliConfig& c, const std::string& v, const std::string& w) {
      c.codec.resuppress = parse_bool(v, w);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ValidationError("empty list '" + text + "'");
  return out;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<std::uint32_t>(item, "list"));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<std::uint64_t>(item, "list"));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<double>(item, "list"));
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char ch : purpose) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  Rng rng(master, h);
  return rng.next_u64();
}

void CliConfig::validate() const {
  synth.validate();
  model.validate();
  train.validate();
  sweep.validate();
}

CliConfig parse_config(const std::string& text, CliConfig base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  const auto& table = schema();
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) throw ValidationError("config: key '" + section + "' outside a section");
    const auto sec = table.find(section);
    if (sec == table.end()) throw ValidationError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ValidationError("config: unknown key '" + key + "' in [" + section + "]");
      setter->second(base, value.data(), "config [" + section + "] " + key);
    }
  }
  return base;
}

CliConfig load_config(const std::filesystem::path& path, CliConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace sparseinr
