// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "gramformer/cli/key_value.hpp"
#include "gramformer/numerics/errors.hpp"

namespace gramformer::cli {

namespace {

struct Field {
  ConfigKey key;
  std::function<std::string(const RunConfig&)> get;
  // Returns false when the text is not a valid value.
  std::function<bool(RunConfig&, const std::string&)> set;
};

bool parse_size(const std::string& s, std::size_t& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_real(const std::string& s, double& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true") {
    out = true;
  } else if (s == "false") {
    out = false;
  } else {
    return false;
  }
  return true;
}

Field size_field(std::string_view name, std::string_view doc, std::size_t RunConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          [member](RunConfig& c, const std::string& v) { return parse_size(v, c.*member); }};
}

Field model_size_field(std::string_view name, std::string_view doc, std::size_t model::ModelConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return std::to_string(c.model.*member); },
          [member](RunConfig& c, const std::string& v) { return parse_size(v, c.model.*member); }};
}

Field real_field(std::string_view name, std::string_view doc, double RunConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return format_double(c.*member); },
          [member](RunConfig& c, const std::string& v) { return parse_real(v, c.*member); }};
}

Field model_real_field(std::string_view name, std::string_view doc, double model::ModelConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return format_double(c.model.*member); },
          [member](RunConfig& c, const std::string& v) { return parse_real(v, c.model.*member); }};
}

Field string_field(std::string_view name, std::string_view doc, std::string RunConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return c.*member; },
          [member](RunConfig& c, const std::string& v) {
            c.*member = v;
            return true;
          }};
}

Field bool_field(std::string_view name, std::string_view doc, bool RunConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); },
          [member](RunConfig& c, const std::string& v) { return parse_bool(v, c.*member); }};
}

Field model_bool_field(std::string_view name, std::string_view doc, bool model::ModelConfig::*member) {
  return {{name, doc},
          [member](const RunConfig& c) { return std::string(c.model.*member ? "true" : "false"); },
          [member](RunConfig& c, const std::string& v) { return parse_bool(v, c.model.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using model::ModelConfig;
    std::vector<Field> f;
    f.push_back({{"variant", "gramformer | vanilla | graphormer"},
                 [](const RunConfig& c) { return std::string(model::to_string(c.model.variant)); },
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.model.variant = model::parse_variant(v);
                   } catch (const ContractError&) {
                     return false;
                   }
                   return true;
                 }});
    f.push_back(model_size_field("channels", "node feature width C", &ModelConfig::channels));
    f.push_back(model_size_field("heads", "attention heads S", &ModelConfig::heads));
    f.push_back(model_size_field("layers", "transformer layers L", &ModelConfig::layers));
    f.push_back(model_real_field("q", "neighbour fraction of the k-NN graph", &ModelConfig::q));
    f.push_back(model_size_field("m", "in-degree cap; the bank holds m+1 vectors", &ModelConfig::m));
    f.push_back(model_real_field("lambda", "edge regularization weight", &ModelConfig::lambda));
    f.push_back(model_size_field("patch", "patch size in pixels", &ModelConfig::patch));
    f.push_back(model_real_field("density_sigma", "Gaussian sigma of the density target", &ModelConfig::density_sigma));
    f.push_back(model_real_field("ln_eps", "layer-norm epsilon", &ModelConfig::ln_eps));
    f.push_back(model_bool_field("use_ewr", "edge-weight regression (gramformer only)", &ModelConfig::use_ewr));
    f.push_back(model_bool_field("use_centrality", "centrality encoding (gramformer, graphormer)",
                                 &ModelConfig::use_centrality));
    f.push_back(string_field("train_data", "training dataset directory", &RunConfig::train_data));
    f.push_back(string_field("test_data", "evaluation dataset directory", &RunConfig::test_data));
    f.push_back(size_field("iterations", "training steps (one scene per step)", &RunConfig::iterations));
    f.push_back(size_field("eval_interval", "steps between metric rows; 0 = only at the end", &RunConfig::eval_interval));
    f.push_back({{"seed", "initialization, sample order and augmentation seed"},
                 [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& v) { return parse_u64(v, c.seed); }});
    f.push_back(real_field("lr", "peak Adam learning rate", &RunConfig::lr));
    f.push_back(real_field("beta1", "Adam first-moment decay", &RunConfig::beta1));
    f.push_back(real_field("beta2", "Adam second-moment decay", &RunConfig::beta2));
    f.push_back(real_field("adam_eps", "Adam epsilon", &RunConfig::adam_eps));
    f.push_back(size_field("warmup", "linear warmup steps", &RunConfig::warmup));
    f.push_back({{"lr_schedule", "constant | cosine (decays to 0 at the last step)"},
                 [](const RunConfig& c) { return std::string(c.lr_schedule == LrSchedule::cosine ? "cosine" : "constant"); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "cosine") {
                     c.lr_schedule = LrSchedule::cosine;
                   } else if (v == "constant") {
                     c.lr_schedule = LrSchedule::constant;
                   } else {
                     return false;
                   }
                   return true;
                 }});
    f.push_back(bool_field("flip", "random horizontal flip", &RunConfig::flip));
    f.push_back(string_field("loss", "density loss name", &RunConfig::loss));
    f.push_back(string_field("out_dir", "output directory for checkpoints and logs", &RunConfig::out_dir));
    return f;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  auto fail = [](const std::string& what) { throw ContractError("config: " + what); };
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  bool known = false;
  for (auto name : model::density_loss_names()) known = known || name == loss;
  if (!known) fail("unknown loss '" + loss + "'");
}

model::TrainOptions RunConfig::train_options() const {
  model::TrainOptions o;
  o.adam.lr = lr;
  o.adam.beta1 = beta1;
  o.adam.beta2 = beta2;
  o.adam.eps = adam_eps;
  o.warmup = warmup;
  o.decay_steps = lr_schedule == LrSchedule::cosine ? iterations : 0;
  o.flip = flip;
  o.loss = loss;
  o.seed = seed;
  return o;
}

const std::vector<ConfigKey>& run_config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig c;
  for (const auto& kv : parse_key_values(text)) {
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.key.name == kv.key) field = &f;
    }
    if (field == nullptr) throw ParseError("unknown config key '" + kv.key + "'", kv.line, 0);
    if (!field->set(c, kv.value)) {
      throw ParseError("invalid value '" + kv.value + "' for key '" + kv.key + "'", kv.line, 0);
    }
  }
  return c;
}

std::string format_run_config(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& f : fields()) pairs.emplace_back(std::string(f.key.name), f.get(config));
  return format_key_values(pairs);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}


void save_run_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << format_run_config(config);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

bool parse_reals(const std::string& text, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
    double v = 0.0;
    if (!parse_real(item, v)) return false;
    out.push_back(v);
    pos = end + 1;
  }
  return !out.empty();
}

struct SpecField {
  std::string_view name;
  std::function<std::string(const synthdata::SceneSpec&)> get;
  std::function<bool(synthdata::SceneSpec&, const std::string&)> set;
};

SpecField spec_real(std::string_view name, double synthdata::SceneSpec::*member) {
  return {name, [member](const synthdata::SceneSpec& s) { return format_double(s.*member); },
          [member](synthdata::SceneSpec& s, const std::string& v) { return parse_real(v, s.*member); }};
}

SpecField spec_size(std::string_view name, std::size_t synthdata::SceneSpec::*member) {
  return {name, [member](const synthdata::SceneSpec& s) { return std::to_string(s.*member); },
          [member](synthdata::SceneSpec& s, const std::string& v) { return parse_size(v, s.*member); }};
}

const std::vector<SpecField>& spec_fields() {
  using synthdata::SceneSpec;
  static const std::vector<SpecField> table = {
      spec_size("width", &SceneSpec::width),
      spec_size("height", &SceneSpec::height),
      {"band_expected", [](const SceneSpec& s) { return join_reals(s.band_expected); },
       [](SceneSpec& s, const std::string& v) { return parse_reals(v, s.band_expected); }},
      spec_real("r0", &SceneSpec::r0),
      spec_real("gain", &SceneSpec::gain),
      spec_real("count_scale_min", &SceneSpec::count_scale_min),
      spec_real("count_scale_max", &SceneSpec::count_scale_max),
      spec_real("margin", &SceneSpec::margin),
      spec_real("head_intensity", &SceneSpec::head_intensity),
      spec_real("intensity_jitter", &SceneSpec::intensity_jitter),
      spec_real("background", &SceneSpec::background),
      spec_real("clutter_expected", &SceneSpec::clutter_expected),
      spec_real("clutter_intensity", &SceneSpec::clutter_intensity),
      spec_real("density_sigma", &SceneSpec::density_sigma),
  };
  return table;
}

}  // namespace

synthdata::SceneSpec parse_scene_spec(std::string_view text) {
  synthdata::SceneSpec spec;
  for (const auto& kv : parse_key_values(text)) {
    const SpecField* field = nullptr;
    for (const auto& f : spec_fields()) {
      if (f.name == kv.key) field = &f;
    }
    if (field == nullptr) throw ParseError("unknown scene spec key '" + kv.key + "'", kv.line, 0);
    if (!field->set(spec, kv.value)) {
      throw ParseError("invalid value '" + kv.value + "' for key '" + kv.key + "'", kv.line, 0);
    }
  }
  return spec;
}

std::string format_scene_spec(const synthdata::SceneSpec& spec) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& f : spec_fields()) pairs.emplace_back(std::string(f.name), f.get(spec));
  return format_key_values(pairs);
}

synthdata::SceneSpec load_scene_spec(const std::filesystem::path& path) { return parse_scene_spec(read_file(path)); }

}  // namespace gramformer::cli
