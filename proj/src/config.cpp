#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairmine/harness.hpp"
#include "fairmine/io.hpp"

namespace fairmine {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}

// "EU:0.5, AF:2" -> {EU: 0.5, AF: 2}
std::map<std::string, double> to_map(const std::string& key, const std::string& v) {
  std::map<std::string, double> out;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ConfigError(key + ": expected code:value entries, got '" + item + "'");
    out[parts[0]] = to_double(key, parts[1]);
  }
  return out;
}

// Reads keys of one section and remembers which were consumed so unknown keys
// can be reported.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (const auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    if (const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'))) return trim(*v);
    return std::nullopt;
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void real(const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(qualified(key), *v);
  }
  void size(const std::string& key, std::size_t& out) {
    if (auto v = get(key)) out = static_cast<std::size_t>(to_uint(qualified(key), *v));
  }
  void u64(const std::string& key, std::uint64_t& out) {
    if (auto v = get(key)) out = to_uint(qualified(key), *v);
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = get(key)) out = to_bool(qualified(key), *v);
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }

  void check_unknown() const {
    for (const auto& kv : tree_)
      if (!used_.count(kv.first)) throw ConfigError("unknown key '" + qualified(kv.first) + "'");
  }

 private:
  std::string name_;
  pt::ptree tree_;
  std::set<std::string> used_;
};

std::string join(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string join_sizes(std::span<const std::size_t> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::size_t continent_index(const std::string& code) { return static_cast<std::size_t>(parse_continent(code)); }

}  // namespace

void EvalConfig::validate() const {
  if (!(target_far > 0.0 && target_far <= 1.0)) throw ConfigError("eval.target_far must lie in (0, 1]");
  if (validation_every == 0) throw ConfigError("eval.validation_every must be positive");
  if (val_pairs < 2 || val_pool < 2 || test_pairs < 2 || test_pool < 2)
    throw ConfigError("evaluation sets need at least 2 pairs");
  if (roc_splits == 0) throw ConfigError("eval.roc_splits must be positive");
  if (!(roc_fraction > 0.0 && roc_fraction <= 1.0)) throw ConfigError("eval.roc_fraction must lie in (0, 1]");
  if (roc_far_levels.empty()) throw ConfigError("eval.roc_far_levels is empty");
  for (double l : roc_far_levels)
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("eval.roc_far_levels must lie in [0, 1]");
}

void ExperimentConfig::validate() const {
  generator.validate();
  training.validate();
  sampler.validate();
  eval.validate();
  if (training.network.input_dim != generator.input_dim)
    throw ConfigError("network input_dim differs from generator input_dim");
  if (!dataset_path.empty() && !std::filesystem::exists(dataset_path))
    throw ConfigError("dataset file " + dataset_path + " does not exist");
}

void ExperimentConfig::set_seed(std::uint64_t root) {
  seed = root;
  generator.seed = Rng::derive_seed(root, "datagen");
}

SamplerSpec make_sampler(const std::string& strategy, Axis axis, const Vector& weights, double exponent,
                         double smoothing, double far_floor) {
  SamplerSpec s;
  if (strategy == "natural") {
    s = SamplerSpec::natural(axis);
  } else if (strategy == "equal") {
    s = SamplerSpec::fixed(axis, equal_weights(axis));
  } else if (strategy == "adjusted") {
    if (axis == Axis::Continent)
      s = SamplerSpec::fixed(axis, continent_adjusted_weights());
    else if (axis == Axis::Country)
      s = SamplerSpec::fixed(axis, country_adjusted_weights());
    else
      throw ConfigError("no adjusted preset for the gender axis");
  } else if (strategy == "fixed") {
    s = SamplerSpec::fixed(axis, weights);
  } else if (strategy == "dynamic") {
    s = SamplerSpec::dynamic_weights(axis, exponent, smoothing);
  } else if (strategy == "homogeneous") {
    s = SamplerSpec::homogeneous(axis, weights.empty() ? equal_weights(axis) : weights);
  } else if (strategy == "homogeneous_dynamic") {
    s = SamplerSpec::homogeneous_dynamic(axis, exponent, smoothing);
  } else {
    throw ConfigError("unknown sampler strategy '" + strategy + "'");
  }
  s.far_floor = far_floor;
  s.validate();
  return s;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::set<std::string> sections = {"run", "data", "generator", "geometry", "training", "sampler", "eval"};
  for (const auto& kv : root) {
    if (!sections.count(kv.first)) throw ConfigError("unknown config section [" + kv.first + "]");
  }

  ExperimentConfig c;
  const auto& tax = GroupTaxonomy::canonical();

  Section run(root, "run");
  std::uint64_t seed = c.seed;
  run.u64("seed", seed);
  c.set_seed(seed);
  run.check_unknown();

  Section data(root, "data");
  data.text("path", c.dataset_path);
  data.check_unknown();

  Section gen(root, "generator");
  GeneratorConfig& g = c.generator;
  gen.size("input_dim", g.input_dim);
  gen.size("n_pairs", g.n_pairs);
  if (auto v = gen.get("continent_share")) {
    g.continent_share.fill(0.0);
    for (const auto& [code, x] : to_map(gen.qualified("continent_share"), *v))
      g.continent_share[continent_index(code)] = x;
  }
  if (auto v = gen.get("country_weight")) {
    for (const auto& [code, x] : to_map(gen.qualified("country_weight"), *v)) g.country_weight[tax.country(code).value] = x;
  }
  for (std::size_t k = 0; k < kContinentCount; ++k) {
    const std::string key = "gender_split_" + std::string(to_string(static_cast<Continent>(k)));
    if (auto v = gen.get(key)) {
      const auto list = to_list(gen.qualified(key), *v);
      if (list.size() != kGenderCount) throw ConfigError(gen.qualified(key) + ": expected male,female,unknown");
      std::copy(list.begin(), list.end(), g.gender_split[k].begin());
    }
  }
  gen.real("identity_spread", g.identity_spread);
  if (auto v = gen.get("gender_spread_scale")) {
    for (const auto& [code, x] : to_map(gen.qualified("gender_spread_scale"), *v))
      g.gender_spread_scale[static_cast<std::size_t>(parse_gender(code))] = x;
  }
  gen.real("selfie_noise", g.selfie_noise);
  if (auto v = gen.get("doc_noise")) {
    for (const auto& [code, x] : to_map(gen.qualified("doc_noise"), *v))
      g.doc_noise[continent_index(code)] = x;
  }
  gen.real("domain_shift_strength", g.domain_shift_strength);
  gen.real("duplicate_rate", g.duplicate_rate);
  gen.check_unknown();

  Section geo(root, "geometry");
  geo.real("scale", g.geometry.scale);
  geo.real("near_radius", g.geometry.near_radius);
  geo.real("far_radius", g.geometry.far_radius);
  geo.real("country_spread", g.geometry.country_spread);
  geo.real("gender_offset", g.geometry.gender_offset);
  geo.check_unknown();

  Section tr(root, "training");
  TrainingConfig& t = c.training;
  tr.real("margin", t.margin);
  tr.size("selection_batch", t.selection_batch);
  tr.size("minibatch", t.minibatch);
  tr.size("total_steps", t.total_steps);
  tr.real("lr_initial", t.lr_initial);
  tr.real("lr_final", t.lr_final);
  if (auto v = tr.get("widths")) {
    t.network.widths.clear();
    for (const auto& item : split(*v, ','))
      t.network.widths.push_back(static_cast<std::size_t>(to_uint(tr.qualified("widths"), item)));
  }
  if (auto v = tr.get("activation")) t.network.activation = parse_activation(*v);
  t.network.input_dim = g.input_dim;
  tr.check_unknown();

  Section sm(root, "sampler");
  sm.text("strategy", c.strategy);
  Axis axis = Axis::Continent;
  if (auto v = sm.get("axis")) axis = parse_axis(*v);
  Vector weights;
  if (auto v = sm.get("weights")) {
    weights = equal_weights(axis);
    for (const auto& [code, x] : to_map(sm.qualified("weights"), *v)) weights[parse_group(axis, code)] = x;
  } else if (c.strategy == "fixed") {
    throw ConfigError("sampler.weights is required for the fixed strategy");
  }
  double exponent = std::log10(4.0), smoothing = 0.2, far_floor = 0.0;
  sm.real("exponent", exponent);
  sm.real("smoothing", smoothing);
  sm.real("far_floor", far_floor);
  sm.check_unknown();
  c.sampler = make_sampler(c.strategy, axis, weights, exponent, smoothing, far_floor);

  Section ev(root, "eval");
  EvalConfig& e = c.eval;
  ev.real("target_far", e.target_far);
  ev.size("validation_every", e.validation_every);
  ev.size("val_pairs", e.val_pairs);
  ev.size("val_pool", e.val_pool);
  ev.size("test_pairs", e.test_pairs);
  ev.size("test_pool", e.test_pool);
  ev.flag("country_matrix", e.country_matrix);
  ev.size("roc_splits", e.roc_splits);
  ev.real("roc_fraction", e.roc_fraction);
  if (auto v = ev.get("roc_far_levels")) e.roc_far_levels = to_list(ev.qualified("roc_far_levels"), *v);
  ev.check_unknown();

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::canonical() const {
  const auto& tax = GroupTaxonomy::canonical();
  std::ostringstream o;
  const GeneratorConfig& g = generator;
  o << "[run]\nseed = " << seed << "\n\n";
  o << "[data]\npath = " << dataset_path << "\n\n";
  o << "[generator]\ninput_dim = " << g.input_dim << "\nn_pairs = " << g.n_pairs << "\ncontinent_share = ";
  for (std::size_t k = 0; k < kContinentCount; ++k)
    o << (k ? "," : "") << to_string(static_cast<Continent>(k)) << ':' << format_double(g.continent_share[k]);
  o << "\ncountry_weight = ";
  for (std::size_t i = 0; i < kCountryCount; ++i)
    o << (i ? "," : "") << tax.countries()[i].code << ':' << format_double(g.country_weight[i]);
  o << '\n';
  for (std::size_t k = 0; k < kContinentCount; ++k)
    o << "gender_split_" << to_string(static_cast<Continent>(k)) << " = " << join(g.gender_split[k]) << '\n';
  o << "identity_spread = " << format_double(g.identity_spread) << "\ngender_spread_scale = ";
  for (std::size_t i = 0; i < kGenderCount; ++i)
    o << (i ? "," : "") << to_string(static_cast<Gender>(i)) << ':' << format_double(g.gender_spread_scale[i]);
  o << "\nselfie_noise = " << format_double(g.selfie_noise) << "\ndoc_noise = ";
  for (std::size_t k = 0; k < kContinentCount; ++k)
    o << (k ? "," : "") << to_string(static_cast<Continent>(k)) << ':' << format_double(g.doc_noise[k]);
  o << "\ndomain_shift_strength = " << format_double(g.domain_shift_strength)
    << "\nduplicate_rate = " << format_double(g.duplicate_rate) << "\n\n";
  o << "[geometry]\nscale = " << format_double(g.geometry.scale)
    << "\nnear_radius = " << format_double(g.geometry.near_radius)
    << "\nfar_radius = " << format_double(g.geometry.far_radius)
    << "\ncountry_spread = " << format_double(g.geometry.country_spread)
    << "\ngender_offset = " << format_double(g.geometry.gender_offset) << "\n\n";
  const TrainingConfig& t = training;
  o << "[training]\nmargin = " << format_double(t.margin) << "\nselection_batch = " << t.selection_batch
    << "\nminibatch = " << t.minibatch << "\ntotal_steps = " << t.total_steps
    << "\nlr_initial = " << format_double(t.lr_initial) << "\nlr_final = " << format_double(t.lr_final)
    << "\nwidths = " << join_sizes(t.network.widths) << "\nactivation = " << to_string(t.network.activation)
    << "\n\n";
  o << "[sampler]\nstrategy = " << strategy << "\naxis = " << to_string(sampler.axis);
  if (!sampler.weights.empty()) {
    o << "\nweights = ";
    for (std::size_t i = 0; i < sampler.weights.size(); ++i)
      o << (i ? "," : "") << group_name(sampler.axis, i) << ':' << format_double(sampler.weights[i]);
  }
  const double exponent = sampler.uses_dynamic() ? sampler.state.exponent : std::log10(4.0);
  const double smoothing = sampler.uses_dynamic() ? sampler.state.smoothing : 0.2;
  o << "\nexponent = " << format_double(exponent) << "\nsmoothing = " << format_double(smoothing)
    << "\nfar_floor = " << format_double(sampler.far_floor) << "\n\n";
  o << "[eval]\ntarget_far = " << format_double(eval.target_far) << "\nvalidation_every = " << eval.validation_every
    << "\nval_pairs = " << eval.val_pairs << "\nval_pool = " << eval.val_pool << "\ntest_pairs = " << eval.test_pairs
    << "\ntest_pool = " << eval.test_pool << "\ncountry_matrix = " << (eval.country_matrix ? "true" : "false")
    << "\nroc_splits = " << eval.roc_splits << "\nroc_fraction = " << format_double(eval.roc_fraction)
    << "\nroc_far_levels = " << join(eval.roc_far_levels) << '\n';
  return o.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

}  // namespace fairmine
