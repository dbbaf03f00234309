#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fairmine/harness.hpp"
#include "fairmine/io.hpp"

namespace fairmine {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kTestIds = 3ULL << 40;
constexpr std::uint64_t kTestPoolIds = 4ULL << 40;
constexpr std::uint64_t kGenderPoolIds = 5ULL << 40;
constexpr std::uint64_t kCountryPoolIds = 6ULL << 40;

std::vector<EvalSet> embed_pools(const EmbeddingNetwork& net, const Generator& gen, Axis axis, std::size_t n,
                                 std::uint64_t first_id, Rng& rng) {
  std::vector<EvalSet> out;
  for (std::size_t g = 0; g < group_count(axis); ++g)
    out.push_back(embed_eval_set(net, gen.generate_pool(axis, g, n, first_id + g * n, rng)));
  return out;
}

json group_json(const GroupReport& g) {
  return {{"group", g.group},     {"accepted", g.far.accepted}, {"comparisons", g.far.comparisons},
          {"far", rate(g.far)},   {"genuine", g.genuine},       {"rejected", g.rejected},
          {"frr", g.genuine == 0 ? 0.0 : static_cast<double>(g.rejected) / static_cast<double>(g.genuine)}};
}

void write_matrix(const std::filesystem::path& path, const FarMatrix& m, const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# config_hash: " << config_hash << '\n' << "selfie\\doc";
  for (const auto& g : m.groups) out << ',' << g;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.groups[i];
    for (std::size_t j = 0; j < m.size(); ++j) out << ',' << format_double(m.far(i, j));
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

double EvalReport::worst_ratio() const {
  const double overall = rate(overall_far);
  if (overall == 0.0) return 0.0;
  double worst = 0.0;
  for (const GroupReport& g : continents) worst = std::max(worst, rate(g.far));
  return worst / overall;
}

Dataset test_dataset(const ExperimentConfig& config) {
  const Generator gen(config.generator);
  Rng rng = Rng::stream(config.seed, "test");
  return gen.generate(config.eval.test_pairs, 0.0, kTestIds, rng);
}

EvalReport evaluate(const ExperimentConfig& config, const EmbeddingNetwork& net) {
  config.validate();
  if (net.input_dim() != config.generator.input_dim)
    throw ConfigError("network input_dim does not match the evaluation data");
  const Generator gen(config.generator);
  const EvalConfig& ec = config.eval;
  EvalReport r;
  r.config_hash = config.hash_hex();
  r.target_far = ec.target_far;

  const EvalSet test = embed_eval_set(net, test_dataset(config));
  r.theta = calibrate_threshold(test, test, ec.target_far);
  r.overall_far = far_count(test, test, r.theta);
  r.genuine = test.size();
  r.rejected = genuine_rejections(test, r.theta);

  Rng pool_rng = Rng::stream(config.seed, "test_pools");
  const auto pools = embed_pools(net, gen, Axis::Continent, ec.test_pool, kTestPoolIds, pool_rng);
  r.continent_matrix = far_matrix(pools, Axis::Continent, r.theta, ec.test_pool);
  for (std::size_t g = 0; g < pools.size(); ++g)
    r.continents.push_back({r.continent_matrix.groups[g], r.continent_matrix.cell(g, g), pools[g].size(),
                            genuine_rejections(pools[g], r.theta)});

  Rng gender_rng = Rng::stream(config.seed, "gender_pools");
  const auto gender_pools = embed_pools(net, gen, Axis::Gender, ec.test_pool, kGenderPoolIds, gender_rng);
  const auto gfar = gender_far(gender_pools, r.theta);
  for (std::size_t g = 0; g < gfar.size(); ++g)
    r.genders.push_back({group_name(Axis::Gender, g), gfar[g], gender_pools[g].size(),
                         genuine_rejections(gender_pools[g], r.theta)});

  if (ec.country_matrix) {
    Rng country_rng = Rng::stream(config.seed, "country_pools");
    const auto cpools = embed_pools(net, gen, Axis::Country, ec.test_pool, kCountryPoolIds, country_rng);
    r.country_matrix = far_matrix(cpools, Axis::Country, r.theta, ec.test_pool);
  }

  const auto grid = far_level_grid(impostor_distances(test, test), ec.roc_far_levels);
  Rng roc_rng = Rng::stream(config.seed, "roc");
  const auto curves = roc_over_splits(test, grid, ec.roc_splits, ec.roc_fraction, roc_rng);
  r.roc = average_roc(curves);
  return r;
}

void write_eval_report(const std::filesystem::path& out_dir, const EvalReport& r, const RunRecord* record) {
  std::filesystem::create_directories(out_dir);
  json continents = json::array(), genders = json::array(), roc = json::array();
  for (const auto& g : r.continents) continents.push_back(group_json(g));
  for (const auto& g : r.genders) genders.push_back(group_json(g));
  for (std::size_t i = 0; i < r.roc.theta.size(); ++i)
    roc.push_back({{"theta", r.roc.theta[i]},
                   {"far_mean", r.roc.far_mean[i]},
                   {"far_std", r.roc.far_std[i]},
                   {"frr_mean", r.roc.frr_mean[i]},
                   {"frr_std", r.roc.frr_std[i]}});
  json j = {{"config_hash", r.config_hash},
            {"target_far", r.target_far},
            {"theta", r.theta},
            {"overall",
             {{"accepted", r.overall_far.accepted},
              {"comparisons", r.overall_far.comparisons},
              {"far", rate(r.overall_far)},
              {"genuine", r.genuine},
              {"rejected", r.rejected},
              {"frr", r.overall_frr()}}},
            {"worst_ratio", r.worst_ratio()},
            {"continents", continents},
            {"genders", genders},
            {"roc", roc}};
  if (record) {
    json traj = json::array();
    for (const auto& e : record->epochs) traj.push_back({{"step", e.step}, {"weights", e.weights}});
    j["strategy"] = record->strategy;
    j["sampler_axis"] = std::string(to_string(record->axis));
    j["sampler_groups"] = record->groups;
    j["weight_trajectory"] = traj;
  }
  {
    std::ofstream out(out_dir / "report.json");
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing report.json");
  }
  write_matrix(out_dir / "far_matrix_continent.csv", r.continent_matrix, r.config_hash);
  if (r.country_matrix) write_matrix(out_dir / "far_matrix_country.csv", *r.country_matrix, r.config_hash);
  std::ofstream out(out_dir / "roc.csv");
  out << "# config_hash: " << r.config_hash << "\ntheta,far_mean,far_std,frr_mean,frr_std\n";
  for (std::size_t i = 0; i < r.roc.theta.size(); ++i)
    out << format_double(r.roc.theta[i]) << ',' << format_double(r.roc.far_mean[i]) << ','
        << format_double(r.roc.far_std[i]) << ',' << format_double(r.roc.frr_mean[i]) << ','
        << format_double(r.roc.frr_std[i]) << '\n';
  if (!out) throw Error("failed writing roc.csv");
}

std::vector<EmbeddingRow> export_embeddings(const EmbeddingNetwork& net, const Dataset& dataset) {
  const EvalSet es = embed_eval_set(net, dataset);
  std::vector<EmbeddingRow> rows;
  rows.reserve(2 * es.size());
  for (std::size_t i = 0; i < es.size(); ++i) {
    const auto s = es.selfie.row(i), d = es.doc.row(i);
    rows.push_back({es.ids[i], es.labels[i].country, es.labels[i].gender, Domain::Selfie, Vector(s.begin(), s.end())});
    rows.push_back({es.ids[i], es.labels[i].country, es.labels[i].gender, Domain::Doc, Vector(d.begin(), d.end())});
  }
  return rows;
}

void aggregate_reports(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  std::filesystem::create_directories(out_dir);
  std::ofstream summary(out_dir / "summary.csv"), weights(out_dir / "weights.csv");
  summary << "run,strategy,config_hash,theta,overall_far,overall_frr,worst_ratio";
  for (std::size_t g = 0; g < kContinentCount; ++g) summary << ",far_" << group_name(Axis::Continent, g);
  for (std::size_t g = 0; g < kGenderCount; ++g) summary << ",far_" << group_name(Axis::Gender, g);
  summary << '\n';
  weights << "run,step,group,weight\n";
  for (const auto& dir : run_dirs) {
    const json r = read_json(dir / "report.json");
    const std::string name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    summary << name << ',' << r.value("strategy", "") << ',' << r.at("config_hash").get<std::string>() << ','
            << format_double(r.at("theta").get<double>()) << ','
            << format_double(r.at("overall").at("far").get<double>()) << ','
            << format_double(r.at("overall").at("frr").get<double>()) << ','
            << format_double(r.at("worst_ratio").get<double>());
    for (const json& g : r.at("continents")) summary << ',' << format_double(g.at("far").get<double>());
    for (const json& g : r.at("genders")) summary << ',' << format_double(g.at("far").get<double>());
    summary << '\n';
    if (r.contains("weight_trajectory")) {
      const auto groups = r.at("sampler_groups").get<std::vector<std::string>>();
      for (const json& e : r.at("weight_trajectory")) {
        const auto w = e.at("weights").get<Vector>();
        for (std::size_t g = 0; g < w.size() && g < groups.size(); ++g)
          weights << name << ',' << e.at("step").get<std::uint64_t>() << ',' << groups[g] << ','
                  << format_double(w[g]) << '\n';
      }
    }
  }
  if (!summary || !weights) throw Error("failed writing aggregated tables");
}

}  // namespace fairmine
