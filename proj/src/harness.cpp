#include "fairmine/harness.hpp"

#include <chrono>
#include <deque>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fairmine/io.hpp"

namespace fairmine {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kValidationIds = 1ULL << 40;
constexpr std::uint64_t kValidationPoolIds = 2ULL << 40;
constexpr std::size_t kMaxEmptyBatches = 1000;

json to_json(const PairCount& c) { return {{"accepted", c.accepted}, {"comparisons", c.comparisons}, {"far", rate(c)}}; }

PairCount pair_count_from(const json& j) { return {j.at("accepted").get<std::uint64_t>(), j.at("comparisons").get<std::uint64_t>()}; }

json epoch_json(const EpochMetrics& e, const std::vector<std::string>& groups) {
  json g = json::array();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    json cell = to_json(e.group_far[i]);
    cell["group"] = groups[i];
    cell["frr"] = e.group_frr[i];
    g.push_back(cell);
  }
  return {{"step", e.step},         {"batches", e.batches}, {"triplets", e.triplets},
          {"mean_loss", e.mean_loss}, {"theta", e.theta},     {"overall_far", to_json(e.overall_far)},
          {"groups", g},            {"weights", e.weights}, {"checkpoint", e.checkpoint}};
}

EpochMetrics epoch_from(const json& j) {
  EpochMetrics e;
  e.step = j.at("step").get<std::uint64_t>();
  e.batches = j.at("batches").get<std::uint64_t>();
  e.triplets = j.at("triplets").get<std::uint64_t>();
  e.mean_loss = j.at("mean_loss").get<double>();
  e.theta = j.at("theta").get<double>();
  e.overall_far = pair_count_from(j.at("overall_far"));
  for (const json& g : j.at("groups")) {
    e.group_far.push_back(pair_count_from(g));
    e.group_frr.push_back(g.at("frr").get<double>());
  }
  e.weights = j.at("weights").get<Vector>();
  e.checkpoint = j.at("checkpoint").get<std::string>();
  return e;
}

json record_json(const RunRecord& r) {
  json epochs = json::array();
  for (const EpochMetrics& e : r.epochs) epochs.push_back(epoch_json(e, r.groups));
  return {{"config_hash", r.config_hash},
          {"strategy", r.strategy},
          {"axis", std::string(to_string(r.axis))},
          {"groups", r.groups},
          {"steps", r.steps},
          {"empty_batches", r.empty_batches},
          {"epochs", epochs}};
}

RunRecord record_from(const json& j) {
  RunRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  r.axis = parse_axis(j.at("axis").get<std::string>());
  r.groups = j.at("groups").get<std::vector<std::string>>();
  r.steps = j.at("steps").get<std::uint64_t>();
  r.empty_batches = j.at("empty_batches").get<std::uint64_t>();
  for (const json& e : j.at("epochs")) r.epochs.push_back(epoch_from(e));
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string step_name(std::uint64_t step) {
  std::string s = std::to_string(step);
  return "checkpoints/step_" + std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s + ".fmck";
}

// Everything the loop needs beyond network and optimizer to continue bit-exactly.
struct LoopState {
  SamplerSpec sampler;
  Rng sampler_rng{0};
  Rng miner_rng{0};
  std::uint64_t steps = 0;
  MiningBatch batch;  // only pairs and ids are kept
  std::deque<std::vector<Triplet>> queue;
  std::uint64_t batches = 0;
  std::uint64_t triplets = 0;
  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  std::uint64_t empty_streak = 0;
  RunRecord record;
};

std::string encode(const LoopState& s) {
  json queue = json::array();
  for (const auto& mb : s.queue) {
    json m = json::array();
    for (const Triplet& t : mb)
      m.push_back({t.anchor, t.positive, t.negative, static_cast<int>(t.anchor_domain)});
    queue.push_back(m);
  }
  std::vector<std::uint64_t> ids;
  for (IdentityId id : s.batch.ids) ids.push_back(id.value);
  return json{{"sampler_weights", s.sampler.state.weights},
              {"sampler_epoch", s.sampler.state.epoch},
              {"sampler_rng", s.sampler_rng.state()},
              {"miner_rng", s.miner_rng.state()},
              {"steps", s.steps},
              {"batch_pairs", s.batch.pairs},
              {"batch_ids", ids},
              {"queue", queue},
              {"batches", s.batches},
              {"triplets", s.triplets},
              {"loss_sum", s.loss_sum},
              {"loss_count", s.loss_count},
              {"empty_streak", s.empty_streak},
              {"record", record_json(s.record)}}
      .dump();
}

void decode(const std::string& text, LoopState& s) {
  try {
    const json j = json::parse(text);
    s.sampler.state.weights = j.at("sampler_weights").get<Vector>();
    s.sampler.state.epoch = j.at("sampler_epoch").get<std::uint64_t>();
    s.sampler_rng.restore(j.at("sampler_rng").get<std::string>());
    s.miner_rng.restore(j.at("miner_rng").get<std::string>());
    s.steps = j.at("steps").get<std::uint64_t>();
    s.batch = MiningBatch{};
    s.batch.pairs = j.at("batch_pairs").get<std::vector<std::size_t>>();
    for (std::uint64_t id : j.at("batch_ids").get<std::vector<std::uint64_t>>()) s.batch.ids.push_back({id});
    s.queue.clear();
    for (const json& m : j.at("queue")) {
      std::vector<Triplet> mb;
      for (const json& t : m)
        mb.push_back({t[0].get<std::uint32_t>(), t[1].get<std::uint32_t>(), t[2].get<std::uint32_t>(),
                      static_cast<Domain>(t[3].get<int>())});
      s.queue.push_back(std::move(mb));
    }
    s.batches = j.at("batches").get<std::uint64_t>();
    s.triplets = j.at("triplets").get<std::uint64_t>();
    s.loss_sum = j.at("loss_sum").get<double>();
    s.loss_count = j.at("loss_count").get<std::uint64_t>();
    s.empty_streak = j.at("empty_streak").get<std::uint64_t>();
    s.record = record_from(j.at("record"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint run state: ") + e.what());
  }
}

std::vector<std::string> group_names(Axis axis) {
  std::vector<std::string> out;
  for (std::size_t g = 0; g < group_count(axis); ++g) out.push_back(group_name(axis, g));
  return out;
}

class Stopwatch {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop() { total_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }
  double seconds() const { return total_; }

 private:
  std::chrono::steady_clock::time_point t0_;
  double total_ = 0.0;
};

}  // namespace

std::string to_json(const RunRecord& record) { return record_json(record).dump(2) + "\n"; }

RunRecord run_record_from_json(const std::string& text) {
  try {
    return record_from(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("run record: ") + e.what());
  }
}

Splits prepare_data(const ExperimentConfig& config) {
  config.validate();
  Splits s{Generator(config.generator), {}, {}, {}};
  if (config.dataset_path.empty()) {
    s.train = generate_dataset(config.generator);
  } else {
    s.train = read_dataset(config.dataset_path);
    if (s.train.input_dim() != config.generator.input_dim)
      throw ConfigError("dataset input_dim " + std::to_string(s.train.input_dim()) + " differs from the config");
  }
  Rng val = Rng::stream(config.seed, "validation");
  s.validation = s.generator.generate(config.eval.val_pairs, 0.0, kValidationIds, val);
  Rng pools = Rng::stream(config.seed, "validation_pools");
  const Axis axis = config.sampler.axis;
  for (std::size_t g = 0; g < group_count(axis); ++g)
    s.validation_pools.push_back(s.generator.generate_pool(axis, g, config.eval.val_pool,
                                                           kValidationPoolIds + g * config.eval.val_pool, pools));
  return s;
}

TrainResult run_training(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  Stopwatch total, data_time, mining_time, optimize_time, validation_time;
  total.start();
  data_time.start();
  const Splits data = prepare_data(config);
  data_time.stop();

  const TrainingConfig& tc = config.training;
  const std::uint64_t hash = config.hash();
  const std::filesystem::path& out = options.out_dir;
  std::filesystem::create_directories(out / "checkpoints");
  write_text(out / "config.ini", config.canonical());

  Rng init = Rng::stream(config.seed, "init");
  EmbeddingNetwork net(tc.network, init);
  OptimizerState opt = OptimizerState::for_parameters(net.parameters().size());
  LoopState st;
  st.sampler = config.sampler;
  st.sampler_rng = Rng::stream(config.seed, "sampler");
  st.miner_rng = Rng::stream(config.seed, "miner");
  st.record.config_hash = hex64(hash);
  st.record.strategy = config.strategy;
  st.record.axis = config.sampler.axis;
  st.record.groups = group_names(config.sampler.axis);

  if (options.resume) {
    const Checkpoint ck = load_checkpoint(*options.resume, hash);
    if (ck.shape != tc.network) throw ConfigError("checkpoint network shape differs from the config");
    net = ck.network();
    opt = ck.optimizer;
    decode(ck.run_state, st);
  }

  const auto schedule = tc.schedule();
  const double pool_comparisons =
      static_cast<double>(config.eval.val_pool) * static_cast<double>(config.eval.val_pool - 1);
  const double far_floor = config.sampler.far_floor > 0.0 ? config.sampler.far_floor : 1.0 / pool_comparisons;

  auto checkpoint_to = [&](const std::filesystem::path& path) {
    save_checkpoint(path, make_checkpoint(hash, net, opt, encode(st)));
  };

  auto validate = [&]() {
    validation_time.start();
    EpochMetrics m;
    m.step = st.steps;
    m.batches = st.batches;
    m.triplets = st.triplets;
    m.mean_loss = st.loss_count == 0 ? 0.0 : st.loss_sum / static_cast<double>(st.loss_count);
    const EvalSet val = embed_eval_set(net, data.validation);
    m.theta = calibrate_threshold(val, val, config.eval.target_far);
    m.overall_far = far_count(val, val, m.theta);
    Vector rates;
    for (const Dataset& pool : data.validation_pools) {
      const EvalSet es = embed_eval_set(net, pool);
      m.group_far.push_back(far_count(es, es, m.theta));
      m.group_frr.push_back(frr(es, m.theta));
      rates.push_back(rate(m.group_far.back()));
    }
    if (st.sampler.uses_dynamic()) st.sampler.state = update_dynamic_weights(st.sampler.state, rates, far_floor);
    const auto w = st.sampler.active_weights();
    m.weights.assign(w.begin(), w.end());
    st.batches = st.triplets = st.loss_count = 0;
    st.loss_sum = 0.0;
    if (options.write_checkpoints) m.checkpoint = step_name(st.steps);
    st.record.epochs.push_back(m);
    st.record.steps = st.steps;
    if (options.write_checkpoints) checkpoint_to(out / m.checkpoint);
    validation_time.stop();
  };

  bool stopped = false;
  while (st.steps < tc.total_steps) {
    if (options.stop_after && st.steps >= *options.stop_after) {
      stopped = true;
      break;
    }
    if (st.queue.empty()) {
      mining_time.start();
      st.batch = assemble_batch(data.train, st.sampler, tc.selection_batch, st.sampler_rng);
      embed_batch(st.batch, net, data.train);
      auto triplets = mine_semi_hard(st.batch, tc.margin, st.miner_rng);
      ++st.batches;
      st.triplets += triplets.size();
      if (triplets.empty()) {
        ++st.record.empty_batches;
        if (++st.empty_streak >= kMaxEmptyBatches)
          throw Error("no semi-hard triplets in " + std::to_string(kMaxEmptyBatches) + " consecutive batches");
      } else {
        st.empty_streak = 0;
        for (auto& mb : schedule_minibatches(std::move(triplets), tc.minibatch, st.miner_rng))
          st.queue.push_back(std::move(mb));
      }
      // The embeddings are not needed once the triplets are fixed.
      st.batch.selfie = RowMatrix();
      st.batch.doc = RowMatrix();
      mining_time.stop();
      continue;
    }
    optimize_time.start();
    const std::vector<Triplet> mb = std::move(st.queue.front());
    st.queue.pop_front();
    const auto inputs = triplet_inputs(st.batch, data.train, mb);
    const LossGradient lg = loss_gradients(net, inputs, tc.margin);
    adam_step(opt, net.parameters(), lg.grad, schedule);
    ++st.steps;
    st.loss_sum += lg.loss;
    ++st.loss_count;
    optimize_time.stop();
    if (st.steps % config.eval.validation_every == 0 || st.steps == tc.total_steps) validate();
  }
  st.record.steps = st.steps;

  if (stopped) {
    checkpoint_to(out / "resume.fmck");
  } else {
    checkpoint_to(out / "model.fmck");
    write_text(out / "run.json", to_json(st.record));
  }
  total.stop();
  const json timings = {{"total_s", total.seconds()},
                        {"data_s", data_time.seconds()},
                        {"mining_s", mining_time.seconds()},
                        {"optimize_s", optimize_time.seconds()},
                        {"validation_s", validation_time.seconds()},
                        {"resumed", options.resume.has_value()}};
  write_text(out / "timings.json", timings.dump(2) + "\n");
  return {st.record, net, !stopped};
}

}  // namespace fairmine
