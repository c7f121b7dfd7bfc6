#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linkpred/checkpoint.hpp"
#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/metrics.hpp"
#include "linkpred/model.hpp"
#include "linkpred/nn.hpp"
#include "linkpred/rng.hpp"
#include "linkpred/version.hpp"

namespace linkpred {

struct EpochLog {
  std::uint32_t epoch = 0;
  double loss = 0.0;
  double valid_metric = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["loss"] = loss;
    j["valid_metric"] = valid_metric;
    j["lr"] = lr;
    return j;
  }
};

struct TrainState {
  std::uint32_t epoch = 0;  // epochs completed
  double best_metric = -std::numeric_limits<double>::infinity();
  std::int64_t best_epoch = -1;
  std::vector<EpochLog> log;
};

// Training loop over one graph and split: shuffled positive batches, an equal
// count of freshly sampled negative non-edges per batch, forward/backward,
// gradient clipping, Adam, exponential LR decay, per-epoch validation with
// early stopping on patience, best-checkpoint tracking.
//
// Message passing always runs on the training graph only; validation and test
// positives never enter propagation or heuristic computation.
class Trainer {
 public:
  Trainer(const Graph& graph, DatasetSplit split, ModelConfig cfg,
          Matrix features = {})
      : graph_(graph),
        split_(std::move(split)),
        cfg_(std::move(cfg)),
        shuffle_rng_(cfg_.seed, "shuffle"),
        negative_rng_(cfg_.seed, "negative-sampling"),
        dropout_rng_(cfg_.seed, "dropout") {
    cfg_.validate();
    if (split_.node_count > graph_.node_count()) {
      throw DataError("split references node ids beyond the graph");
    }
    exclusion_.insert(split_.train_pos);
    exclusion_.insert(split_.valid_pos);
    exclusion_.insert(split_.test_pos);

    if (variant_uses_x(cfg_.variant) && features.empty()) {
      features = random_features(graph_.node_count(), cfg_.feature_dim, cfg_.seed);
    }

    std::vector<BinSpec> specs;
    if (variant_uses_he(cfg_.variant)) specs = fit_encoder_specs();

    Rng init_rng(cfg_.seed, "init");
    bundle_ = build_model(graph_, cfg_, std::move(features), std::move(specs),
                          init_rng);
  }

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  static Matrix random_features(NodeId node_count, std::uint32_t dim,
                                std::uint64_t seed) {
    Rng rng(seed, "features");
    Matrix x(node_count, dim);
    for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
    return x;
  }

  const ModelBundle& bundle() const { return bundle_; }
  ModelBundle& bundle() { return bundle_; }
  const ModelConfig& config() const { return cfg_; }
  const TrainState& state() const { return state_; }

  // Test instrumentation: observes every freshly sampled negative batch.
  std::function<void(const std::vector<Edge>&)> negative_observer;

  // One pass over shuffled training positives. Returns the mean batch loss.
  double train_epoch() {
    if (split_.train_pos.empty()) throw DataError("train split has no positive edges");
    std::vector<std::size_t> order(split_.train_pos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng_.shuffle(order);

    const double lr = LrSchedule{cfg_.lr, cfg_.lr_decay}.at(state_.epoch);
    double total = 0.0;
    std::size_t batches = 0;
    auto params = bundle_.params();
    for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(begin + cfg_.batch_size, order.size());
      std::vector<Edge> pairs;
      std::vector<LinkSample> samples;
      pairs.reserve(2 * (end - begin));
      samples.reserve(2 * (end - begin));
      for (std::size_t i = begin; i < end; ++i) {
        const Edge& e = split_.train_pos[order[i]];
        pairs.push_back(e);
        samples.push_back({e.first, e.second, 1.0});
      }
      const std::vector<Edge> negatives = sample_negative_edges(
          graph_, end - begin, negative_rng_, exclusion_, cfg_.negative_min_spd);
      if (negative_observer) negative_observer(negatives);
      for (const Edge& e : negatives) {
        pairs.push_back(e);
        samples.push_back({e.first, e.second, 0.0});
      }

      const Matrix heur = heuristic_values_for_pairs(graph_, bundle_, pairs);
      bundle_.zero_grads();
      ForwardTape tape = model_forward(graph_, bundle_, samples, heur,
                                       /*training=*/true, &dropout_rng_);
      total += model_backward(graph_, bundle_, tape, samples);
      if (cfg_.clip_norm > 0.0) clip_grad_norm(params, cfg_.clip_norm);
      adam_step(params, adam_, lr);
      ++batches;
    }
    return total / static_cast<double>(batches);
  }

  // Validation metric per cfg.valid_metric ("auc" or "hits@K"); NaN when the
  // split has no validation pairs.
  double evaluate_valid() const {
    if (split_.valid_pos.empty() || split_.valid_neg.empty()) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const auto pos = predict_scores(graph_, bundle_, split_.valid_pos);
    const auto neg = predict_scores(graph_, bundle_, split_.valid_neg);
    if (cfg_.valid_metric == "auc") return auc(pos, neg);
    const std::size_t k = std::stoul(cfg_.valid_metric.substr(5));
    return hits_at_k(pos, neg, k);
  }

  std::vector<double> predict(std::span<const Edge> pairs,
                              unsigned workers = 1) const {
    return predict_scores(graph_, bundle_, pairs, workers);
  }

  // Full loop: train, validate, track best parameters, stop early once the
  // validation metric has not improved for `patience` epochs.
  TrainState fit(std::ostream* log_stream = nullptr) {
    while (state_.epoch < cfg_.epochs) {
      const double lr = LrSchedule{cfg_.lr, cfg_.lr_decay}.at(state_.epoch);
      const double loss = train_epoch();
      const double metric = evaluate_valid();
      EpochLog entry{state_.epoch, loss, metric, lr};
      state_.log.push_back(entry);
      if (log_stream) *log_stream << entry.to_json().dump() << '\n';
      if (!std::isnan(metric) && metric > state_.best_metric) {
        state_.best_metric = metric;
        state_.best_epoch = state_.epoch;
        snapshot_best();
      }
      ++state_.epoch;
      if (state_.best_epoch >= 0 &&
          state_.epoch - static_cast<std::uint32_t>(state_.best_epoch) >
              cfg_.patience) {
        break;
      }
    }
    return state_;
  }

  bool has_best() const { return !best_params_.empty(); }

  // Copies the best-validation snapshot back into the live bundle.
  void restore_best() {
    if (best_params_.empty()) return;
    auto params = bundle_.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i].param->values = best_params_[i];
    }
  }

  // Serializes parameters, optimizer moments, RNG streams and progress so a
  // reloaded trainer reproduces subsequent steps bitwise. The graph, split
  // and config are reconstructed by the caller and verified against the
  // state file.
  void save_state(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "params");
    fs::create_directories(dir / "adam");
    auto params = bundle_.params();
    if (adam_.m.empty()) adam_.init(params);
    nlohmann::json j;
    j["format"] = "linkpred-trainstate";
    j["version"] = std::string(kVersion);
    j["config"] = model_config_to_json(cfg_);
    j["epoch"] = state_.epoch;
    j["best_metric"] = state_.best_metric;
    j["best_epoch"] = state_.best_epoch;
    j["adam_step"] = adam_.step;
    j["rng"] = {{"shuffle", shuffle_rng_.save_state()},
                {"negative", negative_rng_.save_state()},
                {"dropout", dropout_rng_.save_state()}};
    j["has_best"] = !best_params_.empty();
    nlohmann::json log = nlohmann::json::array();
    for (const EpochLog& e : state_.log) log.push_back(e.to_json());
    j["log"] = log;
    for (std::size_t i = 0; i < params.size(); ++i) {
      write_f64_array(dir / "params" / (params[i].path + ".f64"),
                      params[i].param->values);
      write_f64_array(dir / "adam" / (params[i].path + ".m.f64"), adam_.m[i]);
      write_f64_array(dir / "adam" / (params[i].path + ".v.f64"), adam_.v[i]);
    }
    if (!best_params_.empty()) {
      fs::create_directories(dir / "best");
      for (std::size_t i = 0; i < params.size(); ++i) {
        write_f64_array(dir / "best" / (params[i].path + ".f64"), best_params_[i]);
      }
    }
    std::ofstream out(dir / "state.json");
    if (!out) throw DataError("cannot write train state in " + dir.string());
    out << j.dump(2) << '\n';
  }

  void load_state(const std::filesystem::path& dir) {
    std::ifstream in(dir / "state.json");
    if (!in) throw DataError("cannot open train state: " + (dir / "state.json").string());
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "linkpred-trainstate") {
      throw DataError("not a train state directory: " + dir.string());
    }
    // The epoch budget may be extended on resume; everything else must match.
    nlohmann::json saved_cfg = j.at("config");
    nlohmann::json this_cfg = model_config_to_json(cfg_);
    saved_cfg.erase("epochs");
    saved_cfg.erase("patience");
    this_cfg.erase("epochs");
    this_cfg.erase("patience");
    if (saved_cfg != this_cfg) {
      throw DataError("train state config does not match this trainer");
    }
    state_.epoch = j.at("epoch").get<std::uint32_t>();
    state_.best_metric = j.at("best_metric").get<double>();
    state_.best_epoch = j.at("best_epoch").get<std::int64_t>();
    state_.log.clear();
    for (const auto& e : j.at("log")) {
      state_.log.push_back({e.at("epoch").get<std::uint32_t>(),
                            e.at("loss").get<double>(),
                            e.at("valid_metric").is_null()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : e.at("valid_metric").get<double>(),
                            e.at("lr").get<double>()});
    }
    shuffle_rng_.load_state(j.at("rng").at("shuffle").get<std::string>());
    negative_rng_.load_state(j.at("rng").at("negative").get<std::string>());
    dropout_rng_.load_state(j.at("rng").at("dropout").get<std::string>());

    auto params = bundle_.params();
    adam_.init(params);
    adam_.step = j.at("adam_step").get<std::int64_t>();
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i].param->values = read_f64_array(
          dir / "params" / (params[i].path + ".f64"), params[i].param->size());
      adam_.m[i] =
          read_f64_array(dir / "adam" / (params[i].path + ".m.f64"),
                         params[i].param->size());
      adam_.v[i] =
          read_f64_array(dir / "adam" / (params[i].path + ".v.f64"),
                         params[i].param->size());
    }
    best_params_.clear();
    if (j.at("has_best").get<bool>()) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        best_params_.push_back(read_f64_array(
            dir / "best" / (params[i].path + ".f64"), params[i].param->size()));
      }
    }
  }

 private:
  // Bin boundaries come from the heuristic values of the training positives
  // plus an equal count of sampled non-edges, so both score regimes fall
  // inside the fitted range.
  std::vector<BinSpec> fit_encoder_specs() {
    std::vector<Edge> pairs = split_.train_pos;
    Rng fit_rng(cfg_.seed, "encoder-fit");
    if (!graph_.complete() && graph_.node_count() >= 2) {
      const auto negatives =
          sample_negative_edges(graph_, split_.train_pos.size(), fit_rng, exclusion_,
                                cfg_.negative_min_spd);
      pairs.insert(pairs.end(), negatives.begin(), negatives.end());
    }
    const Matrix values =
        batch_score(graph_, pairs, cfg_.heuristics, cfg_.heuristic_cfg);
    std::vector<std::vector<double>> columns(cfg_.heuristics.size());
    for (std::size_t k = 0; k < cfg_.heuristics.size(); ++k) {
      columns[k].reserve(values.rows);
      for (std::size_t r = 0; r < values.rows; ++r) columns[k].push_back(values.at(r, k));
    }
    return fit_bin_specs(cfg_.heuristics, columns, cfg_.encoder, cfg_.heuristic_cfg);
  }

  void snapshot_best() {
    best_params_.clear();
    for (const ParamRef& p : bundle_.params()) best_params_.push_back(p.param->values);
  }

  const Graph& graph_;
  DatasetSplit split_;
  ModelConfig cfg_;
  EdgeSet exclusion_;
  ModelBundle bundle_;
  AdamState adam_;
  Rng shuffle_rng_;
  Rng negative_rng_;
  Rng dropout_rng_;
  TrainState state_;
  std::vector<std::vector<double>> best_params_;
};

}  // namespace linkpred
