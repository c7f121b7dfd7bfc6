#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkpred/errors.hpp"
#include "linkpred/model.hpp"
#include "linkpred/version.hpp"

namespace linkpred {

static_assert(std::endian::native == std::endian::little,
              "checkpoint arrays are little-endian f64");

inline void write_f64_array(const std::filesystem::path& path,
                            const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write parameter file: " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

inline std::vector<double> read_f64_array(const std::filesystem::path& path,
                                          std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open parameter file: " + path.string());
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
    throw DataError("parameter file truncated: " + path.string());
  }
  return values;
}

// Checkpoint layout: <dir>/manifest.json plus one raw little-endian f64 array
// per parameter under <dir>/params/, named by the parameter path. The feature
// matrix ships alongside as the one non-trainable array so evaluation sees
// exactly the training-time inputs.
inline void save_checkpoint(const std::filesystem::path& dir, ModelBundle& mb,
                            std::uint32_t epoch) {
  std::filesystem::create_directories(dir / "params");
  nlohmann::json manifest;
  manifest["format"] = "linkpred-checkpoint";
  manifest["version"] = std::string(kVersion);
  manifest["node_count"] = mb.node_count;
  manifest["feature_dim"] = mb.feat_dim;
  manifest["seed"] = mb.cfg.seed;
  manifest["epoch"] = epoch;
  manifest["config"] = model_config_to_json(mb.cfg);
  manifest["bin_specs"] = mb.encoder.specs_to_json();

  nlohmann::json params = nlohmann::json::array();
  auto record = [&](const std::string& path, const Matrix& m, bool trainable) {
    nlohmann::json p;
    p["path"] = path;
    p["rows"] = m.rows;
    p["cols"] = m.cols;
    p["file"] = path + ".f64";
    p["trainable"] = trainable;
    params.push_back(p);
    write_f64_array(dir / "params" / (path + ".f64"), m.values);
  };
  if (!mb.features.empty()) record("features", mb.features, false);
  for (const ParamRef& p : mb.params()) record(p.path, *p.param, true);
  manifest["params"] = params;

  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write checkpoint manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

// Rebuilds a bundle from a checkpoint directory. The graph is not needed:
// shapes come from the manifest.
inline ModelBundle load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open checkpoint manifest: " + manifest_path.string());
  nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.at("format").get<std::string>() != "linkpred-checkpoint") {
    throw DataError("not a checkpoint manifest: " + manifest_path.string());
  }

  ModelBundle mb;
  mb.cfg = model_config_from_json(manifest.at("config"));
  mb.node_count = manifest.at("node_count").get<NodeId>();
  mb.feat_dim = manifest.at("feature_dim").get<std::size_t>();
  if (variant_uses_he(mb.cfg.variant)) {
    mb.encoder = HeuristicEncoder::from_specs_json(manifest.at("bin_specs"));
  }

  // Allocate empty parameter holders with the right shapes.
  const std::size_t d0 = mb.input_dim();
  if (variant_uses_ne(mb.cfg.variant)) {
    mb.node_emb = Matrix(mb.node_count, mb.cfg.node_emb_dim);
    mb.node_emb.make_trainable();
  }
  if (variant_uses_gnn(mb.cfg.variant)) {
    for (std::uint32_t l = 0; l < mb.cfg.gnn_layers; ++l) {
      Matrix w(d0, d0);
      w.make_trainable();
      mb.gcn_weights.push_back(std::move(w));
    }
  }
  std::size_t in_dim = mb.predictor_input_dim();
  for (std::uint32_t l = 0; l < mb.cfg.predictor_layers; ++l) {
    const bool last = l + 1 == mb.cfg.predictor_layers;
    const std::size_t out_dim = last ? 1 : mb.cfg.predictor_hidden;
    Matrix w(in_dim, out_dim);
    w.make_trainable();
    Matrix b(1, out_dim);
    b.make_trainable();
    mb.predictor.weights.push_back(std::move(w));
    mb.predictor.biases.push_back(std::move(b));
    in_dim = out_dim;
  }
  if (variant_uses_x(mb.cfg.variant)) {
    mb.features = Matrix(mb.node_count, mb.feat_dim);
  }

  auto param_refs = mb.params();
  auto find_param = [&](const std::string& path) -> Matrix* {
    if (path == "features") return &mb.features;
    for (ParamRef& p : param_refs) {
      if (p.path == path) return p.param;
    }
    return nullptr;
  };

  for (const auto& p : manifest.at("params")) {
    const std::string path = p.at("path").get<std::string>();
    const std::size_t rows = p.at("rows").get<std::size_t>();
    const std::size_t cols = p.at("cols").get<std::size_t>();
    Matrix* target = find_param(path);
    if (!target) throw DataError("checkpoint parameter '" + path + "' is not expected");
    if (target->rows != rows || target->cols != cols) {
      throw DataError("checkpoint parameter '" + path + "' has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(target->rows) + "x" +
                      std::to_string(target->cols));
    }
    target->values =
        read_f64_array(dir / "params" / p.at("file").get<std::string>(), rows * cols);
  }
  return mb;
}

}  // namespace linkpred
