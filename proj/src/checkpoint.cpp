/*
 * Copyright 2026 The flight2vec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flight2vec/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "flight2vec/errors.hpp"

namespace f2v {

namespace {

using json = nlohmann::ordered_json;

json params_to_json(const ParamStore& ps) {
  json blocks = json::array();
  for (const ParamBlock& b : ps.blocks()) {
    json entry;
    entry["name"] = b.name;
    entry["rows"] = b.rows;
    entry["cols"] = b.cols;
    entry["values"] = std::vector<double>(ps.values().begin() + b.offset,
                                          ps.values().begin() + b.offset + b.size());
    blocks.push_back(std::move(entry));
  }
  return blocks;
}

void params_from_json(const json& blocks, ParamStore& ps) {
  if (blocks.size() != ps.blocks().size()) {
    throw CheckpointError("checkpoint: parameter block count mismatch");
  }
  for (std::size_t i = 0; i < ps.blocks().size(); ++i) {
    const ParamBlock& b = ps.blocks()[i];
    const json& entry = blocks[i];
    if (entry.at("name").get<std::string>() != b.name ||
        entry.at("rows").get<int>() != b.rows || entry.at("cols").get<int>() != b.cols) {
      throw CheckpointError("checkpoint: parameter block '" + b.name + "' does not match");
    }
    const auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != b.size()) throw CheckpointError("checkpoint: block size mismatch");
    std::copy(values.begin(), values.end(), ps.values().begin() + b.offset);
  }
}

json header(const char* kind) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = kind;
  return j;
}

json load_and_check(const std::string& path, const char* kind) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CheckpointError("cannot parse checkpoint " + path + ": " + e.what());
  }
  const int version = j.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw CheckpointError("checkpoint " + path + " has format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointFormatVersion));
  }
  if (j.value("kind", "") != kind) {
    throw CheckpointError("checkpoint " + path + " is not a '" + kind + "' checkpoint");
  }
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  json j = header("pretrain_model");
  j["encoder"] = {{"patch_len", model.cfg.patch_len},
                  {"feat_dim", model.cfg.feat_dim},
                  {"num_patches", model.cfg.num_patches},
                  {"d_model", model.cfg.d_model},
                  {"n_layers", model.cfg.n_layers},
                  {"n_heads", model.cfg.n_heads},
                  {"d_ff", model.cfg.d_ff},
                  {"dropout", model.cfg.dropout},
                  {"ln_eps", model.cfg.ln_eps}};
  j["patching"] = {{"active_threshold_deg", model.patching.active_threshold_deg},
                   {"noise_cap_deg", model.patching.noise_cap_deg},
                   {"cluster_gap", model.patching.cluster_gap},
                   {"patch_len", model.patching.patch_len},
                   {"num_patches", model.patching.num_patches}};
  j["direction_eps"] = model.direction_eps;
  j["norm_stats"] = {{"fitted", model.stats.fitted},
                     {"mean", model.stats.mean},
                     {"std", model.stats.std}};
  j["params"] = params_to_json(model.params);
  write_json(j, path);
}

Model load_model(const std::string& path) {
  const json j = load_and_check(path, "pretrain_model");
  EncoderConfig cfg;
  const json& e = j.at("encoder");
  cfg.patch_len = e.at("patch_len");
  cfg.feat_dim = e.at("feat_dim");
  cfg.num_patches = e.at("num_patches");
  cfg.d_model = e.at("d_model");
  cfg.n_layers = e.at("n_layers");
  cfg.n_heads = e.at("n_heads");
  cfg.d_ff = e.at("d_ff");
  cfg.dropout = e.at("dropout");
  cfg.ln_eps = e.at("ln_eps");

  PatchingConfig pc;
  const json& p = j.at("patching");
  pc.active_threshold_deg = p.at("active_threshold_deg");
  pc.noise_cap_deg = p.at("noise_cap_deg");
  pc.cluster_gap = p.at("cluster_gap");
  pc.patch_len = p.at("patch_len");
  pc.num_patches = p.at("num_patches");

  NormStats stats;
  const json& s = j.at("norm_stats");
  stats.fitted = s.at("fitted");
  const auto mean = s.at("mean").get<std::vector<double>>();
  const auto std = s.at("std").get<std::vector<double>>();
  if (mean.size() != kFeatureCount || std.size() != kFeatureCount) {
    throw CheckpointError("checkpoint: norm stats must have 6 features");
  }
  std::copy(mean.begin(), mean.end(), stats.mean.begin());
  std::copy(std.begin(), std.end(), stats.std.begin());

  Model model = Model::create(cfg, pc, stats, 0);
  model.direction_eps = j.at("direction_eps");
  params_from_json(j.at("params"), model.params);
  return model;
}

void save_ftp_head(const FtpHead& head, const std::string& path) {
  json j = header("head");
  j["head_kind"] = "ftp";
  j["h_max"] = head.h_max;
  j["d_model"] = head.d_model;
  j["params"] = params_to_json(head.params);
  write_json(j, path);
}

FtpHead load_ftp_head(const std::string& path) {
  const json j = load_and_check(path, "head");
  if (j.value("head_kind", "") != "ftp") throw CheckpointError("not an ftp head: " + path);
  FtpHead head = FtpHead::create(j.at("h_max"), j.at("d_model"), 0);
  params_from_json(j.at("params"), head.params);
  return head;
}

void save_fr_head(const FrHead& head, const std::string& path) {
  json j = header("head");
  j["head_kind"] = "fr";
  j["classes"] = head.classes;
  j["in_dim"] = head.mlp.in_dim;
  j["hidden"] = head.mlp.hidden;
  j["params"] = params_to_json(head.mlp.params);
  write_json(j, path);
}

FrHead load_fr_head(const std::string& path) {
  const json j = load_and_check(path, "head");
  if (j.value("head_kind", "") != "fr") throw CheckpointError("not an fr head: " + path);
  FrHead head = FrHead::create(j.at("classes").get<std::vector<std::string>>(), j.at("in_dim"),
                               j.at("hidden"), 0);
  params_from_json(j.at("params"), head.mlp.params);
  return head;
}

void save_ad_head(const AdHead& head, const std::string& path) {
  json j = header("head");
  j["head_kind"] = "ad";
  j["in_dim"] = head.mlp.in_dim;
  j["hidden"] = head.mlp.hidden;
  j["params"] = params_to_json(head.mlp.params);
  write_json(j, path);
}

AdHead load_ad_head(const std::string& path) {
  const json j = load_and_check(path, "head");
  if (j.value("head_kind", "") != "ad") throw CheckpointError("not an ad head: " + path);
  AdHead head = AdHead::create(j.at("in_dim"), j.at("hidden"), 0);
  params_from_json(j.at("params"), head.mlp.params);
  return head;
}

}  // namespace f2v
