#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sslp/models.hpp"

namespace sslp::nn {

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

// Single-file archive: a JSON manifest followed by named float tensors.
// Tensor names follow the dotted component.layer.index.kind scheme, e.g.
// "encoder.block.0.conv.weight" or "prior_projector.linear.1.bias";
// optimizer moments use "opt.m." / "opt.v." prefixes.
struct CheckpointData {
  nlohmann::json manifest;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
};

// Writes are atomic (temp file + rename).
void save_checkpoint(const std::string& path, const CheckpointData& ck);
CheckpointData load_checkpoint(const std::string& path);

// parameters + batchnorm running statistics
std::vector<NamedTensor> bundle_tensors(ModelBundle& bundle);
// strict: every bundle tensor must be present with a matching shape
void load_bundle_tensors(ModelBundle& bundle, const CheckpointData& ck);

nlohmann::json bundle_manifest(const ModelBundle& bundle);
ModelBundle bundle_from_manifest(const nlohmann::json& manifest);

// FNV-1a of a whole file, for provenance-encoding file names.
std::uint64_t file_hash(const std::string& path);
std::string hash_hex(std::uint64_t h, int digits = 8);

}  // namespace sslp::nn
