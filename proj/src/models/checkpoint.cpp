// Copyright 2026 The shipdomain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shipdomain/models/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shipdomain/error.hpp"

namespace shipdomain::models {
namespace {

constexpr std::string_view kMagic = "SDCKPT";

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

nlohmann::json meta_json(const TrainingMetadata& m) {
  return {{"epochs_run", m.epochs_run}, {"best_epoch", m.best_epoch},   {"final_loss", m.final_loss},
          {"best_val_loss", m.best_val_loss}, {"seed", m.seed}, {"config_hash", m.config_hash}};
}

TrainingMetadata meta_from(const nlohmann::json& j) {
  TrainingMetadata m;
  m.epochs_run = j.at("epochs_run").get<int>();
  m.best_epoch = j.at("best_epoch").get<int>();
  m.final_loss = j.at("final_loss").get<double>();
  m.best_val_loss = j.at("best_val_loss").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  return m;
}

}  // namespace

ModelCheckpoint ModelCheckpoint::from_model(const TrajectoryModel& model, TrainingMetadata meta) {
  ModelCheckpoint c;
  c.config = model.config();
  c.normalizer = model.normalizer();
  c.params = model.parameters();
  c.metadata = std::move(meta);
  return c;
}

TrajectoryModel ModelCheckpoint::model() const { return TrajectoryModel(config, normalizer, params); }

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  // Reject inconsistent tensor sets before anything is written.
  (void)ckpt.model();
  nlohmann::json manifest = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& p = ckpt.params[i];
    manifest.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}, {"count", p.value.size()}});
    offset += p.value.size() * sizeof(double);
  }
  nlohmann::json header = {{"format", "shipdomain-checkpoint"},
                           {"version", kCheckpointVersion},
                           {"config", ckpt.config},
                           {"normalizer", ckpt.normalizer},
                           {"metadata", meta_json(ckpt.metadata)},
                           {"payload_bytes", offset},
                           {"tensors", manifest}};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
  out << kMagic << '\n' << header.dump() << '\n';
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (double v : ckpt.params[i].value.data()) {
      std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw RuntimeFailure("failed writing checkpoint " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("checkpoint not found: " + path.string());
  std::string magic, header_line;
  if (!std::getline(in, magic) || magic != kMagic) throw ValidationError("corrupt checkpoint: bad magic");
  if (!std::getline(in, header_line)) throw ValidationError("corrupt checkpoint: missing header");
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt checkpoint header: ") + e.what());
  }

  ModelCheckpoint ckpt;
  try {
    if (header.at("format").get<std::string>() != "shipdomain-checkpoint") {
      throw ValidationError("corrupt checkpoint: unknown format");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }
    ckpt.config = header.at("config").get<VariantConfig>();
    ckpt.normalizer = header.at("normalizer").get<traffic::Normalizer>();
    ckpt.metadata = meta_from(header.at("metadata"));
    const auto payload_bytes = header.at("payload_bytes").get<std::size_t>();
    if (payload_bytes != payload.size()) throw ValidationError("corrupt checkpoint: payload size mismatch");

    std::size_t expected_offset = 0;
    for (const auto& t : header.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto count = t.at("count").get<std::size_t>();
      if (offset != expected_offset) throw ValidationError("corrupt checkpoint: bad offset for " + name);
      if (count > (payload.size() - offset) / sizeof(double)) {
        throw ValidationError("corrupt checkpoint: tensor " + name + " exceeds payload");
      }
      std::size_t prod = shape.empty() ? 0 : 1;
      for (std::size_t d : shape) prod = d == 0 || prod > count ? count + 1 : prod * d;
      if (shape.empty() || shape.size() > 3 || prod != count) {
        throw ValidationError("corrupt checkpoint: shape does not match count for " + name);
      }
      if (ckpt.params.find(name) != nullptr) throw ValidationError("corrupt checkpoint: duplicate tensor " + name);
      auto& p = ckpt.params.add(name, shape);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, payload.data() + offset + i * sizeof bits, sizeof bits);
        p.value[i] = std::bit_cast<double>(to_le(bits));
      }
      expected_offset += count * sizeof(double);
    }
    if (expected_offset != payload.size()) throw ValidationError("corrupt checkpoint: trailing payload");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt checkpoint header: ") + e.what());
  }
  (void)ckpt.model();
  return ckpt;
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path, const VariantConfig& expected) {
  ModelCheckpoint ckpt = load_checkpoint(path);
  if (ckpt.config.variant != expected.variant) {
    throw ValidationError("checkpoint holds variant " + std::string(variant_name(ckpt.config.variant)) +
                          ", expected " + std::string(variant_name(expected.variant)));
  }
  if (ckpt.config.hidden_size != expected.hidden_size || ckpt.config.horizon != expected.horizon) {
    throw ValidationError("checkpoint dimensions do not match the requested configuration");
  }
  return ckpt;
}

}  // namespace shipdomain::models
