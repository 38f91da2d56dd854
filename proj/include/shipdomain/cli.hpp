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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "shipdomain/models/variant.hpp"
#include "shipdomain/traffic.hpp"

// Command layer behind the `shipdomain` executable.
namespace shipdomain::cli {

struct Paths {
  std::string output_dir = "out";
  std::string dataset_dir;   // defaults to output_dir
  std::string axis_csv;      // optional; generated from the axis config otherwise
  std::string axis_sidecar;
  std::string ingest_csv;    // gen: ingest this file instead of simulating
  std::string checkpoint;
};

struct TrainingOptions {
  int epochs = 100;
  double learning_rate = 1e-3;
};

struct EvalOptions {
  std::string split = "test";
  std::vector<std::string> checkpoints;  // eval: falls back to paths.checkpoint
  std::size_t workers = 1;
};

struct ProbeOptions {
  std::string situation_id;  // empty: first window with two vessels
  int start_minute = -1;     // negative: first window holding both vessels
  std::string target;        // empty: first vessel of the window
  std::string neighbor;      // empty: second vessel of the window
  std::string kind = "removal";
  double value = 0.0;
};

struct GradcheckOptions {
  int hidden_size = 8;
  int horizon = 3;
  double tolerance = 1e-4;
  // Empty: all four variants.
  std::vector<std::string> variants;
};

// Precedence: built-in defaults, then the JSON config file, then flags.
struct RunConfig {
  std::uint64_t seed = 1;
  Paths paths;
  models::VariantConfig variant;
  traffic::GenConfig generator;
  TrainingOptions training;
  EvalOptions evaluation;
  ProbeOptions probe;
  GradcheckOptions gradcheck;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Throws ValidationError when the file is missing or malformed.
RunConfig load_run_config(const std::filesystem::path& path);

// FNV-1a over the canonical JSON of everything that influences results;
// paths, checkpoint lists and the worker count are excluded.
std::string config_hash(const RunConfig& c);
// "config_hash=<hex> seed=<n>"
std::string stamp(const RunConfig& c);

// Each command writes only under paths.output_dir and throws
// ValidationError / RuntimeFailure on failure.
void cmd_gen(const RunConfig& c);
void cmd_train(const RunConfig& c);
void cmd_eval(const RunConfig& c);
void cmd_domain(const RunConfig& c);
void cmd_probe(const RunConfig& c);
// Returns false when any variant fails the check.
bool cmd_gradcheck(const RunConfig& c);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Full entry point: parses `args` (without the program name), runs the
// subcommand and maps failures to exit codes.
int run(std::span<const std::string> args);

}  // namespace shipdomain::cli
