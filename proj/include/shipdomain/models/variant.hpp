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
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace shipdomain::models {

// E-D: plain encoder-decoder with temporal attention, no ship-to-ship term.
// EA-DA: ship-domain fusion in encoder and decoder, N_i = V.
// E-DA: ship-domain fusion in the decoder only, N_i = V.
// E-DDA: interaction-blind decoder plus an attention decoder fusing foreign
//        vessels only, N_i = V \ {i}.
enum class Variant { kED, kEADA, kEDA, kEDDA };

std::string_view variant_name(Variant v);
// Accepts "E-D", "EA-DA", "E-DA", "E-DDA" (case-insensitive, dash optional).
// Throws ValidationError otherwise.
Variant parse_variant(std::string_view name);

struct VariantConfig {
  Variant variant = Variant::kEDA;
  int hidden_size = 64;
  int horizon = 5;  // T_obs = T_pred
  bool teacher_forcing = true;
  std::uint64_t seed = 1;
  double domain_init = 0.1;

  bool has_domain() const { return variant != Variant::kED; }
  bool encoder_fusion() const { return variant == Variant::kEADA; }
  bool decoder_fusion() const { return variant != Variant::kED; }
  bool dual_decoder() const { return variant == Variant::kEDDA; }
  // Whether the neighbor set contains the vessel itself.
  bool include_self() const { return variant == Variant::kEADA || variant == Variant::kEDA; }

  // Throws ValidationError for hidden_size < 1 or horizon < 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const VariantConfig& c);
void from_json(const nlohmann::json& j, VariantConfig& c);

}  // namespace shipdomain::models
