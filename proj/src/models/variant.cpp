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

#include "shipdomain/models/variant.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <string>

#include "shipdomain/error.hpp"

namespace shipdomain::models {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kED: return "E-D";
    case Variant::kEADA: return "EA-DA";
    case Variant::kEDA: return "E-DA";
    case Variant::kEDDA: return "E-DDA";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "ED") return Variant::kED;
  if (key == "EADA") return Variant::kEADA;
  if (key == "EDA") return Variant::kEDA;
  if (key == "EDDA") return Variant::kEDDA;
  throw ValidationError("invalid variant name '" + std::string(name) +
                        "' (expected E-D, EA-DA, E-DA or E-DDA)");
}

void VariantConfig::validate() const {
  if (hidden_size < 1) throw ValidationError("hidden_size must be >= 1");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
}

void to_json(nlohmann::json& j, const VariantConfig& c) {
  j = nlohmann::json{{"variant", std::string(variant_name(c.variant))},
                     {"hidden_size", c.hidden_size},
                     {"horizon", c.horizon},
                     {"teacher_forcing", c.teacher_forcing},
                     {"include_self", c.include_self()},
                     {"seed", c.seed},
                     {"domain_init", c.domain_init}};
}

void from_json(const nlohmann::json& j, VariantConfig& c) {
  const VariantConfig d;
  c.variant = j.contains("variant") ? parse_variant(j.at("variant").get<std::string>()) : d.variant;
  c.hidden_size = j.value("hidden_size", d.hidden_size);
  c.horizon = j.value("horizon", d.horizon);
  c.teacher_forcing = j.value("teacher_forcing", d.teacher_forcing);
  c.seed = j.value("seed", d.seed);
  c.domain_init = j.value("domain_init", d.domain_init);
  if (j.contains("include_self") && j.at("include_self").get<bool>() != c.include_self()) {
    throw ValidationError("include_self is inconsistent with variant " +
                          std::string(variant_name(c.variant)));
  }
}

}  // namespace shipdomain::models
