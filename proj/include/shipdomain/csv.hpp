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
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the CSV readers and writers.
namespace shipdomain::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');

// Parses a full field as a double; throws ValidationError otherwise.
double to_double(std::string_view field);
std::int64_t to_int(std::string_view field);

// Reads all lines, dropping trailing '\r', blank lines and '#' comments.
std::vector<std::string> read_data_lines(const std::filesystem::path& path);

// Shortest representation that round-trips; "inf"/"-inf" for infinities.
std::string format_double(double v);

// 64-bit FNV-1a, hex-encoded. Used to stamp artifacts with their config.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace shipdomain::csv
