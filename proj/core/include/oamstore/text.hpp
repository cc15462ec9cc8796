// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OAMSTORE_TEXT_HPP
#define OAMSTORE_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace oamstore::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
std::string format_int(std::int64_t value);

/// Strict parsers: the whole field must be consumed. `what` names the field in
/// the error message.
double parse_double(std::string_view field, std::string_view what);
std::int64_t parse_int(std::string_view field, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Splits text into lines, accepting both \n and \r\n. A trailing newline does
/// not produce an empty final line.
std::vector<std::string_view> lines(std::string_view content);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace oamstore::text

#endif
