// Copyright 2026 The cisimkit Authors.
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

#ifndef CISIMKIT_CSV_H_
#define CISIMKIT_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cisimkit {

using CsvRow = std::vector<std::string>;

// RFC 4180 subset: comma separator, double-quoted fields with "" escapes,
// LF or CRLF line ends. Lines starting with '#' outside a quoted field are
// returned like any other row; callers decide whether they are comments.
std::vector<CsvRow> ParseCsv(std::string_view text);
std::vector<CsvRow> ReadCsv(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote or line break.
std::string CsvField(std::string_view field);
std::string CsvLine(const CsvRow& row);

// Index of `name` in a header row; throws Error naming the file context.
std::size_t CsvColumn(const CsvRow& header, std::string_view name, std::string_view context);

// Writes atomically: temp file in the same directory, then rename.
void WriteTextFile(const std::filesystem::path& path, std::string_view contents);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace cisimkit

#endif  // CISIMKIT_CSV_H_
