// Copyright 2026 The TEXP Authors
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

#ifndef TEXP_CSV_H_
#define TEXP_CSV_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace texp {

using CsvValue = std::variant<std::int64_t, double, std::string>;
using CsvRecord = std::vector<CsvValue>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Column lists of the documented artifact schemas: projections, objective,
// histogram, sparsity, robustness, sweep, gradcheck.
const std::vector<std::string>& CsvSchema(std::string_view name);
bool HasCsvSchema(std::string_view name);

// Reals use 17 significant digits so a read-back reproduces them exactly.
std::string FormatReal(double value);
std::string FormatCsvValue(const CsvValue& value);

// Writes header + records. Throws std::invalid_argument on a record whose
// width differs from the schema and std::runtime_error on I/O failure.
void EmitCsv(const std::vector<CsvRecord>& records, std::string_view schema,
             const std::string& path);
void EmitCsv(const std::vector<CsvRecord>& records,
             const std::vector<std::string>& header, const std::string& path);

std::string RenderCsv(const std::vector<CsvRecord>& records,
                      const std::vector<std::string>& header);

// Lines starting with '#' are skipped.
CsvTable ReadCsv(const std::string& path);

double ParseReal(const std::string& text);

}  // namespace texp

#endif  // TEXP_CSV_H_
