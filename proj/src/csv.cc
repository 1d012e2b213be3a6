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

#include "texp/csv.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace texp {
namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& Schemas() {
  static const auto* schemas =
      new std::map<std::string, std::vector<std::string>, std::less<>>{
          {"projections", {"step", "neuron", "proj_e1", "proj_e2", "orth_fraction"}},
          {"objective", {"step", "value"}},
          {"histogram", {"bin_lo", "bin_hi", "count"}},
          {"sparsity", {"view", "index", "fraction"}},
          {"robustness", {"nu", "seed", "accuracy"}},
          {"sweep", {"alpha", "t_inf", "t_ratio", "clean_acc", "mean_robust_acc",
                     "min_robust_acc"}},
          {"gradcheck", {"check", "instances", "max_rel_error", "tolerance", "pass"}},
      };
  return *schemas;
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

const std::vector<std::string>& CsvSchema(std::string_view name) {
  const auto it = Schemas().find(name);
  if (it == Schemas().end()) {
    throw std::invalid_argument("unknown CSV schema: " + std::string(name));
  }
  return it->second;
}

bool HasCsvSchema(std::string_view name) {
  return Schemas().find(name) != Schemas().end();
}

std::string FormatReal(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string FormatCsvValue(const CsvValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) return FormatReal(*d);
  const auto& s = std::get<std::string>(value);
  if (s.find_first_of(",\n\"") != std::string::npos) {
    throw std::invalid_argument("CSV text fields may not contain , \" or newline");
  }
  return s;
}

std::string RenderCsv(const std::vector<CsvRecord>& records,
                      const std::vector<std::string>& header) {
  std::string out;
  for (size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (const auto& record : records) {
    if (record.size() != header.size()) {
      throw std::invalid_argument("record width " + std::to_string(record.size()) +
                                  " does not match header width " +
                                  std::to_string(header.size()));
    }
    for (size_t c = 0; c < record.size(); ++c) {
      if (c) out += ',';
      out += FormatCsvValue(record[c]);
    }
    out += '\n';
  }
  return out;
}

void EmitCsv(const std::vector<CsvRecord>& records,
             const std::vector<std::string>& header, const std::string& path) {
  const std::string text = RenderCsv(records, header);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void EmitCsv(const std::vector<CsvRecord>& records, std::string_view schema,
             const std::string& path) {
  EmitCsv(records, CsvSchema(schema), path);
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      table.header = SplitLine(line);
      have_header = true;
    } else {
      table.rows.push_back(SplitLine(line));
    }
  }
  if (!have_header) throw std::runtime_error("missing CSV header: " + path);
  return table;
}

double ParseReal(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' ||
      (errno == ERANGE && std::isinf(value))) {
    throw std::invalid_argument("not a real number: '" + text + "'");
  }
  return value;
}

}  // namespace texp
