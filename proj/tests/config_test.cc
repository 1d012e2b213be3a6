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

#include "texp/config.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace texp {
namespace {

std::string ErrorOf(const auto& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("parse keys, comments and blank lines") {
  const ConfigFile cfg = ConfigFile::Parse(
      "# header\n"
      "experiment = toy1\n"
      "\n"
      "train.lr = 0.05   # trailing comment\n"
      "  eval.nu=0, 0.1,0.2  \n");
  CHECK(cfg.GetString("experiment") == "toy1");
  CHECK(cfg.GetReal("train.lr") == 0.05);
  CHECK(cfg.GetRealList("eval.nu") == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(cfg.values().size() == 3);
}

TEST_CASE("typed getters") {
  ConfigFile cfg;
  cfg.Set("a", "12");
  cfg.Set("b", "yes");
  cfg.Set("c", "0");
  cfg.Set("d", "");
  cfg.Set("e", "1, 2, 3");
  cfg.Set("f", "-4");
  CHECK(cfg.GetInt("a") == 12);
  CHECK(cfg.GetUnsigned("a") == 12u);
  CHECK(cfg.GetBool("b"));
  CHECK_FALSE(cfg.GetBool("c"));
  CHECK(cfg.GetIntList("d").empty());
  CHECK(cfg.GetIntList("e") == std::vector<int>{1, 2, 3});
  CHECK(cfg.GetInt("f") == -4);
  CHECK_THROWS_AS(cfg.GetUnsigned("f"), ConfigError);
  CHECK_THROWS_AS(cfg.GetBool("a"), ConfigError);
  CHECK_THROWS_AS(cfg.GetInt("e"), ConfigError);
}

TEST_CASE("errors name the key or the line") {
  ConfigFile cfg;
  cfg.Set("train.lr", "fast");
  CHECK(ErrorOf([&] { cfg.GetReal("train.lr"); }).rfind("train.lr: ", 0) == 0);
  CHECK(ErrorOf([&] { cfg.GetReal("train.steps"); }).rfind("train.steps: ", 0) == 0);
  CHECK(ErrorOf([] { ConfigFile::Parse("a = 1\nnot an assignment\n", "run.cfg"); })
            .rfind("run.cfg:2", 0) == 0);
  CHECK(ErrorOf([] { ConfigFile::Parse("a = 1\na = 2\n", "run.cfg"); })
            .rfind("run.cfg:2", 0) == 0);
  CHECK(ErrorOf([] { ConfigFile::Parse(" = 2\n", "run.cfg"); }).rfind("run.cfg:1", 0) == 0);
}

TEST_CASE("merge with known keys only") {
  ConfigFile base = ConfigFile::Parse("a = 1\nb = 2\n");
  base.Merge(ConfigFile::Parse("b = 3\n"), true);
  CHECK(base.GetInt("b") == 3);
  CHECK(ErrorOf([&] { base.Merge(ConfigFile::Parse("c = 3\n"), true); }).rfind("c: ", 0) ==
        0);
  base.Merge(ConfigFile::Parse("c = 3\n"), false);
  CHECK(base.GetInt("c") == 3);
}

TEST_CASE("assignments and canonical form") {
  ConfigFile cfg;
  cfg.SetAssignment("z.key = 1");
  cfg.SetAssignment("a=two words");
  CHECK(cfg.Canonical() == "a = two words\nz.key = 1\n");
  CHECK_THROWS_AS(cfg.SetAssignment("novalue"), ConfigError);
  CHECK(Trim("  x y \t") == "x y");
}

TEST_CASE("load from file") {
  const auto path = std::filesystem::temp_directory_path() / "texp_config_test.cfg";
  {
    std::ofstream out(path);
    out << "seed = 7\n";
  }
  CHECK(ConfigFile::Load(path.string()).GetInt("seed") == 7);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ConfigFile::Load(path.string()), ConfigError);
}

}  // namespace
}  // namespace texp
