// Copyright 2026 The rps Authors
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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "rps/config.hpp"
#include "rps/io.hpp"
#include "test_support.hpp"

namespace rps {
namespace {

TEST(Config, ParsesScalarsArraysAndComments) {
  const auto doc = ConfigDocument::parse(
      "# experiment\n"
      "name = \"fig # one\"   # trailing\n"
      "m = 10\n"
      "p = 0.25\n"
      "areas = true\n"
      "n_list = [200, 1000, 2000]\n"
      "baselines = [\"sps\", \"eoa\"]\n"
      "\n");
  EXPECT_EQ(doc.get_string("name"), "fig # one");
  EXPECT_EQ(doc.get_integer("m"), 10);
  EXPECT_EQ(doc.get_number("p"), 0.25);
  EXPECT_EQ(doc.get_bool("areas"), true);
  EXPECT_EQ(doc.get_numbers("n_list"), (std::vector<double>{200, 1000, 2000}));
  EXPECT_EQ(doc.get_strings("baselines"), (std::vector<std::string>{"sps", "eoa"}));
  EXPECT_FALSE(doc.get_string("missing").has_value());
}

TEST(Config, TypeMismatchesAreValidationErrors) {
  const auto doc = ConfigDocument::parse("m = 2.5\nname = \"x\"\n");
  EXPECT_RPS_ERROR(doc.get_integer("m"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(doc.get_number("name"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(doc.get_bool("m"), ErrorKind::kValidation);
}

TEST(Config, MalformedDocuments) {
  EXPECT_RPS_ERROR(ConfigDocument::parse("just words\n"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(ConfigDocument::parse("a = 1\na = 2\n"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(ConfigDocument::parse("a = \"open\n"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(ConfigDocument::parse("a = [1, 2\n"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(ConfigDocument::parse("a =\n"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(ConfigDocument::parse("a = bare\n"), ErrorKind::kValidation);
}

TEST(Config, SetAcceptsBareWordsAndLists) {
  auto doc = ConfigDocument::parse("noise = \"gaussian\"\n");
  doc.set("noise", "laplace");
  doc.set("n_list", "10,20");
  doc.set("seed", "7");
  EXPECT_EQ(doc.get_string("noise"), "laplace");
  EXPECT_EQ(doc.get_numbers("n_list"), (std::vector<double>{10, 20}));
  EXPECT_EQ(doc.get_integer("seed"), 7);
  doc.erase("seed");
  EXPECT_FALSE(doc.contains("seed"));
}

TEST(Config, CanonicalTextRoundTrips) {
  const auto doc = ConfigDocument::parse("z = 1\na = [0.1, 1e-300]\nb = \"s\"\nc = false\n");
  const auto text = doc.to_text();
  EXPECT_EQ(text.substr(0, 2), "a ");
  EXPECT_EQ(ConfigDocument::parse(text).to_text(), text);
  EXPECT_EQ(ConfigDocument::parse(text).get_numbers("a"), doc.get_numbers("a"));
}

TEST(Io, FormatDoubleRoundTripsExactly) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(gen) * std::pow(10.0, static_cast<double>(k % 40 - 20));
    EXPECT_EQ(io::parse_double(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(5.0), "5");
  EXPECT_EQ(io::parse_double("inf"), std::numeric_limits<double>::infinity());
}

TEST(Io, ParseErrors) {
  EXPECT_RPS_ERROR(io::parse_double("1.5x"), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(io::parse_double(""), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(io::parse_integer("3.0"), ErrorKind::kValidation);
  EXPECT_EQ(io::parse_integer(" 42 "), 42);
}

TEST(Io, SplitAndTrim) {
  const auto parts = io::split("a, b,,c", ',');
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(io::trim(parts[1]), "b");
  EXPECT_EQ(parts[2], "");
  EXPECT_EQ(io::trim("  \tx \n"), "x");
}

TEST(Io, AtomicWriteCreatesDirectoriesAndLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "rps_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const auto path = (dir / "out.txt").string();
  io::write_file_atomic(path, "first");
  io::write_file_atomic(path, "second");
  EXPECT_EQ(io::read_file(path), "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
  EXPECT_RPS_ERROR(io::read_file((dir / "missing").string()), ErrorKind::kIo);
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace rps
