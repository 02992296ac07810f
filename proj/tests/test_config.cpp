// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lstab/benchmarks.hpp"
#include "lstab/config.hpp"

using namespace lstab;

TEST_CASE("config parsing with sections") {
  std::istringstream in(
      "# comment\n"
      "top = 1\n"
      "[problem]\n"
      "catalog = test1\n"
      "k = 1600\n"
      "[stabilization]\n"
      "kind = tbt\n");
  RunConfig config = RunConfig::from_stream(in);
  CHECK(config.take_or("top", "") == "1");
  CHECK(config.take_or("problem.catalog", "") == "test1");
  CHECK(config.take_double("problem.k", 0) == 1600.0);
  CHECK(config.take_or("stabilization.kind", "") == "tbt");
  CHECK_NOTHROW(config.finish());
}

TEST_CASE("unknown keys are rejected") {
  std::istringstream in("[problem]\ncatalog = test1\ntypo_key = 3\n");
  RunConfig config = RunConfig::from_stream(in);
  config.take("problem.catalog");
  CHECK_THROWS_WITH_AS(config.finish(), doctest::Contains("problem.typo_key"),
                       std::invalid_argument);
}

TEST_CASE("malformed lines carry the line number") {
  std::istringstream in("[problem\n");
  CHECK_THROWS_WITH_AS(RunConfig::from_stream(in), doctest::Contains("line 1"),
                       std::invalid_argument);
  std::istringstream in2("a = 1\nnonsense\n");
  CHECK_THROWS_WITH_AS(RunConfig::from_stream(in2), doctest::Contains("line 2"),
                       std::invalid_argument);
}

TEST_CASE("typed getters validate") {
  std::istringstream in("n = abc\nflag = yes\n");
  RunConfig config = RunConfig::from_stream(in);
  CHECK_THROWS_AS(config.take_int("n", 0), std::exception);
  CHECK(config.take_bool("flag", false));
}

TEST_CASE("atomic write replaces the file completely") {
  const std::string path = "test_config_atomic.txt";
  atomic_write_file(path, "first\n");
  atomic_write_file(path, "second\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second\n");
  std::remove(path.c_str());
}

TEST_CASE("velocity file round trip and validation") {
  NodalVelocity v;
  v.values.resize(3, 2);
  v.values << 1.0, 2.0, -0.5, 0.25, 1e-30, 3.0;
  std::ostringstream out;
  write_velocity_file(out, v, 2);
  std::istringstream in(out.str());
  const NodalVelocity back = read_velocity_file(in);
  CHECK(back.values.rows() == 3);
  CHECK((back.values.array() == v.values.array()).all());

  std::istringstream bad("velocity 2 2\n1 2\n");
  CHECK_THROWS_AS(read_velocity_file(bad), std::invalid_argument);
}
