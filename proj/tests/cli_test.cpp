/*
 * Copyright 2026 The Blindfair Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// End-to-end tests of the blindfair binary (path from BLINDFAIR_BIN).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* p = std::getenv("BLINDFAIR_BIN");
  REQUIRE(p != nullptr);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::vector<char>((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bf_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string s(const std::string& sub) const { return (path / sub).string(); }
  static inline int counter = 0;
};

}  // namespace

TEST_CASE("dealer writes deterministic paired triple files") {
  TempDir tmp;
  CHECK(run("dealer --out-prefix " + tmp.s("a") +
            " --scalar 10 --and 20 --shape 2,3,4=2 --seed 5") == 0);
  CHECK(run("dealer --out-prefix " + tmp.s("b") +
            " --scalar 10 --and 20 --shape 2,3,4=2 --seed 5") == 0);
  CHECK(slurp(tmp.s("a.p1")) == slurp(tmp.s("b.p1")));
  CHECK(slurp(tmp.s("a.p2")) == slurp(tmp.s("b.p2")));
  CHECK(slurp(tmp.s("a.p1")) != slurp(tmp.s("a.p2")));
}

TEST_CASE("loopback train, certify, verify pipeline") {
  TempDir tmp;
  const std::string data = " --n 64 --n-test 64 --seed 4 ";
  CHECK(run("train --loopback --mode exact --epochs 2" + data + "--out " +
            tmp.s("train")) == 0);
  CHECK(fs::exists(tmp.s("train/theta.bin")));
  CHECK(fs::exists(tmp.s("train/manifest.json")));

  CHECK(run("certify --loopback --mode exact" + data + "--theta-in " +
            tmp.s("train/theta.bin") + " --cert-out " + tmp.s("cert.bin") +
            " --out " + tmp.s("certify")) == 0);
  CHECK(fs::exists(tmp.s("cert.bin")));

  CHECK(run("verify --loopback --mode exact" + data + "--theta-in " +
            tmp.s("train/theta.bin") + " --cert-in " + tmp.s("cert.bin") +
            " --x-index 1 --out " + tmp.s("verify")) == 0);
}

TEST_CASE("exact-mode training is bit-reproducible") {
  TempDir tmp;
  const std::string data = " --n 64 --n-test 16 --seed 8 --epochs 2 ";
  CHECK(run("train --loopback --mode exact" + data + "--out " +
            tmp.s("r1")) == 0);
  CHECK(run("train --loopback --mode exact" + data + "--out " +
            tmp.s("r2")) == 0);
  CHECK(slurp(tmp.s("r1/theta.bin")) == slurp(tmp.s("r2/theta.bin")));
}

TEST_CASE("BLINDFAIR_SEED overrides the flag seed") {
  TempDir tmp;
  // The learning rate must be large enough that one epoch moves theta by
  // more than a few ulps, otherwise distinct seeds round to the same model.
  const std::string data = " --n 64 --n-test 16 --epochs 2 --eta-theta 0.05 ";
  CHECK(std::system((std::string("BLINDFAIR_SEED=42 ") + bin() +
                     " train --loopback --mode exact --seed 1" + data +
                     "--out " + tmp.s("env") + " >/dev/null 2>&1")
                        .c_str()) == 0);
  CHECK(run("train --loopback --mode exact --seed 42" + data + "--out " +
            tmp.s("flag")) == 0);
  CHECK(run("train --loopback --mode exact --seed 1" + data + "--out " +
            tmp.s("one")) == 0);
  CHECK(slurp(tmp.s("env/theta.bin")) == slurp(tmp.s("flag/theta.bin")));
  CHECK(slurp(tmp.s("env/theta.bin")) != slurp(tmp.s("one/theta.bin")));
}

TEST_CASE("verify with a tampered certificate exits with the stable code") {
  TempDir tmp;
  const std::string data = " --n 64 --n-test 64 --seed 4 ";
  REQUIRE(run("train --loopback --mode exact --epochs 2" + data + "--out " +
              tmp.s("train")) == 0);
  REQUIRE(run("certify --loopback --mode exact" + data + "--theta-in " +
              tmp.s("train/theta.bin") + " --cert-out " + tmp.s("cert.bin") +
              " --out " + tmp.s("certify")) == 0);
  {
    std::fstream f(tmp.s("cert.bin"),
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');  // break the magic
  }
  CHECK(run("verify --loopback --mode exact" + data + "--theta-in " +
            tmp.s("train/theta.bin") + " --cert-in " + tmp.s("cert.bin") +
            " --x-index 0 --out " + tmp.s("verify")) == 21);  // IntegrityError
  CHECK(run("verify --loopback --mode exact" + data + "--theta-in " +
            tmp.s("train/theta.bin") + " --cert-in " + tmp.s("missing.bin") +
            " --x-index 0 --out " + tmp.s("verify2")) == 20);  // NoCertificate
}

TEST_CASE("missing theta file exits with the IOError code") {
  TempDir tmp;
  CHECK(run("certify --loopback --n 64 --n-test 16 --theta-in " +
            tmp.s("nope.bin") + " --cert-out " + tmp.s("c.bin") + " --out " +
            tmp.s("out")) == 22);
}

TEST_CASE("bench emits one CSV row per configuration point") {
  TempDir tmp;
  CHECK(run("bench --optimizer lagrange --sweep-c 0.01 1.0 --sweep-steps 3 "
            "--epochs 2 --n 64 --n-test 64 --out " +
            tmp.s("bench")) == 0);
  std::ifstream f(tmp.s("bench/sweep.csv"));
  REQUIRE(f.good());
  std::string line;
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  // Header + 3 sweep points x (float, fixed).
  CHECK(rows == 1 + 3 * 2);
}

TEST_CASE("networked train over TCP matches loopback") {
  TempDir tmp;
  const std::string data = " --n 64 --n-test 16 --seed 6 --epochs 1 ";
  REQUIRE(run("dealer --out-prefix " + tmp.s("t") +
              " --budget train --n 64 --d 4 --p 1 --epochs 1 --seed 6") == 0);
  const std::string addr = "127.0.0.1:19771";
  const std::string reg_cmd =
      bin() + " train --role regulator --listen " + addr + " --triples " +
      tmp.s("t.p2") + " --mode exact" + data + "--out " + tmp.s("reg") +
      " >/dev/null 2>&1 &";
  REQUIRE(std::system(reg_cmd.c_str()) == 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(run("train --role modeler --connect " + addr + " --triples " +
            tmp.s("t.p1") + " --mode exact" + data + "--out " +
            tmp.s("mod")) == 0);
  CHECK(run("train --loopback --mode exact" + data + "--out " +
            tmp.s("loop")) == 0);
  CHECK(slurp(tmp.s("mod/theta.bin")) == slurp(tmp.s("loop/theta.bin")));
}
