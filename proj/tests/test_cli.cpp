// Copyright 2026 the pvqmac authors
// SPDX-License-Identifier: Apache-2.0
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
//
// End-to-end coverage of the command line tool: exit codes, stdout shape,
// determinism, and pipeline round-trips. Runs the real binary.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pvqmac/tensor.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("pvqmac_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CliResult run_cli(const std::string& args) {
  const fs::path out_path = work_dir() / "stdout.txt";
  const std::string command = std::string(PVQMAC_CLI_PATH) + " " + args + " > " +
                              out_path.string() + " 2> " +
                              (work_dir() / "stderr.txt").string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  return result;
}

}  // namespace

TEST_CASE("pulse statistics subcommand prints the reference row") {
  const CliResult r = run_cli("stats pulses --nb-max 8");
  CHECK(r.exit_code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "nb,avg,avg_2dp,max");
  bool saw_row7 = false;
  while (std::getline(is, line)) {
    if (line.rfind("7,", 0) == 0) {
      saw_row7 = true;
      CHECK(line.find(",2.77,") != std::string::npos);
      CHECK(line.substr(line.size() - 2) == ",4");
    }
  }
  CHECK(saw_row7);
}

TEST_CASE("quantize, encode, decode round-trips to the same codes") {
  const fs::path tensor_path = work_dir() / "weights.txt";
  const fs::path codes_path = work_dir() / "codes.txt";
  const fs::path container = work_dir() / "codes.pvqb";
  const fs::path decoded = work_dir() / "decoded.txt";

  CHECK(run_cli("synth --count 4608 --scale 1.0 --seed 5 --out " +
                tensor_path.string())
            .exit_code == 0);
  const CliResult q =
      run_cli("quantize " + tensor_path.string() + " --q-over-n 1.5 --out " +
              codes_path.string());
  CHECK(q.exit_code == 0);

  // The sidecar records a radius of 1.5 * 4608.
  const std::string sidecar = read_file(codes_path.string() + ".meta");
  CHECK(sidecar.find("q=6912") != std::string::npos);
  CHECK(sidecar.find("n=4608") != std::string::npos);

  const CliResult enc = run_cli("encode " + codes_path.string() +
                                " --mode weights --sidecar " + codes_path.string() +
                                ".meta --out " + container.string());
  CHECK(enc.exit_code == 0);
  CHECK(enc.out == container.string() + "\n");

  const CliResult dec =
      run_cli("decode " + container.string() + " --out " + decoded.string());
  CHECK(dec.exit_code == 0);
  CHECK(dec.out.find("q=6912") != std::string::npos);

  using namespace pvqmac;
  const WeightTensor a = load_tensor(codes_path, TensorFormat::text);
  const WeightTensor b = load_tensor(decoded, TensorFormat::text);
  CHECK(a.ints().size() == b.ints().size());
  bool equal = true;
  for (std::size_t i = 0; i < a.ints().size(); ++i) {
    equal = equal && (a.ints()[i] == b.ints()[i]);
  }
  CHECK(equal);
}

TEST_CASE("real tensors quantize inside encode") {
  const fs::path tensor_path = work_dir() / "direct.txt";
  const fs::path container = work_dir() / "direct.pvqb";
  const fs::path codes_path = work_dir() / "direct_codes.txt";
  const fs::path decoded_path = work_dir() / "direct_decoded.txt";
  CHECK(run_cli("synth --count 512 --seed 11 --out " + tensor_path.string())
            .exit_code == 0);
  CHECK(run_cli("encode " + tensor_path.string() + " --mode bitlayers --out " +
                container.string())
            .exit_code == 0);
  const CliResult dec =
      run_cli("decode " + container.string() + " --out " + decoded_path.string());
  CHECK(dec.exit_code == 0);
  CHECK(dec.out.find("q=768") != std::string::npos);  // 1.5 * 512
  CHECK(dec.out.find("mode=bitlayers") != std::string::npos);

  // Decoding recovers exactly what a standalone quantize produces.
  CHECK(run_cli("quantize " + tensor_path.string() + " --out " + codes_path.string())
            .exit_code == 0);
  using namespace pvqmac;
  const WeightTensor expected = load_tensor(codes_path, TensorFormat::text);
  const WeightTensor decoded = load_tensor(decoded_path, TensorFormat::text);
  REQUIRE(decoded.ints().size() == expected.ints().size());
  bool equal = true;
  for (std::size_t i = 0; i < expected.ints().size(); ++i) {
    equal = equal && (decoded.ints()[i] == expected.ints()[i]);
  }
  CHECK(equal);
}

TEST_CASE("simulate prints one report line per run") {
  const fs::path w = work_dir() / "w.txt";
  const fs::path x = work_dir() / "x.txt";
  std::ofstream(w) << "# shape 5\n1 27 7 0 2\n";
  std::ofstream(x) << "# shape 5\n1 1 1 1 1\n";
  for (const std::string engine : {"naive", "zeroskip", "accum", "blmac", "serial"}) {
    const CliResult r = run_cli("simulate --weights " + w.string() + " --inputs " +
                                x.string() + " --engine " + engine);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find(engine + ",37,") != std::string::npos);
  }
  const CliResult lsb = run_cli("simulate --weights " + w.string() + " --inputs " +
                                x.string() + " --engine blmac --direction lsb");
  CHECK(lsb.out.find("blmac,37,") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical output") {
  const fs::path layers = work_dir() / "net.txt";
  std::ofstream(layers) << "a 4x4x4 10\nb 8x8 3\n";
  const std::string args = "stats cycles --layers " + layers.string() + " --seed 3";
  const CliResult first = run_cli(args);
  const CliResult second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out.find("layer,n,q,nz,ns_pulses,ns_cycles,positions") == 0);

  const fs::path t = work_dir() / "det.txt";
  const fs::path c1 = work_dir() / "det1.pvqb";
  const fs::path c2 = work_dir() / "det2.pvqb";
  run_cli("synth --count 256 --seed 9 --out " + t.string());
  run_cli("encode " + t.string() + " --out " + c1.string());
  run_cli("encode " + t.string() + " --out " + c2.string());
  CHECK(read_file(c1) == read_file(c2));
  CHECK(!read_file(c1).empty());
}

TEST_CASE("histogram and compression subcommands emit their tables") {
  const fs::path t = work_dir() / "hsrc.txt";
  const fs::path codes = work_dir() / "hcodes.txt";
  run_cli("synth --count 1024 --seed 21 --out " + t.string());
  run_cli("quantize " + t.string() + " --out " + codes.string());
  const CliResult hist = run_cli("stats hist --input " + codes.string());
  CHECK(hist.exit_code == 0);
  CHECK(hist.out.rfind("total,pct_0,", 0) == 0);

  const CliResult comp = run_cli("stats compress --input " + codes.string() +
                                 " --sidecar " + codes.string() + ".meta");
  CHECK(comp.exit_code == 0);
  CHECK(comp.out.find("weight_level,1024,") != std::string::npos);
  CHECK(comp.out.find("bit_layer,1024,") != std::string::npos);
}

TEST_CASE("fir subcommand writes the ops table and both curves") {
  const fs::path prefix = work_dir() / "fir";
  const CliResult r = run_cli("fir --taps 97 --low 220 --high 400 --fs 2000 --q 500 "
                              "--grid-points 64 --out-prefix " +
                              prefix.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("operations,mac,blmac,pvq,pvq_blmac") == 0);
  CHECK(r.out.find("additions,97,") != std::string::npos);
  CHECK(r.out.find(",500,") != std::string::npos);
  CHECK(fs::exists(prefix.string() + "_ops.csv"));
  const std::string orig = read_file(prefix.string() + "_orig.csv");
  CHECK(orig.rfind("freq_hz,magnitude_db", 0) == 0);
  CHECK(fs::exists(prefix.string() + "_pvq.csv"));
}

TEST_CASE("usage problems exit 1, data problems exit 2") {
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("stats pulses --no-such-flag").exit_code == 1);
  CHECK(run_cli("decode " + (work_dir() / "missing.pvqb").string()).exit_code == 2);

  const fs::path bad = work_dir() / "bad.txt";
  std::ofstream(bad) << "# shape 2 2\n1 2 3\n";  // shape/data mismatch
  CHECK(run_cli("quantize " + bad.string() + " --out " +
                (work_dir() / "nope.txt").string())
            .exit_code == 2);

  // Quantizing an all-zero tensor is a degenerate-input usage error.
  const fs::path zeros = work_dir() / "zeros.txt";
  std::ofstream(zeros) << "# shape 3\n0.0 0.0 0.0\n";
  CHECK(run_cli("quantize " + zeros.string() + " --out " +
                (work_dir() / "nope2.txt").string())
            .exit_code == 1);
}
