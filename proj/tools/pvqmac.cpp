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
// Command line front end: tensor synthesis, pyramid quantization, weight
// compression, engine simulation and the report generators.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvqmac/analysis.hpp"
#include "pvqmac/engines.hpp"
#include "pvqmac/error.hpp"
#include "pvqmac/pvq.hpp"
#include "pvqmac/rle.hpp"
#include "pvqmac/sdr.hpp"
#include "pvqmac/tensor.hpp"

namespace {

using namespace pvqmac;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

WeightTensor load_auto(const std::string& path) {
  return load_tensor(path, detect_format(path));
}

TensorFormat parse_format(const std::string& name) {
  if (name == "text") return TensorFormat::text;
  if (name == "binary") return TensorFormat::binary;
  throw ArgumentError("unknown tensor format '" + name + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failure on " + path);
}

void emit(const std::string& content, const std::string& out_path) {
  std::cout << content;
  if (!out_path.empty()) write_file(out_path, content);
}

std::vector<std::int64_t> codes_from_tensor(const WeightTensor& t) {
  auto ints = t.ints();
  return {ints.begin(), ints.end()};
}

// One network layer per line: "<label> <d0>x<d1>x... <output positions>",
// '#' starts a comment.
struct NetLayer {
  std::string label;
  std::vector<std::uint32_t> shape;
  std::uint64_t positions = 1;
};

std::vector<NetLayer> load_net_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<NetLayer> layers;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    NetLayer layer;
    std::string shape_text;
    if (!(ls >> layer.label)) continue;  // blank line
    if (!(ls >> shape_text >> layer.positions) || layer.positions < 1) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected '<label> <d0>x<d1>x... <positions>'");
    }
    std::istringstream ss(shape_text);
    std::string dim;
    while (std::getline(ss, dim, 'x')) {
      unsigned long v = 0;
      try {
        v = std::stoul(dim);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad dimension '" + dim + "'");
      }
      if (v == 0) {
        throw DataError(path + ":" + std::to_string(lineno) + ": zero dimension");
      }
      layer.shape.push_back(static_cast<std::uint32_t>(v));
    }
    if (layer.shape.empty()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": empty shape");
    }
    layers.push_back(std::move(layer));
  }
  if (layers.empty()) throw DataError(path + ": no layers listed");
  return layers;
}

std::string report_csv(const EngineReport& r, const std::string& engine) {
  std::ostringstream os;
  os << "engine,value,scaled_value,adds,subs,shifts,mults,cycles,policy\n";
  os << engine << ',' << r.value << ',';
  if (r.scaled_value.has_value()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *r.scaled_value);
    os << buf;
  }
  os << ',' << r.adds << ',' << r.subs << ',' << r.shifts << ',' << r.mults << ','
     << r.cycles() << ','
     << (r.policy == CyclePolicy::shift_counted ? "counted" : "folded") << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t count = 0;
  double scale = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "text";
};

int run_synth(const SynthArgs& a) {
  save_tensor(synth_laplacian(a.count, a.scale, a.seed), a.out, parse_format(a.format));
  std::cout << a.out << "\n";
  return kExitOk;
}

struct QuantizeArgs {
  std::string input;
  std::string ratio = "3/2";
  std::string out;
  std::string sidecar;
  std::string format = "text";
};

int run_quantize(const QuantizeArgs& a) {
  const WeightTensor tensor = load_auto(a.input);
  const PvqVector v = pvq_quantize_tensor(tensor, Rational::parse(a.ratio));
  const WeightTensor codes = WeightTensor::integer(
      tensor.shape(), std::vector<std::int64_t>(v.codes.begin(), v.codes.end()));
  save_tensor(codes, a.out, parse_format(a.format));
  save_sidecar(v, a.sidecar.empty() ? a.out + ".meta" : a.sidecar);
  std::cout << a.out << "\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string input;
  std::string mode = "weights";
  std::string out;
  std::string ratio = "3/2";
  std::string sidecar;
  double rho = 0.0;
  std::int64_t q = -1;
  bool have_rho = false;
};

int run_encode(const EncodeArgs& a) {
  const WeightTensor tensor = load_auto(a.input);
  std::vector<std::int64_t> codes;
  StreamHeader header;
  if (tensor.mode() == TensorMode::real) {
    // Real inputs are quantized in place; integer inputs are taken as codes.
    const PvqVector v = pvq_quantize_tensor(tensor, Rational::parse(a.ratio));
    codes.assign(v.codes.begin(), v.codes.end());
    header.q = v.q;
    header.rho = v.rho;
  } else {
    codes = codes_from_tensor(tensor);
    if (!a.sidecar.empty()) {
      const PvqSidecar sc = load_sidecar(a.sidecar);
      header.q = sc.q;
      header.rho = sc.rho;
    } else {
      for (std::int64_t c : codes) header.q += std::llabs(c);
    }
  }
  if (a.q >= 0) header.q = a.q;
  if (a.have_rho) header.rho = a.rho;

  RunLengthStream stream;
  if (a.mode == "weights") {
    stream = encode_weight_rle(codes);
  } else if (a.mode == "bitlayers") {
    stream = encode_bitlayer_rle(to_digit_matrix(codes, DigitMode::naf));
  } else {
    throw ArgumentError("encode mode must be 'weights' or 'bitlayers'");
  }
  const SymbolModel model = build_symbol_model(stream);
  const std::vector<std::uint8_t> bytes = range_encode(stream, model, header);
  std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + a.out);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failure on " + a.out);
  std::cout << a.out << "\n";
  return kExitOk;
}

struct DecodeArgs {
  std::string input;
  std::string out;
  std::string format = "text";
};

int run_decode(const DecodeArgs& a) {
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw DataError("cannot open " + a.input);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const DecodedStream decoded = range_decode(bytes);

  std::vector<std::int64_t> codes;
  if (decoded.stream.mode == RleMode::weight_level) {
    codes = decode_weight_rle(decoded.stream, decoded.stream.n);
  } else {
    codes = decode_bitlayer_rle(decoded.stream).reconstruct();
  }
  if (!a.out.empty()) {
    const std::uint32_t n = static_cast<std::uint32_t>(codes.size());
    const WeightTensor tensor = WeightTensor::integer({n}, std::move(codes));
    save_tensor(tensor, a.out, parse_format(a.format));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", decoded.header.rho);
  std::cout << "rho=" << buf << " q=" << decoded.header.q << " n=" << decoded.stream.n
            << " mode="
            << (decoded.stream.mode == RleMode::weight_level ? "weights" : "bitlayers")
            << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string weights;
  std::string inputs;
  std::string engine = "blmac";
  std::string direction = "msb";
  std::string mode = "naf";
  std::string policy = "counted";
  std::string sidecar;
  double rho = 0.0;
  bool have_rho = false;
};

int run_simulate(const SimulateArgs& a) {
  const std::vector<std::int64_t> w = codes_from_tensor(load_auto(a.weights));
  const std::vector<std::int64_t> x = codes_from_tensor(load_auto(a.inputs));
  std::optional<double> rho;
  if (a.have_rho) rho = a.rho;
  if (!a.sidecar.empty()) rho = load_sidecar(a.sidecar).rho;

  const CyclePolicy policy =
      a.policy == "folded" ? CyclePolicy::shift_folded : CyclePolicy::shift_counted;

  EngineReport report;
  if (a.engine == "naive") {
    report = run_naive_mac(w, x);
  } else if (a.engine == "zeroskip") {
    report = run_zero_skip_mac(w, x);
  } else if (a.engine == "accum") {
    report = run_accumulator(w, x, rho);
  } else if (a.engine == "serial") {
    report = run_serial_mac(w, x);
  } else if (a.engine == "blmac") {
    DigitMode mode = DigitMode::naf;
    if (a.mode == "binary") {
      mode = DigitMode::binary;
    } else if (a.mode == "twos") {
      mode = DigitMode::twos_complement;
    } else if (a.mode != "naf") {
      throw ArgumentError("blmac mode must be binary, twos or naf");
    }
    BlmacOptions options;
    options.direction =
        a.direction == "lsb" ? BlmacDirection::lsb_first : BlmacDirection::msb_first;
    options.policy = policy;
    options.rho = rho;
    report = run_blmac(to_digit_matrix(w, mode), x, options);
  } else {
    throw ArgumentError("unknown engine '" + a.engine + "'");
  }
  std::cout << report_csv(report, a.engine);
  return kExitOk;
}

struct StatsPulsesArgs {
  std::uint32_t nb_max = 24;
  std::string out;
};

struct StatsHistArgs {
  std::string input;
  std::string out;
  bool pretty = false;
};

struct StatsCyclesArgs {
  std::string layers_file;
  std::string ratio = "3/2";
  std::string first_layer_ratio = "4";
  bool uniform = false;
  std::uint64_t seed = 1;
  std::string policy = "counted";
  std::string out;
  bool pretty = false;
};

int run_stats_cycles(const StatsCyclesArgs& a) {
  const std::vector<NetLayer> net = load_net_file(a.layers_file);
  std::vector<LayerSpec> layers;
  std::vector<std::string> labels;
  for (std::size_t l = 0; l < net.size(); ++l) {
    std::size_t count = 1;
    for (std::uint32_t d : net[l].shape) count *= d;
    // Per-layer stream: seed + layer index keeps layers independent and
    // reproducible regardless of processing order.
    WeightTensor t = synth_laplacian(count, 1.0, a.seed + l);
    layers.push_back(LayerSpec{std::move(t), net[l].positions});
    labels.push_back(net[l].label);
  }
  CycleSettings settings;
  settings.q_over_n = Rational::parse(a.ratio);
  settings.policy =
      a.policy == "folded" ? CyclePolicy::shift_folded : CyclePolicy::shift_counted;
  if (!a.uniform) {
    settings.per_layer.assign(layers.size(), std::nullopt);
    settings.per_layer[0] = Rational::parse(a.first_layer_ratio);
  }
  const CycleTable table = cycle_comparison(layers, settings, labels);
  emit(a.pretty ? cycles_text(table) : cycles_csv(table), a.out);
  return kExitOk;
}

struct StatsCompressArgs {
  std::string input;
  std::string sidecar;
  std::int64_t q = -1;
  double rho = 0.0;
  std::string out;
};

int run_stats_compress(const StatsCompressArgs& a) {
  const std::vector<std::int64_t> codes = codes_from_tensor(load_auto(a.input));
  std::int64_t q = 0;
  double rho = a.rho;
  if (!a.sidecar.empty()) {
    const PvqSidecar sc = load_sidecar(a.sidecar);
    q = sc.q;
    rho = sc.rho;
  } else {
    for (std::int64_t c : codes) q += std::llabs(c);
  }
  if (a.q >= 0) q = a.q;
  emit(compression_csv(compression_report(codes, q, rho)), a.out);
  return kExitOk;
}

struct FirArgs {
  std::size_t taps = 197;
  double low = 220.0;
  double high = 400.0;
  double fs = 2000.0;
  std::int64_t q = 999;
  std::size_t grid_points = 512;
  std::string out_prefix;
  bool pretty = false;
};

int run_fir(const FirArgs& a) {
  const std::vector<double> taps = design_bandpass(a.taps, a.low, a.high, a.fs);
  const WeightTensor tensor =
      WeightTensor::real({static_cast<std::uint32_t>(taps.size())}, taps);
  const FirReport report = fir_compare(tensor, a.q, a.fs, a.grid_points);
  std::cout << (a.pretty ? fir_ops_text(report) : fir_ops_csv(report));
  if (!a.out_prefix.empty()) {
    write_file(a.out_prefix + "_ops.csv", fir_ops_csv(report));
    write_file(a.out_prefix + "_orig.csv", response_csv(report.freq_hz, report.orig_db));
    write_file(a.out_prefix + "_pvq.csv", response_csv(report.freq_hz, report.pvq_db));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pyramid weight quantization, bit-layer recoding, compression and "
               "multiplier-free engine models"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a deterministic Laplacian tensor");
  synth->add_option("--count", synth_args.count, "number of values")->required();
  synth->add_option("--scale", synth_args.scale, "Laplacian scale parameter");
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out", synth_args.out, "output tensor path")->required();
  synth->add_option("--format", synth_args.format, "text|binary")
      ->check(CLI::IsMember({"text", "binary"}));

  QuantizeArgs quantize_args;
  auto* quantize = app.add_subcommand("quantize", "project a real tensor onto the pyramid");
  quantize->add_option("input", quantize_args.input, "real tensor path")->required();
  quantize->add_option("--q-over-n", quantize_args.ratio, "pyramid radius per weight");
  quantize->add_option("--out", quantize_args.out, "integer codes output path")->required();
  quantize->add_option("--sidecar", quantize_args.sidecar, "metadata path (default <out>.meta)");
  quantize->add_option("--format", quantize_args.format, "text|binary")
      ->check(CLI::IsMember({"text", "binary"}));

  EncodeArgs encode_args;
  auto* encode = app.add_subcommand("encode", "compress codes into a bitstream container");
  encode->add_option("input", encode_args.input, "tensor path (real tensors quantize first)")
      ->required();
  encode->add_option("--mode", encode_args.mode, "weights|bitlayers")
      ->check(CLI::IsMember({"weights", "bitlayers"}));
  encode->add_option("--out", encode_args.out, "container output path")->required();
  encode->add_option("--q-over-n", encode_args.ratio, "ratio used when input is real");
  encode->add_option("--sidecar", encode_args.sidecar, "metadata for integer inputs");
  encode->add_option("--q", encode_args.q, "override header q");
  auto* rho_opt = encode->add_option("--rho", encode_args.rho, "override header rho");
  encode->callback([&] { encode_args.have_rho = rho_opt->count() > 0; });

  DecodeArgs decode_args;
  auto* decode = app.add_subcommand("decode", "expand a bitstream container back to codes");
  decode->add_option("input", decode_args.input, "container path")->required();
  decode->add_option("--out", decode_args.out, "decoded codes tensor path");
  decode->add_option("--format", decode_args.format, "text|binary")
      ->check(CLI::IsMember({"text", "binary"}));

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run one dot product on an engine model");
  simulate->add_option("--weights", sim_args.weights, "integer weights tensor")->required();
  simulate->add_option("--inputs", sim_args.inputs, "integer inputs tensor")->required();
  simulate->add_option("--engine", sim_args.engine, "naive|zeroskip|accum|blmac|serial")
      ->check(CLI::IsMember({"naive", "zeroskip", "accum", "blmac", "serial"}));
  simulate->add_option("--direction", sim_args.direction, "msb|lsb")
      ->check(CLI::IsMember({"msb", "lsb"}));
  simulate->add_option("--mode", sim_args.mode, "binary|twos|naf")
      ->check(CLI::IsMember({"binary", "twos", "naf"}));
  simulate->add_option("--policy", sim_args.policy, "folded|counted")
      ->check(CLI::IsMember({"folded", "counted"}));
  simulate->add_option("--sidecar", sim_args.sidecar, "metadata supplying rho");
  auto* sim_rho = simulate->add_option("--rho", sim_args.rho, "rescale factor");
  simulate->callback([&] { sim_args.have_rho = sim_rho->count() > 0; });

  auto* stats = app.add_subcommand("stats", "report generators");
  stats->require_subcommand(1);

  StatsPulsesArgs pulses_args;
  auto* pulses = stats->add_subcommand("pulses", "pulse statistics per bit width");
  pulses->add_option("--nb-max", pulses_args.nb_max, "largest width (1..24)")
      ->check(CLI::Range(1u, 24u));
  pulses->add_option("--out", pulses_args.out, "also write the CSV here");

  StatsHistArgs hist_args;
  auto* hist = stats->add_subcommand("hist", "weight magnitude histogram");
  hist->add_option("--input", hist_args.input, "integer codes tensor")->required();
  hist->add_option("--out", hist_args.out, "also write the CSV here");
  hist->add_flag("--pretty", hist_args.pretty, "aligned text instead of CSV");

  StatsCyclesArgs cycles_args;
  auto* cycles = stats->add_subcommand("cycles", "per-layer engine cycle comparison");
  cycles->add_option("--layers", cycles_args.layers_file, "network layer table")->required();
  cycles->add_option("--q-over-n", cycles_args.ratio, "default pyramid ratio");
  cycles->add_option("--first-layer-q-over-n", cycles_args.first_layer_ratio,
                     "ratio override for the first layer");
  cycles->add_flag("--uniform", cycles_args.uniform, "no first-layer override");
  cycles->add_option("--seed", cycles_args.seed, "synthesis seed");
  cycles->add_option("--policy", cycles_args.policy, "folded|counted")
      ->check(CLI::IsMember({"folded", "counted"}));
  cycles->add_option("--out", cycles_args.out, "also write the CSV here");
  cycles->add_flag("--pretty", cycles_args.pretty, "aligned text instead of CSV");

  StatsCompressArgs compress_args;
  auto* compress = stats->add_subcommand("compress", "run-length and coded size summary");
  compress->add_option("--input", compress_args.input, "integer codes tensor")->required();
  compress->add_option("--sidecar", compress_args.sidecar, "metadata supplying q and rho");
  compress->add_option("--q", compress_args.q, "override q");
  compress->add_option("--rho", compress_args.rho, "override rho");
  compress->add_option("--out", compress_args.out, "also write the CSV here");

  FirArgs fir_args;
  auto* fir = app.add_subcommand("fir", "bandpass filter engine comparison");
  fir->add_option("--taps", fir_args.taps, "odd tap count");
  fir->add_option("--low", fir_args.low, "low band edge, Hz");
  fir->add_option("--high", fir_args.high, "high band edge, Hz");
  fir->add_option("--fs", fir_args.fs, "sample rate, Hz");
  fir->add_option("--q", fir_args.q, "pyramid radius");
  fir->add_option("--grid-points", fir_args.grid_points, "frequency grid size");
  fir->add_option("--out-prefix", fir_args.out_prefix, "write <prefix>_{ops,orig,pvq}.csv");
  fir->add_flag("--pretty", fir_args.pretty, "aligned text instead of CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return run_synth(synth_args);
    if (*quantize) return run_quantize(quantize_args);
    if (*encode) return run_encode(encode_args);
    if (*decode) return run_decode(decode_args);
    if (*simulate) return run_simulate(sim_args);
    if (*pulses) {
      emit(pulse_stats_csv(pulses_args.nb_max), pulses_args.out);
      return kExitOk;
    }
    if (*hist) {
      const HistogramReport report =
          weight_histogram(codes_from_tensor(load_auto(hist_args.input)));
      emit(hist_args.pretty ? histogram_text(report) : histogram_csv(report),
           hist_args.out);
      return kExitOk;
    }
    if (*cycles) return run_stats_cycles(cycles_args);
    if (*compress) return run_stats_compress(compress_args);
    if (*fir) return run_fir(fir_args);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
