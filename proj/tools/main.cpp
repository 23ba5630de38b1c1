// Copyright 2026 The kwsv Authors. All rights reserved.
//
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// kwsv command-line front end.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "kwsv.hpp"
#include "server.hpp"

namespace {

using namespace kwsv;
namespace fs = std::filesystem;

std::span<const unsigned char> as_bytes(const std::string& s) {
  return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw Error("cannot write " + path);
}

// First analysis window of a WAV file at the configured rate.
AudioWindow first_window(const std::string& path, const StreamConfig& cfg) {
  auto pcm = read_wav_at_rate(path, cfg.sample_rate_hz);
  if (pcm.size() < cfg.window_samples)
    throw FormatError(path + ": " + std::to_string(pcm.size()) + " samples, need at least " +
                      std::to_string(cfg.window_samples));
  pcm.resize(cfg.window_samples);
  return AudioWindow{std::move(pcm), 0, 0.0};
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> v;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(static_cast<std::size_t>(std::stoul(cell)));
    } catch (const std::exception&) {
      throw ConfigError("bad size list '" + csv + "'");
    }
  }
  return v;
}

std::vector<eval::Method> parse_methods(const std::string& csv) {
  std::vector<eval::Method> v;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(eval::method_from_string(cell));
  return v;
}

// Options shared by several subcommands.
struct Common {
  std::string config;
  PipelineConfig load() const {
    if (config.empty()) return PipelineConfig{};
    return load_config(config);
  }
};

void print_report(const eval::EvalReport& r, const std::string& csv) {
  std::cout << eval::format_report_table(r);
  for (const auto& c : r.cells)
    if (c.skipped) std::cerr << "skipped " << to_string(c.method) << " n=" << c.n << " " << c.speaker << ": "
                             << c.skip_reason << '\n';
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv);
    eval::write_report_csv(out, r);
    std::cout << "wrote " << csv << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kwsv: keyword-gated speaker verification on a fixed memory budget"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config, "pipeline config (JSON)");

  // inspect ---------------------------------------------------------------
  auto* inspect = app.add_subcommand("inspect", "print the layer table of a weight bundle");
  std::string inspect_path, inspect_ref;
  inspect->add_option("bundle", inspect_path, ".twb file");
  inspect->add_option("--reference", inspect_ref, "reference architecture instead of a file")
      ->check(CLI::IsMember({"ks", "dvector"}));
  inspect->callback([&] {
    nn::WeightBundle b;
    if (!inspect_ref.empty())
      b = nn::make_random_bundle(inspect_ref == "ks" ? nn::ks_architecture() : nn::dvector_architecture(), 0);
    else if (!inspect_path.empty())
      b = nn::load_bundle(inspect_path);
    else
      throw ConfigError("inspect needs a bundle path or --reference");
    std::cout << (b.name.empty() ? "(unnamed)" : b.name) << "  input " << b.input_shape.height << "x"
              << b.input_shape.width << "x" << b.input_shape.channels << "  output " << b.output_shape().size()
              << '\n';
    std::cout << nn::format_layer_table(nn::count_params(b));
  });

  // bundle init -----------------------------------------------------------
  auto* bundle = app.add_subcommand("bundle", "weight bundle utilities");
  bundle->require_subcommand(1);
  auto* init = bundle->add_subcommand("init", "write a randomly initialised reference bundle");
  std::string init_arch = "ks", init_out;
  std::uint64_t init_seed = 1;
  init->add_option("--arch", init_arch)->check(CLI::IsMember({"ks", "dvector"}));
  init->add_option("--seed", init_seed);
  init->add_option("-o,--out", init_out)->required();
  init->callback([&] {
    const auto cfg = common.load();
    const auto arch = init_arch == "ks" ? nn::ks_architecture(cfg.stream) : nn::dvector_architecture(cfg.stream);
    const auto b = nn::make_random_bundle(arch, init_seed, front_end_fingerprint(cfg.stream));
    nn::save_bundle(b, init_out);
    const auto r = nn::count_params(b);
    std::cout << "wrote " << init_out << " (" << b.name << ", omega " << nn::thousands(r.omega_total)
              << ", alpha " << nn::thousands(r.alpha_total) << ")\n";
  });

  // wav synth ----------------------------------------------------------------
  auto* wav = app.add_subcommand("wav", "test-signal utilities");
  wav->require_subcommand(1);
  auto* synth = wav->add_subcommand("synth", "write a synthetic 16-bit mono WAV");
  std::string synth_kind = "noise", synth_out;
  double synth_seconds = 1.0, synth_freq = 440.0, synth_amp = 0.3;
  int synth_rate = 16000;
  std::uint32_t synth_seed = 1;
  synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"noise", "tone", "silence"}));
  synth->add_option("--seconds", synth_seconds)->check(CLI::PositiveNumber);
  synth->add_option("--rate", synth_rate)->check(CLI::PositiveNumber);
  synth->add_option("--freq", synth_freq);
  synth->add_option("--amplitude", synth_amp)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", synth_seed);
  synth->add_option("-o,--out", synth_out)->required();
  synth->callback([&] {
    std::vector<std::int16_t> pcm(static_cast<std::size_t>(std::llround(synth_seconds * synth_rate)));
    std::mt19937 rng(synth_seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < pcm.size(); ++i) {
      double v = 0.0;
      if (synth_kind == "noise") v = u(rng);
      if (synth_kind == "tone") v = std::sin(2.0 * 3.141592653589793 * synth_freq * static_cast<double>(i) / synth_rate);
      pcm[i] = static_cast<std::int16_t>(std::lround(v * synth_amp * 32767.0));
    }
    write_wav(synth_out, pcm, synth_rate);
  });

  // mfcc -------------------------------------------------------------------
  auto* mfcc = app.add_subcommand("mfcc", "compute the spectrogram of the first window of a WAV");
  std::string mfcc_wav, mfcc_csv;
  mfcc->add_option("wav", mfcc_wav)->required();
  mfcc->add_option("--csv", mfcc_csv, "write CSV (rows = bins, columns = frames); '-' for stdout");
  mfcc->callback([&] {
    const auto cfg = common.load().stream;
    const auto spec = extract_mfcc(first_window(mfcc_wav, cfg), cfg);
    if (mfcc_csv == "-") {
      write_spectrogram_csv(std::cout, spec);
      return;
    }
    std::cout << spec.bins << " x " << spec.frames << " (" << spec.coefficients.size() << " values)\n";
    if (!mfcc_csv.empty()) {
      std::ofstream out(mfcc_csv);
      write_spectrogram_csv(out, spec);
    }
  });

  // ks classify ------------------------------------------------------------
  auto* ks = app.add_subcommand("ks", "keyword spotter");
  ks->require_subcommand(1);
  auto* classify = ks->add_subcommand("classify", "classify the first window of a WAV");
  std::string ks_wav, ks_bundle;
  classify->add_option("wav", ks_wav)->required();
  classify->add_option("--bundle", ks_bundle, "keyword bundle (default: from --config)");
  classify->callback([&] {
    const auto cfg = common.load();
    const std::string path = ks_bundle.empty() ? cfg.ks_bundle : ks_bundle;
    if (path.empty()) throw ConfigError("no keyword bundle given");
    const KeywordSpotter spotter(nn::load_bundle(path));
    const auto d = spotter.classify(extract_mfcc(first_window(ks_wav, cfg.stream), cfg.stream));
    std::cout << "class: " << to_string(d.cls) << "\nscores: silence=" << d.scores[0]
              << " unknown=" << d.scores[1] << " keyword=" << d.scores[2] << "\ny: " << d.y << '\n';
  });

  // asv ----------------------------------------------------------------------
  auto* asv = app.add_subcommand("asv", "speaker verification and enrollment store");
  asv->require_subcommand(1);
  std::string asv_store, asv_bundle;
  std::optional<std::size_t> asv_n;
  std::optional<float> asv_tau;
  const auto store_path = [&](const PipelineConfig& cfg) {
    const std::string p = asv_store.empty() ? cfg.enrollment_path : asv_store;
    if (p.empty()) throw ConfigError("no enrollment store given (--store or config enrollment_path)");
    return p;
  };
  const auto embedder = [&](const PipelineConfig& cfg) {
    const std::string p = asv_bundle.empty() ? cfg.dvector_bundle : asv_bundle;
    if (p.empty()) throw ConfigError("no d-vector bundle given");
    return DVectorExtractor(nn::load_bundle(p));
  };

  auto* enroll = asv->add_subcommand("enroll", "add utterances to the enrollment store");
  std::vector<std::string> enroll_wavs;
  enroll->add_option("wavs", enroll_wavs)->required();
  enroll->add_option("--store", asv_store);
  enroll->add_option("--bundle", asv_bundle);
  enroll->add_option("--n", asv_n, "enrollment size for a new store");
  enroll->add_option("--tau", asv_tau, "threshold for a new store");
  enroll->callback([&] {
    const auto cfg = common.load();
    const auto path = store_path(cfg);
    EnrollmentSet set = fs::exists(path) ? load_enrollment(path)
                                         : EnrollmentSet(asv_n.value_or(cfg.n), asv_tau.value_or(cfg.tau));
    const auto dv = embedder(cfg);
    for (const auto& wav : enroll_wavs) {
      if (set.full()) {
        std::cout << "enrollment complete; ignoring " << wav << '\n';
        continue;
      }
      const auto p = set.enroll(dv.embed(extract_mfcc(first_window(wav, cfg.stream), cfg.stream)));
      std::cout << wav << ": " << p.filled << "/" << p.capacity << '\n';
    }
    save_enrollment(set, path);
  });

  auto* verify = asv->add_subcommand("verify", "score an utterance against the store");
  std::string verify_wav;
  verify->add_option("wav", verify_wav)->required();
  verify->add_option("--store", asv_store);
  verify->add_option("--bundle", asv_bundle);
  verify->add_option("--tau", asv_tau, "override the stored threshold");
  verify->callback([&] {
    const auto cfg = common.load();
    EnrollmentSet set = load_enrollment(store_path(cfg));
    if (asv_tau) set.set_threshold(*asv_tau);
    const auto d = sv_decide(embedder(cfg).embed(extract_mfcc(first_window(verify_wav, cfg.stream), cfg.stream)), set);
    std::cout << "sigma: " << d.sigma << "\nbest_index: " << d.best_index << "\ntau: " << set.threshold()
              << "\nz: " << d.z << '\n';
  });

  auto* exp = asv->add_subcommand("export", "copy the store to a file");
  std::string exp_out;
  exp->add_option("--store", asv_store);
  exp->add_option("-o,--out", exp_out)->required();
  exp->callback([&] {
    const auto cfg = common.load();
    write_file(exp_out, serialize_enrollment(load_enrollment(store_path(cfg))));
    std::cout << "wrote " << exp_out << '\n';
  });

  auto* imp = asv->add_subcommand("import", "replace the store with an exported file");
  std::string imp_in;
  imp->add_option("file", imp_in)->required();
  imp->add_option("--store", asv_store);
  imp->callback([&] {
    const auto cfg = common.load();
    const auto set = parse_enrollment(as_bytes(read_file(imp_in)));
    save_enrollment(set, store_path(cfg));
    std::cout << "imported " << set.size() << "/" << set.capacity() << " vectors\n";
  });

  auto* show = asv->add_subcommand("show", "describe the store");
  show->add_option("--store", asv_store);
  show->callback([&] {
    const auto cfg = common.load();
    const auto set = load_enrollment(store_path(cfg));
    std::cout << "d: " << set.dimension() << "\nn: " << set.capacity() << "\nenrolled: " << set.size()
              << "\ntau: " << set.threshold() << "\nmode: " << (set.full() ? "inferring" : "enrolling") << '\n';
  });

  // memory -------------------------------------------------------------------
  auto* memory = app.add_subcommand("memory", "static memory estimate of the pipeline");
  std::string mem_ks, mem_dv;
  memory->add_option("--ks", mem_ks, "keyword bundle (default: reference architecture)");
  memory->add_option("--dvector", mem_dv, "d-vector bundle (default: reference architecture)");
  memory->add_option("--n", asv_n);
  memory->callback([&] {
    const auto cfg = common.load();
    const auto get = [&](const std::string& flag, const std::string& from_cfg, bool is_ks) {
      const std::string p = !flag.empty() ? flag : from_cfg;
      if (!p.empty()) return nn::load_bundle(p);
      return nn::make_random_bundle(is_ks ? nn::ks_architecture(cfg.stream) : nn::dvector_architecture(cfg.stream), 0);
    };
    const auto m = estimate_memory(cfg.stream, get(mem_ks, cfg.ks_bundle, true), get(mem_dv, cfg.dvector_bundle, false),
                                   asv_n.value_or(cfg.n), cfg.memory_limit_bytes);
    std::cout << std::left << std::setw(20) << "component" << std::setw(30) << "formula" << std::right
              << std::setw(10) << "bytes" << std::setw(12) << "KiB" << '\n';
    std::cout << std::fixed << std::setprecision(2);
    for (const auto& i : m.items)
      std::cout << std::left << std::setw(20) << i.component << std::setw(30) << i.formula << std::right
                << std::setw(10) << i.bytes << std::setw(12) << i.bytes / 1024.0 << '\n';
    std::cout << std::left << std::setw(50) << "total" << std::right << std::setw(10) << m.total()
              << std::setw(12) << m.total() / 1024.0 << '\n'
              << std::left << std::setw(50) << "limit" << std::right << std::setw(10) << m.limit_bytes << '\n';
    m.enforce();
  });

  // run ----------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "stream audio through the pipeline; one JSON event per line");
  std::string run_input;
  bool run_no_save = false;
  run->add_option("-i,--input", run_input, "WAV file, or 'mic' for raw s16le on stdin")->required();
  run->add_flag("--no-save", run_no_save, "do not persist enrollment progress");
  run->callback([&] {
    if (common.config.empty()) throw ConfigError("run needs --config");
    const auto cfg = common.load();
    auto pipeline = load_pipeline(cfg);
    StreamBuffer buf(cfg.stream);
    const auto feed = [&](std::span<const std::int16_t> chunk) {
      for (const auto& w : buf.push_samples(chunk)) {
        const auto ev = pipeline.process_window(w);
        std::cout << to_json(ev).dump() << '\n' << std::flush;
        if (ev.mode == Mode::Enrolling && ev.y == 1 && !run_no_save && !cfg.enrollment_path.empty())
          save_enrollment(pipeline.enrollment(), cfg.enrollment_path);
      }
    };
    if (run_input == "mic") {
      std::vector<std::int16_t> chunk(cfg.stream.hop_samples);
      unsigned char raw[2];
      std::size_t k = 0;
      while (std::cin.read(reinterpret_cast<char*>(raw), 2)) {
        chunk[k++] = static_cast<std::int16_t>(raw[0] | raw[1] << 8);
        if (k == chunk.size()) {
          feed(chunk);
          k = 0;
        }
      }
      feed(std::span(chunk.data(), k));
    } else {
      const auto pcm = read_wav_at_rate(run_input, cfg.stream.sample_rate_hz);
      for (std::size_t i = 0; i < pcm.size(); i += cfg.stream.hop_samples)
        feed(std::span(pcm).subspan(i, std::min<std::size_t>(cfg.stream.hop_samples, pcm.size() - i)));
    }
  });

  // eval ---------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "evaluation protocol");
  ev->require_subcommand(1);
  std::string ev_methods = "asv,mcs", ev_n = "1,8,16,64", ev_csv;
  std::uint64_t ev_seed = 1;

  auto* ev_run = ev->add_subcommand("run", "evaluate a manifest of WAV files");
  std::string ev_manifest, ev_root;
  ev_run->add_option("--manifest", ev_manifest)->required();
  ev_run->add_option("--root", ev_root, "base directory for manifest paths (default: manifest directory)");
  ev_run->add_option("--methods", ev_methods);
  ev_run->add_option("--n", ev_n);
  ev_run->add_option("--seed", ev_seed);
  ev_run->add_option("--csv", ev_csv);
  ev_run->add_option("--bundle", asv_bundle, "d-vector bundle (default: from --config)");
  ev_run->callback([&] {
    const auto cfg = common.load();
    const fs::path root = ev_root.empty() ? fs::path(ev_manifest).parent_path() : fs::path(ev_root);
    const auto ds = eval::load_dataset(root, ev_manifest, cfg.stream);
    std::cerr << "loaded " << ds.utterances.size() << " utterances, rejected " << ds.rejected.size() << '\n';
    for (const auto& r : ds.rejected) std::cerr << "  rejected " << r.path << ": " << r.reason << '\n';
    for (const auto& w : ds.warnings) std::cerr << "  warning: " << w << '\n';
    const auto data = eval::embed_dataset(ds, embedder(cfg), cfg.stream);
    print_report(eval::run_protocol(data, parse_methods(ev_methods), parse_sizes(ev_n), ev_seed), ev_csv);
  });

  auto* ev_syn = ev->add_subcommand("synthetic", "evaluate synthetic d-vector speakers");
  eval::SyntheticSpec syn;
  ev_syn->add_option("--speakers", syn.speakers);
  ev_syn->add_option("--utterances", syn.utterances_per_speaker);
  ev_syn->add_option("--dim", syn.dimension);
  ev_syn->add_option("--modes", syn.modes);
  ev_syn->add_option("--mode-sigma", syn.mode_sigma);
  ev_syn->add_option("--noise-sigma", syn.noise_sigma);
  ev_syn->add_option("--methods", ev_methods);
  ev_syn->add_option("--n", ev_n);
  ev_syn->add_option("--seed", ev_seed);
  ev_syn->add_option("--csv", ev_csv);
  ev_syn->callback([&] {
    print_report(eval::run_protocol(eval::synthetic_speakers(syn, ev_seed), parse_methods(ev_methods),
                                    parse_sizes(ev_n), ev_seed),
                 ev_csv);
  });

  // serve --------------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "run the demo service");
  std::optional<int> serve_port;
  std::string serve_static, serve_address = "127.0.0.1";
  serve->add_option("--port", serve_port);
  serve->add_option("--address", serve_address);
  serve->add_option("--static", serve_static, "directory of static UI files");
  serve->callback([&] {
    if (common.config.empty()) throw ConfigError("serve needs --config");
    const auto cfg = common.load();
    auto pipeline = load_pipeline(cfg);
    auto budget = estimate_memory(cfg.stream, pipeline.gate().bundle(), pipeline.embedder().bundle(), cfg.n,
                                  cfg.memory_limit_bytes);
    server::Options opts;
    opts.address = serve_address;
    opts.port = static_cast<unsigned short>(serve_port.value_or(cfg.port));
    opts.static_dir = serve_static.empty() ? cfg.static_dir : serve_static;
    server::Server srv(server::make_handle(service::Service(std::move(pipeline), budget, cfg.enrollment_path)),
                       opts);
    srv.start();
    std::cout << "listening on http://" << opts.address << ":" << srv.port() << " (WebSocket /stream)\n"
              << std::flush;
    srv.wait_for_signal();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "kwsv: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
