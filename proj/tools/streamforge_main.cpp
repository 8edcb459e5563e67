// streamforge command line: run sessions from interaction traces, serve the
// framed streaming protocol, dump visibility masks, and benchmark the
// two-stage pipeline cost model.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "streamforge/attention_mask.hpp"
#include "streamforge/log.hpp"
#include "streamforge/pipeline.hpp"
#include "streamforge/rollout.hpp"
#include "streamforge/scheduler.hpp"
#include "streamforge/server.hpp"

namespace {

using namespace streamforge;

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

SessionConfig load_config_or_defaults(const std::string& path) {
  SessionConfig config;
  if (!path.empty()) config = load_config_file(path);
  return validate_config(config);
}

int cmd_run(const std::string& config_path, const std::string& trace_path,
            const std::string& out_path, const std::string& metrics_path,
            bool realtime, std::uint64_t seed, bool seed_given) {
  SessionConfig config = load_config_or_defaults(config_path);
  if (seed_given) config.rng_seed = seed;
  config = validate_config(config);

  const auto trace = load_trace_file(trace_path);
  const Latent reference = make_reference_latent(config);
  const ToyFlowModel engine(NoiseLadder(config.stream_chunks, config.micro_steps),
                            config.latent_dim, config.rng_seed);

  SessionResult result;
  if (realtime) {
    RealtimeClock clock;
    result = run_session(config, reference, trace, engine, clock);
    if (clock.overruns() > 0) {
      std::cerr << "warning: " << clock.overruns() << " tick(s) overran the "
                << chunk_duration(config) << " s budget\n";
    }
  } else {
    SimClock clock;
    result = run_session(config, reference, trace, engine, clock);
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open " << out_path << " for writing\n";
    return 1;
  }
  write_emission_log(out, result.records);

  if (!metrics_path.empty()) {
    std::ofstream metrics_out(metrics_path, std::ios::binary);
    if (!metrics_out) {
      std::cerr << "error: cannot open " << metrics_path << " for writing\n";
      return 1;
    }
    metrics_out << metrics_json(session_metrics(result.records, chunk_duration(config)))
                << '\n';
  }

  std::cout << "emitted " << result.records.size() << " chunks ("
            << result.records.size() * chunk_duration(config) << " s of video), "
            << result.stats.stream_nfe << " stream NFEs, "
            << result.stats.refine_runs << " refinements\n";
  return 0;
}

int cmd_serve(const std::string& config_path, const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --listen expects <addr:port>\n";
    return 1;
  }
  const std::string host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));

  SessionServer server(load_config_or_defaults(config_path), host,
                       static_cast<std::uint16_t>(port));
  const std::uint16_t bound = server.start();
  std::cout << "listening on " << host << ":" << bound << " (ctrl-c to stop)\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  return 0;
}

int cmd_mask_dump(const std::string& layout_spec, const std::string& token_counts) {
  std::vector<GroupTag> layout;
  int long_term = 0, stream = 0;
  std::stringstream ss(layout_spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token == "ref") {
      layout.push_back({GroupKind::kReference, 0});
    } else if (token == "lt") {
      layout.push_back({GroupKind::kLongTerm, long_term++});
    } else if (token == "st") {
      layout.push_back({GroupKind::kShortTerm, 0});
    } else if (token == "s") {
      layout.push_back({GroupKind::kStream, stream++});
    } else {
      std::cerr << "error: unknown group '" << token
                << "' (expected ref, lt, st, or s)\n";
      return 1;
    }
  }
  const GroupMask mask = build_group_mask(layout);
  std::cout << render_mask(mask);

  if (!token_counts.empty()) {
    std::map<GroupTag, int> counts;
    std::stringstream cs(token_counts);
    std::size_t index = 0;
    while (std::getline(cs, token, ',')) {
      if (index >= layout.size()) break;
      counts[layout[index++]] = std::stoi(token);
    }
    if (index != layout.size()) {
      std::cerr << "error: --expand needs one count per group\n";
      return 1;
    }
    std::cout << '\n' << render_mask(expand_to_token_mask(mask, counts));
  }
  return 0;
}

int cmd_bench(const std::string& costs_spec, std::int64_t chunks, int queue_capacity,
              double chunk_seconds) {
  const auto comma = costs_spec.find(',');
  if (comma == std::string::npos) {
    std::cerr << "error: --costs expects <denoise_ms,decode_ms>\n";
    return 1;
  }
  StageCost costs;
  costs.denoise_ms_per_tick = std::stod(costs_spec.substr(0, comma));
  costs.decode_ms_per_chunk = std::stod(costs_spec.substr(comma + 1));

  PipelineOptions options;
  options.queue_capacity = queue_capacity;

  const PipelineRun pipelined = run_pipelined(chunks, costs, options, chunk_seconds);
  const PipelineRun sequential =
      sequential_baseline(chunks, costs, options, chunk_seconds);

  std::cout << "pipelined:\n"
            << metrics_json(pipelined.metrics) << "\nsequential baseline:\n"
            << metrics_json(sequential.metrics) << "\n";
  if (sequential.metrics.elapsed_s > 0.0) {
    std::cout << "overlap speedup: "
              << sequential.metrics.elapsed_s / pipelined.metrics.elapsed_s << "x\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streamforge: chunkwise diffusion-forcing streaming runtime"};
  app.require_subcommand(1);

  // run
  std::string config_path, trace_path, out_path, metrics_path;
  std::uint64_t seed = 0;
  bool realtime = false, sim_clock = false;
  auto* run = app.add_subcommand("run", "run a session from an interaction trace");
  run->add_option("--config", config_path, "session config file");
  run->add_option("--trace", trace_path, "interaction trace file")->required();
  run->add_option("--out", out_path, "emission log output path")->required();
  run->add_option("--metrics", metrics_path, "metrics report output path");
  auto* seed_option = run->add_option("--seed", seed, "override the config rng seed");
  auto* realtime_flag =
      run->add_flag("--realtime", realtime, "pace ticks against the monotonic clock");
  run->add_flag("--sim-clock", sim_clock, "simulated clock (default)")
      ->excludes(realtime_flag);

  // serve
  std::string listen;
  auto* serve = app.add_subcommand("serve", "serve streaming sessions over TCP");
  serve->add_option("--config", config_path, "session config file");
  serve->add_option("--listen", listen, "listen address, <addr:port>")->required();

  // mask-dump
  std::string layout_spec, expand_spec;
  auto* mask_dump = app.add_subcommand("mask-dump", "print a visibility mask");
  mask_dump
      ->add_option("--layout", layout_spec,
                   "comma-separated groups, e.g. ref,lt,lt,st,s,s,s")
      ->required();
  mask_dump->add_option("--expand", expand_spec, "token counts per group");

  // bench
  std::string costs_spec;
  std::int64_t chunks = 50;
  int queue_capacity = 2;
  double chunk_seconds = 0.48;
  auto* bench = app.add_subcommand("bench", "pipeline cost-model benchmark");
  bench->add_option("--costs", costs_spec, "<denoise_ms,decode_ms>")->required();
  bench->add_option("--chunks", chunks, "number of chunks to simulate");
  bench->add_option("--queue", queue_capacity, "inter-stage queue capacity");
  bench->add_option("--chunk-duration", chunk_seconds, "seconds of video per chunk");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, trace_path, out_path, metrics_path, realtime, seed,
                     seed_option->count() > 0);
    }
    if (serve->parsed()) {
      return cmd_serve(config_path, listen);
    }
    if (mask_dump->parsed()) {
      return cmd_mask_dump(layout_spec, expand_spec);
    }
    if (bench->parsed()) {
      return cmd_bench(costs_spec, chunks, queue_capacity, chunk_seconds);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
