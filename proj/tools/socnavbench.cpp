#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "socnav/harness.hpp"
#include "socnav/json_io.hpp"
#include "socnav/report.hpp"

namespace fs = std::filesystem;
using namespace socnav;

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

struct RunFlags {
  std::string config;
  std::string planner, mode, bind, out, episodes;
  std::optional<std::uint64_t> seed;
  std::optional<double> accept_timeout, wall_rate, tick_rate, deadline, ppm;
  std::optional<std::size_t> sample;
  bool deterministic = false;
  bool frames = false;
};

BenchmarkConfig resolve(const RunFlags& f) {
  BenchmarkConfig c = f.config.empty() ? BenchmarkConfig{} : load_config(f.config);
  if (!f.planner.empty()) c.planner = f.planner;
  if (!f.mode.empty()) c.mode = synchronicity_from_string(f.mode);
  if (!f.bind.empty()) c.bind = f.bind;
  if (!f.out.empty()) c.out = f.out;
  if (!f.episodes.empty()) c.episodes = f.episodes;
  if (f.seed) c.seed = *f.seed;
  if (f.accept_timeout) c.accept_timeout = *f.accept_timeout;
  if (f.wall_rate) c.wall_rate = *f.wall_rate;
  if (f.tick_rate) c.tick_rate = *f.tick_rate;
  if (f.deadline) c.receive_deadline = *f.deadline;
  if (f.ppm) c.frame_spec.pixels_per_meter = *f.ppm;
  if (f.sample) c.sample = *f.sample;
  if (f.deterministic) c.deterministic = true;
  if (f.frames) c.frames = true;
  return c;
}

int cmd_run(const RunFlags& f) {
  const BenchmarkConfig config = resolve(f);
  const RunResult r = run_benchmark(config, &std::cerr);
  if (r.meta) {
    std::cout << "episodes " << r.meta->episodes << ", success " << r.meta->successes << "/" << r.meta->episodes
              << ", failures (T/PC/EC) " << r.meta->failures.str() << ", pedestrian collisions "
              << r.meta->total_pedestrian_collisions << "\n";
  }
  if (!r.session.completed) {
    std::cerr << "run incomplete: " << r.session.error << "\n";
    return kFailure;
  }
  return 0;
}

int cmd_sample(const std::string& episodes, std::size_t count, std::uint64_t seed, const std::string& out,
               double v_max) {
  if (count == 0) throw UsageError("--count must be at least 1");
  const EpisodeLibrary lib = load_library(episodes);
  SamplerOptions opts;
  opts.v_max = v_max;
  const auto sampled = sample_random_episodes(lib, count, seed, opts);
  const fs::path dir = out.empty() ? lib.root / "episodes" : fs::path(out);
  for (const auto& ep : sampled) {
    write_text_file(dir / (ep.name + ".json"), episode_to_manifest(ep).dump(2) + "\n");
  }
  std::cout << "wrote " << sampled.size() << " manifests to " << dir.string() << "\n";
  return 0;
}

int cmd_report(const std::string& logs_dir, const std::string& out, const std::string& algorithm) {
  const auto logs = load_logs(logs_dir);
  if (logs.empty()) throw UsageError("no */log.jsonl under '" + logs_dir + "'");
  std::vector<EpisodeMetrics> metrics;
  for (const auto& l : logs) metrics.push_back(compute_episode_metrics(l));
  const MetaReport meta = aggregate_meta(logs);
  write_reports(metrics, meta, out.empty() ? fs::path(logs_dir) : fs::path(out), algorithm);
  std::cout << "success " << meta.successes << "/" << meta.episodes << ", failures (T/PC/EC) "
            << meta.failures.str() << "\n";
  return 0;
}

int cmd_render(const std::string& logs_dir, const std::string& episodes, const std::string& only, double ppm,
               int trail) {
  const EpisodeLibrary lib = load_library(episodes);
  FrameSpec spec;
  spec.pixels_per_meter = ppm;
  spec.trail_length = trail;
  int rendered = 0;
  for (const auto& log : load_logs(logs_dir)) {
    if (!only.empty() && log.episode != only) continue;
    render_episode_frames(log, lib.environment(log.environment), spec, fs::path(logs_dir) / log.episode / "frames");
    ++rendered;
  }
  if (rendered == 0) throw UsageError("no matching episode logs under '" + logs_dir + "'");
  std::cout << "rendered " << rendered << " episode(s)\n";
  return 0;
}

int cmd_list(const std::string& episodes) {
  const EpisodeLibrary lib = load_library(episodes);
  for (const auto& [name, env] : lib.environments) {
    std::printf("environment %s %dx%d @ %.3f m  digest %s\n", name.c_str(), env.width(), env.height(),
                env.resolution(), env.digest().c_str());
  }
  for (const auto& ep : lib.episodes) {
    std::printf("episode %s  env=%s  budget=%.1fs  rate=%.1fHz  pedestrians=%zu  start=(%.2f,%.2f)  goal=(%.2f,%.2f)\n",
                ep.name.c_str(), ep.environment.c_str(), ep.time_budget, ep.tick_rate, ep.tracks.size(),
                ep.robot_start.x, ep.robot_start.y, ep.goal.x, ep.goal.y);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay-based social navigation benchmark"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "serve episodes to a planner and write logs and reports");
  run->add_option("--config", rf.config, "benchmark config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--planner", rf.planner, "social-forces | orca | baseline | external")
      ->check(CLI::IsMember({"social-forces", "orca", "baseline", "external"}));
  run->add_option("--mode", rf.mode, "sync | async")->check(CLI::IsMember({"sync", "async"}));
  run->add_option("--bind", rf.bind, "HOST:PORT or unix:PATH for external clients");
  run->add_option("--out", rf.out, "output directory");
  run->add_option("--seed", rf.seed);
  run->add_option("--episodes", rf.episodes, "episode library directory");
  run->add_option("--accept-timeout", rf.accept_timeout, "seconds to wait for an external client");
  run->add_option("--wall-rate", rf.wall_rate, "async tick rate in Hz of wall time");
  run->add_option("--tick-rate", rf.tick_rate, "override manifest tick rates");
  run->add_option("--deadline", rf.deadline, "seconds to wait for each client message");
  run->add_option("--sample", rf.sample, "run N sampled episodes instead of the library's");
  run->add_option("--ppm", rf.ppm, "frame pixels per meter");
  run->add_flag("--frames", rf.frames, "write per-tick PNG frames");
  run->add_flag("--deterministic", rf.deterministic, "record zero planning wait");

  std::string s_episodes, s_out;
  std::size_t s_count = 0;
  std::uint64_t s_seed = 0;
  double s_vmax = 1.2;
  auto* sample = app.add_subcommand("sample", "write randomly sampled episode manifests");
  sample->add_option("--episodes", s_episodes, "episode library directory")->required();
  sample->add_option("--count", s_count)->required();
  sample->add_option("--seed", s_seed);
  sample->add_option("--out", s_out, "manifest directory (default: the library's episodes/)");
  sample->add_option("--v-max", s_vmax);

  std::string r_logs, r_out, r_algo = "external";
  auto* report = app.add_subcommand("report", "recompute metrics and reports from logs");
  report->add_option("--logs", r_logs, "run output directory")->required();
  report->add_option("--out", r_out);
  report->add_option("--algorithm", r_algo);

  std::string d_logs, d_episodes, d_only;
  double d_ppm = 20.0;
  int d_trail = 50;
  auto* render = app.add_subcommand("render", "render frames from logs");
  render->add_option("--logs", d_logs, "run output directory")->required();
  render->add_option("--episodes", d_episodes, "episode library directory")->required();
  render->add_option("--episode", d_only, "only this episode");
  render->add_option("--ppm", d_ppm);
  render->add_option("--trail", d_trail);

  std::string l_episodes;
  auto* list = app.add_subcommand("list", "describe an episode library");
  list->add_option("--episodes", l_episodes)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  try {
    if (*run) return cmd_run(rf);
    if (*sample) return cmd_sample(s_episodes, s_count, s_seed, s_out, s_vmax);
    if (*report) return cmd_report(r_logs, r_out, r_algo);
    if (*render) return cmd_render(d_logs, d_episodes, d_only, d_ppm, d_trail);
    if (*list) return cmd_list(l_episodes);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
