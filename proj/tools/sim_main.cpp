// sim: headless runs, metrics, live sessions and pattern dumps.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "swarmguide/errors.hpp"
#include "swarmguide/metrics.hpp"
#include "swarmguide/scenario.hpp"
#include "swarmguide/server.hpp"
#include "swarmguide/sim.hpp"
#include "swarmguide/tactile.hpp"
#include "swarmguide/trace.hpp"

namespace sg = swarmguide;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct RunArgs {
  std::string scenario;
  std::string hand_trace;
  std::string out;
  long ticks = -1;
  bool no_avoidance = false;
  std::string layout;
  unsigned long seed = 0;
};

int cmd_run(const RunArgs& a) {
  sg::Scenario scenario = sg::load_scenario(a.scenario);
  if (!a.layout.empty()) scenario.select_layout(a.layout);
  if (a.no_avoidance) scenario.avoidance_enabled = false;

  sg::HandTrace hand;
  if (!a.hand_trace.empty()) {
    hand = sg::read_hand_trace(a.hand_trace);
  } else if (auto path = scenario.hand_trace_path()) {
    hand = sg::read_hand_trace(*path);
  }

  sg::RunOptions options;
  if (a.ticks >= 0) options.ticks = a.ticks;
  options.seed = a.seed;
  const sg::TraceLog log = sg::run_scenario(scenario, hand, options);
  sg::write_trace(log, a.out);

  long collisions = 0;
  bool finished = false;
  for (const auto& e : log.events) {
    collisions += e.kind == sg::EventKind::Collision;
    finished = finished || e.kind == sg::EventKind::Finish;
  }
  json summary = {{"scenario", scenario.name},
                  {"scenario_hash", log.header.at("scenario_hash")},
                  {"ticks", log.rows.size()},
                  {"events", log.events.size()},
                  {"collision_ticks", collisions},
                  {"finished", finished},
                  {"out", a.out}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct MetricsArgs {
  std::string trace;
  double horizon_ms = 3300.0;
  double bin_ms = 100.0;
  std::string curve_out;
};

int cmd_metrics(const MetricsArgs& a) {
  const sg::TraceLog log = sg::read_trace(a.trace);
  const sg::RunMetrics m = sg::compute_run_metrics(log);
  const auto curve = sg::reaction_correctness(log, a.horizon_ms, a.bin_ms);

  json report = {
      {"note",
       "These quantities are outputs of the measurement pipeline for this trace. Published human-trial values "
       "(for example centroid path lengths from operator studies) depend on the operator and are not targets."},
      {"trace", a.trace},
      {"scenario_hash", log.header.value("scenario_hash", "")},
      {"sample_time", log.sample_time()},
      {"default_area_m2", log.default_area()},
      {"metrics", sg::to_json(m)},
      {"pattern_events", std::count_if(log.events.begin(), log.events.end(),
                                       [](const sg::SimEvent& e) { return e.kind == sg::EventKind::PatternStart; })},
      {"reaction_correctness", {{"horizon_ms", a.horizon_ms}, {"bin_ms", a.bin_ms}, {"bins", curve.size()}}}};
  std::cout << report.dump(2) << '\n';

  if (!a.curve_out.empty()) {
    std::ofstream out(a.curve_out);
    if (!out) throw std::runtime_error("cannot write '" + a.curve_out + "'");
    out << "time_ms,fraction_correct,events\n";
    for (const auto& p : curve) {
      out << sg::format_number(p.time_ms) << ',' << sg::format_number(p.fraction) << ',' << p.events << '\n';
    }
  }
  return 0;
}

struct ServeArgs {
  std::string scenario;
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;
  std::string mode = "visual";
  std::string out;
  int decimation = 2;
};

int cmd_serve(const ServeArgs& a) {
  sg::Scenario scenario = sg::load_scenario(a.scenario);
  sg::SessionOptions options;
  options.mode = a.mode == "blind" ? sg::SessionMode::Blind : sg::SessionMode::Visual;
  options.decimation = a.decimation;
  options.scenario_dir = std::filesystem::path(a.scenario).parent_path();

  sg::ServerOptions server_options;
  server_options.address = a.address;
  server_options.port = a.port;
  sg::SessionServer server(sg::SessionCore(std::move(scenario), options), server_options);
  server.start();
  std::cerr << "listening on ws://" << a.address << ':' << server.port() << " (" << a.mode << ")\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();

  const auto stats = server.stats();
  std::cerr << "stopped after " << stats.ticks << " ticks, " << stats.overruns << " overruns, "
            << stats.dropped_frames << " dropped frames\n";
  if (!a.out.empty()) {
    server.core().write_logs(a.out);
    std::cerr << "session logged to " << a.out << '\n';
  }
  return 0;
}

int cmd_patterns(const std::string& id, const std::string& format) {
  std::vector<sg::PatternId> ids;
  if (id == "all") {
    ids.assign(sg::kAllPatterns.begin(), sg::kAllPatterns.end());
  } else {
    ids.push_back(sg::parse_pattern_id(id));
  }
  if (format == "device") {
    for (auto p : ids) {
      if (ids.size() > 1) std::cout << "# " << sg::to_string(p) << '\n';
      std::cout << sg::to_device_lines(sg::encode_pattern(p));
    }
    return 0;
  }
  if (ids.size() == 1) {
    std::cout << sg::to_json(sg::encode_pattern(ids.front())).dump(2) << '\n';
  } else {
    json all = json::array();
    for (auto p : ids) all.push_back(sg::to_json(sg::encode_pattern(p)));
    std::cout << all.dump(2) << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const sg::Scenario s = sg::load_scenario(path);
  std::cout << "ok " << s.name << ' ' << sg::scenario_hash(s) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impedance-linked swarm simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario headlessly and write a trace directory");
  run_cmd->add_option("scenario", run.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--hand-trace", run.hand_trace, "Hand trace CSV (t,x,y,z); defaults to the scenario's")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--ticks", run.ticks, "Number of ticks (default: duration or trace length)");
  run_cmd->add_flag("--no-avoidance", run.no_avoidance, "Disable obstacle avoidance");
  run_cmd->add_option("--layout", run.layout, "Obstacle layout name");
  run_cmd->add_option("--seed", run.seed, "Recorded in the trace header; the core is deterministic");

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute run metrics and the reaction-correctness curve");
  metrics_cmd->add_option("trace", metrics.trace, "Trace directory or trace.csv")->required()->check(CLI::ExistingPath);
  metrics_cmd->add_option("--horizon-ms", metrics.horizon_ms, "Correctness horizon")->check(CLI::NonNegativeNumber);
  metrics_cmd->add_option("--bin-ms", metrics.bin_ms, "Correctness bin width")->check(CLI::PositiveNumber);
  metrics_cmd->add_option("--curve-out", metrics.curve_out, "Write the correctness curve as CSV");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run a live WebSocket session");
  serve_cmd->add_option("scenario", serve.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "TCP port (0 = any free port)");
  serve_cmd->add_option("--address", serve.address, "Bind address");
  serve_cmd->add_option("--mode", serve.mode, "Feedback condition")->check(CLI::IsMember({"visual", "blind"}));
  serve_cmd->add_option("--decimation", serve.decimation, "State frame every n-th tick")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--out", serve.out, "Write the session trace here on shutdown");

  std::string pattern_id;
  std::string pattern_format = "json";
  auto* patterns_cmd = app.add_subcommand("patterns", "Print tactile pattern timelines");
  patterns_cmd->add_option("--emit", pattern_id, "Pattern id or 'all'")->required();
  patterns_cmd->add_option("--format", pattern_format, "Output format")->check(CLI::IsMember({"json", "device"}));

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario and print its hash");
  validate_cmd->add_option("scenario", validate_path, "Scenario JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*metrics_cmd) return cmd_metrics(metrics);
    if (*serve_cmd) return cmd_serve(serve);
    if (*patterns_cmd) return cmd_patterns(pattern_id, pattern_format);
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const sg::ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
