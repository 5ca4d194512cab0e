#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "symchaos/errors.hpp"
#include "symchaos/io.hpp"
#include "symchaos/returnmap.hpp"

namespace fs = std::filesystem;
using namespace symchaos;
using namespace symchaos::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_file, "Configuration file (key = value with [section] headers)");
  cmd->add_option("--set", opts.overrides, "Override a key: section.key=value (repeatable)");
  cmd->add_option("-o,--output", opts.output_dir, "Output directory (overrides SYMCHAOS_OUTPUT_DIR and run.output_dir)");
  cmd->add_flag("-q,--quiet", opts.quiet, "Suppress progress messages");
}

struct Context {
  RunConfig config;
  fs::path out;
  bool quiet = false;

  void log(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }
  fs::path esn_path() const { return config.esn_file.empty() ? out / "esn.txt" : fs::path(config.esn_file); }
};

Context prepare(const std::string& command, CommandGroup group, const CommonOptions& opts) {
  ConfigEntries entries;
  if (!opts.config_file.empty()) entries = parse_config_text(read_text_file(opts.config_file), opts.config_file);
  for (const auto& o : opts.overrides) add_override(entries, o);
  Context ctx;
  ctx.config = resolve_config(group, entries);
  if (!opts.output_dir.empty()) {
    ctx.config.output_dir = opts.output_dir;
  } else if (const char* env = std::getenv("SYMCHAOS_OUTPUT_DIR"); env && *env) {
    ctx.config.output_dir = env;
  }
  ctx.out = ctx.config.output_dir;
  ctx.quiet = opts.quiet;
  write_text_file(ctx.out / "resolved.cfg", dump_config(ctx.config, "symchaos " + command));
  return ctx;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_text_file(path, out.str());
}

Trajectory<double> simulate(const RunConfig& c) { return integrate(c.model(), c.s0, c.integrator); }

void cmd_simulate(const Context& ctx) {
  const auto traj = simulate(ctx.config);
  write_csv(ctx.out / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  ctx.log("wrote " + std::to_string(traj.size()) + " samples");
}

void cmd_encode(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto traj = simulate(c);
  const Channel ch = partition_channel(c.pipeline.partition);
  const auto events = detect_events(traj.samples.col(int(ch)), traj.t0, traj.dt, ch, c.pipeline);
  const auto seq = encode_events(events, c.pipeline.partition, c.rossler);
  write_csv(ctx.out / "events.csv", [&](std::ostream& o) { write_events_csv(o, events); });
  write_text_file(ctx.out / "symbols.txt", format_sequence(seq.bits));
  ctx.log("wrote " + std::to_string(seq.size()) + " symbols from " + std::to_string(events.size()) + " events");
}

void cmd_measure(const Context& ctx, const std::string& sequence_file) {
  const RunConfig& c = ctx.config;
  std::vector<std::uint8_t> bits;
  if (!sequence_file.empty()) {
    bits = parse_bits(read_text_file(sequence_file));
  } else {
    bits = extract_symbols(simulate(c), c.pipeline).bits;
  }
  if (bits.empty()) throw DomainError("measure: empty symbol sequence");
  const ComplexityReport report = analyze(bits, c.measure);
  write_csv(ctx.out / "complexity.csv", [&](std::ostream& o) { write_complexity_csv(o, report); });
  write_csv(ctx.out / "entropy_profile.csv", [&](std::ostream& o) { write_entropy_profile_csv(o, report.entropy); });
  if (c.measure_lyapunov && sequence_file.empty()) {
    LyapunovConfig lc = c.lyapunov;
    lc.seed = c.seed;
    const auto le = largest_le(c.model(), c.s0, lc);
    const double param = c.kind == ModelKind::Lorenz ? c.lorenz.r : c.rossler.a;
    write_csv(ctx.out / "lyapunov.csv", [&](std::ostream& o) { write_lyapunov_csv(o, param, le); });
  }
  std::ostringstream msg;
  msg << "N=" << bits.size() << " h*=" << format_double(report.source_entropy) << " LZ=" << format_double(report.lz.lz);
  if (report.detected_period) msg << " period=" << *report.detected_period << " code=" << report.code;
  ctx.log(msg.str());
}

void cmd_sweep(const Context& ctx) {
  const SweepSpec spec = ctx.config.sweep_spec();
  const auto records = run_sweep(spec, [&](std::size_t done, std::size_t total, const SweepRecord& r) {
    std::ostringstream msg;
    msg << '[' << done << '/' << total << "] " << spec.param_name << '=' << format_double(r.param)
        << " lambda_tau=" << format_double(r.lambda_tau) << " h6=" << format_double(r.h6);
    if (r.flags) msg << " flags=" << format_flags(r.flags);
    ctx.log(msg.str());
  });
  const auto windows = detect_stability_windows(records, ctx.config.windows);
  write_csv(ctx.out / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, records); });
  write_csv(ctx.out / "windows.csv", [&](std::ostream& o) { write_windows_csv(o, windows); });
  ctx.log("sweep: " + std::to_string(records.size()) + " points, " + std::to_string(windows.size()) + " windows");
}

void cmd_returnmap(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto map = build_zmax_map(simulate(c), c.pipeline.detection, c.pipeline.smoothing, c.pipeline.peaks);
  write_csv(ctx.out / "return_map.csv", [&](std::ostream& o) { write_return_map_csv(o, map); });
  ctx.log("wrote " + std::to_string(map.size()) + " map points");
}

void save_esn_file(const fs::path& path, const TrainedEsn& esn) {
  write_csv(path, [&](std::ostream& o) { save_esn(o, esn); });
}

TrainedEsn load_esn_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return load_esn(in);
}

void cmd_esn_train(const Context& ctx) {
  const SurrogateSetup setup = ctx.config.surrogate_setup();
  const TrainingData data = setup.make_data();
  EsnHyperParams hyper = setup.search.base;
  hyper.seed = ctx.config.seed;
  using ConstRef = Eigen::Ref<const Eigen::MatrixXd>;
  const ConstRef targets = setup.search.noisy_targets ? ConstRef(data.inputs) : ConstRef(data.targets());
  const TrainedEsn esn = train_esn(hyper, data.inputs, targets);
  save_esn_file(ctx.esn_path(), esn);
  ctx.log("trained reservoir of " + std::to_string(hyper.n_res) + " nodes -> " + ctx.esn_path().string());
}

void write_report(const Context& ctx, const FidelityReport& report) {
  write_csv(ctx.out / "entropy_table.csv", [&](std::ostream& o) { write_entropy_table_csv(o, report); });
  write_csv(ctx.out / "report_summary.csv", [&](std::ostream& o) { write_report_summary_csv(o, report); });
  write_csv(ctx.out / "return_map_true.csv", [&](std::ostream& o) { write_return_map_csv(o, report.truth_map); });
  write_csv(ctx.out / "return_map_surrogate.csv",
            [&](std::ostream& o) { write_return_map_csv(o, report.surrogate_map); });
  write_text_file(ctx.out / "symbols_true.txt", format_sequence(report.truth_symbols));
  write_text_file(ctx.out / "symbols_surrogate.txt", format_sequence(report.surrogate_symbols));
  std::ostringstream msg;
  msg << "report: N_true=" << report.n_true << " N_pred=" << report.n_pred
      << " max|dh|=" << format_double(report.max_entropy_delta);
  if (report.map_comparison) msg << " map_rms_fraction=" << format_double(report.map_comparison->rms_fraction());
  if (report.divergence_step) msg << " diverged at step " << *report.divergence_step;
  ctx.log(msg.str());
}

void cmd_esn_search(const Context& ctx) {
  const SurrogateSetup setup = ctx.config.surrogate_setup();
  ctx.log("generating teacher data (" + std::to_string(setup.rows_needed()) + " rows)");
  const TrainingData data = setup.make_data();
  ctx.log("searching " + std::to_string(setup.search.trials) + " trials");
  const SurrogateOutcome outcome = run_surrogate(setup, data);
  write_csv(ctx.out / "search.csv", [&](std::ostream& o) {
    write_search_csv(o, std::span<const TrialResult>(outcome.ranked).first(
                            std::min(outcome.ranked.size(), std::size_t(setup.search.trials))));
  });
  const TrialResult& winner = outcome.ranked[outcome.winner];
  save_esn_file(ctx.esn_path(), *winner.esn);
  ctx.log("winner: trial " + std::to_string(winner.trial) + " (rank " + std::to_string(outcome.winner) + ")");
  write_report(ctx, outcome.report);
}

void cmd_esn_report(const Context& ctx) {
  const SurrogateSetup setup = ctx.config.surrogate_setup();
  const TrainedEsn esn = load_esn_file(ctx.esn_path());
  const TrainingData data = setup.make_data();
  write_report(ctx, fidelity_report(esn, setup.continuation(data, setup.report_horizon), setup.report));
}

void cmd_esn_freerun(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const TrainedEsn esn = load_esn_file(ctx.esn_path());
  const EsnRunResult run = free_run(esn, esn.state, c.horizon);
  const auto traj = as_trajectory(run.outputs, c.integrator.dt, 0.0, c.model());
  if (c.write_trajectory) write_csv(ctx.out / "freerun.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  const auto seq = extract_symbols(traj, c.pipeline);
  write_text_file(ctx.out / "freerun_symbols.txt", format_sequence(seq.bits));
  ctx.log("free run of " + std::to_string(c.horizon) + " steps -> " + std::to_string(seq.size()) + " symbols");
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-dynamics chaos measures for the Lorenz and Rossler models"};
  app.require_subcommand(1);
  CommonOptions opts;
  std::string sequence_file;

  struct Command {
    CLI::App* app;
    CommandGroup group;
    std::function<void(const Context&)> run;
  };
  std::vector<Command> commands;
  auto add = [&](CLI::App* parent, const char* name, const char* help, CommandGroup group,
                 std::function<void(const Context&)> run) {
    CLI::App* cmd = parent->add_subcommand(name, help);
    add_common(cmd, opts);
    commands.push_back({cmd, group, std::move(run)});
    return cmd;
  };

  add(&app, "simulate", "Integrate a model and write t,x,y,z samples", CommandGroup::Basic, cmd_simulate);
  add(&app, "encode", "Detect events and write the binary symbol sequence", CommandGroup::Basic, cmd_encode);
  add(&app, "measure", "Entropy, LZ, Markov and period measures of a sequence", CommandGroup::Basic,
      [&](const Context& ctx) { cmd_measure(ctx, sequence_file); })
      ->add_option("--sequence", sequence_file, "File of '0'/'1' characters (default: simulate from the config)");
  add(&app, "sweep", "One-parameter sweep with stability-window detection", CommandGroup::Sweep, cmd_sweep);
  add(&app, "returnmap", "z-maxima return map of a trajectory", CommandGroup::Basic, cmd_returnmap);

  CLI::App* esn = app.add_subcommand("esn", "Echo-state-network surrogates");
  esn->require_subcommand(1);
  add(esn, "train", "Train one surrogate with the [esn] hyperparameters", CommandGroup::Esn, cmd_esn_train);
  add(esn, "search", "Random hyperparameter search, winner selection and report", CommandGroup::Esn, cmd_esn_search);
  add(esn, "report", "Fidelity report of a saved surrogate against the true model", CommandGroup::Esn, cmd_esn_report);
  add(esn, "freerun", "Free-run a saved surrogate and write its symbols", CommandGroup::Esn, cmd_esn_freerun);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    const std::string name = cmd.app->get_parent() == &app ? cmd.app->get_name()
                                                           : "esn " + cmd.app->get_name();
    return guarded([&] { cmd.run(prepare(name, cmd.group, opts)); });
  }
  return kExitConfig;
}
