#pragma once

// `cla` command-line front end. Lives in a header so tests can drive it
// in-process; tools/cla_cli.cpp is a thin main().

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cla/cla.hpp"
#include "cla/config.hpp"
#include "cla/verify.hpp"

namespace cla::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,         // unknown subcommand or flag
  kConfig = 3,        // missing or invalid config
  kIo = 4,            // unreadable/unwritable artifact, malformed file
  kMismatch = 5,      // fingerprint or format-version mismatch
  kModule = 6,        // any other library error
  kOracleFailed = 7,  // oracle-check found disagreements
};

inline constexpr const char* kConfigEnv = "CLA_CONFIG";

inline const char* kExitCodeHelp =
    "Exit codes: 0 ok, 2 usage error, 3 missing/invalid config, 4 I/O or parse error,\n"
    "            5 fingerprint/format mismatch, 6 module error, 7 oracle-check failures.\n"
    "Artifacts (under --out): community.json dataset.jsonl broca.json wernicke.json report.json report.csv\n"
    "Environment: CLA_CONFIG supplies the default for --config.";

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<double> alpha;
  std::optional<std::string> out;
  bool canonical = false;
};

namespace detail {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::io_error, "cannot write '" + path.string() + "'");
  os << text;
  require(static_cast<bool>(os), ErrorCode::io_error, "write to '" + path.string() + "' failed");
}

inline json read_json(const fs::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io_error, "cannot read '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

struct Context {
  ExperimentConfig cfg;
  Flags flags;
  fs::path out;
  std::ostream& os;

  std::uint64_t seed() const { return flags.seed.value_or(cfg.run.seed); }
  int n() const { return flags.n.value_or(cfg.run.n_episodes); }
  double alpha() const { return flags.alpha.value_or(cfg.inference.alpha); }

  /// community.json from the output directory, else built from the config.
  Community community() const {
    const auto path = out / "community.json";
    if (!fs::exists(path)) return build_community(cfg.community, cfg.run.community_seed);
    auto c = community_from_json(read_json(path));
    require(c.space->fingerprint() == cfg.game().fingerprint(), ErrorCode::fingerprint_mismatch,
            "community.json was built for a different game than the config");
    return c;
  }

  InteractionDataset dataset() const { return load((out / "dataset.jsonl").string(), cfg.game()); }
};

inline Context make_context(const Flags& flags, std::ostream& os) {
  std::string path = flags.config;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  if (path.empty()) throw ConfigError("no config given (use --config PATH or set CLA_CONFIG)");
  if (!fs::exists(path)) throw ConfigError("config file '" + path + "' not found");
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (flags.alpha && !(*flags.alpha > 0.0)) throw ConfigError("--alpha must be positive");
  if (flags.n && *flags.n < 1) throw ConfigError("--n must be positive");
  Context ctx{cfg, flags, fs::path(flags.out.value_or(cfg.run.out)), os};
  fs::create_directories(ctx.out);
  return ctx;
}

// ---------------------------------------------------------------------------
// Subcommands

inline void gen_community(const Context& ctx) {
  const auto c = build_community(ctx.cfg.community, ctx.flags.seed.value_or(ctx.cfg.run.community_seed));
  write_file(ctx.out / "community.json", to_json(c).dump(2) + "\n");
  ctx.os << "gen-community: " << c.codebook.size() << " codebook entries, " << c.speakers.size() << " speakers, "
         << c.listeners.size() << " listeners -> " << (ctx.out / "community.json").string() << "\n";
}

inline void collect_cmd(const Context& ctx) {
  const auto c = ctx.community();
  auto d = collect(c, ctx.n(), ctx.seed());
  if (!ctx.flags.canonical) d.meta.created = utc_now();
  save(d, (ctx.out / "dataset.jsonl").string());
  ctx.os << "collect: " << d.records.size() << " records (seed " << ctx.seed() << ") -> "
         << (ctx.out / "dataset.jsonl").string() << "\n";
}

inline void fit_broca_cmd(const Context& ctx) {
  const auto d = ctx.dataset();
  const auto obs = d.observations();
  const auto m = fit_broca(obs, ctx.cfg.game(), ctx.cfg.inference.smoothing);
  write_file(ctx.out / "broca.json", to_json(m).dump(2) + "\n");
  ctx.os << "fit-broca: " << m.table.size() << " trajectories, training loss " << broca_loss(m, obs) << " -> "
         << (ctx.out / "broca.json").string() << "\n";
}

inline void fit_wernicke_cmd(const Context& ctx) {
  const auto d = ctx.dataset();
  const auto obs = d.observations();
  const auto space = make_space(ctx.cfg.game());
  const MapConfig map{ctx.alpha(), ctx.cfg.inference.variant};
  std::optional<ListenerModel> model;
  if (map.variant == MapVariant::expected) model = empirical_listener_model(obs, space);
  const auto w = fit_wernicke(obs, *space, map, model ? &*model : nullptr, ctx.cfg.inference.backoff_threshold);
  write_file(ctx.out / "wernicke.json", to_json(w).dump(2) + "\n");
  ctx.os << "fit-wernicke: " << w.table.size() << " messages, alpha " << w.alpha << ", objective "
         << wernicke_objective(w, obs) << " -> " << (ctx.out / "wernicke.json").string() << "\n";
}

inline void detect_cmd(const Context& ctx) {
  const auto c = ctx.community();
  const auto d = ctx.dataset();
  const auto& dist = ctx.cfg.distances();

  std::vector<std::vector<int>> contexts{{}};
  if (c.game().horizon > 1)
    for (int a = 0; a < static_cast<int>(c.game().num_actions()); ++a) contexts.push_back({a});
  const auto messages = emission_space(c.game());
  json listening = json::array();
  int detected_listeners = 0;
  double max_stat = 0.0;
  for (const auto& l : c.listeners) {
    const auto r = positive_listening_test(l, c.space, contexts, messages, dist);
    detected_listeners += r.detected ? 1 : 0;
    max_stat = std::max(max_stat, r.statistic);
    listening.push_back(to_json(r));
  }

  std::vector<SignallingEpisode> episodes;
  for (const auto& r : d.records)
    episodes.push_back({{r.hidden_target ? r.hidden_target->key : r.trajectory.key}, {}, {r.message}});
  const auto sig = positive_signalling_test(episodes, dist);

  const json report = {{"kind", "detect"}, {"listening", listening}, {"signalling", to_json(sig)}};
  write_file(ctx.out / "report.json", report.dump(2) + "\n");
  std::ostringstream csv;
  csv << "kind,listeners_detected,max_listening_statistic,signalling_detected,signalling_statistic,"
         "signalling_p_value\n"
      << "detect," << detected_listeners << ',' << json(max_stat).dump() << ',' << (sig.detected ? "true" : "false")
      << ',' << json(sig.statistic).dump() << ',' << json(*sig.p_value).dump() << "\n";
  write_file(ctx.out / "report.csv", csv.str());
  ctx.os << "detect: listening " << detected_listeners << "/" << c.listeners.size() << " listeners, signalling "
         << (sig.detected ? "detected" : "not detected") << " (p=" << *sig.p_value << ")\n";
}

inline void eval_speaker_cmd(const Context& ctx) {
  const auto c = ctx.community();
  const auto m = broca_from_json(read_json(ctx.out / "broca.json"), c.space->fingerprint());
  const auto r = eval_speaker(m, c, ctx.n(), ctx.seed());
  write_file(ctx.out / "report.json", to_json(r).dump(2) + "\n");
  write_file(ctx.out / "report.csv", to_csv(r));
  ctx.os << "eval-speaker: success_rate " << r.model.success_rate << " (oracle " << r.oracle.success_rate
         << ", random " << r.random.success_rate << ") over " << r.n << " episodes\n";
}

inline void eval_listener_cmd(const Context& ctx) {
  const auto c = ctx.community();
  const auto w = wernicke_from_json(read_json(ctx.out / "wernicke.json"), c.space->fingerprint());
  const auto r = eval_listener(w, c, ctx.n(), ctx.seed());
  write_file(ctx.out / "report.json", to_json(r).dump(2) + "\n");
  write_file(ctx.out / "report.csv", to_csv(r));
  ctx.os << "eval-listener: recovery_rate " << r.model.recovery_rate << " (literal " << r.literal.recovery_rate
         << ") over " << r.n << " episodes\n";
}

inline bool oracle_check_cmd(const Context& ctx) {
  const auto c = ctx.community();
  const std::vector<verify::SuiteResult> suites{verify::check_map_equivalence(c, 100, ctx.seed()),
                                                verify::check_optimal_message(c),
                                                verify::check_speaker_normalization(c)};
  int passed = 0, failed = 0;
  json report = {{"kind", "oracle-check"}, {"suites", json::array()}};
  for (const auto& s : suites) {
    ctx.os << "  " << s.name << ": " << s.passed << " passed, " << s.failed << " failed\n";
    report["suites"].push_back({{"name", s.name}, {"passed", s.passed}, {"failed", s.failed}});
    passed += s.passed;
    failed += s.failed;
  }
  write_file(ctx.out / "report.json", report.dump(2) + "\n");
  ctx.os << "oracle-check: " << passed << " passed, " << failed << " failed\n";
  return failed == 0;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::parse_error: return kIo;
    case ErrorCode::fingerprint_mismatch:
    case ErrorCode::format_version: return kMismatch;
    default: return kModule;
  }
}

}  // namespace detail

/// Runs one invocation; `args[0]` is the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Cooperative language acquisition: simulate communities, fit Broca/Wernicke, evaluate.", "cla"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"gen-community", "build a community from the config and write community.json"},
      {"collect", "generate an interaction dataset (dataset.jsonl)"},
      {"fit-broca", "fit the Broca (trajectory -> message) model (broca.json)"},
      {"fit-wernicke", "fit the Wernicke (message -> intended trajectory) model (wernicke.json)"},
      {"detect", "run positive listening/signalling detectors (report.json, report.csv)"},
      {"eval-speaker", "evaluate broca.json as a speaker against the community (report.json, report.csv)"},
      {"eval-listener", "evaluate wernicke.json as a listener against the community (report.json, report.csv)"},
      {"oracle-check", "check fast paths against brute-force references and print pass/fail counts"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", flags.config, "experiment config JSON (default: $CLA_CONFIG)");
    sub->add_option("--seed", flags.seed, "seed: community seed (gen-community), master seed (collect), "
                                          "evaluation seed (eval-*), case seed (oracle-check)");
    sub->add_option("--n", flags.n, "number of episodes (collect, eval-*)");
    sub->add_option("--alpha", flags.alpha, "Wernicke alpha override (fit-wernicke)");
    sub->add_option("--out", flags.out, "output directory (default: run.out)");
    sub->add_flag("--canonical", flags.canonical, "canonical output: omit timestamps so artifacts are byte-identical");
    sub->footer(kExitCodeHelp);
  }

  if (args.size() > 1 && !args[1].empty() && args[1][0] != '-' &&
      std::none_of(std::begin(subs), std::end(subs), [&](const Sub& s) { return args[1] == s.name; })) {
    err << "cla: unknown subcommand '" << args[1] << "'\n\n" << app.help();
    return kUsage;
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kOk;
    }
    err << "cla: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    auto ctx = detail::make_context(flags, out);
    if (cmd == "gen-community") detail::gen_community(ctx);
    else if (cmd == "collect") detail::collect_cmd(ctx);
    else if (cmd == "fit-broca") detail::fit_broca_cmd(ctx);
    else if (cmd == "fit-wernicke") detail::fit_wernicke_cmd(ctx);
    else if (cmd == "detect") detail::detect_cmd(ctx);
    else if (cmd == "eval-speaker") detail::eval_speaker_cmd(ctx);
    else if (cmd == "eval-listener") detail::eval_listener_cmd(ctx);
    else if (cmd == "oracle-check") return detail::oracle_check_cmd(ctx) ? kOk : kOracleFailed;
  } catch (const detail::ConfigError& e) {
    err << "cla " << cmd << ": config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    err << "cla " << cmd << ": " << e.what() << "\n";
    return detail::exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "cla " << cmd << ": " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace cla::cli
