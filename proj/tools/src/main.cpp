// cfmargin: counterfactual safety-margin toolkit.
//
// Subcommands: simulate (scenario -> episode log), sweep (episodes x kind ->
// probability/margin tables), bounds (non-reactive + best-response margins),
// aggregate (run dirs -> mean curves, histograms, summaries, plot data),
// rank (per-agent margin tables -> ordered report), gen-suite (the shipped
// 100-scenario evaluation suite).
//
// Exit codes: 0 success, 2 input error, 3 simulation failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "cfmargin/analytics.hpp"
#include "cfmargin/dynamics.hpp"
#include "cfmargin/margin.hpp"
#include "cfmargin/results_io.hpp"
#include "cfmargin/scenario_io.hpp"
#include "suite.hpp"

namespace fs = std::filesystem;

namespace cfmargin {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + p.string() + "'");
  out << text;
}

const char* table_ext(OutputFormat fmt) { return fmt == OutputFormat::Csv ? ".csv" : ".txt"; }

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "structured") return OutputFormat::Structured;
  throw std::invalid_argument("bad --format '" + s + "' (csv | structured)");
}

CounterfactualKind parse_kind(const std::string& s) {
  const auto kind = kind_from_name(s);
  if (!kind) throw std::invalid_argument("unknown kind '" + s + "'");
  return *kind;
}

std::vector<CounterfactualKind> parse_kinds(const std::string& s) {
  if (s == "all") return std::vector<CounterfactualKind>(std::begin(kAllKinds), std::end(kAllKinds));
  return {parse_kind(s)};
}

MarginMode parse_mode(const std::string& s) {
  for (MarginMode m : {MarginMode::Reactive, MarginMode::NonReactive, MarginMode::BestResponse})
    if (s == margin_mode_name(m)) return m;
  throw std::invalid_argument("bad --mode '" + s +
                              "' (reactive | non_reactive | best_response)");
}

struct EgoMode {
  MarginMode mode = MarginMode::NonReactive;
  std::string policy;  // Reactive only
};

EgoMode parse_ego_mode(const std::string& s) {
  if (s == "replay") return {MarginMode::NonReactive, ""};
  if (s == "best-response") return {MarginMode::BestResponse, ""};
  if (s.rfind("policy:", 0) == 0 && s.size() > 7) return {MarginMode::Reactive, s.substr(7)};
  throw std::invalid_argument("bad --ego-mode '" + s +
                              "' (replay | policy:NAME | best-response)");
}

// Episode inputs: explicit files plus every *.epi in a directory, sorted by
// path so output row order never depends on filesystem enumeration.
std::vector<fs::path> collect_episodes(const std::vector<std::string>& files,
                                       const std::string& dir) {
  std::vector<fs::path> out;
  auto add_dir = [&out](const fs::path& d) {
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file() && e.path().extension() == ".epi") out.push_back(e.path());
  };
  for (const auto& f : files) {
    // A directory here is treated as if it had been passed as --episodes-dir.
    if (fs::is_directory(f)) add_dir(f); else out.emplace_back(f);
  }
  if (!dir.empty()) {
    if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: '" + dir + "'");
    add_dir(dir);
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });
  if (out.empty()) throw std::invalid_argument("no episodes given (--episode / --episodes-dir)");
  return out;
}

struct SearchFlags {
  int grid = 11;
  int refine = 4;
  int reps = 50;
  int workers = 0;  // <= 0: hardware concurrency
  double eps = 0.05;
  std::uint64_t seed = 0;
};

void add_search_flags(CLI::App* cmd, SearchFlags* f) {
  cmd->add_option("--grid", f->grid, "base grid points over [0, gamma_max]")
      ->check(CLI::Range(2, 1024));
  cmd->add_option("--refine", f->refine, "bisection rounds in the crossing cell")
      ->check(CLI::Range(0, 60));
  cmd->add_option("--reps", f->reps, "Monte-Carlo reps per point (stochastic kinds)")
      ->check(CLI::Range(1, 100000));
  cmd->add_option("--eps", f->eps, "collision-probability threshold")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--seed", f->seed, "root seed for all randomness");
  cmd->add_option("--workers", f->workers, "worker threads (0 = hardware)");
}

MarginSearchConfig to_config(const SearchFlags& f) {
  MarginSearchConfig c;
  c.epsilon = f.eps;
  c.grid_points = f.grid;
  c.refine_rounds = f.refine;
  c.reps = f.reps;
  c.workers = f.workers;
  return c;
}

MarginContext make_context(const Episode& ep, const std::string& ego_id, const EgoMode& em,
                           const MarginSearchConfig& search, const SeverityModel& severity,
                           std::uint64_t seed) {
  const AgentRecord* rec = ep.find_agent(ego_id);
  if (!rec) throw std::invalid_argument("episode '" + ep.id + "' has no agent '" + ego_id + "'");
  MarginContext ctx;
  ctx.episode = &ep;
  ctx.ego_id = ego_id;
  if (!em.policy.empty()) {
    ctx.ego_policy.name = em.policy;
    ctx.ego_policy.idm = rec->policy.idm;  // recorded parameters, new wrapper
  }
  ctx.search = search;
  ctx.severity = severity;
  ctx.seed = seed;
  return ctx;
}

std::string margin_brief(const MarginResult& r) {
  if (r.censored) return ">" + format_double(intensity_max(r.kind));
  return format_double(r.margin);
}

// --------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_simulate(const SimulateArgs& a) {
  std::vector<std::string> warnings;
  ScenarioFile sc = load_scenario(a.scenario, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const std::uint64_t seed = a.seed_set ? a.seed : sc.seed;
  const int horizon = static_cast<int>(std::llround(sc.duration / sc.dt));
  Episode ep = simulate(sc, seed, horizon);
  const auto contacts = check_contacts(ep);
  fs::create_directories(a.out);
  const fs::path out = fs::path(a.out) / (ep.id + ".epi");
  save_episode(ep, out.string());
  std::printf("%s: %d steps, %zu agents, %zu contact(s) -> %s\n", ep.id.c_str(), ep.horizon,
              ep.agents.size(), contacts.size(), out.string().c_str());
  return 0;
}

// --------------------------------------------------------------------------
// sweep / bounds

struct SweepArgs {
  std::vector<std::string> episodes;
  std::string episodes_dir;
  std::string kind = "all";
  std::string ego = "ego";
  std::string ego_mode = "replay";
  std::string severity_file;
  std::string out;
  std::string format = "csv";
  SearchFlags search;
};

SeverityModel load_severity(const std::string& file) {
  if (file.empty()) return SeverityModel{};
  return severity_model_from_json_file(file);
}

int run_sweep(const SweepArgs& a) {
  const auto paths = collect_episodes(a.episodes, a.episodes_dir);
  const auto kinds = parse_kinds(a.kind);
  const EgoMode em = parse_ego_mode(a.ego_mode);
  const OutputFormat fmt = parse_format(a.format);
  const SeverityModel severity = load_severity(a.severity_file);
  const MarginSearchConfig cfg = to_config(a.search);

  std::vector<MarginResult> all;
  for (const auto& p : paths) {
    const Episode ep = load_episode(p.string());
    for (CounterfactualKind kind : kinds) {
      MarginContext ctx = make_context(ep, a.ego, em, cfg, severity, a.search.seed);
      MarginResult r = safety_margin(ctx, kind, em.mode);
      std::printf("%s %s %s margin=%s\n", ep.id.c_str(), kind_name(kind),
                  margin_mode_name(r.mode), margin_brief(r).c_str());
      all.push_back(std::move(r));
    }
  }
  const fs::path out(a.out);
  spit(out / (std::string("probability") + table_ext(fmt)), write_probability_table(all, fmt));
  spit(out / (std::string("margins") + table_ext(fmt)), write_margin_table(all, fmt));
  std::printf("%zu episode(s) x %zu kind(s) -> %s\n", paths.size(), kinds.size(),
              a.out.c_str());
  return 0;
}

struct BoundsArgs {
  std::vector<std::string> episodes;
  std::string episodes_dir;
  std::string kind = "all";
  std::string ego = "ego";
  std::string severity_file;
  std::string out;
  std::string format = "csv";
  SearchFlags search;
};

int run_bounds(const BoundsArgs& a) {
  const auto paths = collect_episodes(a.episodes, a.episodes_dir);
  const auto kinds = parse_kinds(a.kind);
  const OutputFormat fmt = parse_format(a.format);
  const SeverityModel severity = load_severity(a.severity_file);
  const MarginSearchConfig cfg = to_config(a.search);

  std::vector<MarginResult> margins;
  std::vector<MarginResult> lower_all, upper_all;
  for (const auto& p : paths) {
    const Episode ep = load_episode(p.string());
    for (CounterfactualKind kind : kinds) {
      MarginContext ctx = make_context(ep, a.ego, EgoMode{}, cfg, severity, a.search.seed);
      MarginResult lo = lower_bound_margin(ctx, kind);
      MarginResult hi = upper_bound_margin(ctx, kind);
      std::printf("%s %s non_reactive=%s best_response=%s\n", ep.id.c_str(), kind_name(kind),
                  margin_brief(lo).c_str(), margin_brief(hi).c_str());
      margins.push_back(lo);
      margins.push_back(hi);
      lower_all.push_back(std::move(lo));
      upper_all.push_back(std::move(hi));
    }
  }
  const fs::path out(a.out);
  const std::string ext = table_ext(fmt);
  spit(out / ("margins" + ext), write_margin_table(margins, fmt));
  spit(out / ("probability_non_reactive" + ext), write_probability_table(lower_all, fmt));
  spit(out / ("probability_best_response" + ext), write_probability_table(upper_all, fmt));
  std::printf("%zu episode(s) x %zu kind(s) -> %s\n", paths.size(), kinds.size(),
              a.out.c_str());
  return 0;
}

// --------------------------------------------------------------------------
// aggregate

struct AggregateArgs {
  std::vector<std::string> runs;
  std::string weights_file;
  std::string out;
  std::string format = "csv";
  int grid = 11;
};

std::map<std::string, double> parse_weights(const std::string& text, const std::string& file) {
  std::map<std::string, double> w;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string id;
    double weight = 0.0;
    if (!(row >> id >> weight) || weight < 0.0)
      throw std::invalid_argument(file + ":" + std::to_string(lineno) +
                                  ": expected '<episode_id> <nonnegative weight>'");
    w[id] = weight;
  }
  return w;
}

int run_aggregate(const AggregateArgs& a) {
  const OutputFormat fmt = parse_format(a.format);
  std::map<std::string, double> weights;
  if (!a.weights_file.empty()) weights = parse_weights(slurp(a.weights_file), a.weights_file);

  struct Key {
    CounterfactualKind kind;
    MarginMode mode;
    bool operator<(const Key& o) const {
      return std::pair(static_cast<int>(kind), static_cast<int>(mode)) <
             std::pair(static_cast<int>(o.kind), static_cast<int>(o.mode));
    }
  };
  std::map<Key, std::vector<MarginResult>> groups;
  std::set<std::string> seen_ids;

  struct Source {
    const char* file;
    std::optional<MarginMode> mode;
  };
  static constexpr Source kSources[] = {
      {"probability.csv", std::nullopt},
      {"probability_non_reactive.csv", MarginMode::NonReactive},
      {"probability_best_response.csv", MarginMode::BestResponse},
  };

  for (const std::string& run : a.runs) {
    const fs::path dir(run);
    const auto margins = parse_margin_table(slurp(dir / "margins.csv"));
    bool any = false;
    for (const Source& src : kSources) {
      const fs::path pp = dir / src.file;
      if (!fs::exists(pp)) continue;
      any = true;
      const auto rows = parse_probability_table(slurp(pp));
      std::vector<MarginRow> mrows;
      if (src.mode) {
        for (const auto& m : margins)
          if (m.mode == *src.mode) mrows.push_back(m);
      } else {
        std::set<MarginMode> modes;
        for (const auto& m : margins) modes.insert(m.mode);
        if (modes.size() > 1)
          throw std::invalid_argument(run +
                                      ": probability.csv is ambiguous next to a "
                                      "mixed-mode margins.csv");
        mrows = margins;
      }
      auto stitched = stitch_results(rows, mrows, a.grid);
      for (auto& r : stitched) {
        seen_ids.insert(r.episode_id);
        groups[Key{r.kind, r.mode}].push_back(std::move(r));
      }
    }
    if (!any) throw std::invalid_argument(run + ": no probability tables found");
  }
  for (const auto& [id, w] : weights)
    if (!seen_ids.count(id))
      throw std::invalid_argument(a.weights_file + ": unknown episode '" + id + "'");

  const fs::path out(a.out);
  const std::string ext = table_ext(fmt);
  std::string summary;
  std::ostringstream plot_p, plot_s;
  plot_p << "kind,mode,intensity,mean_p,ci_half,episodes\n";
  plot_s << "kind,mode,intensity,level,mean_severity,episodes\n";

  for (auto& [key, results] : groups) {
    std::vector<double> w;
    const std::vector<double>* wp = nullptr;
    if (!weights.empty()) {
      w.reserve(results.size());
      for (const auto& r : results) {
        auto it = weights.find(r.episode_id);
        w.push_back(it == weights.end() ? 1.0 : it->second);
      }
      wp = &w;
    }
    const AggregateReport rep = aggregate(results, wp);
    const std::string tag =
        std::string(kind_name(key.kind)) + "_" + margin_mode_name(key.mode);
    spit(out / ("curve_" + tag + ext), write_aggregate_curve(rep, fmt));
    spit(out / ("histogram_" + tag + ext), write_aggregate_histogram(rep, fmt));

    const std::string stext = write_aggregate_summary(rep, OutputFormat::Csv);
    if (summary.empty()) {
      summary = stext;
    } else {
      summary += stext.substr(stext.find('\n') + 1);  // drop repeated header
    }

    for (const auto& pt : rep.curve) {
      plot_p << kind_name(key.kind) << ',' << margin_mode_name(key.mode) << ','
             << format_double(pt.intensity) << ',' << format_double(pt.mean_p) << ','
             << format_double(pt.ci_half) << ',' << pt.episodes << '\n';
      const std::pair<const char*, double> levels[] = {
          {"fatal", pt.mean_severity.p_fatal},
          {"mais3plus", pt.mean_severity.p_mais3plus},
          {"mais2plus", pt.mean_severity.p_mais2plus},
      };
      for (const auto& [name, value] : levels)
        plot_s << kind_name(key.kind) << ',' << margin_mode_name(key.mode) << ','
               << format_double(pt.intensity) << ',' << name << ','
               << format_double(value) << ',' << pt.severity_episodes << '\n';
    }
    std::printf("%s: %d episode(s), %d censored, mean margin %s\n", tag.c_str(), rep.episodes,
                rep.censored, format_double(rep.mean_margin).c_str());
  }
  spit(out / "summary.csv", summary);
  spit(out / "plot_probability.csv", plot_p.str());
  spit(out / "plot_severity.csv", plot_s.str());
  return 0;
}

// --------------------------------------------------------------------------
// rank

struct RankArgs {
  std::vector<std::string> groups;  // NAME:DIR
  std::string kind;
  std::string mode = "reactive";
  std::string out;
  std::string format = "csv";
};

int run_rank(const RankArgs& a) {
  const CounterfactualKind kind = parse_kind(a.kind);
  const MarginMode mode = parse_mode(a.mode);
  const OutputFormat fmt = parse_format(a.format);

  std::vector<std::pair<std::string, std::vector<MarginResult>>> per_agent;
  for (const std::string& g : a.groups) {
    const auto colon = g.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == g.size())
      throw std::invalid_argument("bad --group '" + g + "' (expected NAME:DIR)");
    const std::string name = g.substr(0, colon);
    const fs::path dir(g.substr(colon + 1));
    std::vector<MarginResult> results;
    for (const MarginRow& m : parse_margin_table(slurp(dir / "margins.csv"))) {
      if (m.kind != kind || m.mode != mode) continue;
      MarginResult r;
      r.episode_id = m.episode_id;
      r.kind = m.kind;
      r.mode = m.mode;
      r.censored = m.censored;
      r.margin = m.margin;
      r.grid_resolution = m.grid_resolution;
      r.severity_at_margin = m.severity_at_margin;
      results.push_back(std::move(r));
    }
    if (results.empty())
      throw std::invalid_argument(dir.string() + ": no rows for kind '" + a.kind +
                                  "' mode '" + a.mode + "'");
    per_agent.emplace_back(name, std::move(results));
  }

  const auto rankings = rank_agents(per_agent);
  spit(fs::path(a.out) / (std::string("rankings") + table_ext(fmt)),
       write_rankings(rankings, fmt));
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const AgentRanking& r = rankings[i];
    std::printf("%zu. %s mean_margin=%s censored=%d/%d%s\n", i + 1, r.agent.c_str(),
                format_double(r.mean_margin).c_str(), r.censored, r.episodes,
                r.all_censored ? " (insensitive over tested range)" : "");
  }
  return 0;
}

// --------------------------------------------------------------------------
// gen-suite

struct GenSuiteArgs {
  std::string out;
  std::uint64_t seed = 2026;
};

int run_gen_suite(const GenSuiteArgs& a) {
  const auto scenarios = suite::generate_suite(a.seed);
  const fs::path out(a.out);
  fs::create_directories(out / "scenarios");
  fs::create_directories(out / "episodes");
  std::vector<std::string> offenders;
  for (const ScenarioFile& sc : scenarios) {
    validate_scenario(sc);
    save_scenario(sc, (out / "scenarios" / (sc.id + ".scn")).string());
    const int horizon = static_cast<int>(std::llround(sc.duration / sc.dt));
    Episode ep = simulate(sc, sc.seed, horizon);
    if (!check_contacts(ep).empty()) offenders.push_back(sc.id);
    save_episode(ep, (out / "episodes" / (sc.id + ".epi")).string());
  }
  std::printf("wrote %zu scenarios and episodes under %s\n", scenarios.size(),
              a.out.c_str());
  if (!offenders.empty()) {
    std::string list;
    for (const auto& id : offenders) list += " " + id;
    std::fprintf(stderr, "error: nominal contacts in:%s\n", list.c_str());
    return 3;
  }
  return 0;
}

// --------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{"counterfactual safety-margin toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "run a scenario closed-loop into an episode");
  c_sim->add_option("--scenario", sim.scenario, "scenario file (native or CommonRoad XML)")
      ->required();
  c_sim->add_option("--out", sim.out, "output directory")->required();
  CLI::Option* sim_seed = c_sim->add_option("--seed", sim.seed, "override the scenario seed");

  SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand("sweep", "probability curves and margins per episode");
  c_sweep->add_option("--episode", sweep.episodes, "episode file (repeatable)");
  c_sweep->add_option("--episodes-dir", sweep.episodes_dir, "directory of *.epi files");
  c_sweep->add_option("--kind", sweep.kind, "counterfactual kind or 'all'");
  c_sweep->add_option("--ego", sweep.ego, "ego agent id");
  c_sweep->add_option("--ego-mode", sweep.ego_mode, "replay | policy:NAME | best-response");
  c_sweep->add_option("--severity", sweep.severity_file, "severity model JSON");
  c_sweep->add_option("--out", sweep.out, "output directory")->required();
  c_sweep->add_option("--format", sweep.format, "csv | structured");
  add_search_flags(c_sweep, &sweep.search);

  BoundsArgs bounds;
  CLI::App* c_bounds =
      app.add_subcommand("bounds", "non-reactive and best-response margins per episode");
  c_bounds->add_option("--episode", bounds.episodes, "episode file (repeatable)");
  c_bounds->add_option("--episodes-dir", bounds.episodes_dir, "directory of *.epi files");
  c_bounds->add_option("--kind", bounds.kind, "counterfactual kind or 'all'");
  c_bounds->add_option("--ego", bounds.ego, "ego agent id");
  c_bounds->add_option("--severity", bounds.severity_file, "severity model JSON");
  c_bounds->add_option("--out", bounds.out, "output directory")->required();
  c_bounds->add_option("--format", bounds.format, "csv | structured");
  add_search_flags(c_bounds, &bounds.search);

  AggregateArgs agg;
  CLI::App* c_agg = app.add_subcommand("aggregate", "cross-episode curves and summaries");
  c_agg->add_option("--run", agg.runs, "sweep/bounds output directory (repeatable)")
      ->required();
  c_agg->add_option("--weights", agg.weights_file, "episode weights: '<id> <weight>' lines");
  c_agg->add_option("--grid", agg.grid, "base grid points used by the runs")
      ->check(CLI::Range(2, 1024));
  c_agg->add_option("--out", agg.out, "output directory")->required();
  c_agg->add_option("--format", agg.format, "csv | structured");

  RankArgs rank;
  CLI::App* c_rank = app.add_subcommand("rank", "order agents by mean non-censored margin");
  c_rank->add_option("--group", rank.groups, "NAME:DIR margin-table source (repeatable)")
      ->required();
  c_rank->add_option("--kind", rank.kind, "counterfactual kind")->required();
  c_rank->add_option("--mode", rank.mode, "reactive | non_reactive | best_response");
  c_rank->add_option("--out", rank.out, "output directory")->required();
  c_rank->add_option("--format", rank.format, "csv | structured");

  GenSuiteArgs gen;
  CLI::App* c_gen = app.add_subcommand("gen-suite", "generate the shipped evaluation suite");
  c_gen->add_option("--out", gen.out, "output directory")->required();
  c_gen->add_option("--seed", gen.seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  sim.seed_set = sim_seed->count() > 0;
  if (c_sim->parsed()) return run_simulate(sim);
  if (c_sweep->parsed()) return run_sweep(sweep);
  if (c_bounds->parsed()) return run_bounds(bounds);
  if (c_agg->parsed()) return run_aggregate(agg);
  if (c_rank->parsed()) return run_rank(rank);
  if (c_gen->parsed()) return run_gen_suite(gen);
  return 2;
}

}  // namespace
}  // namespace cfmargin

int main(int argc, char** argv) {
  try {
    return cfmargin::dispatch(argc, argv);
  } catch (const cfmargin::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const cfmargin::SemanticError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const cfmargin::SimulationError& e) {
    std::fprintf(stderr, "error: simulation failed at step %d (agent '%s'): %s\n", e.step,
                 e.agent.c_str(), e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
