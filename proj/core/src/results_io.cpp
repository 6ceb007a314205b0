#include "cfmargin/results_io.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace cfmargin {
namespace {

constexpr const char* kProbabilityHeader =
    "episode_id,kind,intensity,reps,collisions,p_hat,ci_low,ci_high,failures";
constexpr const char* kMarginHeader =
    "episode_id,kind,mode,margin,censored,grid_resolution,p_fatal_at_margin,p_mais3_at_margin,"
    "p_mais2_at_margin";

void kv(std::string& out, const char* key, const std::string& v) {
  out += ' ';
  out += key;
  out += '=';
  out += v;
}

std::string margin_cell(const MarginResult& r) {
  if (r.censored) return ">" + format_double(intensity_max(r.kind));
  return format_double(r.margin);
}

std::string margin_cell(const MarginRow& r) {
  if (r.censored) return ">" + format_double(intensity_max(r.kind));
  return format_double(r.margin);
}

// Line-oriented CSV scanning with positional errors.

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double cell_f64(const std::string& s, int line, int col) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, col, "bad number '" + s + "'");
  return v;
}

int cell_i32(const std::string& s, int line, int col) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(line, col, "bad integer '" + s + "'");
  return v;
}

CounterfactualKind cell_kind(const std::string& s, int line, int col) {
  const auto k = kind_from_name(s);
  if (!k) throw ParseError(line, col, "unknown counterfactual kind '" + s + "'");
  return *k;
}

std::optional<MarginMode> mode_from_name(const std::string& s) {
  for (MarginMode m : {MarginMode::Reactive, MarginMode::NonReactive, MarginMode::BestResponse}) {
    if (s == margin_mode_name(m)) return m;
  }
  return std::nullopt;
}

}  // namespace

std::string write_probability_table(const std::vector<MarginResult>& results, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) {
    out = kProbabilityHeader;
    out += '\n';
  }
  for (const auto& r : results) {
    for (const auto& p : r.curve) {
      if (fmt == OutputFormat::Csv) {
        out += r.episode_id;
        out += ',';
        out += kind_name(r.kind);
        out += ',';
        out += format_double(p.intensity);
        out += ',';
        out += std::to_string(p.reps);
        out += ',';
        out += std::to_string(p.collisions);
        out += ',';
        out += format_double(p.p_hat);
        out += ',';
        out += format_double(p.ci_low);
        out += ',';
        out += format_double(p.ci_high);
        out += ',';
        out += std::to_string(p.failures);
      } else {
        out += "probability";
        kv(out, "episode_id", r.episode_id);
        kv(out, "kind", kind_name(r.kind));
        kv(out, "intensity", format_double(p.intensity));
        kv(out, "reps", std::to_string(p.reps));
        kv(out, "collisions", std::to_string(p.collisions));
        kv(out, "p_hat", format_double(p.p_hat));
        kv(out, "ci_low", format_double(p.ci_low));
        kv(out, "ci_high", format_double(p.ci_high));
        kv(out, "failures", std::to_string(p.failures));
      }
      out += '\n';
    }
  }
  return out;
}

std::string write_margin_table(const std::vector<MarginResult>& results, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) {
    out = kMarginHeader;
    out += '\n';
  }
  for (const auto& r : results) {
    if (fmt == OutputFormat::Csv) {
      out += r.episode_id;
      out += ',';
      out += kind_name(r.kind);
      out += ',';
      out += margin_mode_name(r.mode);
      out += ',';
      out += margin_cell(r);
      out += ',';
      out += r.censored ? '1' : '0';
      out += ',';
      out += format_double(r.grid_resolution);
      out += ',';
      out += format_double(r.severity_at_margin.p_fatal);
      out += ',';
      out += format_double(r.severity_at_margin.p_mais3plus);
      out += ',';
      out += format_double(r.severity_at_margin.p_mais2plus);
    } else {
      out += "margin";
      kv(out, "episode_id", r.episode_id);
      kv(out, "kind", kind_name(r.kind));
      kv(out, "mode", margin_mode_name(r.mode));
      kv(out, "margin", margin_cell(r));
      kv(out, "censored", r.censored ? "1" : "0");
      kv(out, "grid_resolution", format_double(r.grid_resolution));
      kv(out, "p_fatal_at_margin", format_double(r.severity_at_margin.p_fatal));
      kv(out, "p_mais3_at_margin", format_double(r.severity_at_margin.p_mais3plus));
      kv(out, "p_mais2_at_margin", format_double(r.severity_at_margin.p_mais2plus));
    }
    out += '\n';
  }
  return out;
}

std::vector<ProbabilityRow> parse_probability_table(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kProbabilityHeader)
    throw ParseError(1, 1, "expected probability table header");
  std::vector<ProbabilityRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line = static_cast<int>(i) + 1;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 9)
      throw ParseError(line, 1, "expected 9 columns, got " + std::to_string(cells.size()));
    ProbabilityRow row;
    row.episode_id = cells[0];
    row.kind = cell_kind(cells[1], line, 2);
    row.point.intensity = cell_f64(cells[2], line, 3);
    row.point.reps = cell_i32(cells[3], line, 4);
    row.point.collisions = cell_i32(cells[4], line, 5);
    row.point.p_hat = cell_f64(cells[5], line, 6);
    row.point.ci_low = cell_f64(cells[6], line, 7);
    row.point.ci_high = cell_f64(cells[7], line, 8);
    row.point.failures = cell_i32(cells[8], line, 9);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MarginRow> parse_margin_table(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kMarginHeader)
    throw ParseError(1, 1, "expected margin table header");
  std::vector<MarginRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line = static_cast<int>(i) + 1;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 9)
      throw ParseError(line, 1, "expected 9 columns, got " + std::to_string(cells.size()));
    MarginRow row;
    row.episode_id = cells[0];
    row.kind = cell_kind(cells[1], line, 2);
    const auto mode = mode_from_name(cells[2]);
    if (!mode) throw ParseError(line, 3, "unknown mode '" + cells[2] + "'");
    row.mode = *mode;
    const bool sentinel = !cells[3].empty() && cells[3][0] == '>';
    if (!sentinel) row.margin = cell_f64(cells[3], line, 4);
    if (cells[4] == "0") {
      row.censored = false;
    } else if (cells[4] == "1") {
      row.censored = true;
    } else {
      throw ParseError(line, 5, "censored flag must be 0 or 1");
    }
    if (sentinel != row.censored)
      throw ParseError(line, 4, "margin sentinel disagrees with censored flag");
    row.grid_resolution = cell_f64(cells[5], line, 6);
    row.severity_at_margin.p_fatal = cell_f64(cells[6], line, 7);
    row.severity_at_margin.p_mais3plus = cell_f64(cells[7], line, 8);
    row.severity_at_margin.p_mais2plus = cell_f64(cells[8], line, 9);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MarginResult> stitch_results(const std::vector<ProbabilityRow>& points,
                                         const std::vector<MarginRow>& margins,
                                         int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::map<std::pair<std::string, CounterfactualKind>, std::vector<const ProbabilityRow*>> index;
  for (const auto& p : points) index[{p.episode_id, p.kind}].push_back(&p);

  std::vector<MarginResult> results;
  results.reserve(margins.size());
  for (const auto& m : margins) {
    const auto it = index.find({m.episode_id, m.kind});
    if (it == index.end())
      throw SemanticError("margin row '" + m.episode_id + "'",
                          "no probability rows for this episode and kind");
    MarginResult r;
    r.episode_id = m.episode_id;
    r.kind = m.kind;
    r.mode = m.mode;
    r.censored = m.censored;
    r.margin = m.margin;
    r.grid_resolution = m.grid_resolution;
    r.severity_at_margin = m.severity_at_margin;

    const double gamma_max = intensity_max(m.kind);
    int base_seen = 0;
    for (const ProbabilityRow* p : it->second) {
      ProbabilityPoint pt = p->point;
      pt.on_base_grid = false;
      for (int i = 0; i < grid_points; ++i) {
        if (pt.intensity == gamma_max * i / (grid_points - 1)) {
          pt.on_base_grid = true;
          ++base_seen;
          break;
        }
      }
      r.curve.push_back(pt);
    }
    if (base_seen != grid_points)
      throw SemanticError("margin row '" + m.episode_id + "'",
                          "probability rows do not cover the " + std::to_string(grid_points) +
                              "-point base grid");
    std::sort(r.curve.begin(), r.curve.end(),
              [](const ProbabilityPoint& a, const ProbabilityPoint& b) {
                return a.intensity < b.intensity;
              });
    results.push_back(std::move(r));
  }
  return results;
}

std::string write_aggregate_curve(const AggregateReport& rep, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) out = "kind,intensity,mean_p,ci_half,episodes\n";
  for (const auto& p : rep.curve) {
    if (fmt == OutputFormat::Csv) {
      out += kind_name(rep.kind);
      out += ',';
      out += format_double(p.intensity);
      out += ',';
      out += format_double(p.mean_p);
      out += ',';
      out += format_double(p.ci_half);
      out += ',';
      out += std::to_string(p.episodes);
    } else {
      out += "curve";
      kv(out, "kind", kind_name(rep.kind));
      kv(out, "intensity", format_double(p.intensity));
      kv(out, "mean_p", format_double(p.mean_p));
      kv(out, "ci_half", format_double(p.ci_half));
      kv(out, "episodes", std::to_string(p.episodes));
    }
    out += '\n';
  }
  return out;
}

std::string write_aggregate_histogram(const AggregateReport& rep, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) out = "kind,bucket_lo,bucket_hi,censored,count\n";
  for (const auto& b : rep.histogram) {
    if (fmt == OutputFormat::Csv) {
      out += kind_name(rep.kind);
      out += ',';
      out += format_double(b.lo);
      out += ',';
      out += format_double(b.hi);
      out += ',';
      out += b.censored_bucket ? '1' : '0';
      out += ',';
      out += std::to_string(b.count);
    } else {
      out += "bucket";
      kv(out, "kind", kind_name(rep.kind));
      kv(out, "lo", format_double(b.lo));
      kv(out, "hi", format_double(b.hi));
      kv(out, "censored", b.censored_bucket ? "1" : "0");
      kv(out, "count", std::to_string(b.count));
    }
    out += '\n';
  }
  return out;
}

std::string write_aggregate_summary(const AggregateReport& rep, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) {
    out =
        "kind,episodes,censored,mean_margin,mean_p_fatal_at_margin,mean_p_mais3_at_margin,"
        "mean_p_mais2_at_margin\n";
    out += kind_name(rep.kind);
    out += ',';
    out += std::to_string(rep.episodes);
    out += ',';
    out += std::to_string(rep.censored);
    out += ',';
    out += format_double(rep.mean_margin);
    out += ',';
    out += format_double(rep.severity_summary.p_fatal);
    out += ',';
    out += format_double(rep.severity_summary.p_mais3plus);
    out += ',';
    out += format_double(rep.severity_summary.p_mais2plus);
  } else {
    out += "aggregate";
    kv(out, "kind", kind_name(rep.kind));
    kv(out, "episodes", std::to_string(rep.episodes));
    kv(out, "censored", std::to_string(rep.censored));
    kv(out, "mean_margin", format_double(rep.mean_margin));
    kv(out, "mean_p_fatal_at_margin", format_double(rep.severity_summary.p_fatal));
    kv(out, "mean_p_mais3_at_margin", format_double(rep.severity_summary.p_mais3plus));
    kv(out, "mean_p_mais2_at_margin", format_double(rep.severity_summary.p_mais2plus));
  }
  out += '\n';
  return out;
}

std::string write_rankings(const std::vector<AgentRanking>& rankings, OutputFormat fmt) {
  std::string out;
  if (fmt == OutputFormat::Csv) {
    out =
        "rank,agent,episodes,censored,all_censored,mean_margin,mean_p_fatal,mean_p_mais3,"
        "mean_p_mais2,note\n";
  }
  int rank = 0;
  for (const auto& r : rankings) {
    ++rank;
    const char* note = r.all_censored ? "insensitive over tested range" : "";
    if (fmt == OutputFormat::Csv) {
      out += std::to_string(rank);
      out += ',';
      out += r.agent;
      out += ',';
      out += std::to_string(r.episodes);
      out += ',';
      out += std::to_string(r.censored);
      out += ',';
      out += r.all_censored ? '1' : '0';
      out += ',';
      out += format_double(r.mean_margin);
      out += ',';
      out += format_double(r.severity_summary.p_fatal);
      out += ',';
      out += format_double(r.severity_summary.p_mais3plus);
      out += ',';
      out += format_double(r.severity_summary.p_mais2plus);
      out += ',';
      out += note;
    } else {
      out += "ranking";
      kv(out, "rank", std::to_string(rank));
      kv(out, "agent", r.agent);
      kv(out, "episodes", std::to_string(r.episodes));
      kv(out, "censored", std::to_string(r.censored));
      kv(out, "all_censored", r.all_censored ? "1" : "0");
      kv(out, "mean_margin", format_double(r.mean_margin));
      kv(out, "mean_p_fatal", format_double(r.severity_summary.p_fatal));
      kv(out, "mean_p_mais3", format_double(r.severity_summary.p_mais3plus));
      kv(out, "mean_p_mais2", format_double(r.severity_summary.p_mais2plus));
      if (r.all_censored) kv(out, "note", "insensitive-over-tested-range");
    }
    out += '\n';
  }
  return out;
}

}  // namespace cfmargin
