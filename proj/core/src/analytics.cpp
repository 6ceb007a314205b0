#include "cfmargin/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cfmargin/random.hpp"

namespace cfmargin {
namespace {

std::vector<const ProbabilityPoint*> base_points(const MarginResult& r) {
  std::vector<const ProbabilityPoint*> pts;
  for (const auto& p : r.curve) {
    if (p.on_base_grid) pts.push_back(&p);
  }
  return pts;
}

}  // namespace

OddSplit split_by_speed(const OddDataset& ds, double threshold) {
  OddSplit split;
  split.threshold = threshold;
  for (const auto& e : ds.episodes) {
    double sum = 0.0;
    int n = 0;
    for (const auto& a : e.agents) {
      if (!a.states.empty()) {
        sum += a.states.front().speed;
        ++n;
      }
    }
    const double mean = n > 0 ? sum / n : 0.0;
    (mean > threshold ? split.high : split.low).push_back(e.id);
  }
  return split;
}

AggregateReport aggregate(const std::vector<MarginResult>& results,
                          const std::vector<double>* weights) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  std::vector<double> w(results.size(), 1.0);
  if (weights) {
    if (weights->size() != results.size())
      throw std::invalid_argument("aggregate: weights/results size mismatch");
    w = *weights;
    for (double wi : w) {
      if (!(wi >= 0.0)) throw std::invalid_argument("aggregate: negative weight");
    }
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0)
      throw std::invalid_argument("aggregate: weights sum to zero");
  }

  AggregateReport rep;
  rep.kind = results.front().kind;
  rep.episodes = static_cast<int>(results.size());

  std::vector<std::vector<const ProbabilityPoint*>> grids;
  grids.reserve(results.size());
  for (const auto& r : results) {
    if (r.kind != rep.kind) throw std::invalid_argument("aggregate: mixed counterfactual kinds");
    grids.push_back(base_points(r));
    if (grids.back().size() != grids.front().size())
      throw std::invalid_argument("aggregate: mismatched intensity grids");
    for (std::size_t i = 0; i < grids.back().size(); ++i) {
      if (grids.back()[i]->intensity != grids.front()[i]->intensity)
        throw std::invalid_argument("aggregate: mismatched intensity grids");
    }
  }
  const std::size_t npts = grids.front().size();

  for (std::size_t i = 0; i < npts; ++i) {
    AggregateCurvePoint pt;
    pt.intensity = grids.front()[i]->intensity;
    pt.episodes = rep.episodes;

    double wsum = 0.0, wsq = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < grids.size(); ++k) {
      wsum += w[k];
      wsq += w[k] * w[k];
      mean += w[k] * grids[k][i]->p_hat;
    }
    mean /= wsum;
    pt.mean_p = mean;

    // Normal-approximation CI across episodes with effective sample size;
    // uniform weights reduce this to the classic 1.96 * s / sqrt(n).
    const double n_eff = wsum * wsum / wsq;
    if (n_eff > 1.0) {
      double var = 0.0;
      for (std::size_t k = 0; k < grids.size(); ++k) {
        const double d = grids[k][i]->p_hat - mean;
        var += w[k] * d * d;
      }
      var = var / wsum * n_eff / (n_eff - 1.0);
      pt.ci_half = 1.96 * std::sqrt(var / n_eff);
    }

    double sw = 0.0;
    SeverityProfile sev;
    for (std::size_t k = 0; k < grids.size(); ++k) {
      if (grids[k][i]->collisions > 0) {
        sw += w[k];
        sev.p_fatal += w[k] * grids[k][i]->mean_collision_severity.p_fatal;
        sev.p_mais3plus += w[k] * grids[k][i]->mean_collision_severity.p_mais3plus;
        sev.p_mais2plus += w[k] * grids[k][i]->mean_collision_severity.p_mais2plus;
        ++pt.severity_episodes;
      }
    }
    if (sw > 0.0) {
      sev.p_fatal /= sw;
      sev.p_mais3plus /= sw;
      sev.p_mais2plus /= sw;
      pt.mean_severity = sev;
    }
    rep.curve.push_back(pt);
  }

  for (std::size_t i = 0; i + 1 < npts; ++i) {
    MarginHistogramBucket b;
    b.lo = rep.curve[i].intensity;
    b.hi = rep.curve[i + 1].intensity;
    rep.histogram.push_back(b);
  }
  MarginHistogramBucket cb;
  cb.lo = cb.hi = rep.curve.back().intensity;
  cb.censored_bucket = true;
  rep.histogram.push_back(cb);

  double margin_w = 0.0;
  SeverityProfile summary;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    if (r.censored) {
      ++rep.censored;
      rep.histogram.back().count += 1;
      continue;
    }
    for (auto& b : rep.histogram) {
      if (!b.censored_bucket && r.margin > b.lo && r.margin <= b.hi) {
        b.count += 1;
        break;
      }
    }
    margin_w += w[k];
    rep.mean_margin += w[k] * r.margin;
    summary.p_fatal += w[k] * r.severity_at_margin.p_fatal;
    summary.p_mais3plus += w[k] * r.severity_at_margin.p_mais3plus;
    summary.p_mais2plus += w[k] * r.severity_at_margin.p_mais2plus;
  }
  if (margin_w > 0.0) {
    rep.mean_margin /= margin_w;
    summary.p_fatal /= margin_w;
    summary.p_mais3plus /= margin_w;
    summary.p_mais2plus /= margin_w;
    rep.severity_summary = summary;
  }
  return rep;
}

std::vector<AgentRanking> rank_agents(
    const std::vector<std::pair<std::string, std::vector<MarginResult>>>& per_agent) {
  std::vector<AgentRanking> rows;
  rows.reserve(per_agent.size());
  for (const auto& [name, results] : per_agent) {
    AgentRanking row;
    row.agent = name;
    row.episodes = static_cast<int>(results.size());
    int n = 0;
    for (const auto& r : results) {
      if (r.censored) {
        ++row.censored;
        continue;
      }
      ++n;
      row.mean_margin += r.margin;
      row.severity_summary.p_fatal += r.severity_at_margin.p_fatal;
      row.severity_summary.p_mais3plus += r.severity_at_margin.p_mais3plus;
      row.severity_summary.p_mais2plus += r.severity_at_margin.p_mais2plus;
    }
    if (n > 0) {
      row.mean_margin /= n;
      row.severity_summary.p_fatal /= n;
      row.severity_summary.p_mais3plus /= n;
      row.severity_summary.p_mais2plus /= n;
    } else {
      row.all_censored = true;
    }
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AgentRanking& a, const AgentRanking& b) {
    if (a.all_censored != b.all_censored) return a.all_censored;
    if (a.all_censored) return false;  // equal insensitivity, keep input order
    return a.mean_margin > b.mean_margin;
  });
  return rows;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: size mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double bootstrap_p_mean_greater(const std::vector<double>& a, const std::vector<double>& b,
                                int iterations, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap: empty sample");
  if (iterations <= 0) throw std::invalid_argument("bootstrap: iterations must be positive");
  int not_greater = 0;
  for (int it = 0; it < iterations; ++it) {
    const std::uint64_t s = seed_chain(seed, static_cast<std::uint64_t>(it));
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double u = uniform01(seed_chain(s, static_cast<std::uint64_t>(i)));
      ma += a[static_cast<std::size_t>(u * static_cast<double>(a.size()))];
    }
    const std::uint64_t sb = seed_chain(s, std::string_view("b"));
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double u = uniform01(seed_chain(sb, static_cast<std::uint64_t>(i)));
      mb += b[static_cast<std::size_t>(u * static_cast<double>(b.size()))];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    if (ma <= mb) ++not_greater;
  }
  return static_cast<double>(not_greater + 1) / static_cast<double>(iterations + 1);
}

}  // namespace cfmargin
