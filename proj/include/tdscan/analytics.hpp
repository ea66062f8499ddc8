#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdscan/error.hpp"
#include "tdscan/pipeline.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

inline constexpr std::string_view kOverallScope = "overall";

struct DistributionCell {
  std::int64_t count = 0;
  double percent = 0.0;
};

// Per-platform and pooled counts/percentages of detected instances.
struct DistributionTable {
  // scope ("overall" or a platform name) -> type name -> cell
  std::map<std::string, std::map<std::string, DistributionCell>> scopes;
};

inline DistributionTable distribution(const std::vector<TdInstance>& instances) {
  DistributionTable table;
  auto& overall = table.scopes[std::string(kOverallScope)];
  for (TdType t : all_td_types()) overall[to_string(t)] = {};

  for (const auto& instance : instances) {
    ++table.scopes[std::string(kOverallScope)][to_string(instance.type)].count;
    auto& platform_scope = table.scopes[instance.platform.empty() ? "unknown" : instance.platform];
    for (TdType t : all_td_types()) platform_scope.try_emplace(to_string(t));
    ++platform_scope[to_string(instance.type)].count;
  }

  for (auto& [scope, cells] : table.scopes) {
    std::int64_t total = 0;
    for (const auto& [type, cell] : cells) total += cell.count;
    if (total == 0) continue;
    for (auto& [type, cell] : cells) {
      cell.percent = 100.0 * static_cast<double>(cell.count) / static_cast<double>(total);
    }
  }
  return table;
}

struct SpearmanResult {
  double rho = 0.0;
  bool defined = true;  // false when either vector is constant
};

namespace detail {

// average (fractional) ranks, 1-based
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

// Spearman's rank correlation with average ranks for ties (rho is then the
// Pearson correlation of the rank vectors, exact under ties).
inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "vector lengths differ");
  if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "need >= 3 observations");
  auto rho = detail::pearson(detail::average_ranks(x), detail::average_ranks(y));
  if (!rho) return {0.0, false};
  return {std::clamp(*rho, -1.0, 1.0), true};
}

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<bool>> defined;
};

// Pairwise Spearman correlation between per-package counts of each TD type.
inline CorrelationMatrix correlation_matrix(
    const std::map<std::string, std::map<std::string, std::int64_t>>& per_package_counts) {
  if (per_package_counts.size() < 3) {
    throw Error(ErrorKind::TooFewExamples, "need >= 3 packages for correlation");
  }
  CorrelationMatrix out;
  for (TdType t : all_td_types()) out.labels.push_back(to_string(t));
  const std::size_t n = out.labels.size();

  // package-aligned count vectors (packages iterate in sorted map order)
  std::vector<std::vector<double>> series(n);
  for (const auto& [package, counts] : per_package_counts) {
    for (std::size_t t = 0; t < n; ++t) {
      auto it = counts.find(out.labels[t]);
      series[t].push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
    }
  }

  out.rho.assign(n, std::vector<double>(n, 0.0));
  out.defined.assign(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i) {
    out.rho[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const SpearmanResult r = spearman(series[i], series[j]);
      out.rho[i][j] = out.rho[j][i] = r.rho;
      out.defined[i][j] = out.defined[j][i] = r.defined;
    }
  }
  return out;
}

inline std::map<std::string, std::map<std::string, std::int64_t>> per_package_counts(
    const std::vector<TdInstance>& instances) {
  std::map<std::string, std::map<std::string, std::int64_t>> counts;
  for (const auto& instance : instances) {
    ++counts[instance.package][to_string(instance.type)];
  }
  return counts;
}

inline std::map<std::string, std::int64_t> totals_by_type(const std::vector<TdInstance>& instances) {
  std::map<std::string, std::int64_t> totals;
  for (TdType t : all_td_types()) totals[to_string(t)] = 0;
  for (const auto& instance : instances) ++totals[to_string(instance.type)];
  return totals;
}

// type -> ordered (year, average instances per package)
struct TrendSeries {
  std::map<std::string, std::vector<std::pair<int, double>>> per_type;
};

inline TrendSeries trend(const std::vector<TdInstance>& instances,
                         const std::map<int, std::int64_t>& packages_by_year) {
  for (const auto& [year, packages] : packages_by_year) {
    if (packages <= 0) {
      throw Error(ErrorKind::MissingYear,
                  "package count for year " + std::to_string(year) + " must be > 0");
    }
  }
  std::map<std::string, std::map<int, std::int64_t>> counts;
  for (const auto& instance : instances) {
    const int year = year_of(instance.created_at);
    auto it = packages_by_year.find(year);
    if (it == packages_by_year.end() || it->second <= 0) {
      throw Error(ErrorKind::MissingYear,
                  "no package count for year " + std::to_string(year));
    }
    ++counts[to_string(instance.type)][year];
  }

  TrendSeries series;
  for (TdType t : all_td_types()) {
    auto& points = series.per_type[to_string(t)];
    for (const auto& [year, packages] : packages_by_year) {
      const auto& per_year = counts[to_string(t)];
      auto it = per_year.find(year);
      const double count = it == per_year.end() ? 0.0 : static_cast<double>(it->second);
      points.emplace_back(year, count / static_cast<double>(packages));
    }
  }
  return series;
}

struct TypeGrowth {
  double delta_occurrence = 0.0;
  std::optional<double> cagr_percent;  // undefined when the first-year value is 0
};

struct GrowthStats {
  int first_year = 0;
  int last_year = 0;
  std::map<std::string, TypeGrowth> per_type;
};

// delta = v_last - v_first; CAGR% = 100 * ((v_last/v_first)^(1/years) - 1).
inline GrowthStats growth(const TrendSeries& series, int first_year, int last_year) {
  if (last_year <= first_year) {
    throw Error(ErrorKind::InvalidArgument, "growth window must span >= 1 year");
  }
  GrowthStats stats;
  stats.first_year = first_year;
  stats.last_year = last_year;
  for (const auto& [type, points] : series.per_type) {
    std::optional<double> first, last;
    for (const auto& [year, value] : points) {
      if (year == first_year) first = value;
      if (year == last_year) last = value;
    }
    if (!first || !last) {
      throw Error(ErrorKind::MissingYear, "trend series lacks an endpoint year for " + type);
    }
    TypeGrowth g;
    g.delta_occurrence = *last - *first;
    if (*first > 0.0) {
      const double span = static_cast<double>(last_year - first_year);
      g.cagr_percent = 100.0 * (std::pow(*last / *first, 1.0 / span) - 1.0);
    }
    stats.per_type[type] = g;
  }
  return stats;
}

// x = growth rate, y = mean off-diagonal correlation of the type's row,
// size = total instance count. Plot-ready bubble-chart data.
struct ImpactPoint {
  std::string type;
  double growth_percent = 0.0;
  bool growth_defined = true;
  double mean_correlation = 0.0;
  std::int64_t total = 0;
};

inline std::vector<ImpactPoint> impact(const GrowthStats& growth_stats,
                                       const CorrelationMatrix& corr,
                                       const std::map<std::string, std::int64_t>& totals) {
  std::vector<ImpactPoint> points;
  for (std::size_t i = 0; i < corr.labels.size(); ++i) {
    const std::string& type = corr.labels[i];
    auto g_it = growth_stats.per_type.find(type);
    auto t_it = totals.find(type);
    if (g_it == growth_stats.per_type.end() || t_it == totals.end()) {
      throw Error(ErrorKind::InvalidArgument, "impact inputs do not cover type '" + type + "'");
    }
    ImpactPoint p;
    p.type = type;
    p.growth_defined = g_it->second.cagr_percent.has_value();
    p.growth_percent = g_it->second.cagr_percent.value_or(0.0);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < corr.labels.size(); ++j) {
      if (j == i || !corr.defined[i][j]) continue;
      sum += corr.rho[i][j];
      ++n;
    }
    p.mean_correlation = n > 0 ? sum / static_cast<double>(n) : 0.0;
    p.total = t_it->second;
    points.push_back(std::move(p));
  }
  return points;
}

// --- emission --------------------------------------------------------------

inline json distribution_to_json(const DistributionTable& t) {
  json scopes = json::object();
  for (const auto& [scope, cells] : t.scopes) {
    json s = json::object();
    for (const auto& [type, cell] : cells) {
      s[type] = {{"count", cell.count}, {"percent", cell.percent}};
    }
    scopes[scope] = std::move(s);
  }
  return scopes;
}

inline std::string distribution_to_csv(const DistributionTable& t) {
  std::ostringstream out;
  out << "scope,type,count,percent\n";
  for (const auto& [scope, cells] : t.scopes) {
    for (const auto& [type, cell] : cells) {
      out << scope << ',' << type << ',' << cell.count << ',' << cell.percent << '\n';
    }
  }
  return out.str();
}

inline json correlation_to_json(const CorrelationMatrix& c) {
  json rows = json::object();
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    json row = json::object();
    for (std::size_t j = 0; j < c.labels.size(); ++j) {
      if (c.defined[i][j]) {
        row[c.labels[j]] = c.rho[i][j];
      } else {
        row[c.labels[j]] = nullptr;  // undefined (constant vector)
      }
    }
    rows[c.labels[i]] = std::move(row);
  }
  return {{"labels", c.labels}, {"rho", std::move(rows)}};
}

inline std::string correlation_to_csv(const CorrelationMatrix& c) {
  std::ostringstream out;
  out << "type";
  for (const auto& label : c.labels) out << ',' << label;
  out << '\n';
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    out << c.labels[i];
    for (std::size_t j = 0; j < c.labels.size(); ++j) {
      out << ',';
      if (c.defined[i][j]) out << c.rho[i][j];
    }
    out << '\n';
  }
  return out.str();
}

inline json trend_to_json(const TrendSeries& t) {
  json types = json::object();
  for (const auto& [type, points] : t.per_type) {
    json series = json::array();
    for (const auto& [year, value] : points) {
      series.push_back({{"year", year}, {"per_package", value}});
    }
    types[type] = std::move(series);
  }
  return types;
}

inline std::string trend_to_csv(const TrendSeries& t) {
  std::ostringstream out;
  out << "type,year,per_package\n";
  for (const auto& [type, points] : t.per_type) {
    for (const auto& [year, value] : points) {
      out << type << ',' << year << ',' << value << '\n';
    }
  }
  return out.str();
}

inline json growth_to_json(const GrowthStats& g) {
  json types = json::object();
  for (const auto& [type, tg] : g.per_type) {
    json entry = {{"delta_occurrence", tg.delta_occurrence}};
    if (tg.cagr_percent) {
      entry["cagr_percent"] = *tg.cagr_percent;
    } else {
      entry["cagr_percent"] = nullptr;
    }
    types[type] = std::move(entry);
  }
  return {{"first_year", g.first_year}, {"last_year", g.last_year}, {"per_type", std::move(types)}};
}

inline std::string growth_to_csv(const GrowthStats& g) {
  std::ostringstream out;
  out << "type,delta_occurrence,cagr_percent\n";
  for (const auto& [type, tg] : g.per_type) {
    out << type << ',' << tg.delta_occurrence << ',';
    if (tg.cagr_percent) out << *tg.cagr_percent;
    out << '\n';
  }
  return out.str();
}

inline json impact_to_json(const std::vector<ImpactPoint>& points) {
  json arr = json::array();
  for (const auto& p : points) {
    arr.push_back({{"type", p.type},
                   {"x_growth_percent", p.growth_percent},
                   {"growth_defined", p.growth_defined},
                   {"y_mean_correlation", p.mean_correlation},
                   {"size_total", p.total}});
  }
  return arr;
}

inline std::string impact_to_csv(const std::vector<ImpactPoint>& points) {
  std::ostringstream out;
  out << "type,x_growth_percent,y_mean_correlation,size_total\n";
  for (const auto& p : points) {
    out << p.type << ',' << p.growth_percent << ',' << p.mean_correlation << ',' << p.total << '\n';
  }
  return out.str();
}

}  // namespace tdscan
