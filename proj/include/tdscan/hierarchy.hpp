#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdscan/eigen.hpp"
#include "tdscan/error.hpp"
#include "tdscan/learn.hpp"
#include "tdscan/rng.hpp"

namespace tdscan {

// M_bar[i][j] = M[i][j] / sum_j M[i][j]; every row sums to 1.
inline Matrix normalize_confusion(const ConfusionMatrix& m) {
  const std::size_t n = m.labels.size();
  if (m.counts.size() != n) throw Error(ErrorKind::DimensionMismatch, "confusion matrix not square");
  Matrix out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (m.counts[i].size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "confusion matrix not square");
    }
    std::int64_t row_sum = 0;
    for (auto v : m.counts[i]) {
      if (v < 0) throw Error(ErrorKind::InvalidArgument, "negative confusion count");
      row_sum += v;
    }
    if (row_sum == 0) {
      throw Error(ErrorKind::ZeroRow, "row " + std::to_string(i) + " (" + m.labels[i] + ") sums to 0");
    }
    for (std::size_t j = 0; j < n; ++j) {
      out[i][j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(row_sum);
    }
  }
  return out;
}

// Pairwise class distance: D[i][j] = 1 - (M_bar[i][j] + M_bar[j][i]) / 2 off
// the diagonal, 0 on it. 1 means the classifier never confuses the pair.
struct DistanceMatrix {
  std::vector<std::string> labels;
  Matrix d;

  std::size_t size() const { return labels.size(); }
};

inline DistanceMatrix distance_matrix(const std::vector<std::string>& labels,
                                      const Matrix& stochastic) {
  const std::size_t n = labels.size();
  DistanceMatrix dm;
  dm.labels = labels;
  dm.d.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dm.d[i][j] = i == j ? 0.0 : 1.0 - (stochastic[i][j] + stochastic[j][i]) / 2.0;
    }
  }
  return dm;
}

inline DistanceMatrix distance_from_confusion(const ConfusionMatrix& m) {
  return distance_matrix(m.labels, normalize_confusion(m));
}

namespace detail {

// Similarity S = 1 - D with unit diagonal, then the normalized symmetric
// Laplacian L = I - Deg^{-1/2} S Deg^{-1/2}.
inline Matrix normalized_laplacian(const DistanceMatrix& dm) {
  const std::size_t n = dm.size();
  Matrix s(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s[i][j] = i == j ? 1.0 : 1.0 - dm.d[i][j];
  }
  std::vector<double> inv_sqrt_degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += s[i][j];
    if (degree <= 0.0) {
      throw Error(ErrorKind::DegenerateSimilarity, "zero degree at row " + std::to_string(i));
    }
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      l[i][j] = (i == j ? 1.0 : 0.0) - inv_sqrt_degree[i] * s[i][j] * inv_sqrt_degree[j];
    }
  }
  return l;
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

// Picks k in [2, k_max] maximizing the Laplacian eigenvalue gap
// lambda_{k+1} - lambda_k; ties resolve to the smaller k.
inline int eigengap_k(const DistanceMatrix& dm, int k_max) {
  const int n = static_cast<int>(dm.size());
  if (k_max < 2 || k_max > n - 1) {
    throw Error(ErrorKind::InvalidArgument, "k_max must lie in [2, n-1]");
  }
  auto dec = symmetric_eigen(detail::normalized_laplacian(dm));
  int best_k = 2;
  double best_gap = -1.0;
  for (int k = 2; k <= k_max; ++k) {
    const double gap = dec.values[static_cast<std::size_t>(k)] -
                       dec.values[static_cast<std::size_t>(k - 1)];
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      best_k = k;
    }
  }
  return best_k;
}

// NJW-style spectral clustering: bottom-k Laplacian eigenvectors as the
// embedding, rows L2-normalized, then seeded farthest-first k-means.
inline std::vector<std::vector<std::size_t>> spectral_cluster(const DistanceMatrix& dm, int k,
                                                              std::uint64_t seed) {
  const std::size_t n = dm.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::KTooLarge, "k must lie in [1, n]");
  }
  if (k == 1) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }

  auto dec = symmetric_eigen(detail::normalized_laplacian(dm));
  Matrix points(n, std::vector<double>(static_cast<std::size_t>(k), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) points[i][static_cast<std::size_t>(j)] = dec.vectors[i][static_cast<std::size_t>(j)];
    double norm = 0.0;
    for (double x : points[i]) norm += x * x;
    if (norm > 1e-24) {
      const double inv = 1.0 / std::sqrt(norm);
      for (double& x : points[i]) x *= inv;
    }
  }

  // farthest-first centers from a seeded start index
  Rng rng(seed);
  std::vector<std::vector<double>> centers;
  centers.push_back(points[rng.uniform(n)]);
  while (centers.size() < static_cast<std::size_t>(k)) {
    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = detail::squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        nearest = std::min(nearest, detail::squared_distance(points[i], centers[c]));
      }
      if (nearest > best_dist + 1e-15) {
        best_dist = nearest;
        best = i;
      }
    }
    centers.push_back(points[best]);
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::size_t> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = detail::squared_distance(points[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = detail::squared_distance(points[i], centers[c]);
        if (d < best_d - 1e-15) {
          best_d = d;
          best = c;
        }
      }
      next[i] = best;
    }

    // an empty cluster takes over the point farthest from its own center
    for (int guard = 0; guard < k; ++guard) {
      std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
      for (auto a : next) ++sizes[a];
      std::size_t empty = static_cast<std::size_t>(k);
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) {
          empty = c;
          break;
        }
      }
      if (empty == static_cast<std::size_t>(k)) break;
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[next[i]] <= 1) continue;
        const double d = detail::squared_distance(points[i], centers[next[i]]);
        if (d > worst_d + 1e-15) {
          worst_d = d;
          worst = i;
        }
      }
      centers[empty] = points[worst];
      next[worst] = empty;
    }

    bool stable = iter > 0 && next == assign;
    assign = std::move(next);

    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != static_cast<std::size_t>(c)) continue;
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += points[i][j];
        ++count;
      }
      if (count > 0) {
        for (double& x : mean) x /= static_cast<double>(count);
        centers[static_cast<std::size_t>(c)] = std::move(mean);
      }
    }
    if (stable) break;
  }

  std::vector<std::vector<std::size_t>> clusters(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) clusters[assign[i]].push_back(i);
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                [](const auto& c) { return c.empty(); }),
                 clusters.end());
  return clusters;
}

struct TypeCluster {
  std::string name;
  std::vector<std::string> types;

  friend bool operator==(const TypeCluster&, const TypeCluster&) = default;
};

// Two-level taxonomy: root -> clusters -> leaf classes. Clusters partition
// the label set they were induced over.
struct TypeHierarchy {
  std::vector<TypeCluster> clusters;

  std::size_t total_types() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.types.size();
    return n;
  }

  const TypeCluster* cluster_of(const std::string& type) const {
    for (const auto& c : clusters) {
      if (std::find(c.types.begin(), c.types.end(), type) != c.types.end()) return &c;
    }
    return nullptr;
  }

  std::vector<std::string> cluster_names() const {
    std::vector<std::string> names;
    names.reserve(clusters.size());
    for (const auto& c : clusters) names.push_back(c.name);
    return names;
  }

  void validate_partition(const std::vector<std::string>& labels) const {
    std::set<std::string> expected(labels.begin(), labels.end());
    std::set<std::string> seen;
    for (const auto& c : clusters) {
      if (c.types.empty()) throw Error(ErrorKind::InvalidArgument, "empty cluster " + c.name);
      for (const auto& t : c.types) {
        if (!expected.count(t)) {
          throw Error(ErrorKind::InvalidArgument, "cluster type '" + t + "' not in label set");
        }
        if (!seen.insert(t).second) {
          throw Error(ErrorKind::InvalidArgument, "type '" + t + "' appears in two clusters");
        }
      }
    }
    if (seen.size() != expected.size()) {
      throw Error(ErrorKind::InvalidArgument, "hierarchy does not cover every label");
    }
  }

  friend bool operator==(const TypeHierarchy&, const TypeHierarchy&) = default;
};

// normalize -> distance -> eigengap -> spectral clustering; clusters are
// ordered by (size desc, first label alphabetical) and named Cluster-1..K.
inline TypeHierarchy induce_hierarchy(const ConfusionMatrix& m, int k_max, std::uint64_t seed) {
  DistanceMatrix dm = distance_from_confusion(m);
  const int k = eigengap_k(dm, k_max);
  auto partition = spectral_cluster(dm, k, seed);

  std::vector<std::vector<std::string>> groups;
  for (const auto& cluster : partition) {
    std::vector<std::string> names;
    for (std::size_t idx : cluster) names.push_back(m.labels[idx]);
    std::sort(names.begin(), names.end());
    groups.push_back(std::move(names));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });

  TypeHierarchy h;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    h.clusters.push_back({"Cluster-" + std::to_string(i + 1), std::move(groups[i])});
  }
  h.validate_partition(m.labels);
  return h;
}

inline nlohmann::json hierarchy_to_json(const TypeHierarchy& h) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : h.clusters) clusters.push_back({{"name", c.name}, {"types", c.types}});
  return {{"schema_version", 1}, {"clusters", clusters}};
}

inline TypeHierarchy hierarchy_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) {
      throw Error(ErrorKind::SchemaMismatch, "unsupported hierarchy schema_version");
    }
    TypeHierarchy h;
    for (const auto& c : j.at("clusters")) {
      h.clusters.push_back(
          {c.at("name").get<std::string>(), c.at("types").get<std::vector<std::string>>()});
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SerializationError, std::string("bad hierarchy file: ") + e.what());
  }
}

inline TypeHierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::SerializationError, "invalid JSON in '" + path + "'");
  return hierarchy_from_json(j);
}

inline void save_hierarchy(const TypeHierarchy& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << hierarchy_to_json(h).dump(2) << '\n';
}

}  // namespace tdscan
