#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "qlustering/errors.hpp"

namespace qlustering {

/// Cluster assignment; ids are 0-based and need not be contiguous.
struct Partition {
  std::vector<int> labels;

  Partition() = default;
  explicit Partition(std::vector<int> l) : labels(std::move(l)) {
    for (int v : labels) {
      if (v < 0) throw DimensionError("partition labels must be non-negative");
    }
  }

  std::size_t size() const { return labels.size(); }
  int operator[](std::size_t i) const { return labels[i]; }

  /// One past the largest id.
  int id_bound() const {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }

  /// Number of distinct ids actually used.
  int cluster_count() const {
    std::vector<int> seen(static_cast<std::size_t>(id_bound()), 0);
    int count = 0;
    for (int v : labels) {
      if (!seen[static_cast<std::size_t>(v)]++) ++count;
    }
    return count;
  }

  bool operator==(const Partition& other) const = default;
};

inline void require_same_length(const Partition& a, const Partition& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": partitions have different lengths (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace qlustering
