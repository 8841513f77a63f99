#pragma once
// Brute-force reference implementations, written independently of the
// library code they check. They favour obviousness over speed.

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sgvqa/model.hpp"
#include "sgvqa/sg_select.hpp"

namespace sgvqa::testing {

/// {floor(i*l/k) : i in [0, k)} in increasing order.
std::vector<int> uniform_oracle(int l, int k);

/// Scores every frame by mean absolute difference to its predecessor (frame 0
/// against frame 1), stable-sorts by descending score and keeps the first k.
std::vector<int> difference_oracle(const std::vector<std::vector<double>>& features, int k);

using Edge = std::tuple<std::string, Predicate, std::string>;

/// Rule-table evaluation over every ordered pair, first matching rule wins.
/// A pair (a, b) is left without a predicate when (b, on, a) holds.
std::set<Edge> spatial_oracle(const std::vector<ObjectEntity>& objects,
                              const GeometryThresholds& t = {});

/// Marks the frames of every positive window, then reads off maximal runs.
/// window_positive[t] is the verdict for window [t, t + k2 - 1].
std::vector<Interval> coverage_oracle(const std::vector<bool>& window_positive, int k, int k2);

struct PartitionOracle {
  std::set<std::string> main;
  std::vector<std::set<std::string>> context;
};

PartitionOracle partition_oracle(const std::vector<std::set<std::string>>& frames, double p1);

/// Union of object labels over every frame.
std::set<std::string> label_union_oracle(const VideoSceneGraph& g);

/// Positions r - before .. r + after around each relevant position, clipped
/// to [0, k).
std::set<int> window_oracle(const std::vector<int>& relevant, int k, int before, int after);

}  // namespace sgvqa::testing
