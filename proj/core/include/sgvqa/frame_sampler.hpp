#pragma once

#include <span>
#include <vector>

#include "sgvqa/model.hpp"

namespace sgvqa {

/// Evenly spaced indices floor(i * l / k), i = 0..k-1, with duplicates removed.
/// Returns min(k, l) strictly increasing indices. Throws InvalidArgumentError
/// when l or k is zero.
std::vector<int> sample_uniform(int total_frames, int k);

/// Per-frame difference score: mean absolute feature difference to the
/// previous digest. Frame 0 is scored against frame 1 so every frame has a
/// score; a single digest scores 0.
std::vector<double> difference_scores(std::span<const FrameDigest> digests);

/// Positions of the k digests with the largest difference score (ties go to
/// the smaller position), sorted ascending. k >= n returns every position.
/// Throws ValidationError on mismatched feature lengths and
/// InvalidArgumentError on empty input or k = 0.
std::vector<int> sample_by_difference(std::span<const FrameDigest> digests, int k);

}  // namespace sgvqa
