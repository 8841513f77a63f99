#include "sgvqa/frame_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "sgvqa/errors.hpp"

namespace sgvqa {

namespace {

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace

std::vector<int> sample_uniform(int total_frames, int k) {
  if (total_frames <= 0) throw InvalidArgumentError("sample_uniform: total_frames must be positive");
  if (k <= 0) throw InvalidArgumentError("sample_uniform: k must be positive");

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::min(k, total_frames)));
  const auto l = static_cast<std::int64_t>(total_frames);
  for (std::int64_t i = 0; i < k; ++i) {
    const auto idx = static_cast<int>(i * l / k);
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

std::vector<double> difference_scores(std::span<const FrameDigest> digests) {
  if (digests.empty()) throw InvalidArgumentError("difference_scores: no digests");
  const std::size_t width = digests.front().features.size();
  if (width == 0) throw ValidationError("difference_scores: digests have no features");
  for (const auto& d : digests) {
    if (d.features.size() != width) {
      throw ValidationError("difference_scores: digest " + std::to_string(d.frame_index) +
                            " has " + std::to_string(d.features.size()) +
                            " features, expected " + std::to_string(width));
    }
  }

  std::vector<double> scores(digests.size(), 0.0);
  for (std::size_t i = 1; i < digests.size(); ++i) {
    scores[i] = mean_abs_diff(digests[i].features, digests[i - 1].features);
  }
  if (digests.size() > 1) scores[0] = mean_abs_diff(digests[0].features, digests[1].features);
  return scores;
}

std::vector<int> sample_by_difference(std::span<const FrameDigest> digests, int k) {
  if (k <= 0) throw InvalidArgumentError("sample_by_difference: k must be positive");
  const auto scores = difference_scores(digests);
  const auto n = static_cast<int>(scores.size());

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (k >= n) return order;

  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace sgvqa
