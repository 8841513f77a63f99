#pragma once
// Seeded random generators for property tests. All draws go through one
// std::mt19937_64 so a failing seed reproduces exactly.

#include <random>
#include <string>
#include <vector>

#include "sgvqa/geometry.hpp"
#include "sgvqa/model.hpp"

namespace sgvqa::testing {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);
bool coin(Rng& rng, double p = 0.5);

const std::vector<std::string>& label_pool();
const std::vector<std::string>& relation_pool();

/// Object with a valid box and 3D placement.
ObjectEntity random_object(Rng& rng, const std::string& id, const std::string& label);

/// Objects spread over a small volume so that every predicate gets exercised.
std::vector<ObjectEntity> random_placed_objects(Rng& rng, int n);

/// Valid canonical frame graph.
FrameSceneGraph random_frame_graph(Rng& rng, int frame_index);

/// Valid video graph with k sampled frames.
VideoSceneGraph random_video_graph(Rng& rng, int k);

/// n digests of `dim` features in [0, 1]; values drawn from a coarse grid when
/// `coarse` so that equal scores (ties) are common.
std::vector<FrameDigest> random_digests(Rng& rng, int n, int dim, bool coarse);

}  // namespace sgvqa::testing
