#include "generators.hpp"

#include <algorithm>

namespace sgvqa::testing {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

const std::vector<std::string>& label_pool() {
  static const std::vector<std::string> pool = {"tabby cat", "orange cat", "fence", "food",
                                                "road",      "ball",       "tree",  "bike"};
  return pool;
}

const std::vector<std::string>& relation_pool() {
  static const std::vector<std::string> pool = {"watching", "eating", "sitting on", "chasing",
                                                "holding"};
  return pool;
}

ObjectEntity random_object(Rng& rng, const std::string& id, const std::string& label) {
  ObjectEntity o;
  o.object_id = id;
  o.label = label;
  o.confidence = uniform_real(rng, 0.0, 1.0);
  const double x0 = uniform_real(rng, 0, 900);
  const double y0 = uniform_real(rng, 0, 600);
  o.box2d = Box2d{x0, y0, x0 + uniform_real(rng, 1, 300), y0 + uniform_real(rng, 1, 300)};
  o.position3d = Vec3{uniform_real(rng, -2, 2), uniform_real(rng, -2, 2), uniform_real(rng, 0.5, 6)};
  o.extent3d = Extent2{uniform_real(rng, 0.05, 1.5), uniform_real(rng, 0.05, 1.5)};
  o.role = coin(rng) ? ObjectRole::main : ObjectRole::context;
  return o;
}

std::vector<ObjectEntity> random_placed_objects(Rng& rng, int n) {
  std::vector<ObjectEntity> out;
  // Cluster a share of the objects so near-threshold pairs are frequent.
  const Vec3 anchor{uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, 2, 5)};
  for (int i = 0; i < n; ++i) {
    auto o = random_object(rng, "o" + std::to_string(i), label_pool()[i % label_pool().size()]);
    if (coin(rng, 0.6)) {
      const double spread = uniform_real(rng, 0.05, 1.5);
      o.position3d = Vec3{anchor.x + uniform_real(rng, -spread, spread),
                          anchor.y + uniform_real(rng, -spread, spread),
                          std::max(0.1, anchor.z + uniform_real(rng, -spread, spread))};
    }
    out.push_back(std::move(o));
  }
  return out;
}

FrameSceneGraph random_frame_graph(Rng& rng, int frame_index) {
  FrameSceneGraph g;
  g.frame_index = frame_index;
  const int n = uniform_int(rng, 0, 5);
  for (int i = 0; i < n; ++i) {
    const auto& label = label_pool()[static_cast<std::size_t>(uniform_int(rng, 0, 7))];
    g.objects.push_back(random_object(rng, "f" + std::to_string(frame_index) + "o" + std::to_string(i),
                                      label));
  }
  if (n >= 2) {
    const int edges = uniform_int(rng, 0, 4);
    for (int e = 0; e < edges; ++e) {
      const int a = uniform_int(rng, 0, n - 1);
      int b = uniform_int(rng, 0, n - 2);
      if (b >= a) ++b;
      g.spatial_relations.push_back(SpatialRelation{g.objects[static_cast<std::size_t>(a)].object_id,
                                                    static_cast<Predicate>(uniform_int(rng, 0, 5)),
                                                    g.objects[static_cast<std::size_t>(b)].object_id,
                                                    frame_index});
    }
  }
  const int triples = uniform_int(rng, 0, 3);
  for (int t = 0; t < triples; ++t) {
    const auto& pool = label_pool();
    g.action_triples.push_back(make_triple(
        pool[static_cast<std::size_t>(uniform_int(rng, 0, 7))],
        relation_pool()[static_cast<std::size_t>(uniform_int(rng, 0, 4))],
        coin(rng, 0.8) ? pool[static_cast<std::size_t>(uniform_int(rng, 0, 7))] : "", frame_index));
  }
  return canonicalize(std::move(g));
}

VideoSceneGraph random_video_graph(Rng& rng, int k) {
  VideoSceneGraph v;
  v.video_id = "v" + std::to_string(uniform_int(rng, 0, 99999));
  int index = uniform_int(rng, 0, 3);
  for (int p = 0; p < k; ++p) {
    v.sampled_indices.push_back(index);
    v.frame_graphs.push_back(random_frame_graph(rng, index));
    index += uniform_int(rng, 1, 6);
  }
  for (const auto& label : label_pool()) {
    if (coin(rng, 0.25)) v.main_objects.insert(label);
  }
  const int actions = uniform_int(rng, 0, 3);
  for (int a = 0; a < actions; ++a) {
    auto key = make_triple(label_pool()[static_cast<std::size_t>(uniform_int(rng, 0, 7))],
                           relation_pool()[static_cast<std::size_t>(uniform_int(rng, 0, 4))],
                           label_pool()[static_cast<std::size_t>(uniform_int(rng, 0, 7))]);
    std::vector<Interval> intervals;
    int f = 0;
    while (f < k) {
      if (coin(rng, 0.3)) {
        const int end = std::min(k - 1, f + uniform_int(rng, 0, 3));
        intervals.push_back(Interval{f, end});
        f = end + 2;  // keep a gap so intervals stay non-adjacent
      } else {
        ++f;
      }
    }
    v.temporal_map.entries[key] = std::move(intervals);
  }
  return v;
}

std::vector<FrameDigest> random_digests(Rng& rng, int n, int dim, bool coarse) {
  std::vector<FrameDigest> out;
  for (int i = 0; i < n; ++i) {
    FrameDigest d;
    d.frame_index = i;
    for (int j = 0; j < dim; ++j) {
      d.features.push_back(coarse ? uniform_int(rng, 0, 2) / 2.0 : uniform_real(rng, 0.0, 1.0));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace sgvqa::testing
