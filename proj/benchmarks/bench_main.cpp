#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "sgvqa/frame_sampler.hpp"
#include "sgvqa/geometry.hpp"
#include "sgvqa/qa_engine.hpp"
#include "sgvqa/sg_builder.hpp"
#include "sgvqa/sg_select.hpp"

namespace {

using namespace sgvqa;

std::vector<ObjectEntity> placed_objects(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> size(0.2, 1.0);
  std::vector<ObjectEntity> out;
  for (int i = 0; i < n; ++i) {
    ObjectEntity o;
    o.object_id = "o" + std::to_string(i);
    o.label = "thing " + std::to_string(i);
    o.box2d = Box2d{0, 0, 10, 10};
    o.position3d = Vec3{pos(rng), pos(rng), 2.0 + pos(rng)};
    o.extent3d = Extent2{size(rng), size(rng)};
    out.push_back(std::move(o));
  }
  return out;
}

void BM_SpatialPredicates(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto objects = placed_objects(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assign_spatial_predicates(objects, 0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpatialPredicates)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_DifferenceSampler(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FrameDigest> digests(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < digests.size(); ++i) {
    digests[i].frame_index = static_cast<int>(i);
    digests[i].features.resize(64);
    for (auto& f : digests[i].features) f = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(sample_by_difference(digests, 16));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DifferenceSampler)->Arg(300)->Arg(3000)->Arg(30000);

void BM_TrackActions(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<ActionTriple> candidates;
  for (int i = 0; i < 8; ++i) candidates.push_back(make_triple("person", "action " + std::to_string(i), "ball"));
  const WindowVerifier verifier = [](const Interval& w, const ActionTriple& a) {
    return (w.start + static_cast<int>(a.relation.size())) % 3 == 0;
  };
  for (auto _ : state) benchmark::DoNotOptimize(track_actions(candidates, verifier, k, 4));
}
BENCHMARK(BM_TrackActions)->Arg(16)->Arg(64);

void BM_SerializePayload(benchmark::State& state) {
  std::mt19937_64 rng(3);
  VariantPayload p;
  p.variant = SgVariant::Full;
  for (int f = 0; f < 16; ++f) {
    FrameSceneGraph g;
    g.frame_index = f * 10;
    g.objects = placed_objects(rng, 6);
    g.spatial_relations = assign_spatial_predicates(g.objects, g.frame_index);
    g.action_triples = {make_triple("thing 0", "holding", "thing 1", g.frame_index)};
    p.positions.push_back(f);
    p.graphs.push_back(std::move(g));
  }
  for (auto _ : state) benchmark::DoNotOptimize(serialize_payload(p));
}
BENCHMARK(BM_SerializePayload);

}  // namespace

BENCHMARK_MAIN();
