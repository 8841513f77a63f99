#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "sgvqa/errors.hpp"
#include "sgvqa/prompts.hpp"
#include "sgvqa/sg_builder.hpp"

namespace sgvqa {
namespace {

using Labels = std::vector<std::string>;
using LabelSet = std::set<std::string>;

TEST(ObjectMentions, Examples) {
  EXPECT_EQ(extract_object_mentions("- orange cat\n- fence\n- orange cat"), (Labels{"orange cat", "fence"}));
  EXPECT_EQ(extract_object_mentions("The image shows a road."), Labels{});
  EXPECT_EQ(extract_object_mentions("- Tabby Cat \n- food"), (Labels{"tabby cat", "food"}));
  EXPECT_EQ(extract_object_mentions("* dog\n• ball\nnoise\n-\n- "), (Labels{"dog", "ball"}));
}

TEST(Partition, Examples) {
  const std::vector<LabelSet> frames{{"cat", "fence"}, {"cat"}, {"cat", "food"}};
  const auto p = partition_main_context(frames, 0.6);
  EXPECT_EQ(p.main, LabelSet{"cat"});
  EXPECT_EQ(p.context, (std::vector<LabelSet>{{"fence"}, {}, {"food"}}));

  const std::vector<LabelSet> disjoint{{"a"}, {"b"}, {"c"}};
  const auto q = partition_main_context(disjoint, 1.0);
  EXPECT_TRUE(q.main.empty());
  EXPECT_EQ(q.context, disjoint);
}

TEST(Partition, CatsExample) {
  const std::vector<LabelSet> frames{{"tabby cat", "orange cat", "road"},
                                     {"tabby cat", "orange cat", "fence"},
                                     {"tabby cat", "orange cat", "food"},
                                     {"tabby cat", "orange cat", "fence", "food"}};
  EXPECT_EQ(partition_main_context(frames, 0.6).main, (LabelSet{"orange cat", "tabby cat"}));
}

TEST(Partition, FrequencyEqualToThresholdIsMain) {
  // 3 of 5 frames = 0.6 exactly.
  const std::vector<LabelSet> frames{{"x"}, {"x"}, {"x"}, {}, {}};
  EXPECT_EQ(partition_main_context(frames, 0.6).main, LabelSet{"x"});
  // 2 of 5 = 0.4 < 0.6.
  const std::vector<LabelSet> fewer{{"x"}, {"x"}, {}, {}, {}};
  EXPECT_TRUE(partition_main_context(fewer, 0.6).main.empty());
}

TEST(Partition, MatchesCountingOracleAndIsMonotone) {
  testing::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = testing::uniform_int(rng, 1, 10);
    std::vector<LabelSet> frames(static_cast<std::size_t>(n));
    for (auto& f : frames) {
      for (const auto& l : testing::label_pool()) {
        if (testing::coin(rng, 0.4)) f.insert(l);
      }
    }
    LabelSet previous_main;
    bool first = true;
    for (double p1 : {0.2, 0.6, 1.0}) {
      const auto got = partition_main_context(frames, p1);
      const auto want = testing::partition_oracle(frames, p1);
      ASSERT_EQ(got.main, want.main) << "trial " << trial << " p1 " << p1;
      ASSERT_EQ(got.context, want.context);
      if (!first) {
        ASSERT_TRUE(std::includes(previous_main.begin(), previous_main.end(), got.main.begin(),
                                  got.main.end()));
      }
      previous_main = got.main;
      first = false;
    }
  }
}

Detection det(const std::string& id, double conf) {
  return Detection{id, "thing", conf, Box2d{0, 0, 10, 10}, 1.0};
}

TEST(FilterDetections, Examples) {
  const std::vector<Detection> d{det("a", 0.9), det("b", 0.4), det("c", 0.39)};
  const auto kept = filter_detections(d, 0.4);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].object_id, "a");
  EXPECT_EQ(kept[1].object_id, "b");
  EXPECT_EQ(filter_detections(d, 0.0).size(), 3u);
  EXPECT_TRUE(filter_detections({}, 0.4).empty());
}

TEST(FilterDetections, RaisingThresholdNeverGrowsKeptSet) {
  testing::Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> d;
    for (int i = 0; i < 10; ++i) d.push_back(det("o" + std::to_string(i), testing::uniform_int(rng, 0, 10) / 10.0));
    const double lo = testing::uniform_int(rng, 0, 9) / 10.0;
    const double hi = std::min(0.99, lo + testing::uniform_int(rng, 0, 5) / 10.0);
    const auto a = filter_detections(d, lo);
    const auto b = filter_detections(d, hi);
    ASSERT_LE(b.size(), a.size());
    for (const auto& x : b) {
      ASSERT_TRUE(std::any_of(a.begin(), a.end(), [&](const Detection& y) { return y == x; }));
    }
  }
}

TEST(ParseTriples, Examples) {
  const auto two = parse_action_triples("[orange cat, watching, tabby cat]\n[tabby cat, eating, food]", 3);
  ASSERT_EQ(two.triples.size(), 2u);
  EXPECT_EQ(two.triples[0], make_triple("orange cat", "watching", "tabby cat", 3));
  EXPECT_EQ(two.triples[1], make_triple("tabby cat", "eating", "food", 3));
  EXPECT_EQ(two.malformed_lines, 0);

  const auto intransitive = parse_action_triples("[cat, sitting, ]", std::nullopt);
  ASSERT_EQ(intransitive.triples.size(), 1u);
  EXPECT_EQ(intransitive.triples[0].target, "");

  const auto miss = parse_action_triples("cat watches cat", std::nullopt);
  EXPECT_TRUE(miss.triples.empty());
  EXPECT_EQ(miss.malformed_lines, 1);
}

TEST(ParseTriples, TolerantForms) {
  const auto r = parse_action_triples(
      "1. [Dog, Chasing, Ball],\n- [cat, sleeping];\n\n[cat, sleeping, ].\n[a, b, c, d]\n[x]", std::nullopt);
  ASSERT_EQ(r.triples.size(), 2u);
  EXPECT_EQ(r.triples[0], make_triple("dog", "chasing", "ball"));
  EXPECT_EQ(r.triples[1], make_triple("cat", "sleeping", ""));
  EXPECT_EQ(r.malformed_lines, 2);
}

TEST(ParseTriples, TotalOnArbitraryInput) {
  testing::Rng rng(43);
  const std::string alphabet = "[],- \n.;abc\t\r*1";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int len = testing::uniform_int(rng, 0, 60);
    for (int i = 0; i < len; ++i) s.push_back(alphabet[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(alphabet.size()) - 1))]);
    TripleParse parsed;
    ASSERT_NO_THROW(parsed = parse_action_triples(s, 0)) << s;
    for (const auto& t : parsed.triples) ASSERT_NO_THROW(validate(t));
    ASSERT_NO_THROW(extract_object_mentions(s));
  }
}

ObjectEntity obj(const std::string& id, const std::string& label) {
  ObjectEntity o;
  o.object_id = id;
  o.label = label;
  o.box2d = Box2d{0, 0, 1, 1};
  return o;
}

TEST(BuildFrameGraph, Assembly) {
  const auto fb = build_frame_graph(4, {obj("b", "table"), obj("a", "cup")},
                                    {SpatialRelation{"a", Predicate::on, "b", 4}},
                                    {make_triple("cup", "holding", "tea")});
  EXPECT_EQ(fb.graph.frame_index, 4);
  ASSERT_EQ(fb.graph.objects.size(), 2u);
  EXPECT_EQ(fb.graph.objects[0].object_id, "a");
  EXPECT_EQ(fb.graph.spatial_relations.size(), 1u);
  ASSERT_EQ(fb.graph.action_triples.size(), 1u);
  EXPECT_EQ(fb.graph.action_triples[0].frame_index, 4);
  EXPECT_TRUE(fb.dropped_relations.empty());
}

TEST(BuildFrameGraph, DropsRelationToFilteredObject) {
  const auto fb = build_frame_graph(0, {obj("a", "cup")}, {SpatialRelation{"a", Predicate::on, "gone", 0}}, {});
  EXPECT_TRUE(fb.graph.spatial_relations.empty());
  ASSERT_EQ(fb.dropped_relations.size(), 1u);
  EXPECT_NE(fb.dropped_relations[0].find("gone"), std::string::npos);
}

TEST(BuildFrameGraph, EmptyAndDuplicates) {
  const auto fb = build_frame_graph(2, {}, {}, {});
  EXPECT_EQ(fb.graph, (FrameSceneGraph{2, {}, {}, {}}));
  EXPECT_THROW(build_frame_graph(0, {obj("a", "x"), obj("a", "y")}, {}, {}), ValidationError);
}

std::vector<Interval> intervals_for(const std::vector<bool>& positive, int k, int k2) {
  const auto cand = make_triple("cat", "eating", "food");
  const std::vector<ActionTriple> cands{cand};
  const auto map = track_actions(
      cands, [&](const Interval& w, const ActionTriple&) { return positive[static_cast<std::size_t>(w.start)]; }, k, k2);
  return map.entries.at(cand);
}

TEST(TrackActions, Examples) {
  std::vector<bool> w(8, false);
  w[2] = w[3] = true;
  EXPECT_EQ(intervals_for(w, 10, 3), (std::vector<Interval>{{2, 5}}));
  EXPECT_TRUE(intervals_for(std::vector<bool>(8, false), 10, 3).empty());
  EXPECT_EQ(intervals_for({true}, 5, 5), (std::vector<Interval>{{0, 4}}));
}

TEST(TrackActions, Errors) {
  const std::vector<ActionTriple> none;
  const WindowVerifier yes = [](const Interval&, const ActionTriple&) { return true; };
  EXPECT_THROW(track_actions(none, yes, 3, 4), InvalidArgumentError);
  EXPECT_THROW(track_actions(none, yes, 3, 0), InvalidArgumentError);
}

TEST(TrackActions, EveryCandidateGetsAnEntryAndWindowsAreExact) {
  const std::vector<ActionTriple> cands{make_triple("a", "b", "c"), make_triple("d", "e", "")};
  std::mutex mu;
  std::vector<Interval> seen;
  const auto map = track_actions(
      cands,
      [&](const Interval& w, const ActionTriple&) {
        std::lock_guard lock(mu);
        seen.push_back(w);
        return false;
      },
      6, 4, 3);
  EXPECT_EQ(map.entries.size(), 2u);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<Interval>{{0, 3}, {0, 3}, {1, 4}, {1, 4}, {2, 5}, {2, 5}}));
}

TEST(TrackActions, ExhaustiveCoverageOracle) {
  for (int k = 1; k <= 12; ++k) {
    for (int k2 = 1; k2 <= std::min(4, k); ++k2) {
      const int windows = k - k2 + 1;
      if (windows > 10) continue;
      for (int mask = 0; mask < (1 << windows); ++mask) {
        std::vector<bool> pos(static_cast<std::size_t>(windows));
        for (int t = 0; t < windows; ++t) pos[static_cast<std::size_t>(t)] = (mask >> t) & 1;
        ASSERT_EQ(intervals_for(pos, k, k2), testing::coverage_oracle(pos, k, k2))
            << "k=" << k << " k2=" << k2 << " mask=" << mask;
      }
    }
  }
}

TEST(TrackActions, ResultIndependentOfWorkerCount) {
  testing::Rng rng(44);
  std::vector<ActionTriple> cands;
  for (const auto& r : testing::relation_pool()) cands.push_back(make_triple("cat", r, "food"));
  std::map<std::pair<std::string, int>, bool> table;
  for (const auto& c : cands) {
    for (int t = 0; t < 13; ++t) table[{c.relation, t}] = testing::coin(rng);
  }
  const WindowVerifier v = [&](const Interval& w, const ActionTriple& c) { return table.at({c.relation, w.start}); };
  const auto serial = track_actions(cands, v, 16, 4, 1);
  EXPECT_EQ(track_actions(cands, v, 16, 4, 4), serial);
  EXPECT_NO_THROW(validate(serial, 16));
}

RequestOptions text_only() {
  RequestOptions o;
  o.attach_images = false;
  return o;
}

TEST(CandidateActions, ScriptedCaption) {
  const json script = {
      {"default", "nothing"},
      {"rules", json::array({{{"stage", "global_caption"}, {"response", "two cats; one eats"}},
                             {{"stage", "extract_actions"},
                              {"contains", "two cats; one eats"},
                              {"response", "[orange cat, watching, tabby cat]"}}})}};
  Gateway gw(testing::mock_backend(script));
  const std::vector<std::string> refs{"f0", "f1"};
  const auto c = propose_candidate_actions(refs, gw, RequestOptions{});
  EXPECT_EQ(c.caption, "two cats; one eats");
  ASSERT_EQ(c.triples.size(), 1u);
  EXPECT_EQ(c.triples[0], make_triple("orange cat", "watching", "tabby cat"));
  EXPECT_FALSE(c.triples[0].frame_index.has_value());
  EXPECT_EQ(gw.count_stage(Stage::global_caption), 1u);
  EXPECT_EQ(gw.count_stage(Stage::extract_actions), 1u);

  Gateway empty(testing::mock_backend(json{{"default", "no triples here"}}));
  EXPECT_TRUE(propose_candidate_actions(refs, empty, text_only()).triples.empty());
}

TEST(CandidateActions, TransportFailurePropagates) {
  class Failing final : public ChatBackend {
   public:
    std::string id() const override { return "failing"; }
    std::string complete(const ChatRequest&) override {
      throw GatewayError(GatewayError::Kind::transport, "down");
    }
  };
  Gateway gw(std::make_shared<Failing>());
  const std::vector<std::string> refs{"f0"};
  try {
    propose_candidate_actions(refs, gw, RequestOptions{});
    FAIL() << "expected GatewayError";
  } catch (const GatewayError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

TEST(GatewayVerifier, AffirmativePrefixCounts) {
  const auto triple = make_triple("cat", "eating", "food");
  const json script = {
      {"default", "No"},
      {"rules", json::array({{{"stage", "verify_action"},
                              {"contains", prompts::verify_action(triple, Interval{1, 2}, 4)},
                              {"response", "yes, clearly"}}})}};
  Gateway gw(testing::mock_backend(script));
  const std::vector<std::string> refs{"f0", "f1", "f2", "f3"};
  const auto v = gateway_verifier(gw, refs, RequestOptions{});
  EXPECT_FALSE(v(Interval{0, 1}, triple));
  EXPECT_TRUE(v(Interval{1, 2}, triple));
  const auto log = gw.call_log();
  ASSERT_EQ(log.size(), 2u);
}

TEST(BuildVideo, FromPerceptionAndMock) {
  VideoRecord video;
  video.video_id = "v";
  video.total_frames = 4;
  video.frame_refs = {"v/0", "v/1", "v/2", "v/3"};
  PerceptionFile perception;
  perception.video_id = "v";
  perception.camera = CameraModel{1000, 1000, 500, 500};
  perception.frames = {
      PerceptionFrame{0, {Detection{"cup", "Cup", 0.9, Box2d{450, 380, 550, 480}, 2.0},
                          Detection{"table", "table", 0.8, Box2d{400, 400, 600, 600}, 2.0},
                          Detection{"ghost", "ghost", 0.1, Box2d{0, 0, 10, 10}, 2.0}}},
      PerceptionFrame{2, {Detection{"cup", "cup", 0.9, Box2d{450, 380, 550, 480}, 2.0}}}};
  const json script = {
      {"default", "No"},
      {"rules", json::array({{{"stage", "detect_objects"}, {"response", "- cup\n- table"}},
                             {{"stage", "extract_actions"}, {"contains", "Video caption"}, {"response", "[cup, standing, ]"}},
                             {{"stage", "extract_actions"}, {"image", "v/0"}, {"response", "[cup, resting on, table]\nbad line"}},
                             {{"stage", "extract_actions"}, {"response", "[cup, standing, ]"}},
                             {{"stage", "verify_action"}, {"contains", "frames 0 to 1"}, {"response", "Yes"}}})}};
  Gateway gw(testing::mock_backend(script));
  PipelineConfig cfg;
  cfg.track_window = 8;
  const std::vector<int> sampled{0, 2, 3};
  const auto built = build_video_scene_graph(video, sampled, perception, gw, cfg);
  const auto& g = built.graph;

  EXPECT_EQ(g.sampled_indices, sampled);
  EXPECT_EQ(g.main_objects, (LabelSet{"cup", "table"}));
  ASSERT_EQ(g.frame_graphs.size(), 3u);
  ASSERT_EQ(g.frame_graphs[0].objects.size(), 2u);
  EXPECT_EQ(g.frame_graphs[0].objects[0].label, "cup");
  EXPECT_EQ(g.frame_graphs[0].objects[0].role, ObjectRole::main);
  EXPECT_EQ(g.frame_graphs[0].action_triples, (std::vector<ActionTriple>{make_triple("cup", "resting on", "table", 0)}));
  EXPECT_FALSE(g.frame_graphs[0].spatial_relations.empty());
  EXPECT_EQ(g.frame_graphs[1].objects.size(), 1u);
  EXPECT_TRUE(g.frame_graphs[2].objects.empty());

  const auto key = make_triple("cup", "standing", "");
  ASSERT_EQ(g.temporal_map.entries.count(key), 1u);
  EXPECT_TRUE(g.temporal_map.entries.at(key).empty());  // single window 0..2 never confirmed
  EXPECT_EQ(built.diagnostics.effective_track_window, 3);
  EXPECT_EQ(built.diagnostics.filtered_detections, 1);
  EXPECT_EQ(built.diagnostics.malformed_action_lines, 1);
  EXPECT_EQ(built.diagnostics.frames_without_perception, std::vector<int>{3});
  EXPECT_EQ(built.diagnostics.frame_mentions.size(), 3u);
}

}  // namespace
}  // namespace sgvqa
