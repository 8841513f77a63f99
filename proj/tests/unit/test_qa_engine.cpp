#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sgvqa/errors.hpp"
#include "sgvqa/qa_engine.hpp"

namespace sgvqa {
namespace {

const std::vector<std::string> kCatOptions{"it is hungry", "it wants to play", "it is scared",
                                           "waiting for its turn", "it is sleeping"};

Question cats_mc() {
  Question q;
  q.question_id = "cats_mc";
  q.video_id = "cats";
  q.text = "Why is the orange cat watching the tabby cat eat?";
  q.options = kCatOptions;
  q.gold = 3;
  q.qtype = QType::CW;
  return q;
}

Question open_ended(const std::string& text) {
  Question q;
  q.question_id = "oe";
  q.video_id = "v";
  q.text = text;
  q.gold = std::vector<std::string>{"riding a bike"};
  return q;
}

ObjectEntity obj(const std::string& id, const std::string& label) {
  ObjectEntity o;
  o.object_id = id;
  o.label = label;
  o.box2d = Box2d{0, 0, 1, 1};
  return o;
}

VariantPayload cats_payload() {
  FrameSceneGraph g;
  g.frame_index = 8;
  g.objects = {obj("o1", "orange cat"), obj("o2", "tabby cat")};
  g.spatial_relations = {SpatialRelation{"o1", Predicate::next_to, "o2", 8}};
  g.action_triples = {make_triple("orange cat", "watching", "tabby cat", 8)};
  VariantPayload p;
  p.variant = SgVariant::FrameSel;
  p.positions = {1};
  p.graphs = {g};
  return p;
}

TEST(SerializePayload, CatsFrame) {
  EXPECT_EQ(serialize_payload(cats_payload()),
            "Frame 1:\n"
            "Objects: orange cat (o1), tabby cat (o2)\n"
            "Spatial: orange cat (o1) next to tabby cat (o2)\n"
            "Actions: [orange cat, watching, tabby cat]");
}

TEST(SerializePayload, EmptyAndSummary) {
  EXPECT_EQ(serialize_payload(VariantPayload{}), "");
  VariantPayload s;
  s.variant = SgVariant::Summary;
  s.labels = {"b", "a", "c"};
  EXPECT_EQ(serialize_payload(s), "Objects: a, b, c");
}

TEST(SerializePayload, OmitsEmptySectionsAndSeparatesFrames) {
  VariantPayload p;
  p.variant = SgVariant::Action;
  p.positions = {0, 1};
  p.graphs = {FrameSceneGraph{0, {}, {}, {make_triple("cat", "sitting", "", 0)}}, FrameSceneGraph{5, {}, {}, {}}};
  EXPECT_EQ(serialize_payload(p), "Frame 0:\nActions: [cat, sitting]\n\nFrame 1:");
}

TEST(SerializePayload, DeterministicForEqualPayloads) {
  testing::Rng rng(71);
  for (int i = 0; i < 50; ++i) {
    const auto g = testing::random_video_graph(rng, testing::uniform_int(rng, 1, 6));
    VariantPayload a;
    a.variant = SgVariant::Full;
    a.graphs = g.frame_graphs;
    for (int p = 0; p < static_cast<int>(g.frame_graphs.size()); ++p) a.positions.push_back(p);
    const auto b = json(a).get<VariantPayload>();
    ASSERT_EQ(serialize_payload(a), serialize_payload(b));
  }
}

TEST(AssemblePrompt, MultipleChoice) {
  const auto prompt = assemble_prompt(cats_mc(), serialize_payload(cats_payload()));
  EXPECT_NE(prompt.find("orange cat, watching, tabby cat"), std::string::npos);
  EXPECT_NE(prompt.find("\nA. it is hungry\n"), std::string::npos);
  EXPECT_NE(prompt.find("\nD. waiting for its turn\n"), std::string::npos);
  EXPECT_NE(prompt.find("\nE. it is sleeping\n"), std::string::npos);
  EXPECT_NE(prompt.find("Answer with a single letter"), std::string::npos);
}

TEST(AssemblePrompt, NoSceneGraphBlockWithoutPayload) {
  const auto prompt = assemble_prompt(open_ended("How does the person get around?"), "");
  EXPECT_EQ(prompt, "Question: How does the person get around?\nAnswer in a short phrase.");
}

TEST(AssemblePrompt, RejectsWrongOptionCount) {
  auto q = cats_mc();
  q.options.pop_back();
  EXPECT_THROW(assemble_prompt(q, ""), ValidationError);
}

TEST(AssemblePrompt, InjectiveOnRandomCorpus) {
  testing::Rng rng(72);
  const auto& words = testing::label_pool();
  auto phrase = [&] {
    std::string s;
    const int n = testing::uniform_int(rng, 1, 4);
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += words[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(words.size()) - 1))];
    }
    return s;
  };
  std::set<std::tuple<std::string, std::vector<std::string>, std::string>> inputs;
  std::set<std::string> prompts;
  for (int i = 0; i < 2000; ++i) {
    Question q;
    q.question_id = "q";
    q.video_id = "v";
    q.text = phrase() + "?";
    if (testing::coin(rng)) {
      for (int o = 0; o < 5; ++o) q.options.push_back(phrase());
    } else {
      q.gold = std::vector<std::string>{"x"};
    }
    const std::string payload = testing::coin(rng) ? "" : "Objects: " + phrase();
    if (inputs.emplace(q.text, q.options, payload).second) prompts.insert(assemble_prompt(q, payload));
  }
  EXPECT_EQ(prompts.size(), inputs.size());
}

TEST(ParseMcAnswer, Examples) {
  EXPECT_EQ(parse_mc_answer("Answer: B", kCatOptions), 1);
  EXPECT_EQ(parse_mc_answer("waiting for its turn", kCatOptions), 3);
  EXPECT_THROW(parse_mc_answer("maybe", kCatOptions), ParseError);
  EXPECT_EQ(parse_mc_answer("(c)", kCatOptions), 2);
  EXPECT_EQ(parse_mc_answer("Waiting for its turn.", kCatOptions), 3);
}

TEST(ParseMcAnswer, EveryLetter) {
  const std::string letters = "ABCDE";
  for (int i = 0; i < 5; ++i) {
    const std::string upper(1, letters[static_cast<std::size_t>(i)]);
    EXPECT_EQ(parse_mc_answer(upper, kCatOptions), i);
    EXPECT_EQ(parse_mc_answer(std::string(1, static_cast<char>(upper[0] + 32)), kCatOptions), i);
    EXPECT_EQ(parse_mc_answer(upper + ".", kCatOptions), i);
    EXPECT_EQ(parse_mc_answer("The answer is " + upper + ".", kCatOptions), i);
  }
}

TEST(Answer, CatsExampleIsLetterD) {
  const json script = {{"default", "No"},
                       {"rules", json::array({{{"stage", "final_answer"}, {"contains", "tabby cat eat?"}, {"response", "D"}}})}};
  Gateway gw(testing::mock_backend(script));
  RequestOptions opts;
  const std::vector<std::string> refs{"frames/cats/0008.jpg"};
  const auto rec = answer(cats_mc(), cats_payload(), refs, gw, opts);
  ASSERT_TRUE(rec.predicted.has_value());
  EXPECT_EQ(std::get<int>(*rec.predicted), 3);
  EXPECT_EQ(kCatOptions[3], "waiting for its turn");
  EXPECT_FALSE(rec.correct.has_value());
  EXPECT_EQ(rec.variant, SgVariant::FrameSel);
  EXPECT_EQ(rec.prompt_hash, request_key(answer_request(cats_mc(), cats_payload(), refs, opts)));
  EXPECT_EQ(rec.raw_response, "D");
}

TEST(Answer, OpenEndedPassthroughIsTrimmed) {
  Gateway gw(testing::mock_backend(json{{"default", "  riding a bike \n"}}));
  const auto rec = answer(open_ended("How?"), VariantPayload{}, {}, gw, RequestOptions{});
  ASSERT_TRUE(rec.predicted.has_value());
  EXPECT_EQ(std::get<std::string>(*rec.predicted), "riding a bike");
  EXPECT_FALSE(rec.error.has_value());
}

TEST(Answer, ParseFailureIsFlagged) {
  Gateway gw(testing::mock_backend(json{{"default", "maybe"}}));
  const auto rec = answer(cats_mc(), VariantPayload{}, {}, gw, RequestOptions{});
  EXPECT_FALSE(rec.predicted.has_value());
  EXPECT_TRUE(rec.parse_failure);
  EXPECT_TRUE(rec.error.has_value());
}

TEST(Answer, GatewayErrorIsRecorded) {
  class Down final : public ChatBackend {
   public:
    std::string id() const override { return "down"; }
    std::string complete(const ChatRequest&) override {
      throw GatewayError(GatewayError::Kind::protocol, "bad body");
    }
  };
  Gateway gw(std::make_shared<Down>());
  const auto rec = answer(cats_mc(), VariantPayload{}, {}, gw, RequestOptions{});
  EXPECT_FALSE(rec.predicted.has_value());
  ASSERT_TRUE(rec.error.has_value());
  EXPECT_NE(rec.error->find("bad body"), std::string::npos);
  EXPECT_FALSE(rec.parse_failure);
}

TEST(AnswerRequest, CarriesDecodingOptionsAndImages) {
  RequestOptions opts;
  opts.temperature = 0.0;
  opts.max_tokens = 64;
  const std::vector<std::string> refs{"a.jpg", "b.jpg"};
  auto req = answer_request(cats_mc(), VariantPayload{}, refs, opts);
  EXPECT_EQ(req.stage, Stage::final_answer);
  EXPECT_EQ(req.temperature, 0.0);
  EXPECT_EQ(req.max_tokens, 64);
  EXPECT_EQ(req.image_refs, refs);
  opts.attach_images = false;
  EXPECT_TRUE(answer_request(cats_mc(), VariantPayload{}, refs, opts).image_refs.empty());
}

}  // namespace
}  // namespace sgvqa
