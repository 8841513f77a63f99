#include "sgvqa/qa_engine.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "sgvqa/errors.hpp"
#include "sgvqa/prompts.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

constexpr char kLetters[] = "ABCDE";

std::string render_object(const ObjectEntity& o) { return o.label + " (" + o.object_id + ")"; }

template <typename Range, typename Fn>
std::string join(const Range& items, std::string_view sep, Fn&& render) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += sep;
    first = false;
    out += render(item);
  }
  return out;
}

void render_frame(std::ostringstream& out, int position, const FrameSceneGraph& g) {
  out << "Frame " << position << ":";
  if (!g.objects.empty()) {
    out << "\nObjects: " << join(g.objects, ", ", render_object);
  }
  if (!g.spatial_relations.empty()) {
    std::map<std::string, const ObjectEntity*> by_id;
    for (const auto& o : g.objects) by_id[o.object_id] = &o;
    auto name = [&](const std::string& id) {
      auto it = by_id.find(id);
      return it == by_id.end() ? id : render_object(*it->second);
    };
    out << "\nSpatial: " << join(g.spatial_relations, "; ", [&](const SpatialRelation& r) {
      return name(r.subject_id) + " " + std::string(predicate_phrase(r.predicate)) + " " +
             name(r.target_id);
    });
  }
  if (!g.action_triples.empty()) {
    out << "\nActions: " << join(g.action_triples, "; ", prompts::render_triple);
  }
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string serialize_payload(const VariantPayload& payload) {
  std::ostringstream out;
  switch (payload.variant) {
    case SgVariant::NoSG:
      return {};
    case SgVariant::Summary:
      if (payload.labels.empty()) return {};
      out << "Objects: " << join(payload.labels, ", ", [](const std::string& s) { return s; });
      return out.str();
    default:
      break;
  }
  for (std::size_t i = 0; i < payload.graphs.size(); ++i) {
    if (i > 0) out << "\n\n";
    const int position = i < payload.positions.size() ? payload.positions[i] : static_cast<int>(i);
    render_frame(out, position, payload.graphs[i]);
  }
  return out.str();
}

std::string assemble_prompt(const Question& question, std::string_view payload_text) {
  if (!question.options.empty() && question.options.size() != 5) {
    throw ValidationError("question " + question.question_id + ": expected 0 or 5 options, got " +
                          std::to_string(question.options.size()));
  }
  std::ostringstream out;
  if (!payload_text.empty()) {
    out << "Scene graphs extracted from the video frames:\n" << payload_text << "\n\n";
  }
  out << "Question: " << question.text << "\n";
  if (question.is_multiple_choice()) {
    out << "Options:\n";
    for (std::size_t i = 0; i < question.options.size(); ++i) {
      out << kLetters[i] << ". " << question.options[i] << "\n";
    }
    out << "Answer with a single letter (A, B, C, D or E).";
  } else {
    out << "Answer in a short phrase.";
  }
  return out.str();
}

int parse_mc_answer(std::string_view text, std::span<const std::string> options) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (up < 'A' || up > 'E') continue;
    const bool left_ok = i == 0 || !is_alnum(text[i - 1]);
    const bool right_ok = i + 1 == text.size() || !is_alnum(text[i + 1]);
    if (left_ok && right_ok) return up - 'A';
  }
  const auto response = normalize_answer(text);
  if (!response.empty()) {
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (normalize_answer(options[i]) == response) return static_cast<int>(i);
    }
  }
  throw ParseError("cannot resolve an option from '" + std::string(text.substr(0, 80)) + "'");
}

ChatRequest answer_request(const Question& question, const VariantPayload& payload,
                           std::span<const std::string> image_refs, const RequestOptions& opts) {
  ChatRequest req;
  req.stage = Stage::final_answer;
  req.prompt = assemble_prompt(question, serialize_payload(payload));
  if (opts.attach_images) req.image_refs.assign(image_refs.begin(), image_refs.end());
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.beam = opts.beam;
  return req;
}

AnswerRecord answer(const Question& question, const VariantPayload& payload,
                    std::span<const std::string> image_refs, Gateway& gateway,
                    const RequestOptions& opts) {
  AnswerRecord rec;
  rec.question_id = question.question_id;
  rec.variant = payload.variant;

  ChatRequest req;
  try {
    req = answer_request(question, payload, image_refs, opts);
  } catch (const std::exception& e) {
    rec.error = e.what();
    return rec;
  }
  rec.prompt_hash = request_key(req);

  ChatResponse resp;
  try {
    resp = gateway.complete(req);
  } catch (const std::exception& e) {
    rec.error = e.what();
    return rec;
  }
  rec.latency_ms = resp.latency_ms;
  rec.raw_response = resp.text;

  if (question.is_multiple_choice()) {
    try {
      rec.predicted = parse_mc_answer(resp.text, question.options);
    } catch (const ParseError& e) {
      rec.parse_failure = true;
      rec.error = e.what();
    }
  } else {
    rec.predicted = trim(resp.text);
  }
  return rec;
}

}  // namespace sgvqa
