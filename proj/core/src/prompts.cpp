#include "sgvqa/prompts.hpp"

#include <cmath>
#include <sstream>

#include "sgvqa/json_io.hpp"

namespace sgvqa::prompts {

namespace {

std::string frame_ref(int position, int k) {
  return "frame " + std::to_string(position) + " of " + std::to_string(k);
}

constexpr const char* kTripleFormat =
    "Write one triple per line in the form\n"
    "[subject, relation, object]\n"
    "using short lowercase phrases. Leave the object empty for actions without one, "
    "e.g. [cat, sitting, ]. Output nothing else.";

}  // namespace

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return json(v).dump();
}

std::string render_triple(const ActionTriple& t) {
  if (t.target.empty()) return "[" + t.subject + ", " + t.relation + "]";
  return "[" + t.subject + ", " + t.relation + ", " + t.target + "]";
}

std::string describe_frame(int position, int k) {
  return "You are looking at " + frame_ref(position, k) +
         " sampled from a video.\n"
         "Describe the scene: which objects and people are present, their attributes, "
         "and what they are doing.";
}

std::string detect_objects(int position, int k, const std::string& description) {
  return "Here is a description of " + frame_ref(position, k) + ":\n" + description +
         "\n\n"
         "List every distinct physical object or person mentioned, one per line, in the form\n"
         "- <object>\n"
         "using short lowercase noun phrases. Output nothing else.";
}

std::string frame_actions(int position, int k, std::span<const ObjectEntity> objects) {
  std::ostringstream out;
  out << "You are looking at " << frame_ref(position, k) << " sampled from a video.\n";
  if (objects.empty()) {
    out << "No objects were detected in this frame.\n";
  } else {
    out << "Detected objects with their boxes [x_min, y_min, x_max, y_max] in pixels:\n";
    for (const auto& o : objects) {
      out << "- " << o.label << " [" << format_number(o.box2d.x_min) << ", "
          << format_number(o.box2d.y_min) << ", " << format_number(o.box2d.x_max) << ", "
          << format_number(o.box2d.y_max) << "]\n";
    }
  }
  out << "\nList the actions and interactions involving these objects. " << kTripleFormat;
  return out.str();
}

std::string global_caption(int k) {
  return "These are " + std::to_string(k) +
         " frames sampled in temporal order from one video.\n"
         "Write a short caption of the whole video that names the main actions and who "
         "performs them.";
}

std::string caption_actions(const std::string& caption) {
  return "Video caption:\n" + caption +
         "\n\n"
         "Extract the actions described in the caption. " +
         kTripleFormat;
}

std::string verify_action(const ActionTriple& triple, const Interval& window, int k) {
  return "These are frames " + std::to_string(window.start) + " to " +
         std::to_string(window.end) + " of " + std::to_string(k) +
         " sampled from a video.\n"
         "Is the action " +
         render_triple(triple) +
         " happening in these frames? Answer Yes or No.";
}

std::string frame_relevance(const std::string& question, int position, int k) {
  return "This is " + frame_ref(position, k) +
         " sampled from a video.\n"
         "Question: " +
         question +
         "\n"
         "Is this frame relevant to answering the question? Answer Yes or No.";
}

std::string extract_graph(const std::string& question, int position, int k) {
  return "This is " + frame_ref(position, k) +
         " sampled from a video.\n"
         "Question: " +
         question +
         "\n"
         "Extract the scene graph of this frame that matters for the question. "
         "List each object on its own line as\n"
         "- <object>\n"
         "and each relation or action on its own line as\n"
         "[subject, relation, object]\n"
         "Output nothing else.";
}

std::string similarity_match(const std::string& predicted, const std::string& gold) {
  return "Do these two answers mean the same?\n"
         "Answer 1: " +
         predicted +
         "\n"
         "Answer 2: " +
         gold +
         "\n"
         "Reply Yes or No.";
}

}  // namespace sgvqa::prompts
