#pragma once

// Prompt templates for every gateway stage. The output formats the templates
// ask for ("- label" bullets and "[subject, relation, object]" lines) are the
// contracts the parsers in sg_builder.hpp accept.
//
// Frames are always referred to as "frame <p> of <k>", p being the 0-based
// position among the k sampled frames.

#include <span>
#include <string>

#include "sgvqa/model.hpp"

namespace sgvqa::prompts {

std::string describe_frame(int position, int k);
std::string detect_objects(int position, int k, const std::string& description);
std::string frame_actions(int position, int k, std::span<const ObjectEntity> objects);
std::string global_caption(int k);
std::string caption_actions(const std::string& caption);
std::string verify_action(const ActionTriple& triple, const Interval& window, int k);
std::string frame_relevance(const std::string& question, int position, int k);
std::string extract_graph(const std::string& question, int position, int k);
std::string similarity_match(const std::string& predicted, const std::string& gold);

/// "[subject, relation, object]"; intransitive triples render as "[subject, relation]".
std::string render_triple(const ActionTriple& t);

/// Shortest round-trip decimal form, without a trailing ".0" for integers.
std::string format_number(double v);

}  // namespace sgvqa::prompts
