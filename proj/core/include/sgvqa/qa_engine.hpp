#pragma once

#include <span>
#include <string>
#include <string_view>

#include "sgvqa/gateway.hpp"
#include "sgvqa/model.hpp"
#include "sgvqa/sg_builder.hpp"
#include "sgvqa/sg_select.hpp"

namespace sgvqa {

/// Text block for a variant payload:
///
///   Frame 3:
///   Objects: orange cat (o1), tabby cat (o2)
///   Spatial: orange cat (o1) next to tabby cat (o2)
///   Actions: [orange cat, watching, tabby cat]
///
/// Frames are separated by a blank line and empty sections are omitted.
/// Summary payloads render as a single "Objects: a, b, c" line; NoSG renders
/// as the empty string.
std::string serialize_payload(const VariantPayload& payload);

/// Optional scene-graph block, the question, lettered options A-E for
/// multiple choice, and an answer-format instruction. Throws ValidationError
/// when the question has neither 0 nor 5 options.
std::string assemble_prompt(const Question& question, std::string_view payload_text);

/// Resolution order: first standalone letter A-E (any case), then an exact
/// normalized match against an option. Throws ParseError otherwise.
int parse_mc_answer(std::string_view text, std::span<const std::string> options);

/// The final_answer request for a question; its request_key is the record's prompt_hash.
ChatRequest answer_request(const Question& question, const VariantPayload& payload,
                           std::span<const std::string> image_refs, const RequestOptions& opts);

/// Serialize, assemble, ask, parse. Gateway and parse failures are recorded in
/// the returned record (predicted left empty) rather than thrown. `correct`
/// stays unset until scoring.
AnswerRecord answer(const Question& question, const VariantPayload& payload,
                    std::span<const std::string> image_refs, Gateway& gateway,
                    const RequestOptions& opts);

}  // namespace sgvqa
