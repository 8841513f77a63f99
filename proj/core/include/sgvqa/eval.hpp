#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgvqa/gateway.hpp"
#include "sgvqa/json_io.hpp"
#include "sgvqa/model.hpp"
#include "sgvqa/sg_builder.hpp"

namespace sgvqa {

enum class DatasetFormat { mc_jsonl, openended_jsonl, auto_detect };

DatasetFormat dataset_format_from_string(std::string_view s);

/// One Question per JSONL row. mc_jsonl rows need exactly five options and an
/// option-index gold; openended_jsonl rows need no options and at least one
/// gold answer; auto_detect picks per row by the presence of options.
/// Errors are DatasetError carrying the 1-based line number.
std::vector<Question> load_dataset(const std::filesystem::path& path, DatasetFormat format);

struct TypeStats {
  int count = 0;
  int correct = 0;
  double accuracy = 0.0;
  bool operator==(const TypeStats&) const = default;
};

struct EvalReport {
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;  // correct / total, 0 when total == 0
  std::map<QType, TypeStats> per_type;  // questions without a type count as OTHER
  int parse_failures = 0;

  bool operator==(const EvalReport&) const = default;
};

void validate(const EvalReport& r);
void to_json(json& j, const EvalReport& r);
void from_json(const json& j, EvalReport& r);

enum class Matcher { normalized_exact, vlm_similarity };

Matcher matcher_from_string(std::string_view s);

/// normalized_exact: normalize_answer(predicted) equals some normalized gold.
/// vlm_similarity: a similarity_match request per gold, true on the first
/// affirmative answer; needs a gateway and propagates its errors.
bool match_open_ended(const std::string& predicted, std::span<const std::string> golds,
                      Matcher matcher, Gateway* gateway = nullptr,
                      const RequestOptions& opts = {});

/// Multiple-choice scoring. Sets `correct` on every record. Parse failures
/// count as wrong and are tallied. Throws ValidationError for a record whose
/// question_id is unknown, duplicated, or not multiple choice.
EvalReport score_mc(std::span<AnswerRecord> records, std::span<const Question> questions);

/// Scores a mix of multiple-choice and open-ended records.
EvalReport score_records(std::span<AnswerRecord> records, std::span<const Question> questions,
                         Matcher matcher = Matcher::normalized_exact, Gateway* gateway = nullptr,
                         const RequestOptions& opts = {});

enum class ReportFormat { text_table, json, csv };

ReportFormat report_format_from_string(std::string_view s);

/// Column order CH, CW, DC, DL, DO, TC, TN, TP, (OTHER when present), Total.
std::string render_report(const EvalReport& report, ReportFormat format);

}  // namespace sgvqa
