#include "sgvqa/eval.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sgvqa/errors.hpp"
#include "sgvqa/prompts.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

constexpr QType kTableTypes[] = {QType::CH, QType::CW, QType::DC, QType::DL,
                                 QType::DO, QType::TC, QType::TN, QType::TP};

double ratio(int num, int den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<QType> report_columns(const EvalReport& r) {
  std::vector<QType> cols(std::begin(kTableTypes), std::end(kTableTypes));
  if (auto it = r.per_type.find(QType::OTHER); it != r.per_type.end() && it->second.count > 0) {
    cols.push_back(QType::OTHER);
  }
  return cols;
}

std::string percent(const TypeStats& s) {
  if (s.count == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * s.accuracy);
  return buf;
}

struct Scorer {
  std::unordered_map<std::string, const Question*> by_id;
  std::unordered_set<std::string> seen;
  EvalReport report;

  explicit Scorer(std::span<const Question> questions) {
    for (const auto& q : questions) by_id.emplace(q.question_id, &q);
  }

  const Question& lookup(const AnswerRecord& rec) {
    auto it = by_id.find(rec.question_id);
    if (it == by_id.end()) throw ValidationError("unknown question_id " + rec.question_id);
    if (!seen.insert(rec.question_id).second) {
      throw ValidationError("duplicate record for question_id " + rec.question_id);
    }
    return *it->second;
  }

  void tally(const Question& q, AnswerRecord& rec, bool correct) {
    rec.correct = correct;
    auto& t = report.per_type[q.qtype.value_or(QType::OTHER)];
    ++t.count;
    ++report.total;
    if (correct) {
      ++t.correct;
      ++report.correct;
    }
    if (rec.parse_failure) ++report.parse_failures;
  }

  EvalReport finish() {
    report.accuracy = ratio(report.correct, report.total);
    for (auto& [type, t] : report.per_type) t.accuracy = ratio(t.correct, t.count);
    return report;
  }
};

bool mc_correct(const Question& q, const AnswerRecord& rec) {
  if (!rec.predicted) return false;
  const int* predicted = std::get_if<int>(&*rec.predicted);
  return predicted != nullptr && *predicted == std::get<int>(q.gold);
}

}  // namespace

DatasetFormat dataset_format_from_string(std::string_view s) {
  if (s == "mc_jsonl") return DatasetFormat::mc_jsonl;
  if (s == "openended_jsonl") return DatasetFormat::openended_jsonl;
  if (s == "auto") return DatasetFormat::auto_detect;
  throw ValidationError("unknown dataset format '" + std::string(s) + "'");
}

std::vector<Question> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::vector<Question> out;
  std::unordered_set<std::string> ids;
  for (const auto& [line_no, row] : jsonl_rows(read_text_file(path))) {
    try {
      auto q = decode_text<Question>(row);
      if (format == DatasetFormat::mc_jsonl && !q.is_multiple_choice()) {
        throw ValidationError("multiple-choice row needs exactly 5 options");
      }
      if (format == DatasetFormat::openended_jsonl && q.is_multiple_choice()) {
        throw ValidationError("open-ended row must not carry options");
      }
      if (!ids.insert(q.question_id).second) {
        throw ValidationError("duplicate question_id " + q.question_id);
      }
      out.push_back(std::move(q));
    } catch (const DatasetError&) {
      throw;
    } catch (const std::exception& e) {
      throw DatasetError(line_no, e.what());
    }
  }
  return out;
}

void validate(const EvalReport& r) {
  int count = 0;
  int correct = 0;
  for (const auto& [type, t] : r.per_type) {
    if (t.correct > t.count || t.correct < 0) throw ValidationError("per-type correct exceeds count");
    count += t.count;
    correct += t.correct;
  }
  if (count != r.total) throw ValidationError("per-type counts do not sum to total");
  if (correct != r.correct) throw ValidationError("per-type corrects do not sum to correct");
  if (r.accuracy != ratio(r.correct, r.total)) throw ValidationError("accuracy != correct / total");
}

void to_json(json& j, const EvalReport& r) {
  json per_type = json::object();
  for (const auto& [type, t] : r.per_type) {
    per_type[std::string(to_string(type))] =
        json{{"count", t.count}, {"correct", t.correct}, {"accuracy", t.accuracy}};
  }
  j = json{{"total", r.total},
           {"correct", r.correct},
           {"accuracy", r.accuracy},
           {"parse_failures", r.parse_failures},
           {"per_type", std::move(per_type)}};
}

void from_json(const json& j, EvalReport& r) {
  j.at("total").get_to(r.total);
  j.at("correct").get_to(r.correct);
  j.at("accuracy").get_to(r.accuracy);
  r.parse_failures = j.value("parse_failures", 0);
  r.per_type.clear();
  for (const auto& [name, t] : j.at("per_type").items()) {
    r.per_type[qtype_from_string(name)] =
        TypeStats{t.at("count").get<int>(), t.at("correct").get<int>(), t.at("accuracy").get<double>()};
  }
}

Matcher matcher_from_string(std::string_view s) {
  if (s == "normalized_exact") return Matcher::normalized_exact;
  if (s == "vlm_similarity") return Matcher::vlm_similarity;
  throw ValidationError("unknown matcher '" + std::string(s) + "'");
}

bool match_open_ended(const std::string& predicted, std::span<const std::string> golds,
                      Matcher matcher, Gateway* gateway, const RequestOptions& opts) {
  if (matcher == Matcher::normalized_exact) {
    const auto p = normalize_answer(predicted);
    for (const auto& g : golds) {
      if (normalize_answer(g) == p) return true;
    }
    return false;
  }
  if (gateway == nullptr) {
    throw GatewayError(GatewayError::Kind::config, "vlm_similarity matching needs a gateway");
  }
  for (const auto& g : golds) {
    ChatRequest req;
    req.stage = Stage::similarity_match;
    req.prompt = prompts::similarity_match(predicted, g);
    req.temperature = opts.temperature;
    req.max_tokens = opts.max_tokens;
    req.beam = opts.beam;
    if (is_affirmative(gateway->complete(req).text)) return true;
  }
  return false;
}

EvalReport score_mc(std::span<AnswerRecord> records, std::span<const Question> questions) {
  Scorer scorer(questions);
  for (auto& rec : records) {
    const auto& q = scorer.lookup(rec);
    if (!q.is_multiple_choice()) {
      throw ValidationError("question " + q.question_id + " is not multiple choice");
    }
    scorer.tally(q, rec, mc_correct(q, rec));
  }
  return scorer.finish();
}

EvalReport score_records(std::span<AnswerRecord> records, std::span<const Question> questions,
                         Matcher matcher, Gateway* gateway, const RequestOptions& opts) {
  Scorer scorer(questions);
  for (auto& rec : records) {
    const auto& q = scorer.lookup(rec);
    bool correct = false;
    if (q.is_multiple_choice()) {
      correct = mc_correct(q, rec);
    } else if (rec.predicted) {
      if (const auto* text = std::get_if<std::string>(&*rec.predicted)) {
        correct = match_open_ended(*text, std::get<std::vector<std::string>>(q.gold), matcher,
                                   gateway, opts);
      }
    }
    scorer.tally(q, rec, correct);
  }
  return scorer.finish();
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "text" || s == "text_table") return ReportFormat::text_table;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(s) + "'");
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  const auto cols = report_columns(report);
  auto stats_for = [&](QType t) {
    auto it = report.per_type.find(t);
    return it == report.per_type.end() ? TypeStats{} : it->second;
  };
  const TypeStats total{report.total, report.correct, report.accuracy};

  if (format == ReportFormat::json) return to_pretty(json(report));

  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "type,count,correct,accuracy\n";
    for (QType t : cols) {
      const auto s = stats_for(t);
      out << to_string(t) << ',' << s.count << ',' << s.correct << ','
          << prompts::format_number(s.accuracy) << '\n';
    }
    out << "Total," << total.count << ',' << total.correct << ','
        << prompts::format_number(total.accuracy) << '\n';
    return out.str();
  }

  constexpr int kLabelWidth = 14;
  constexpr int kColWidth = 7;
  auto row = [&](const std::string& label, auto&& cell) {
    out << std::left << std::setw(kLabelWidth) << label << std::right;
    for (QType t : cols) out << std::setw(kColWidth) << cell(stats_for(t));
    out << std::setw(kColWidth) << cell(total) << '\n';
  };
  out << std::left << std::setw(kLabelWidth) << "" << std::right;
  for (QType t : cols) out << std::setw(kColWidth) << to_string(t);
  out << std::setw(kColWidth) << "Total" << '\n';
  row("Count", [](const TypeStats& s) { return std::to_string(s.count); });
  row("Correct", [](const TypeStats& s) { return std::to_string(s.correct); });
  row("Accuracy (%)", [](const TypeStats& s) { return percent(s); });
  out << "Parse failures: " << report.parse_failures << '\n';
  return out.str();
}

}  // namespace sgvqa
