#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "sgvqa/errors.hpp"
#include "sgvqa/eval.hpp"
#include "sgvqa/gateway.hpp"
#include "sgvqa/json_io.hpp"
#include "sgvqa/pipeline.hpp"
#include "sgvqa/text.hpp"

namespace fs = std::filesystem;

namespace sgvqa::cli {

namespace {

int parse_int(const std::string& s) {
  int v = 0;
  const auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ValidationError("expected an integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ValidationError("expected a number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  const auto t = to_lower(trim(s));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ValidationError("expected a boolean, got '" + s + "'");
}

ConfigField field(std::string key, std::string flag, std::string help,
                  std::function<void(PipelineConfig&, const std::string&)> apply) {
  ConfigField f;
  f.key = std::move(key);
  f.flag = std::move(flag);
  f.help = std::move(help);
  f.apply = std::move(apply);
  return f;
}

ConfigField switch_field(std::string key, std::string flag, std::string value, std::string help,
                         std::function<void(PipelineConfig&, const std::string&)> apply) {
  auto f = field(std::move(key), std::move(flag), std::move(help), std::move(apply));
  f.is_switch = true;
  f.switch_value = std::move(value);
  return f;
}

std::vector<ConfigField> make_fields() {
  using C = PipelineConfig;
  using S = const std::string&;
  return {
      field("sample_count", "--k", "Frames sampled per video",
            [](C& c, S v) { c.sample_count = parse_int(v); }),
      field("sampler", "--sampler", "Frame sampler: uniform | difference",
            [](C& c, S v) { c.sampler = sampler_from_string(trim(v)); }),
      field("main_freq_threshold", "--p1", "Frame fraction for a main object",
            [](C& c, S v) { c.main_freq_threshold = parse_double(v); }),
      field("det_conf_threshold", "--p2", "Minimum detection confidence",
            [](C& c, S v) { c.det_conf_threshold = parse_double(v); }),
      field("track_window", "--k2", "Action verification window in frames",
            [](C& c, S v) { c.track_window = parse_int(v); }),
      field("temperature", "--temperature", "Sampling temperature",
            [](C& c, S v) { c.temperature = parse_double(v); }),
      field("beam", "--beam", "Beam width (1 for the HTTP backend)",
            [](C& c, S v) { c.beam = parse_int(v); }),
      field("variant", "--variant", "NoSG | Full | FrameSel | RangeSel | Summary | Action",
            [](C& c, S v) { c.variant.variant = variant_from_string(trim(v)); }),
      field("range_window", "--range-window", "RangeSel window size",
            [](C& c, S v) { c.variant.range_window = parse_int(v); }),
      field("window_mode", "--window-mode", "RangeSel window: symmetric | total_width",
            [](C& c, S v) { c.variant.window_mode = window_mode_from_string(trim(v)); }),
      switch_field("reuse_built_graphs", "--reuse-built-graphs", "true",
                   "Selection reuses built frame graphs instead of extraction requests",
                   [](C& c, S v) { c.reuse_built_graphs = parse_bool(v); }),
      switch_field("attach_images", "--text-only", "false", "Send prompts without images",
                   [](C& c, S v) { c.attach_images = parse_bool(v); }),
      field("workers", "--workers", "Concurrent requests per stage",
            [](C& c, S v) { c.workers = parse_int(v); }),
      field("geometry.on_vertical", "", "",
            [](C& c, S v) { c.geometry.on_vertical = parse_double(v); }),
      field("geometry.vertical", "", "", [](C& c, S v) { c.geometry.vertical = parse_double(v); }),
      field("geometry.depth", "", "", [](C& c, S v) { c.geometry.depth = parse_double(v); }),
      field("geometry.proximity", "", "",
            [](C& c, S v) { c.geometry.proximity = parse_double(v); }),
      field("backend.kind", "--backend", "Backend: mock | http",
            [](C& c, S v) { c.backend.kind = backend_from_string(trim(v)); }),
      field("backend.mock_script", "--mock-script", "Mock backend script (JSON)",
            [](C& c, S v) { c.backend.mock_script = v; }),
      field("backend.base_url", "--backend-url", "OpenAI-compatible server base URL",
            [](C& c, S v) { c.backend.base_url = v; }),
      field("backend.model", "--model", "Model name sent to the server",
            [](C& c, S v) { c.backend.model = v; }),
      field("backend.api_key_env", "--api-key-env", "Environment variable holding the API key",
            [](C& c, S v) { c.backend.api_key_env = v; }),
      field("backend.timeout_s", "--timeout", "Request timeout in seconds",
            [](C& c, S v) { c.backend.timeout_s = parse_double(v); }),
      field("backend.max_retries", "--retries", "Retries on transient HTTP failures",
            [](C& c, S v) { c.backend.max_retries = parse_int(v); }),
      field("backend.backoff_base_ms", "--backoff-ms", "Initial retry backoff",
            [](C& c, S v) { c.backend.backoff_base_ms = parse_int(v); }),
      field("backend.max_tokens", "--max-tokens", "Completion token limit",
            [](C& c, S v) { c.backend.max_tokens = parse_int(v); }),
      field("backend.cache_dir", "--cache-dir", "Response cache directory (empty disables)",
            [](C& c, S v) { c.backend.cache_dir = v; }),
  };
}

std::string_view source_name(Source s) {
  switch (s) {
    case Source::default_value: return "default";
    case Source::config_file: return "config";
    case Source::env: return "env";
    case Source::flag: return "flag";
  }
  return "default";
}

void apply_value(const ConfigField& f, PipelineConfig& cfg, const std::string& value, Source src) {
  try {
    f.apply(cfg, value);
  } catch (const std::exception& e) {
    throw ValidationError(std::string(source_name(src)) + " value for " + f.key + ": " + e.what());
  }
}

struct Paths {
  std::string work = "work";
  std::string videos;
  std::string questions;
  std::string answers;
  std::string perception;
  std::string digests;
  std::string report;
  std::string dataset_format = "auto";
  std::string matcher = "normalized_exact";
  std::string format = "text";
};

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

std::string ConfigField::env_name() const {
  std::string out = "SGVQA_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = make_fields();
  return fields;
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ValidationError("config file " + path.string() + ": " + e.what());
  }
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // table open/close markers
    const auto key = item.fullname();
    const bool known = std::any_of(config_fields().begin(), config_fields().end(),
                                   [&](const ConfigField& f) { return f.key == key; });
    if (!known) throw ValidationError("config file " + path.string() + ": unknown key '" + key + "'");
    if (item.inputs.size() != 1) {
      throw ValidationError("config file " + path.string() + ": '" + key + "' must be a single value");
    }
    out[key] = item.inputs.front();
  }
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str()); v != nullptr) return std::string(v);
  return std::nullopt;
}

ResolvedConfig resolve_config(const std::map<std::string, std::string>& file_values,
                              const EnvLookup& env,
                              const std::map<std::string, std::string>& flag_values) {
  ResolvedConfig out;
  for (const auto& f : config_fields()) {
    out.sources[f.key] = Source::default_value;
    if (auto it = file_values.find(f.key); it != file_values.end()) {
      apply_value(f, out.config, it->second, Source::config_file);
      out.sources[f.key] = Source::config_file;
    }
    if (env) {
      if (auto v = env(f.env_name()); v && !v->empty()) {
        apply_value(f, out.config, *v, Source::env);
        out.sources[f.key] = Source::env;
      }
    }
    if (auto it = flag_values.find(f.key); it != flag_values.end()) {
      apply_value(f, out.config, it->second, Source::flag);
      out.sources[f.key] = Source::flag;
    }
  }
  validate(out.config);
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env) {
  CLI::App app{"Scene-graph grounded video question answering", "sgvqa"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "TOML config file (also SGVQA_CONFIG)");
  const auto& fields = config_fields();
  std::vector<std::string> flag_storage(fields.size());
  std::vector<CLI::Option*> flag_opts(fields.size(), nullptr);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& f = fields[i];
    if (f.flag.empty()) continue;
    flag_opts[i] = f.is_switch ? app.add_flag(f.flag, f.help)
                               : app.add_option(f.flag, flag_storage[i], f.help);
    flag_opts[i]->group("Pipeline");
  }
  long long seed = 0;
  app.add_option("--seed", seed, "Reserved; accepted and ignored")->group("Pipeline");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "No progress output");

  Paths p;
  auto add_work = [&](CLI::App* sub) { sub->add_option("-w,--work", p.work, "Work directory")->capture_default_str(); };
  auto add_videos = [&](CLI::App* sub) {
    sub->add_option("--videos", p.videos, "Video manifest (JSONL)")->required();
    sub->add_option("--digests-dir", p.digests, "Directory of <video>.digests.jsonl files");
  };
  auto add_questions = [&](CLI::App* sub) {
    sub->add_option("--questions", p.questions, "Question file (JSONL)")->required();
    sub->add_option("--dataset-format", p.dataset_format, "auto | mc_jsonl | openended_jsonl")->capture_default_str();
  };

  auto* sample = app.add_subcommand("sample", "Choose frames for every video");
  add_work(sample);
  add_videos(sample);

  auto* build = app.add_subcommand("build-sg", "Build a scene graph per video");
  add_work(build);
  add_videos(build);
  build->add_option("--perception", p.perception, "Directory of <video>.json perception files")
      ->required();

  auto* select = app.add_subcommand("select", "Question-aware frame selection");
  add_work(select);
  add_videos(select);
  add_questions(select);

  auto* answer_cmd = app.add_subcommand("answer", "Answer every question");
  add_work(answer_cmd);
  add_videos(answer_cmd);
  add_questions(answer_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score answers and write report.json");
  add_work(eval_cmd);
  add_questions(eval_cmd);
  eval_cmd->add_option("--answers", p.answers, "Answers JSONL (default <work>/answers.jsonl)");
  eval_cmd->add_option("--matcher", p.matcher, "normalized_exact | vlm_similarity")->capture_default_str();
  eval_cmd->add_option("--format", p.format, "text | json | csv")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "Render a stored report");
  add_work(report_cmd);
  report_cmd->add_option("--report", p.report, "Report JSON (default <work>/report.json)");
  report_cmd->add_option("--format", p.format, "text | json | csv")->capture_default_str();

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    std::map<std::string, std::string> flag_values;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (flag_opts[i] == nullptr || flag_opts[i]->count() == 0) continue;
      flag_values[fields[i].key] = fields[i].is_switch ? fields[i].switch_value : flag_storage[i];
    }
    if (config_path.empty() && env) config_path = env("SGVQA_CONFIG").value_or("");
    const auto file_values =
        config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(config_path);
    const auto resolved = resolve_config(file_values, env, flag_values);
    const auto& cfg = resolved.config;

    if (config_cmd->parsed()) {
      json sources = json::object();
      for (const auto& [key, src] : resolved.sources) sources[key] = source_name(src);
      out << to_pretty(json{{"config", cfg}, {"sources", sources}});
      return 0;
    }

    const Workspace ws(p.work);
    const ProgressFn progress = [&](const std::string& msg) {
      if (!quiet) err << msg << '\n';
    };
    auto questions = [&] {
      return load_dataset(p.questions, dataset_format_from_string(p.dataset_format));
    };
    auto videos = [&] { return load_video_manifest(p.videos, optional_path(p.digests)); };

    if (sample->parsed()) {
      const auto files = cmd_sample(videos(), cfg, ws, progress);
      out << "sampled " << files.size() << " videos into " << (ws.root() / "samples").string() << '\n';
      return 0;
    }
    if (build->parsed()) {
      auto gateway = make_gateway(cfg.backend);
      const auto graphs = cmd_build_sg(videos(), p.perception, cfg, *gateway, ws, progress);
      out << "built " << graphs.size() << " scene graphs into " << (ws.root() / "graphs").string()
          << '\n';
      return 0;
    }
    if (select->parsed()) {
      auto gateway = make_gateway(cfg.backend);
      const auto qs = questions();
      const int failures = cmd_select(qs, videos(), cfg, *gateway, ws, progress);
      out << "selected frames for " << (qs.size() - static_cast<std::size_t>(failures)) << " of "
          << qs.size() << " questions\n";
      return failures == 0 ? 0 : 1;
    }
    if (answer_cmd->parsed()) {
      auto gateway = make_gateway(cfg.backend);
      const auto records = cmd_answer(questions(), videos(), cfg, *gateway, ws,
                                      RunInputs{p.questions, p.videos}, progress);
      const auto errors = std::count_if(records.begin(), records.end(),
                                        [](const AnswerRecord& r) { return r.error.has_value(); });
      out << "wrote " << records.size() << " answers (" << errors << " with errors) to "
          << ws.answers_path().string() << '\n';
      return 0;
    }
    if (eval_cmd->parsed()) {
      const auto matcher = matcher_from_string(p.matcher);
      const auto format = report_format_from_string(p.format);
      std::shared_ptr<Gateway> gateway;
      if (matcher == Matcher::vlm_similarity) gateway = make_gateway(cfg.backend);
      const fs::path answers_path = p.answers.empty() ? ws.answers_path() : fs::path(p.answers);
      const auto report = cmd_eval(questions(), read_jsonl<AnswerRecord>(answers_path), matcher,
                                   gateway.get(), cfg, ws);
      out << render_report(report, format);
      return 0;
    }
    if (report_cmd->parsed()) {
      const fs::path path = p.report.empty() ? ws.report_path() : fs::path(p.report);
      out << render_report(decode<EvalReport>(read_json_file(path)),
                           report_format_from_string(p.format));
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sgvqa::cli
