// synsearch: command-line front end for ingestion, indexing, by-example query
// compilation, search, dataset bootstrapping, rule-baseline evaluation and
// the HTTP service.

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "synsearch/bootstrap.hpp"
#include "synsearch/corpus.hpp"
#include "synsearch/engine.hpp"
#include "synsearch/error.hpp"
#include "synsearch/extractor.hpp"
#include "synsearch/pattern.hpp"
#include "synsearch/project.hpp"
#include "synsearch/querylang.hpp"
#include "synsearch/service.hpp"
#include "synsearch/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace synsearch;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kMalformedInput, "invalid JSON in " + path.string());
  return j;
}

std::vector<Sentence> read_conllu_file(const fs::path& path, ParseMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<Diagnostic> skipped;
  auto out = parse_conllu(in, mode, &skipped);
  for (const auto& d : skipped) {
    ordered_json w{{"warning", "skipped_sentence"}, {"file", path.string()},
                   {"sentence_id", d.sentence_id}, {"line", d.line}, {"message", d.message}};
    std::cerr << w.dump() << '\n';
  }
  return out;
}

Pattern select_pattern(const fs::path& path, const std::string& id) {
  auto patterns = patterns_from_json(read_json(path));
  if (!id.empty()) {
    for (auto& p : patterns)
      if (p.id == id) return p;
    throw Error(ErrorCode::kNotFound, "no pattern " + id + " in " + path.string());
  }
  if (patterns.size() != 1)
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " holds " + std::to_string(patterns.size()) +
                    " patterns; choose one with --pattern-id");
  return patterns.front();
}

void emit(const ordered_json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + out_path);
  out << j.dump(2) << '\n';
}

fs::path relative_to(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<Pattern> compile_query_file(const fs::path& queries_path, const fs::path& parses_path,
                                        const std::string& triggers_path) {
  std::ifstream qin(queries_path);
  if (!qin) throw Error(ErrorCode::kIo, "cannot read " + queries_path.string());
  auto queries = read_query_file(qin);
  auto parses = read_conllu_file(parses_path, ParseMode::kStrict);
  TriggerMap triggers;
  if (!triggers_path.empty()) triggers = parse_trigger_map(read_file(triggers_path));

  std::vector<Pattern> out;
  std::set<std::string> used_triggers;
  for (auto& q : queries) {
    const Sentence* parse = nullptr;
    for (const auto& s : parses)
      if (s.id == q.id) parse = &s;
    if (!parse) {
      for (const auto& s : parses) {
        if (s.tokens.size() != q.elements.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < s.tokens.size() && same; ++i)
          same = iequals(s.tokens[i].word, q.elements[i].surface);
        if (same) {
          parse = &s;
          break;
        }
      }
    }
    if (!parse) throw Error(ErrorCode::kCompile, "query " + q.id + ": no parse for \"" + strip(q) + "\"");
    if (!triggers.empty()) {
      std::vector<std::string> warnings;
      q = expand_triggers(q, triggers, &warnings);
      for (const auto& [word, _] : triggers) {
        const std::string needle = "'" + word + "'";
        bool unused = std::any_of(warnings.begin(), warnings.end(),
                                  [&](const std::string& w) { return w.find(needle) != std::string::npos; });
        if (!unused) used_triggers.insert(word);
      }
    }
    out.push_back(compile(q, *parse));
  }
  for (const auto& [word, _] : triggers)
    if (!used_triggers.count(word))
      std::cerr << ordered_json{{"warning", "unused_trigger"},
                                {"message", "trigger '" + word + "' matches no w/l capture in any query"}}
                       .dump()
                << '\n';
  return out;
}

int report_error(const Error& e) {
  ordered_json j;
  j["error"] = error_code_name(e.code());
  j["message"] = e.what();
  if (!e.sentence_id().empty()) j["sentence_id"] = e.sentence_id();
  if (e.line() >= 0) j["line"] = e.line();
  if (e.position() >= 0) j["position"] = e.position();
  std::cerr << j.dump() << '\n';
  return 1;
}

Service* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synsearch: syntactic search by example and relation-dataset bootstrapping"};
  app.require_subcommand(1);

  // ingest
  std::vector<std::string> ingest_inputs;
  std::string ingest_out;
  bool ingest_lenient = false;
  auto* ingest = app.add_subcommand("ingest", "Read CoNLL-U files into a corpus snapshot");
  ingest->add_option("conllu", ingest_inputs, "CoNLL-U input files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Snapshot path")->required();
  ingest->add_flag("--lenient", ingest_lenient, "Skip invalid sentences instead of failing");

  // index
  std::string index_store, index_out;
  auto* index_cmd = app.add_subcommand("index", "Build an on-disk index from a snapshot");
  index_cmd->add_option("store", index_store, "Corpus snapshot")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--out", index_out, "Index directory")->required();

  // query parse / compile
  auto* query = app.add_subcommand("query", "By-example query tools");
  query->require_subcommand(1);
  std::string parse_text;
  auto* qparse = query->add_subcommand("parse", "Parse query markup and print its elements");
  qparse->add_option("text", parse_text, "Query text")->required();
  std::string compile_file, compile_parses, compile_triggers, compile_out;
  auto* qcompile = query->add_subcommand("compile", "Compile a query file into patterns");
  qcompile->add_option("queryfile", compile_file, "Query file")->required()->check(CLI::ExistingFile);
  qcompile->add_option("--parses", compile_parses, "CoNLL-U parses of the query sentences")
      ->required()
      ->check(CLI::ExistingFile);
  qcompile->add_option("--triggers", compile_triggers, "Trigger map JSON")->check(CLI::ExistingFile);
  qcompile->add_option("--out", compile_out, "Write patterns JSON here instead of stdout");

  // search
  std::string search_index, search_pattern, search_pattern_id;
  std::size_t search_limit = 20, search_offset = 0;
  bool search_jsonl = false;
  auto* search_cmd = app.add_subcommand("search", "Run a pattern against an index");
  search_cmd->add_option("index", search_index, "Index directory")->required()->check(CLI::ExistingDirectory);
  search_cmd->add_option("pattern", search_pattern, "Pattern JSON")->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--limit", search_limit, "Page size");
  search_cmd->add_option("--offset", search_offset, "Page offset");
  search_cmd->add_option("--pattern-id", search_pattern_id, "Pattern to use when the file holds several");
  search_cmd->add_flag("--jsonl", search_jsonl, "Print matches as JSONL, one per line");

  // sample
  std::string sample_index, sample_pattern, sample_pattern_id;
  std::size_t sample_n = kQualitySampleSize;
  std::uint64_t sample_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a seeded uniform sample of matches");
  sample_cmd->add_option("index", sample_index, "Index directory")->required()->check(CLI::ExistingDirectory);
  sample_cmd->add_option("pattern", sample_pattern, "Pattern JSON")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("-n", sample_n, "Sample size");
  sample_cmd->add_option("--seed", sample_seed, "Random seed");
  sample_cmd->add_option("--pattern-id", sample_pattern_id, "Pattern to use when the file holds several");

  // dataset build
  auto* dataset = app.add_subcommand("dataset", "Relation dataset tools");
  dataset->require_subcommand(1);
  std::string build_config;
  auto* dbuild = dataset->add_subcommand("build", "Build positives/negatives from a config file");
  dbuild->add_option("config", build_config, "Config JSON")->required()->check(CLI::ExistingFile);

  // eval
  std::string eval_patterns, eval_gold, eval_parses, eval_report;
  bool eval_json = false;
  auto* eval = app.add_subcommand("eval", "Evaluate the pattern-based extractor on gold data");
  eval->add_option("patterns", eval_patterns, "Patterns JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("gold", eval_gold, "Gold JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--parses", eval_parses, "Sidecar CoNLL-U keyed by instance id")->check(CLI::ExistingFile);
  eval->add_option("--report", eval_report, "Also write the JSON report here");
  eval->add_flag("--json", eval_json, "Print the JSON report instead of the table");

  // serve
  std::string serve_project, serve_host = "127.0.0.1";
  int serve_port = 0;
  auto* serve = app.add_subcommand("serve", "Serve a project over HTTP");
  serve->add_option("project", serve_project, "Project directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--port", serve_port, "Port (default $SYNSEARCH_PORT or 8080)");
  serve->add_option("--host", serve_host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ordered_json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*ingest) {
      std::vector<Sentence> all;
      for (const auto& path : ingest_inputs) {
        auto part = read_conllu_file(path, ingest_lenient ? ParseMode::kLenient : ParseMode::kStrict);
        std::move(part.begin(), part.end(), std::back_inserter(all));
      }
      validate_unique_ids(all);
      save_corpus(all, ingest_out);
      std::cout << ordered_json{{"sentences", all.size()}, {"out", ingest_out}}.dump() << '\n';
    } else if (*index_cmd) {
      auto index = CorpusIndex::build(load_corpus(index_store));
      index.save(index_out);
      const auto& m = index.metadata();
      std::cout << ordered_json{{"sentences", m.sentence_count}, {"tokens", m.token_count},
                                {"mentions", m.mention_count}, {"out", index_out}}
                       .dump()
                << '\n';
    } else if (*qparse) {
      std::cout << elements_to_json(parse_query(parse_text)).dump(2) << '\n';
    } else if (*qcompile) {
      ordered_json arr = ordered_json::array();
      for (const auto& p : compile_query_file(compile_file, compile_parses, compile_triggers))
        arr.push_back(to_json(p));
      emit(arr, compile_out);
    } else if (*search_cmd) {
      auto index = CorpusIndex::load(search_index);
      auto page = search(select_pattern(search_pattern, search_pattern_id), index, search_limit, search_offset);
      if (search_jsonl) {
        for (const auto& m : page.matches) std::cout << match_to_json(m).dump() << '\n';
      } else {
        ordered_json matches = ordered_json::array();
        for (const auto& m : page.matches) matches.push_back(match_to_json(m));
        std::cout << ordered_json{{"total", page.total}, {"matches", std::move(matches)}}.dump() << '\n';
      }
    } else if (*sample_cmd) {
      auto index = CorpusIndex::load(sample_index);
      auto sample = sample_matches(select_pattern(sample_pattern, sample_pattern_id), index, sample_n, sample_seed);
      for (const auto& m : sample) std::cout << match_to_json(m).dump() << '\n';
    } else if (*dbuild) {
      const fs::path base = fs::path(build_config).parent_path();
      json cfg = read_json(build_config);
      BootstrapConfig config = config_from_json(cfg);
      auto index = CorpusIndex::load(relative_to(base, cfg.at("index").get<std::string>()));
      auto patterns = patterns_from_json(read_json(relative_to(base, cfg.at("patterns").get<std::string>())));
      std::map<std::string, Verdict> verdicts;
      if (cfg.contains("verdicts"))
        for (const auto& [id, v] : cfg.at("verdicts").items()) verdicts[id] = parse_verdict(v.get<std::string>());
      if (cfg.contains("labels")) {
        for (const auto& [id, labels] : cfg.at("labels").items()) {
          std::vector<Answer> answers;
          for (const auto& a : labels) answers.push_back(parse_answer(a.get<std::string>()));
          verdicts[id] = quality_filter(answers);
        }
      }
      Dataset ds = build_dataset(config, index, patterns, verdicts);
      write_dataset_files(ds, relative_to(base, cfg.at("out").get<std::string>()));
      std::cout << stats_to_json(ds).dump(2) << '\n';
    } else if (*eval) {
      auto patterns = patterns_from_json(read_json(eval_patterns));
      std::vector<Sentence> sidecar;
      if (!eval_parses.empty()) sidecar = read_conllu_file(eval_parses, ParseMode::kStrict);
      std::ifstream gin(eval_gold);
      auto gold = read_gold_jsonl(gin, sidecar);
      auto report = evaluate(patterns, gold);
      if (!eval_report.empty()) emit(report_to_json(report), eval_report);
      if (eval_json) std::cout << report_to_json(report).dump(2) << '\n';
      else std::cout << format_report(report);
    } else if (*serve) {
      Service service(Project::open(serve_project));
      g_service = &service;
      std::signal(SIGINT, [](int) { if (g_service) g_service->stop(); });
      std::signal(SIGTERM, [](int) { if (g_service) g_service->stop(); });
      const int port = resolve_port(serve_port);
      std::cerr << ordered_json{{"status", "listening"}, {"host", serve_host}, {"port", port}}.dump() << '\n';
      if (!service.listen(serve_host, port))
        throw Error(ErrorCode::kIo, "cannot listen on " + serve_host + ":" + std::to_string(port));
    }
  } catch (const Error& e) {
    return report_error(e);
  } catch (const json::exception& e) {
    return report_error(Error(ErrorCode::kInvalidArgument, e.what()));
  } catch (const std::exception& e) {
    return report_error(Error(ErrorCode::kIo, e.what()));
  }
  return 0;
}
