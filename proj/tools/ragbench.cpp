// ragbench: corpus-vetting harness for retrieval-augmented QA.
//
// Exit codes: 0 success, 1 usage/config error, 2 data/runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragbench/ragbench.hpp"

namespace fs = std::filesystem;
using namespace ragbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Flags shared by every command that touches the embedder or generator.
struct BackendFlags {
  std::string config_path;
  std::optional<std::string> embedder;
  std::optional<std::string> embed_url;
  std::optional<std::string> embed_model;
  std::optional<std::size_t> dim;
  std::optional<std::string> generator;
  std::optional<std::string> llm_url;
  std::optional<std::string> llm_model;
  std::optional<std::string> judge;
  std::optional<std::string> cache_dir;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> max_context;
  std::optional<std::size_t> overlap;
  std::optional<std::size_t> max_concurrency;

  void attach(CLI::App& cmd, bool with_generation) {
    cmd.add_option("--config", config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
    cmd.add_option("--embedder", embedder, "Embedding backend")->check(CLI::IsMember({"offline", "remote"}));
    cmd.add_option("--embed-url", embed_url, "Remote embeddings endpoint base URL");
    cmd.add_option("--embed-model", embed_model, "Remote embeddings model");
    cmd.add_option("--dim", dim, "Offline embedding dimension");
    cmd.add_option("--cache-dir", cache_dir, "Response cache directory (overrides RAGBENCH_CACHE_DIR)");
    cmd.add_option("--overlap", overlap, "Chunk overlap in characters");
    if (!with_generation) return;
    cmd.add_option("--generator", generator, "Generation backend")->check(CLI::IsMember({"mock", "remote"}));
    cmd.add_option("--llm-url", llm_url, "Remote chat-completions endpoint base URL");
    cmd.add_option("--llm-model", llm_model, "Remote chat model");
    cmd.add_option("--judge", judge, "Statement judge")->check(CLI::IsMember({"lexical", "remote"}));
    cmd.add_option("--top-k", top_k, "Chunks retrieved per question");
    cmd.add_option("--max-context", max_context, "Context budget in characters");
    cmd.add_option("--max-concurrency", max_concurrency, "In-flight remote requests");
  }

  config::AppConfig resolve() const {
    config::AppConfig cfg = config_path.empty() ? config::AppConfig{} : config::load_config(config_path);
    if (embedder) cfg.embedder.kind = *embedder == "remote" ? embed::EmbedderKind::kRemote : embed::EmbedderKind::kOffline;
    if (embed_url) cfg.embedder.endpoint_url = *embed_url;
    if (embed_model) cfg.embedder.model = *embed_model;
    if (dim) cfg.embedder.dim = *dim;
    if (generator) {
      cfg.generator.kind = *generator == "remote" ? config::GeneratorKind::kRemote : config::GeneratorKind::kMock;
    }
    if (llm_url) cfg.generator.remote.endpoint_url = *llm_url;
    if (llm_model) cfg.generator.remote.model = *llm_model;
    if (judge) cfg.metric.judge = *judge == "remote" ? metrics::JudgeKind::kRemote : metrics::JudgeKind::kLexical;
    if (top_k) cfg.rag.top_k = *top_k;
    if (max_context) cfg.rag.max_context_chars = *max_context;
    if (overlap) cfg.overlap = *overlap;
    if (max_concurrency) {
      cfg.generator.remote.max_concurrency = *max_concurrency;
      cfg.embedder.max_concurrency = *max_concurrency;
    }
    if (cache_dir) {
      cfg.cache_dir = *cache_dir;
    } else if (const char* env = std::getenv("RAGBENCH_CACHE_DIR"); env != nullptr && *env != '\0') {
      cfg.cache_dir = env;
    }
    return cfg;
  }
};

vectorstore::Index build_index(const std::vector<corpus::Document>& docs, const chunker::ChunkConfig& chunking,
                               embed::Embedder& embedder) {
  const auto chunks = chunker::chunk_corpus(docs, chunking);
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = embedder.embed(texts);
  std::vector<vectorstore::IndexEntry> entries;
  entries.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    entries.push_back({{chunks[i].doc_id, chunks[i].seq}, std::move(vectors[i]), chunks[i].text});
  }
  return vectorstore::Index::build(std::move(entries));
}

nlohmann::ordered_json stats_json(const corpus::CorpusStats& s) {
  nlohmann::ordered_json j;
  j["documents_in"] = s.documents_in;
  j["documents_kept"] = s.documents_kept;
  j["duplicates_removed"] = s.duplicates_removed;
  j["lines_skipped"] = s.lines_skipped;
  return j;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || item.front() == '-') {
      throw Error(ErrorCode::kInvalidConfig, "bad chunk size '" + item + "' in --sizes");
    }
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw Error(ErrorCode::kInvalidConfig, "--sizes is empty");
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ragbench: vet a document corpus for retrieval-augmented question answering"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Normalize a source corpus into a corpus store (JSONL)");
  std::string ingest_format, ingest_in, ingest_out;
  bool ingest_dedup = true, ingest_strict = false;
  ingest->add_option("--format", ingest_format, "Input format")
      ->required()
      ->check(CLI::IsMember({"reddit-jsonl", "textdir"}));
  ingest->add_option("--in", ingest_in, "Input file or directory")->required();
  ingest->add_option("--out", ingest_out, "Output corpus store")->required();
  ingest->add_flag("--dedup,!--no-dedup", ingest_dedup, "Collapse duplicate bodies (default on)");
  ingest->add_flag("--strict", ingest_strict, "Abort on the first malformed line");

  // chunk
  auto* chunk = app.add_subcommand("chunk", "Write the chunks of a corpus as JSONL");
  std::string chunk_corpus, chunk_out;
  std::size_t chunk_size = 1000, chunk_overlap = 0;
  chunk->add_option("--corpus", chunk_corpus, "Corpus store")->required();
  chunk->add_option("--chunk-size", chunk_size, "Chunk size in characters")->capture_default_str();
  chunk->add_option("--overlap", chunk_overlap, "Chunk overlap in characters")->capture_default_str();
  chunk->add_option("--out", chunk_out, "Output JSONL (default stdout)");

  // index
  auto* index = app.add_subcommand("index", "Chunk, embed and save an RGBV vector index");
  std::string index_corpus, index_out;
  std::size_t index_size = 1000;
  BackendFlags index_flags;
  index->add_option("--corpus", index_corpus, "Corpus store")->required();
  index->add_option("--chunk-size", index_size, "Chunk size in characters")->capture_default_str();
  index->add_option("--out", index_out, "Output index file")->required();
  index_flags.attach(*index, false);

  // ask
  auto* ask = app.add_subcommand("ask", "Answer one question through the RAG pipeline");
  std::string ask_corpus, ask_index, ask_question;
  std::size_t ask_size = 1000;
  BackendFlags ask_flags;
  ask->add_option("--corpus", ask_corpus, "Corpus store");
  ask->add_option("--index", ask_index, "Prebuilt RGBV index (instead of --corpus)");
  ask->add_option("--question", ask_question, "Question text")->required();
  ask->add_option("--chunk-size", ask_size, "Chunk size in characters")->capture_default_str();
  ask_flags.attach(*ask, true);

  // eval
  auto* eval = app.add_subcommand("eval", "Answer and score a QA set at one chunk size");
  std::string eval_corpus, eval_qa, eval_out;
  std::size_t eval_size = 1000;
  BackendFlags eval_flags;
  eval->add_option("--corpus", eval_corpus, "Corpus store")->required();
  eval->add_option("--qa", eval_qa, "QA set (JSONL)")->required();
  eval->add_option("--chunk-size", eval_size, "Chunk size in characters")->capture_default_str();
  eval->add_option("--out", eval_out, "Output directory")->required();
  eval_flags.attach(*eval, true);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the chunk-size sweep and write the report");
  std::string sweep_corpus, sweep_qa, sweep_sizes, sweep_out;
  bool sweep_keep_going = false;
  BackendFlags sweep_flags;
  sweep_cmd->add_option("--corpus", sweep_corpus, "Corpus store")->required();
  sweep_cmd->add_option("--qa", sweep_qa, "QA set (JSONL)")->required();
  sweep_cmd->add_option("--sizes", sweep_sizes, "Comma-separated chunk sizes (default 250,500,1000,2000,4000,8000)");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_cmd->add_flag("--keep-going", sweep_keep_going, "Record failed sizes instead of aborting");
  sweep_flags.attach(*sweep_cmd, true);

  // report
  auto* report_cmd = app.add_subcommand("report", "Re-render report.csv and report.svg from report.json");
  std::string report_in, report_out;
  report_cmd->add_option("--in", report_in, "report.json written by sweep")->required();
  report_cmd->add_option("--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      std::vector<corpus::Document> docs;
      corpus::CorpusStats stats;
      if (ingest_format == "reddit-jsonl") {
        std::ifstream in(ingest_in, std::ios::binary);
        if (!in) throw Error(ErrorCode::kPathNotFound, "cannot open " + ingest_in);
        std::tie(docs, stats) = corpus::parse_reddit_jsonl(in, !ingest_strict);
      } else {
        docs = corpus::ingest_text_dir(ingest_in);
        stats.documents_in = stats.documents_kept = docs.size();
      }
      if (ingest_dedup) {
        auto [kept, dstats] = corpus::dedup(std::move(docs));
        docs = std::move(kept);
        stats.documents_kept = dstats.documents_kept;
        stats.duplicates_removed = dstats.duplicates_removed;
      }
      corpus::save_store(ingest_out, docs);
      std::cerr << stats_json(stats).dump() << '\n';
      return kExitOk;
    }

    if (*chunk) {
      const auto docs = corpus::load_store(chunk_corpus);
      const auto chunks = chunker::chunk_corpus(docs, {chunk_size, chunk_overlap});
      if (chunk_out.empty()) {
        chunker::write_jsonl(std::cout, chunks);
      } else {
        std::ofstream out(chunk_out, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + chunk_out);
        chunker::write_jsonl(out, chunks);
      }
      return kExitOk;
    }

    if (*index) {
      auto cfg = index_flags.resolve();
      chunker::ChunkConfig chunking{index_size, cfg.overlap};
      chunking.validate();
      cfg.validate();
      auto backends = config::make_backends(cfg);
      const auto docs = corpus::load_store(index_corpus);
      const auto idx = build_index(docs, chunking, *backends.embedder);
      idx.save(index_out);
      std::cerr << "indexed " << idx.size() << " chunks (dim " << idx.dim() << ")\n";
      return kExitOk;
    }

    if (*ask) {
      if (ask_corpus.empty() == ask_index.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "give exactly one of --corpus or --index");
      }
      auto cfg = ask_flags.resolve();
      chunker::ChunkConfig chunking{ask_size, cfg.overlap};
      chunking.validate();
      cfg.validate();
      auto backends = config::make_backends(cfg);
      const auto idx = ask_index.empty()
                           ? build_index(corpus::load_store(ask_corpus), chunking, *backends.embedder)
                           : vectorstore::Index::load(ask_index);
      const auto sc = cfg.sweep_config();
      const auto rec = rag::answer_question("cli", ask_question, idx, *backends.embedder, *backends.generator, sc.rag);
      std::cout << rec.answer << "\n\nretrieved:\n";
      for (std::size_t i = 0; i < rec.retrieved.size(); ++i) {
        const auto& [ref, score] = rec.retrieved[i];
        std::cout << "  " << i << '\t' << ref.doc_id << '#' << ref.seq << '\t'
                  << sweep::format_fixed(score, 6) << '\n';
      }
      return kExitOk;
    }

    if (*eval) {
      auto cfg = eval_flags.resolve();
      cfg.chunk_sizes = {eval_size};
      cfg.validate();
      auto backends = config::make_backends(cfg);
      const auto docs = corpus::load_store(eval_corpus);
      const auto qa = metrics::load_qa_set(eval_qa);
      const auto report = sweep::run_sweep(docs, qa, cfg.sweep_config(),
                                           {*backends.embedder, *backends.generator, *backends.judge});
      sweep::write_outputs(report, eval_out);
      const auto& row = report.rows.front();
      std::cout << "chunk_size=" << row.chunk_size << " mean_correctness=" << sweep::format_fixed(row.mean_correctness, 6)
                << " n=" << row.n << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      auto cfg = sweep_flags.resolve();
      if (!sweep_sizes.empty()) cfg.chunk_sizes = parse_sizes(sweep_sizes);
      if (sweep_keep_going) cfg.keep_going = true;
      if (!sweep_out.empty()) cfg.output_dir = sweep_out;
      cfg.validate();
      auto backends = config::make_backends(cfg);
      const auto docs = corpus::load_store(sweep_corpus);
      const auto qa = metrics::load_qa_set(sweep_qa);
      const auto report = sweep::run_sweep(docs, qa, cfg.sweep_config(),
                                           {*backends.embedder, *backends.generator, *backends.judge});
      sweep::write_outputs(report, cfg.output_dir);
      std::cout << sweep::render_csv(report);
      if (backends.chat_cache) {
        std::cerr << "generator calls past cache: " << backends.chat_cache->inner_calls() << '\n';
      }
      return kExitOk;
    }

    if (*report_cmd) {
      std::ifstream in(report_in, std::ios::binary);
      if (!in) throw Error(ErrorCode::kPathNotFound, "cannot open " + report_in);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kFormatError, std::string("report is not JSON: ") + e.what());
      }
      const auto report = sweep::report_from_json(j);
      fs::create_directories(report_out);
      sweep::emit_csv(report, fs::path(report_out) / "report.csv");
      sweep::emit_svg(report, fs::path(report_out) / "report.svg");
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e.code()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
