#pragma once

// Chunk-size sweep: for every size rebuild the index from scratch, answer
// the whole QA set, score it, and report the per-size mean correctness.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/atomic_file.hpp"
#include "ragbench/chunker.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/parallel.hpp"
#include "ragbench/rag.hpp"
#include "ragbench/vectorstore.hpp"

namespace ragbench::sweep {

inline const std::vector<std::size_t> kDefaultChunkSizes{250, 500, 1000, 2000, 4000, 8000};

struct SweepConfig {
  std::vector<std::size_t> chunk_sizes = kDefaultChunkSizes;
  std::size_t overlap = 0;
  rag::RagConfig rag;
  metrics::MetricConfig metric;
  bool keep_going = false;
  std::size_t max_concurrency = 4;

  void validate() const {
    if (chunk_sizes.empty()) throw Error(ErrorCode::kInvalidConfig, "chunk_sizes is empty");
    for (std::size_t i = 0; i < chunk_sizes.size(); ++i) {
      if (i > 0 && chunk_sizes[i] <= chunk_sizes[i - 1]) {
        throw Error(ErrorCode::kInvalidConfig, "chunk_sizes must be strictly increasing");
      }
      chunker::ChunkConfig{chunk_sizes[i], overlap}.validate();
    }
    if (max_concurrency == 0) throw Error(ErrorCode::kInvalidConfig, "max_concurrency must be >= 1");
    rag.validate();
    metric.validate();
  }
};

/// The three pluggable backends a sweep needs.
struct Components {
  embed::Embedder& embedder;
  llm::Generator& generator;
  metrics::Judge& judge;
};

struct Row {
  std::size_t chunk_size = 0;
  double mean_correctness = 0.0;
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  bool failed = false;
  std::string error;

  friend bool operator==(const Row&, const Row&) = default;
};

struct SweepReport {
  std::vector<Row> rows;
  std::map<std::size_t, std::vector<metrics::EvalResult>> per_question;
  std::map<std::size_t, std::vector<rag::AnswerRecord>> answers;
  std::vector<std::size_t> argmax_sizes;
};

/// Sizes whose mean equals the best mean among successful rows.
inline std::vector<std::size_t> compute_argmax(const std::vector<Row>& rows) {
  std::optional<double> best;
  for (const auto& r : rows) {
    if (!r.failed && (!best || r.mean_correctness > *best)) best = r.mean_correctness;
  }
  std::vector<std::size_t> out;
  if (!best) return out;
  for (const auto& r : rows) {
    if (!r.failed && r.mean_correctness == *best) out.push_back(r.chunk_size);
  }
  return out;
}

struct SizeOutcome {
  std::vector<rag::AnswerRecord> answers;
  std::vector<metrics::EvalResult> results;
};

/// One sweep point: index the corpus at one chunk size, then answer and score every question.
inline SizeOutcome run_size(const std::vector<corpus::Document>& docs, const std::vector<metrics::QAItem>& qa_set,
                            const std::vector<embed::Vector>& question_vecs, std::size_t chunk_size,
                            const SweepConfig& cfg, Components& c) {
  const auto chunks = chunker::chunk_corpus(docs, {chunk_size, cfg.overlap});
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& ch : chunks) texts.push_back(ch.text);
  auto vectors = c.embedder.embed(texts);

  std::vector<vectorstore::IndexEntry> entries;
  entries.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    entries.push_back({{chunks[i].doc_id, chunks[i].seq}, std::move(vectors[i]), chunks[i].text});
  }
  const auto index = vectorstore::Index::build(std::move(entries));

  SizeOutcome out;
  out.answers.resize(qa_set.size());
  out.results.resize(qa_set.size());
  parallel_for(qa_set.size(), cfg.max_concurrency, [&](std::size_t i) {
    const auto& qa = qa_set[i];
    out.answers[i] = rag::answer_with_vector(qa.id, qa.question, question_vecs[i], index, c.generator, cfg.rag);
    out.results[i] = metrics::answer_correctness(out.answers[i].answer, qa, c.judge, c.embedder, cfg.metric);
  });
  return out;
}

inline SweepReport run_sweep(const std::vector<corpus::Document>& docs, const std::vector<metrics::QAItem>& qa_set,
                             const SweepConfig& cfg, Components c) {
  cfg.validate();
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "sweep needs a non-empty corpus");
  if (qa_set.empty()) throw Error(ErrorCode::kEmptyCorpus, "sweep needs a non-empty QA set");

  // Question embeddings do not depend on chunk size; compute them once.
  std::vector<std::string> questions;
  questions.reserve(qa_set.size());
  for (const auto& qa : qa_set) questions.push_back(qa.question);
  const auto question_vecs = c.embedder.embed(questions);

  SweepReport report;
  for (std::size_t size : cfg.chunk_sizes) {
    Row row;
    row.chunk_size = size;
    try {
      auto outcome = run_size(docs, qa_set, question_vecs, size, cfg, c);
      const auto summary = metrics::aggregate(outcome.results);
      row.mean_correctness = summary.mean;
      row.n = summary.n;
      row.min = summary.min;
      row.max = summary.max;
      report.per_question[size] = std::move(outcome.results);
      report.answers[size] = std::move(outcome.answers);
    } catch (const Error& e) {
      if (!cfg.keep_going) rethrow_with_context(e, "chunk size " + std::to_string(size));
      row.failed = true;
      row.error = e.what();
      report.per_question[size];
    }
    report.rows.push_back(std::move(row));
  }
  report.argmax_sizes = compute_argmax(report.rows);
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Header plus one row per size; failed rows leave the mean empty.
inline std::string render_csv(const SweepReport& report) {
  std::string out = "chunk_size,mean_correctness,n\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.chunk_size) + ',';
    if (!r.failed) out += format_fixed(r.mean_correctness, 6);
    out += ',' + std::to_string(r.n) + '\n';
  }
  return out;
}

namespace svg {
inline constexpr double kWidth = 640, kHeight = 400;
inline constexpr double kLeft = 64, kRight = 24, kTop = 48, kBottom = 56;
inline constexpr double kPlotW = kWidth - kLeft - kRight;
inline constexpr double kPlotH = kHeight - kTop - kBottom;
}  // namespace svg

/// Bar chart of mean correctness per chunk size on a fixed [0, 1] axis.
inline std::string render_svg(const SweepReport& report) {
  using namespace svg;
  auto f = [](double v) { return format_fixed(v, 2); };
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight)
    << "\" viewBox=\"0 0 " << f(kWidth) << ' ' << f(kHeight) << "\" font-family=\"sans-serif\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight) << "\" fill=\"#ffffff\"/>\n"
    << "<text x=\"" << f(kWidth / 2) << "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">"
    << "Average answer correctness by chunk size</text>\n";

  for (int g = 0; g <= 4; ++g) {
    const double v = 0.25 * g;
    const double y = kTop + kPlotH * (1.0 - v);
    o << "<line class=\"grid\" x1=\"" << f(kLeft) << "\" y1=\"" << f(y) << "\" x2=\"" << f(kLeft + kPlotW)
      << "\" y2=\"" << f(y) << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << f(kLeft - 8) << "\" y=\"" << f(y + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
      << f(v) << "</text>\n";
  }

  const std::size_t n = report.rows.size();
  const double slot = n == 0 ? kPlotW : kPlotW / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = report.rows[i];
    const double mean = r.failed ? 0.0 : std::clamp(r.mean_correctness, 0.0, 1.0);
    const double h = mean * kPlotH;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.2;
    o << "<rect class=\"bar" << (r.failed ? " failed" : "") << "\" data-chunk-size=\"" << r.chunk_size
      << "\" data-mean=\"" << (r.failed ? std::string("nan") : format_fixed(r.mean_correctness, 6))
      << "\" x=\"" << f(x) << "\" y=\"" << f(kTop + kPlotH - h) << "\" width=\"" << f(slot * 0.6)
      << "\" height=\"" << f(h) << "\" fill=\"#4e79a7\"/>\n"
      << "<text x=\"" << f(kLeft + slot * (static_cast<double>(i) + 0.5)) << "\" y=\""
      << f(kTop + kPlotH + 18) << "\" font-size=\"12\" text-anchor=\"middle\">" << r.chunk_size << "</text>\n";
  }

  o << "<line class=\"axis\" x1=\"" << f(kLeft) << "\" y1=\"" << f(kTop + kPlotH) << "\" x2=\""
    << f(kLeft + kPlotW) << "\" y2=\"" << f(kTop + kPlotH) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    << "<line class=\"axis\" x1=\"" << f(kLeft) << "\" y1=\"" << f(kTop) << "\" x2=\"" << f(kLeft)
    << "\" y2=\"" << f(kTop + kPlotH) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    << "<text x=\"" << f(kLeft + kPlotW / 2) << "\" y=\"" << f(kHeight - 12)
    << "\" font-size=\"13\" text-anchor=\"middle\">Chunk size (characters)</text>\n"
    << "<text x=\"16\" y=\"" << f(kTop + kPlotH / 2) << "\" font-size=\"13\" text-anchor=\"middle\" "
    << "transform=\"rotate(-90 16 " << f(kTop + kPlotH / 2) << ")\">Mean answer correctness</text>\n"
    << "</svg>\n";
  return o.str();
}

inline void emit_csv(const SweepReport& report, const std::filesystem::path& path) {
  write_file(path, render_csv(report));
}

inline void emit_svg(const SweepReport& report, const std::filesystem::path& path) {
  write_file(path, render_svg(report));
}

inline nlohmann::ordered_json to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["chunk_size"] = r.chunk_size;
    row["mean_correctness"] = r.mean_correctness;
    row["n"] = r.n;
    row["min"] = r.min;
    row["max"] = r.max;
    row["failed"] = r.failed;
    if (r.failed) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["argmax_sizes"] = report.argmax_sizes;
  nlohmann::ordered_json per_q = nlohmann::ordered_json::object();
  for (const auto& [size, results] : report.per_question) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : results) arr.push_back(metrics::to_json(r));
    per_q[std::to_string(size)] = std::move(arr);
  }
  j["per_question"] = std::move(per_q);
  return j;
}

inline SweepReport report_from_json(const nlohmann::json& j) {
  SweepReport report;
  try {
    for (const auto& row : j.at("rows")) {
      Row r;
      r.chunk_size = row.at("chunk_size").get<std::size_t>();
      r.mean_correctness = row.at("mean_correctness").get<double>();
      r.n = row.at("n").get<std::size_t>();
      r.min = row.value("min", 0.0);
      r.max = row.value("max", 0.0);
      r.failed = row.value("failed", false);
      r.error = row.value("error", std::string());
      report.rows.push_back(std::move(r));
    }
    if (j.contains("per_question")) {
      for (const auto& [size, arr] : j.at("per_question").items()) {
        auto& dst = report.per_question[std::stoul(size)];
        for (const auto& r : arr) dst.push_back(metrics::eval_result_from_json(r));
      }
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad report JSON: ") + e.what());
  }
  report.argmax_sizes = compute_argmax(report.rows);
  return report;
}

/// report.csv, report.svg, report.json, and per size
/// {size}/results.jsonl, {size}/answers.jsonl, {size}/summary.json.
inline void write_outputs(const SweepReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());

  emit_csv(report, out_dir / "report.csv");
  emit_svg(report, out_dir / "report.svg");
  write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");

  for (const auto& row : report.rows) {
    const auto dir = out_dir / std::to_string(row.chunk_size);
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

    std::string results;
    if (auto it = report.per_question.find(row.chunk_size); it != report.per_question.end()) {
      for (const auto& r : it->second) results += metrics::to_json(r).dump() + "\n";
    }
    write_file(dir / "results.jsonl", results);

    std::string answers;
    if (auto it = report.answers.find(row.chunk_size); it != report.answers.end()) {
      for (const auto& a : it->second) answers += rag::to_json(a).dump() + "\n";
    }
    write_file(dir / "answers.jsonl", answers);

    nlohmann::ordered_json summary;
    summary["chunk_size"] = row.chunk_size;
    summary["failed"] = row.failed;
    if (row.failed) {
      summary["error"] = row.error;
    } else {
      summary["mean"] = row.mean_correctness;
      summary["n"] = row.n;
      summary["min"] = row.min;
      summary["max"] = row.max;
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");
  }
}

}  // namespace ragbench::sweep
