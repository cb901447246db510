#pragma once

// Retrieve -> assemble -> generate.

#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/utf8.hpp"
#include "ragbench/vectorstore.hpp"

namespace ragbench::rag {

inline constexpr std::string_view kContextPlaceholder = "{context}";
inline constexpr std::string_view kQuestionPlaceholder = "{question}";
inline constexpr std::string_view kChunkSeparator = "\n---\n";
inline constexpr std::string_view kNoContext = "(no relevant context found)";
inline constexpr std::string_view kDefaultSystemPrompt =
    "Answer the question using only the provided context.";
inline constexpr std::string_view kDefaultTemplate =
    "Context:\n{context}\n\nQuestion: {question}\nAnswer:";

struct RagConfig {
  std::size_t top_k = 4;
  std::size_t max_context_chars = 8000;
  std::string prompt_template{kDefaultTemplate};
  std::string system_prompt{kDefaultSystemPrompt};
  std::string model = "mock";
  double temperature = 0.0;
  int max_tokens = 512;

  void validate() const {
    if (top_k == 0) throw Error(ErrorCode::kInvalidConfig, "top_k must be >= 1");
    validate_template(prompt_template);
  }

  static std::size_t count(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
      ++n;
    }
    return n;
  }

  static void validate_template(std::string_view tpl) {
    for (auto ph : {kContextPlaceholder, kQuestionPlaceholder}) {
      if (count(tpl, ph) != 1) {
        throw Error(ErrorCode::kTemplateError,
                    "prompt template must contain " + std::string(ph) + " exactly once");
      }
    }
  }
};

/// A hit paired with its chunk text.
struct RetrievedChunk {
  vectorstore::ChunkRef ref;
  double score = 0.0;
  std::string text;
};

struct AssembledPrompt {
  std::string prompt;
  std::vector<vectorstore::ChunkRef> used;
  bool truncated = false;
  std::size_t context_chars = 0;
};

/// Greedy whole-chunk packing in rank order: a chunk whose addition (with
/// its separator) would push the context past max_context_chars is dropped,
/// and so is everything after it.
inline AssembledPrompt assemble_prompt(std::string_view question, const std::vector<RetrievedChunk>& chunks,
                                       const RagConfig& cfg) {
  RagConfig::validate_template(cfg.prompt_template);

  AssembledPrompt out;
  std::string context;
  std::size_t context_chars = 0;
  const std::size_t sep_chars = utf8::length(kChunkSeparator);
  for (const auto& c : chunks) {
    const std::size_t add = utf8::length(c.text) + (out.used.empty() ? 0 : sep_chars);
    if (context_chars + add > cfg.max_context_chars) {
      out.truncated = true;
      break;
    }
    if (!out.used.empty()) context += kChunkSeparator;
    context += c.text;
    context_chars += add;
    out.used.push_back(c.ref);
  }
  if (chunks.empty()) {
    context = kNoContext;
    context_chars = utf8::length(kNoContext);
  }
  out.context_chars = context_chars;

  // Single pass so placeholder-looking text inside chunks is never expanded.
  const auto& tpl = cfg.prompt_template;
  const auto ctx_at = tpl.find(kContextPlaceholder);
  const auto q_at = tpl.find(kQuestionPlaceholder);
  const bool ctx_first = ctx_at < q_at;
  const auto first_at = ctx_first ? ctx_at : q_at;
  const auto first_len = ctx_first ? kContextPlaceholder.size() : kQuestionPlaceholder.size();
  const auto second_at = ctx_first ? q_at : ctx_at;
  const auto second_len = ctx_first ? kQuestionPlaceholder.size() : kContextPlaceholder.size();
  const std::string_view first_val = ctx_first ? std::string_view(context) : question;
  const std::string_view second_val = ctx_first ? question : std::string_view(context);

  out.prompt.reserve(tpl.size() + context.size() + question.size());
  out.prompt.append(tpl, 0, first_at);
  out.prompt += first_val;
  out.prompt.append(tpl, first_at + first_len, second_at - first_at - first_len);
  out.prompt += second_val;
  out.prompt.append(tpl, second_at + second_len);
  return out;
}

struct AnswerRecord {
  std::string qa_id;
  std::string question;
  std::string answer;
  std::vector<std::pair<vectorstore::ChunkRef, double>> retrieved;
  std::size_t context_chunks = 0;
  std::size_t prompt_chars = 0;
  long long latency_ms = 0;
  bool context_truncated = false;

  /// Equality ignoring latency.
  bool same_outcome(const AnswerRecord& o) const {
    return qa_id == o.qa_id && question == o.question && answer == o.answer &&
           retrieved == o.retrieved && context_chunks == o.context_chunks &&
           prompt_chars == o.prompt_chars && context_truncated == o.context_truncated;
  }
};

/// Runs one question through the pipeline with a precomputed question
/// embedding. Errors are re-thrown with the qa id as context.
inline AnswerRecord answer_with_vector(std::string_view qa_id, std::string_view question,
                                       const embed::Vector& question_vec, const vectorstore::Index& index,
                                       llm::Generator& generator, const RagConfig& cfg) {
  try {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto hits = index.query_topk(question_vec, cfg.top_k);

    std::vector<RetrievedChunk> chunks;
    chunks.reserve(hits.size());
    AnswerRecord rec;
    rec.qa_id = qa_id;
    rec.question = question;
    for (const auto& h : hits) {
      chunks.push_back({h.ref, h.score, index.entry(h.position).text});
      rec.retrieved.emplace_back(h.ref, h.score);
    }
    auto assembled = assemble_prompt(question, chunks, cfg);

    llm::ChatRequest req;
    req.model = cfg.model;
    if (!cfg.system_prompt.empty()) req.messages.push_back({llm::Role::kSystem, cfg.system_prompt});
    req.messages.push_back({llm::Role::kUser, assembled.prompt});
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    auto resp = generator.generate(req);

    rec.answer = std::move(resp.content);
    rec.context_chunks = assembled.used.size();
    rec.prompt_chars = utf8::length(assembled.prompt);
    rec.context_truncated = assembled.truncated;
    rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return rec;
  } catch (const Error& e) {
    rethrow_with_context(e, "qa " + std::string(qa_id));
  }
}

inline AnswerRecord answer_question(std::string_view qa_id, std::string_view question,
                                    const vectorstore::Index& index, embed::Embedder& embedder,
                                    llm::Generator& generator, const RagConfig& cfg) {
  embed::Vector qv;
  try {
    qv = embedder.embed_one(std::string(question));
  } catch (const Error& e) {
    rethrow_with_context(e, "qa " + std::string(qa_id));
  }
  return answer_with_vector(qa_id, question, qv, index, generator, cfg);
}

inline nlohmann::ordered_json to_json(const AnswerRecord& r) {
  nlohmann::ordered_json j;
  j["qa_id"] = r.qa_id;
  j["question"] = r.question;
  j["answer"] = r.answer;
  auto retrieved = nlohmann::ordered_json::array();
  for (const auto& [ref, score] : r.retrieved) {
    nlohmann::ordered_json h;
    h["doc_id"] = ref.doc_id;
    h["seq"] = ref.seq;
    h["score"] = score;
    retrieved.push_back(std::move(h));
  }
  j["retrieved"] = std::move(retrieved);
  j["context_chunks"] = r.context_chunks;
  j["prompt_chars"] = r.prompt_chars;
  j["latency_ms"] = r.latency_ms;
  j["context_truncated"] = r.context_truncated;
  return j;
}

}  // namespace ragbench::rag
