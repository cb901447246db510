#include <gtest/gtest.h>

#include "ragbench/chunker.hpp"
#include "ragbench/rag.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace ragbench::rag {
namespace {

using vectorstore::ChunkRef;

RetrievedChunk rc(std::string doc, std::string text) { return {{std::move(doc), 0}, 1.0, std::move(text)}; }

TEST(AssemblePrompt, BudgetEqualToFirstChunk) {
  RagConfig cfg;
  cfg.max_context_chars = 5;
  const auto p = assemble_prompt("q", {rc("a", "aaaaa"), rc("b", "bb")}, cfg);
  ASSERT_EQ(p.used.size(), 1u);
  EXPECT_EQ(p.used[0].doc_id, "a");
  EXPECT_TRUE(p.truncated);
  EXPECT_EQ(p.context_chars, 5u);
}

TEST(AssemblePrompt, ZeroHits) {
  const auto p = assemble_prompt("q", {}, RagConfig{});
  EXPECT_NE(p.prompt.find("(no relevant context found)"), std::string::npos);
  EXPECT_FALSE(p.truncated);
  EXPECT_TRUE(p.used.empty());
}

TEST(AssemblePrompt, Substitution) {
  RagConfig cfg;
  cfg.prompt_template = "C:{context} Q:{question}";
  EXPECT_EQ(assemble_prompt("q", {rc("a", "x")}, cfg).prompt, "C:x Q:q");
  cfg.prompt_template = "Q:{question} C:{context}";
  EXPECT_EQ(assemble_prompt("q", {rc("a", "x")}, cfg).prompt, "Q:q C:x");
}

TEST(AssemblePrompt, DefaultTemplateAndSeparator) {
  const auto p = assemble_prompt("Why?", {rc("a", "one"), rc("b", "two")}, RagConfig{});
  EXPECT_EQ(p.prompt, "Context:\none\n---\ntwo\n\nQuestion: Why?\nAnswer:");
  EXPECT_EQ(p.context_chars, 3u + 5u + 3u);
  EXPECT_FALSE(p.truncated);
}

TEST(AssemblePrompt, SeparatorCountsAgainstBudget) {
  RagConfig cfg;
  cfg.max_context_chars = 10;  // "one" + sep(5) + "two" = 11
  const auto p = assemble_prompt("q", {rc("a", "one"), rc("b", "two")}, cfg);
  EXPECT_EQ(p.used.size(), 1u);
  EXPECT_TRUE(p.truncated);
}

TEST(AssemblePrompt, OverflowStopsInclusion) {
  RagConfig cfg;
  cfg.max_context_chars = 10;
  const auto p = assemble_prompt("q", {rc("a", "aaaa"), rc("b", "bbbbbbbbbbbbbbbbbb"), rc("c", "c")}, cfg);
  ASSERT_EQ(p.used.size(), 1u);
  EXPECT_TRUE(p.truncated);
}

TEST(AssemblePrompt, PlaceholdersInsideChunksAreLiteral) {
  RagConfig cfg;
  cfg.prompt_template = "{context}|{question}";
  EXPECT_EQ(assemble_prompt("{context}", {rc("a", "{question}")}, cfg).prompt, "{question}|{context}");
}

TEST(AssemblePrompt, TemplateErrors) {
  RagConfig cfg;
  for (const char* tpl : {"no placeholders", "{context} only", "{question} only", "{context}{context}{question}"}) {
    cfg.prompt_template = tpl;
    try {
      assemble_prompt("q", {}, cfg);
      ADD_FAILURE() << tpl;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kTemplateError);
    }
  }
}

TEST(AssemblePrompt, BudgetNeverExceededRandom) {
  std::mt19937_64 rng(5);
  testing::WordGen words(6);
  for (int trial = 0; trial < 300; ++trial) {
    RagConfig cfg;
    cfg.max_context_chars = 1 + rng() % 400;
    std::vector<RetrievedChunk> chunks;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) chunks.push_back(rc("d" + std::to_string(i), words.paragraph(rng() % 150)));
    const auto p = assemble_prompt("q", chunks, cfg);
    ASSERT_LE(p.context_chars, cfg.max_context_chars);
    ASSERT_EQ(p.truncated, p.used.size() < chunks.size());
    for (std::size_t i = 0; i < p.used.size(); ++i) ASSERT_EQ(p.used[i], chunks[i].ref);
  }
}

struct Fixture {
  embed::OfflineEmbedder embedder{256};
  llm::MockGenerator generator;
  std::vector<chunker::Chunk> chunks;
  std::optional<vectorstore::Index> index;

  void build(const std::vector<corpus::Document>& docs, std::size_t size) {
    chunks = chunker::chunk_corpus(docs, {size, 0});
    std::vector<vectorstore::IndexEntry> entries;
    for (const auto& c : chunks) entries.push_back({{c.doc_id, c.seq}, embedder.embed_one(c.text), c.text});
    index = vectorstore::Index::build(std::move(entries));
  }
};

TEST(AnswerQuestion, PlantedMarkerIsRetrievedFirst) {
  testing::WordGen words(42);
  std::vector<corpus::Document> docs;
  for (int i = 0; i < 40; ++i) docs.push_back(testing::make_doc("doc" + std::to_string(i), words.paragraph(900)));
  docs[17].body = "Apply the ZEBRA-7 protocol first.";

  Fixture fx;
  fx.build(docs, 250);
  std::size_t planted = 0;
  for (const auto& c : fx.chunks) planted += c.text.find("ZEBRA-7") != std::string::npos;
  ASSERT_EQ(planted, 1u) << "marker must land in exactly one chunk";

  // Oracle check of the retrieval claim before asserting on the pipeline.
  std::vector<testing::OracleEntry> oracle;
  for (const auto& e : fx.index->entries()) {
    oracle.push_back({e.ref.doc_id, e.ref.seq, {e.vector.values().begin(), e.vector.values().end()}});
  }
  const auto qv = embed::embed_offline("ZEBRA-7?", 256);
  const auto top = testing::oracle_topk(oracle, {qv.values().begin(), qv.values().end()}, 1);
  ASSERT_EQ(top[0].doc_id, "doc17");

  const auto rec = answer_question("z1", "ZEBRA-7?", *fx.index, fx.embedder, fx.generator, RagConfig{});
  ASSERT_FALSE(rec.retrieved.empty());
  EXPECT_EQ(rec.retrieved[0].first.doc_id, "doc17");
  bool rank0_has_marker = false;
  for (const auto& e : fx.index->entries()) {
    if (e.ref == rec.retrieved[0].first) rank0_has_marker = e.text.find("ZEBRA-7") != std::string::npos;
  }
  EXPECT_TRUE(rank0_has_marker);
  EXPECT_NE(rec.answer.find("ZEBRA-7"), std::string::npos);
}

TEST(AnswerQuestion, RetrievedLengthAndOrder) {
  testing::WordGen words(7);
  std::vector<corpus::Document> docs;
  for (int i = 0; i < 3; ++i) docs.push_back(testing::make_doc("d" + std::to_string(i), words.paragraph(100)));
  Fixture fx;
  fx.build(docs, 1000);
  ASSERT_EQ(fx.index->size(), 3u);
  for (std::size_t k : {1, 2, 3, 4, 10}) {
    RagConfig cfg;
    cfg.top_k = k;
    const auto rec = answer_question("q", "what?", *fx.index, fx.embedder, fx.generator, cfg);
    EXPECT_EQ(rec.retrieved.size(), std::min<std::size_t>(k, 3));
    for (std::size_t i = 1; i < rec.retrieved.size(); ++i) {
      EXPECT_GE(rec.retrieved[i - 1].second, rec.retrieved[i].second);
    }
    std::set<ChunkRef> known;
    for (const auto& e : fx.index->entries()) known.insert(e.ref);
    for (const auto& [ref, _] : rec.retrieved) EXPECT_TRUE(known.count(ref));
    EXPECT_LE(rec.context_chunks, rec.retrieved.size());
  }
}

TEST(AnswerQuestion, DeterministicExceptLatency) {
  const auto set = testing::planted_short(10, 3);
  Fixture fx;
  fx.build(set.good, 250);
  for (const auto& qa : set.qa) {
    const auto a = answer_question(qa.id, qa.question, *fx.index, fx.embedder, fx.generator, RagConfig{});
    const auto b = answer_question(qa.id, qa.question, *fx.index, fx.embedder, fx.generator, RagConfig{});
    EXPECT_TRUE(a.same_outcome(b));
    EXPECT_EQ(to_json(a)["qa_id"], qa.id);
  }
}

TEST(AnswerQuestion, EmbedderDimMismatchFails) {
  const auto set = testing::planted_short(3, 4);
  Fixture fx;
  fx.build(set.good, 250);
  embed::OfflineEmbedder other(128);
  try {
    answer_question("q7", "hello", *fx.index, other, fx.generator, RagConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
    EXPECT_NE(std::string(e.what()).find("q7"), std::string::npos);
  }
}

TEST(AnswerQuestion, SystemPromptAndContextBudget) {
  testing::WordGen words(8);
  std::vector<corpus::Document> docs;
  for (int i = 0; i < 8; ++i) docs.push_back(testing::make_doc("d" + std::to_string(i), words.paragraph(400)));
  Fixture fx;
  fx.build(docs, 500);
  RagConfig cfg;
  cfg.max_context_chars = 600;
  const auto rec = answer_question("q", "what?", *fx.index, fx.embedder, fx.generator, cfg);
  EXPECT_EQ(rec.context_chunks, 1u);
  EXPECT_TRUE(rec.context_truncated);
  EXPECT_TRUE(rec.answer.starts_with("MOCK-ANSWER: Context:\n"));
}

}  // namespace
}  // namespace ragbench::rag
