#include <gtest/gtest.h>

#include <regex>

#include "ragbench/sweep.hpp"
#include "support/fake_server.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace ragbench::sweep {
namespace {

struct Offline {
  embed::OfflineEmbedder embedder;
  llm::MockGenerator generator;
  metrics::LexicalJudge judge;
  Components components() { return {embedder, generator, judge}; }
};

SweepConfig top1() {
  SweepConfig cfg;
  cfg.rag.top_k = 1;
  return cfg;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

TEST(SweepConfig, Validation) {
  auto expect_invalid = [](SweepConfig cfg) {
    try {
      cfg.validate();
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  };
  SweepConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.chunk_sizes = {};
  expect_invalid(cfg);
  cfg.chunk_sizes = {100, 50};
  expect_invalid(cfg);
  cfg.chunk_sizes = {100, 100};
  expect_invalid(cfg);
  cfg.chunk_sizes = {100, 200};
  cfg.overlap = 100;
  expect_invalid(cfg);
}

TEST(RunSweep, SixRowsAscending) {
  const auto set = testing::planted_short(8, 1);
  Offline o;
  const auto rep = run_sweep(set.good, set.qa, SweepConfig{}, o.components());
  ASSERT_EQ(rep.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rep.rows[i].chunk_size, kDefaultChunkSizes[i]);
    EXPECT_EQ(rep.rows[i].n, 8u);
    EXPECT_GE(rep.rows[i].mean_correctness, 0.0);
    EXPECT_LE(rep.rows[i].mean_correctness, 1.0);
    EXPECT_EQ(rep.answers.at(rep.rows[i].chunk_size).size(), 8u);
  }
}

TEST(RunSweep, ByteIdenticalAcrossRuns) {
  const auto set = testing::mixed_corpus(30, 10, 5);
  Offline a, b;
  const auto r1 = run_sweep(set.good, set.qa, SweepConfig{}, a.components());
  const auto r2 = run_sweep(set.good, set.qa, SweepConfig{}, b.components());
  EXPECT_EQ(render_csv(r1), render_csv(r2));
  EXPECT_EQ(render_svg(r1), render_svg(r2));
  EXPECT_EQ(to_json(r1).dump(), to_json(r2).dump());
}

TEST(RunSweep, ReportConservation) {
  const auto set = testing::mixed_corpus(20, 12, 6);
  Offline o;
  const auto rep = run_sweep(set.good, set.qa, SweepConfig{}, o.components());
  for (const auto& row : rep.rows) {
    const auto& results = rep.per_question.at(row.chunk_size);
    ASSERT_EQ(results.size(), row.n);
    double sum = 0, lo = 1, hi = 0;
    for (const auto& r : results) {
      sum += r.answer_correctness;
      lo = std::min(lo, r.answer_correctness);
      hi = std::max(hi, r.answer_correctness);
    }
    EXPECT_NEAR(row.mean_correctness, sum / double(results.size()), 1e-12);
    EXPECT_EQ(row.min, lo);
    EXPECT_EQ(row.max, hi);
  }
}

TEST(RunSweep, SizeIsolation) {
  const auto set = testing::mixed_corpus(20, 8, 7);
  Offline o;
  SweepConfig both;
  both.chunk_sizes = {500, 2000};
  SweepConfig one;
  one.chunk_sizes = {2000};
  const auto r_both = run_sweep(set.good, set.qa, both, o.components());
  const auto r_one = run_sweep(set.good, set.qa, one, o.components());
  EXPECT_EQ(r_both.per_question.at(2000), r_one.per_question.at(2000));
  EXPECT_EQ(r_both.rows[1], r_one.rows[0]);
}

TEST(RunSweep, PlantedGoodCorpusBeatsUnrelated) {
  const auto set = testing::planted_short(30, 11);
  Offline o;
  const auto good = run_sweep(set.good, set.qa, top1(), o.components());
  const auto bad = run_sweep(set.unrelated, set.qa, top1(), o.components());
  for (std::size_t i = 0; i < good.rows.size(); ++i) {
    EXPECT_GE(good.rows[i].mean_correctness - bad.rows[i].mean_correctness, 0.3) << good.rows[i].chunk_size;
  }
}

TEST(RunSweep, WholeSpanSizesBeatStraddlingSize) {
  const auto set = testing::planted_spans(30, 12);
  // Every span straddles offset 250.
  for (std::size_t i = 0; i < set.qa.size(); ++i) {
    ASSERT_EQ(set.good[i].body.find(set.qa[i].ground_truth), testing::kSpanOffset);
    ASSERT_EQ(set.qa[i].ground_truth.size(), testing::kSpanLength);
  }
  for (std::size_t k : {1, 4}) {
    SweepConfig cfg;
    cfg.rag.top_k = k;
    Offline o;
    const auto rep = run_sweep(set.good, set.qa, cfg, o.components());
    ASSERT_EQ(rep.rows[0].chunk_size, 250u);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      EXPECT_GT(rep.rows[i].mean_correctness, rep.rows[0].mean_correctness)
          << "k=" << k << " size " << rep.rows[i].chunk_size;
    }
  }
}

TEST(RunSweep, EmptyInputs) {
  Offline o;
  const auto set = testing::planted_short(2, 1);
  EXPECT_THROW(run_sweep({}, set.qa, SweepConfig{}, o.components()), Error);
  EXPECT_THROW(run_sweep(set.good, {}, SweepConfig{}, o.components()), Error);
}

/// Generator that fails every request whose prompt is longer than a limit,
/// so large chunk sizes fail while small ones succeed.
class PickyGenerator final : public llm::Generator {
 public:
  llm::ChatResponse generate(const llm::ChatRequest& req) override {
    if (utf8::length(req.last_user_message()) > 900) throw Error(ErrorCode::kNetworkError, "too long");
    return llm::mock_generate(req);
  }
  std::string endpoint() const override { return "picky"; }
};

TEST(RunSweep, KeepGoingRecordsFailedRows) {
  const auto set = testing::mixed_corpus(16, 6, 8);
  embed::OfflineEmbedder emb;
  PickyGenerator gen;
  metrics::LexicalJudge judge;
  SweepConfig cfg = top1();
  cfg.chunk_sizes = {250, 2000};

  try {
    run_sweep(set.good, set.qa, cfg, {emb, gen, judge});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNetworkError);
    EXPECT_NE(std::string(e.what()).find("chunk size 2000"), std::string::npos);
  }

  cfg.keep_going = true;
  const auto rep = run_sweep(set.good, set.qa, cfg, {emb, gen, judge});
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_FALSE(rep.rows[0].failed);
  EXPECT_TRUE(rep.rows[1].failed);
  EXPECT_FALSE(rep.rows[1].error.empty());
  EXPECT_EQ(rep.argmax_sizes, std::vector<std::size_t>{250});
  const auto csv = render_csv(rep);
  EXPECT_NE(csv.find("\n2000,,0\n"), std::string::npos) << csv;
  EXPECT_EQ(count_of(render_svg(rep), "class=\"bar"), 2u);
}

SweepReport hand_built(std::vector<std::pair<std::size_t, double>> rows) {
  SweepReport rep;
  for (auto [size, mean] : rows) {
    Row r;
    r.chunk_size = size;
    r.mean_correctness = mean;
    r.n = 30;
    rep.rows.push_back(r);
  }
  rep.argmax_sizes = compute_argmax(rep.rows);
  return rep;
}

TEST(Argmax, HandBuilt) {
  EXPECT_EQ(hand_built({{250, 0.5}, {500, 0.4}, {4000, 0.5}, {8000, 0.1}}).argmax_sizes,
            (std::vector<std::size_t>{250, 4000}));
  EXPECT_EQ(hand_built({{250, 0.1}, {500, 0.9}}).argmax_sizes, std::vector<std::size_t>{500});
  EXPECT_EQ(hand_built({{250, 0.0}}).argmax_sizes, std::vector<std::size_t>{250});
  auto rep = hand_built({{250, 0.9}, {500, 0.2}});
  rep.rows[0].failed = true;
  EXPECT_EQ(compute_argmax(rep.rows), std::vector<std::size_t>{500});
  EXPECT_TRUE(compute_argmax({}).empty());
}

TEST(RenderCsv, Format) {
  const auto rep = hand_built({{250, 0.5}, {500, 1.0 / 3.0}, {1000, 0.0}, {2000, 1.0}, {4000, 0.25}, {8000, 0.1234567}});
  const auto csv = render_csv(rep);
  EXPECT_EQ(csv,
            "chunk_size,mean_correctness,n\n"
            "250,0.500000,30\n"
            "500,0.333333,30\n"
            "1000,0.000000,30\n"
            "2000,1.000000,30\n"
            "4000,0.250000,30\n"
            "8000,0.123457,30\n");
  EXPECT_EQ(count_of(csv, "\n"), 7u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

double attr(const std::string& tag, const std::string& name) {
  std::smatch m;
  const std::regex re(" " + name + "=\"([-0-9.]+)\"");
  if (!std::regex_search(tag, m, re)) return -1;
  return std::stod(m[1]);
}

std::vector<std::string> bars(const std::string& svg) {
  std::vector<std::string> out;
  const std::regex re("<rect class=\"bar[^>]*>");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back(it->str());
  }
  return out;
}

TEST(RenderSvg, BarsProportionalAndGridlines) {
  const auto rep = hand_built({{250, 0.0}, {500, 0.5}, {1000, 1.0}});
  const auto svg = render_svg(rep);
  const auto b = bars(svg);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(attr(b[0], "height"), 0.0);
  EXPECT_NEAR(attr(b[1], "height"), svg::kPlotH / 2, 0.01);
  EXPECT_NEAR(attr(b[2], "height"), svg::kPlotH, 0.01);
  EXPECT_NEAR(attr(b[2], "y"), svg::kTop, 0.01);
  EXPECT_LT(attr(b[0], "x"), attr(b[1], "x"));
  EXPECT_LT(attr(b[1], "x"), attr(b[2], "x"));
  EXPECT_EQ(count_of(svg, "class=\"grid\""), 5u);
  for (const char* label : {">0.00<", ">0.25<", ">0.50<", ">0.75<", ">1.00<"}) {
    EXPECT_NE(svg.find(label), std::string::npos) << label;
  }
  EXPECT_EQ(svg, render_svg(hand_built({{250, 0.0}, {500, 0.5}, {1000, 1.0}})));
}

TEST(RenderSvg, AllZero) {
  for (const auto& bar : bars(render_svg(hand_built({{250, 0}, {500, 0}, {1000, 0}})))) {
    EXPECT_EQ(attr(bar, "height"), 0.0);
  }
}

TEST(Outputs, FilesAndReportJsonRoundTrip) {
  const auto set = testing::planted_short(5, 3);
  Offline o;
  SweepConfig cfg;
  cfg.chunk_sizes = {250, 1000};
  const auto rep = run_sweep(set.good, set.qa, cfg, o.components());
  testing::TempDir dir;
  write_outputs(rep, dir.path());
  EXPECT_EQ(testing::read_file(dir / "report.csv"), render_csv(rep));
  EXPECT_EQ(testing::read_file(dir / "report.svg"), render_svg(rep));
  for (const char* size : {"250", "1000"}) {
    const auto results = testing::read_file(dir.path() / size / "results.jsonl");
    EXPECT_EQ(count_of(results, "\n"), 5u);
    const auto answers = testing::read_file(dir.path() / size / "answers.jsonl");
    EXPECT_EQ(count_of(answers, "\n"), 5u);
    const auto summary = nlohmann::json::parse(testing::read_file(dir.path() / size / "summary.json"));
    EXPECT_EQ(summary["n"], 5);
  }
  const auto back = report_from_json(nlohmann::json::parse(testing::read_file(dir / "report.json")));
  EXPECT_EQ(back.rows, rep.rows);
  EXPECT_EQ(back.per_question, rep.per_question);
  EXPECT_EQ(back.argmax_sizes, rep.argmax_sizes);
  EXPECT_EQ(render_csv(back), render_csv(rep));
}

TEST(Outputs, UnwritableDirectory) {
  testing::TempDir dir;
  testing::write_text(dir / "file", "x");
  try {
    write_outputs(hand_built({{250, 0.5}}), dir.path() / "file" / "sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(RunSweep, QuestionEmbeddingsComputedOnce) {
  // A remote embedder backed by the fake server counts how often each
  // question text is sent.
  testing::FakeServer srv;
  std::atomic<int> question_hits{0};
  const auto set = testing::planted_short(4, 9);
  srv.handle("/v1/embeddings", [&](const std::string& body) {
    const auto j = nlohmann::json::parse(body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < j["input"].size(); ++i) {
      const auto text = j["input"][i].get<std::string>();
      if (text == set.qa[0].question) ++question_hits;
      const auto v = embed::embed_offline(text, 16);
      data.push_back({{"index", i}, {"embedding", std::vector<double>(v.values().begin(), v.values().end())}});
    }
    return testing::CannedReply{200, nlohmann::json{{"data", data}}.dump()};
  });
  embed::EmbedderConfig ecfg;
  ecfg.kind = embed::EmbedderKind::kRemote;
  ecfg.dim = 16;
  ecfg.endpoint_url = srv.url();
  ecfg.model = "e";
  embed::RemoteEmbedder emb(ecfg);
  llm::MockGenerator gen;
  metrics::LexicalJudge judge;
  const auto rep = run_sweep(set.good, set.qa, SweepConfig{}, {emb, gen, judge});
  EXPECT_EQ(rep.rows.size(), 6u);
  EXPECT_EQ(question_hits.load(), 1);
}

}  // namespace
}  // namespace ragbench::sweep
