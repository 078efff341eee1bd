#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bridgegraph/cluster.hpp"
#include "bridgegraph/interpret.hpp"
#include "bridgegraph/util.hpp"

using namespace bridgegraph;
using nlohmann::json;

namespace {

// In-process chat-completions stub. content_for(i) supplies the assistant
// text for the i-th request; with raw=true it supplies the whole HTTP body
// instead, for malformed-payload tests.
struct MockLlm {
  httplib::Server srv;
  std::thread th;
  int port = 0;
  std::atomic<int> hits{0};
  std::mutex mu;
  std::vector<std::string> request_bodies;
  std::function<std::string(int)> content_for;
  bool raw = false;

  MockLlm() {
    srv.Post("/v1/chat/completions",
             [this](const httplib::Request& req, httplib::Response& res) {
               const int i = hits.fetch_add(1);
               {
                 std::lock_guard<std::mutex> lk(mu);
                 request_bodies.push_back(req.body);
               }
               const std::string c = content_for ? content_for(i) : "";
               if (raw) {
                 res.set_content(c, "application/json");
                 return;
               }
               json reply;
               reply["choices"] = json::array(
                   {json{{"message",
                          json{{"role", "assistant"}, {"content", c}}}}});
               res.set_content(reply.dump(), "application/json");
             });
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }

  ~MockLlm() {
    srv.stop();
    if (th.joinable()) th.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }

  LlmConfig config(int retries = 2, double temp = 0.3) const {
    LlmConfig c;
    c.endpoint = endpoint();
    c.model = "mock-8b";
    c.temperature = temp;
    c.timeout_s = 5.0;
    c.max_retries = retries;
    return c;
  }
};

std::string five_sections(const std::string& pad = "") {
  return "1. Cluster Overview\nSeventeen bridges, mostly river crossings." +
         pad +
         "\n"
         "2. Strengths\nStrong hospital reach.\n"
         "3. Weaknesses\nThin transit coverage.\n"
         "4. Bridge Role Type\nHealthcare access type.\n"
         "5. City-Specific Context\nConcentrated in the western districts.\n";
}

std::string four_sections() {
  return "1. Cluster Overview\nBody.\n"
         "2. Strengths\nBody.\n"
         "4. Bridge Role Type\nBody.\n"
         "5. City-Specific Context\nBody.\n";
}

InterpretationRequest sample_request() {
  InterpretationRequest req;
  req.cluster_id = 13;
  req.bridge_count = 17;
  req.city_names = {"tama", "morioka"};
  req.city_pct = {64.7, 35.3};
  req.top_features = {
      {"hospital_access", 3.05}, {"green_space", 3.03}, {"transit_desert", -1.2}};
  return req;
}

// A two-cluster table with enough structure for make_request. Feature names
// f0..f9; z values chosen so the |z| ranking is unambiguous except one tie.
ClusterProfileTable sample_table() {
  ClusterProfileTable t;
  t.cities = {"tama", "morioka"};
  for (int i = 0; i < 10; ++i) t.feature_names.push_back("f" + std::to_string(i));
  ClusterProfileRow r0;
  r0.cluster_id = 0;
  r0.size = 21;
  r0.city_pct = {100.0, 0.0};
  r0.z = {0.5, -3.0, 2.9, -2.9, 1.0, 0.1, -0.2, 2.0, 0.3, -1.5};
  r0.mean.assign(10, 0.0);
  r0.stddev.assign(10, 1.0);
  ClusterProfileRow r1 = r0;
  r1.cluster_id = 1;
  r1.size = 9;
  r1.city_pct = {33.3, 66.7};
  t.rows = {r0, r1};
  return t;
}

InterpretationReport valid_report(int id, std::size_t chars) {
  InterpretationReport r;
  r.cluster_id = id;
  r.valid = true;
  r.char_count = chars;
  return r;
}

}  // namespace

TEST_CASE("prompt rendering is deterministic and formats fields") {
  const InterpretationRequest req = sample_request();
  const std::string p1 = render_prompt(req);
  const std::string p2 = render_prompt(req);
  CHECK(p1 == p2);
  CHECK(p1.find("hospital_access: 3.05") != std::string::npos);

  const std::string expected =
      "Please interpret the following cluster using a 5-section structure:\n"
      "\n"
      "Cluster ID: 13\n"
      "Bridge count: 17\n"
      "City composition: tama 64.7%\n"
      "                  morioka 35.3%\n"
      "\n"
      "Key features (z-scores):\n"
      "- hospital_access: 3.05\n"
      "- green_space: 3.03\n"
      "- transit_desert: -1.20\n"
      "\n"
      "Output in the following 5 sections:\n"
      "1. Cluster Overview\n"
      "2. Strengths\n"
      "3. Weaknesses\n"
      "4. Bridge Role Type\n"
      "5. City-Specific Context\n";
  CHECK(p1 == expected);
}

TEST_CASE("requests are built from profile rows ranked by absolute z") {
  const ClusterProfileTable t = sample_table();
  const InterpretationRequest req = make_request(t, 0);
  CHECK(req.cluster_id == 0);
  CHECK(req.bridge_count == 21);
  CHECK(req.city_names == std::vector<std::string>{"tama", "morioka"});
  CHECK(req.city_pct == std::vector<double>{100.0, 0.0});

  // |z| ranking: f1(3.0), f2(2.9) before f3(2.9) by name, f7(2.0), f9(1.5),
  // f4(1.0), f0(0.5), f8(0.3), f6(0.2); f5(0.1) falls off the top eight.
  REQUIRE(req.top_features.size() == 8);
  const std::vector<std::string> want = {"f1", "f2", "f3", "f7",
                                         "f9", "f4", "f0", "f8"};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(req.top_features[i].name == want[i]);
  CHECK(req.top_features[0].z == -3.0);
  CHECK(req.top_features[1].z == 2.9);

  ClusterProfileTable bad = t;
  bad.rows[0].city_pct = {50.0, 30.0};
  CHECK_THROWS_AS((void)make_request(bad, 0), InterpretError);

  ClusterProfileTable empty_row = t;
  empty_row.rows[0].size = 0;
  CHECK_THROWS_AS((void)make_request(empty_row, 0), InterpretError);

  CHECK_THROWS_AS((void)make_request(t, 2), InterpretError);
}

TEST_CASE("section splitting accepts documented header variants") {
  const SectionSplit plain = validate_sections(five_sections());
  REQUIRE(plain.ok);
  CHECK(plain.overview == "Seventeen bridges, mostly river crossings.");
  CHECK(plain.strengths == "Strong hospital reach.");
  CHECK(plain.weaknesses == "Thin transit coverage.");
  CHECK(plain.role == "Healthcare access type.");
  CHECK(plain.city_context == "Concentrated in the western districts.");

  const std::string decorated =
      "Here is the interpretation you asked for.\n"
      "## 1. CLUSTER OVERVIEW\nA.\n"
      "(2) Strengths:\nB.\n"
      "\xE3\x80\x90Weaknesses\xE3\x80\x91\nC.\n"
      "[4] [Bridge Role Type]\nD.\n"
      "5) City-Specific Context\xEF\xBC\x9A\nE.\n";
  const SectionSplit fancy = validate_sections(decorated);
  REQUIRE(fancy.ok);
  CHECK(fancy.overview == "A.");
  CHECK(fancy.strengths == "B.");
  CHECK(fancy.weaknesses == "C.");
  CHECK(fancy.role == "D.");
  CHECK(fancy.city_context == "E.");
}

TEST_CASE("section splitting reports the first missing or empty section") {
  const SectionSplit missing = validate_sections(
      "1. Cluster Overview\nA.\n2. Strengths\nB.\n"
      "4. Bridge Role Type\nD.\n5. City-Specific Context\nE.\n");
  CHECK_FALSE(missing.ok);
  CHECK(missing.failure == "Weaknesses");

  const SectionSplit empty_body = validate_sections(
      "1. Cluster Overview\nA.\n2. Strengths\n3. Weaknesses\nC.\n"
      "4. Bridge Role Type\nD.\n5. City-Specific Context\nE.\n");
  CHECK_FALSE(empty_body.ok);
  CHECK(empty_body.failure == "Strengths");

  // Reordered headers break the contract even though all five are present.
  const SectionSplit reordered = validate_sections(
      "1. Cluster Overview\nA.\n3. Weaknesses\nC.\n2. Strengths\nB.\n"
      "4. Bridge Role Type\nD.\n5. City-Specific Context\nE.\n");
  CHECK_FALSE(reordered.ok);
  CHECK(reordered.failure == "Weaknesses");

  // A header embedded in prose is not a header line.
  const SectionSplit prose = validate_sections(
      "1. Cluster Overview\nA.\nStrengths of the span include good access.\n");
  CHECK_FALSE(prose.ok);
  CHECK(prose.failure == "Strengths");

  const SectionSplit blank = validate_sections("");
  CHECK_FALSE(blank.ok);
  CHECK(blank.failure == "Cluster Overview");
}

TEST_CASE("report generation round-trips a five-section reply") {
  MockLlm mock;
  mock.content_for = [](int) { return five_sections(); };

  const std::string prompt = render_prompt(sample_request());
  const InterpretationReport rep = generate_report(mock.config(), 13, prompt);
  CHECK(rep.valid);
  CHECK(rep.cluster_id == 13);
  CHECK(rep.attempts == 1);
  CHECK(mock.hits.load() == 1);
  CHECK(rep.model == "mock-8b");
  CHECK(rep.temperature == 0.3);
  CHECK(rep.failure.empty());
  CHECK_FALSE(rep.generated_at.empty());

  const SectionSplit sp = validate_sections(five_sections());
  CHECK(rep.overview == sp.overview);
  CHECK(rep.city_context == sp.city_context);
  CHECK(rep.char_count == sp.overview.size() + sp.strengths.size() +
                              sp.weaknesses.size() + sp.role.size() +
                              sp.city_context.size());

  // Exactly one user message carrying the prompt verbatim.
  REQUIRE(mock.request_bodies.size() == 1);
  const json body = json::parse(mock.request_bodies[0]);
  CHECK(body.at("model") == "mock-8b");
  CHECK(body.at("temperature").get<double>() == doctest::Approx(0.3));
  REQUIRE(body.at("messages").size() == 1);
  CHECK(body.at("messages").at(0).at("role") == "user");
  CHECK(body.at("messages").at(0).at("content") == prompt);
}

TEST_CASE("validation failures are retried up to the configured cap") {
  {
    MockLlm mock;
    mock.content_for = [](int) { return four_sections(); };
    const InterpretationReport rep =
        generate_report(mock.config(1), 2, "prompt");
    CHECK_FALSE(rep.valid);
    CHECK(rep.attempts == 2);
    CHECK(mock.hits.load() == 2);
    CHECK(rep.failure.find("Weaknesses") != std::string::npos);
    CHECK(rep.char_count == 0);
  }
  {
    // max_retries = 0: exactly one request, no second chance.
    MockLlm mock;
    mock.content_for = [](int) { return four_sections(); };
    const InterpretationReport rep =
        generate_report(mock.config(0), 2, "prompt");
    CHECK_FALSE(rep.valid);
    CHECK(rep.attempts == 1);
    CHECK(mock.hits.load() == 1);
  }
}

TEST_CASE("a failing reply followed by a good one succeeds on retry") {
  MockLlm mock;
  mock.content_for = [](int i) {
    return i == 0 ? four_sections() : five_sections();
  };
  const InterpretationReport rep = generate_report(mock.config(2), 5, "prompt");
  CHECK(rep.valid);
  CHECK(rep.attempts == 2);
  CHECK(mock.hits.load() == 2);
}

TEST_CASE("transport failures produce an invalid report, not an exception") {
  std::string dead_endpoint;
  {
    MockLlm mock;
    dead_endpoint = mock.endpoint();
  }  // server gone; the port now refuses connections

  LlmConfig cfg;
  cfg.endpoint = dead_endpoint;
  cfg.model = "mock-8b";
  cfg.timeout_s = 2.0;
  cfg.max_retries = 2;
  const InterpretationReport rep = generate_report(cfg, 0, "prompt");
  CHECK_FALSE(rep.valid);
  CHECK(rep.attempts == 3);
  CHECK(rep.failure.find("transport") != std::string::npos);
}

TEST_CASE("malformed completion payloads are retried") {
  {
    MockLlm mock;
    mock.raw = true;
    mock.content_for = [](int) { return "this is not json"; };
    const InterpretationReport rep =
        generate_report(mock.config(1), 0, "prompt");
    CHECK_FALSE(rep.valid);
    CHECK(mock.hits.load() == 2);
    CHECK(rep.failure.find("payload") != std::string::npos);
  }
  {
    MockLlm mock;
    mock.raw = true;
    mock.content_for = [](int) { return "{}"; };  // JSON, but no choices
    const InterpretationReport rep =
        generate_report(mock.config(0), 0, "prompt");
    CHECK_FALSE(rep.valid);
    CHECK(mock.hits.load() == 1);
    CHECK(rep.failure.find("payload") != std::string::npos);
  }
}

TEST_CASE("config invariants are enforced before any request") {
  LlmConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.model = "m";
  cfg.temperature = 2.5;
  CHECK_THROWS_AS((void)generate_report(cfg, 0, "p"), InterpretError);
  cfg.temperature = -0.1;
  CHECK_THROWS_AS((void)generate_report(cfg, 0, "p"), InterpretError);
  cfg.temperature = 0.3;
  cfg.max_retries = -1;
  CHECK_THROWS_AS((void)generate_report(cfg, 0, "p"), InterpretError);
}

TEST_CASE("quality metrics match hand-computed ratios") {
  {
    std::vector<InterpretationReport> reports = {valid_report(0, 101),
                                                 valid_report(1, 672)};
    InterpretationReport bad;
    bad.cluster_id = 2;
    reports.push_back(bad);

    const QualityMetrics m = quality_metrics(reports);
    CHECK(m.completeness_rate == doctest::Approx(2.0 / 3.0));
    CHECK(m.length_variance_ratio == doctest::Approx(672.0 / 101.0));
    CHECK(m.length_variance_ratio == doctest::Approx(6.65).epsilon(0.001));
    CHECK(m.mean_length == doctest::Approx(386.5));
  }
  {
    const std::vector<InterpretationReport> reports = {valid_report(0, 100),
                                                       valid_report(1, 400)};
    const QualityMetrics m = quality_metrics(reports);
    CHECK(m.completeness_rate == 1.0);
    CHECK(m.length_variance_ratio == doctest::Approx(4.0));
    CHECK(m.mean_length == doctest::Approx(250.0));
  }
  {
    const std::vector<InterpretationReport> reports = {valid_report(0, 300),
                                                       valid_report(1, 300)};
    CHECK(quality_metrics(reports).length_variance_ratio == 1.0);
  }
  {
    std::vector<InterpretationReport> none(3);
    CHECK_THROWS_AS((void)quality_metrics(none), InterpretError);
    CHECK_THROWS_AS((void)quality_metrics({}), InterpretError);
  }
}

TEST_CASE("a corpus of nineteen valid replies scores full completeness") {
  MockLlm mock;
  mock.content_for = [](int i) {
    return five_sections(std::string(std::size_t(i) * 7, '*'));
  };
  std::vector<InterpretationReport> reports;
  for (int id = 0; id < 19; ++id)
    reports.push_back(generate_report(mock.config(0), id, "prompt"));
  CHECK(mock.hits.load() == 19);

  const QualityMetrics m = quality_metrics(reports);
  CHECK(m.completeness_rate == 1.0);
  CHECK(m.length_variance_ratio > 1.0);
  for (const InterpretationReport& r : reports) CHECK(r.valid);
}

TEST_CASE("interpret_clusters walks the profile table in order") {
  MockLlm mock;
  mock.content_for = [](int) { return five_sections(); };
  const ClusterProfileTable t = sample_table();
  const std::vector<InterpretationReport> reports =
      interpret_clusters(mock.config(), t);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].cluster_id == 0);
  CHECK(reports[1].cluster_id == 1);
  CHECK(reports[0].valid);
  CHECK(reports[1].valid);
  CHECK(mock.hits.load() == 2);

  REQUIRE(mock.request_bodies.size() == 2);
  const std::string p0 =
      json::parse(mock.request_bodies[0]).at("messages").at(0).at("content");
  const std::string p1 =
      json::parse(mock.request_bodies[1]).at("messages").at(0).at("content");
  CHECK(p0.find("Cluster ID: 0") != std::string::npos);
  CHECK(p1.find("Cluster ID: 1") != std::string::npos);
  CHECK(p1.find("morioka 66.7%") != std::string::npos);
}

TEST_CASE("report files and the metrics table are written deterministically") {
  const auto dir = std::filesystem::temp_directory_path() / "bg_interpret_io";
  std::filesystem::create_directories(dir);

  InterpretationReport rep;
  rep.cluster_id = 7;
  rep.valid = true;
  rep.overview = "O.";
  rep.strengths = "S.";
  rep.weaknesses = "W.";
  rep.role = "R.";
  rep.city_context = "C.";
  rep.char_count = 10;
  rep.generated_at = "2026-08-15T00:00:00Z";
  rep.model = "mock-8b";
  rep.temperature = 0.3;
  rep.attempts = 1;

  const std::string md_path = (dir / "cluster_7.md").string();
  write_report_md(rep, md_path);
  const auto md = read_file(md_path);
  REQUIRE(md.has_value());
  CHECK(md->find("# Cluster 7\n") != std::string::npos);
  CHECK(md->find("- status: valid\n") != std::string::npos);
  CHECK(md->find("## 1. Cluster Overview\n\nO.\n") != std::string::npos);
  CHECK(md->find("## 5. City-Specific Context\n\nC.\n") != std::string::npos);

  InterpretationReport bad;
  bad.cluster_id = 8;
  bad.failure = "section validation: Weaknesses";
  bad.model = "mock-8b";
  bad.temperature = 0.3;
  bad.attempts = 3;
  const std::string bad_path = (dir / "cluster_8.md").string();
  write_report_md(bad, bad_path);
  const auto bad_md = read_file(bad_path);
  REQUIRE(bad_md.has_value());
  CHECK(bad_md->find("- status: invalid (section validation: Weaknesses)\n") !=
        std::string::npos);
  CHECK(bad_md->find("## 1.") == std::string::npos);

  QualityMetrics m1;
  m1.completeness_rate = 1.0;
  m1.length_variance_ratio = 672.0 / 101.0;
  m1.mean_length = 386.5;
  QualityMetrics m2;
  m2.completeness_rate = 0.5;
  m2.length_variance_ratio = 4.0;
  m2.mean_length = 250.0;
  const std::string csv_path = (dir / "quality_metrics.csv").string();
  write_quality_metrics_csv({{0.1, m1}, {0.3, m2}}, csv_path);
  const auto csv = read_file(csv_path);
  REQUIRE(csv.has_value());
  CHECK(*csv ==
        "temperature,completeness_rate,length_variance_ratio,mean_length\n"
        "0.10,1.0000,6.6535,386.50\n"
        "0.30,0.5000,4.0000,250.00\n");

  CHECK(temperature_sweep() == std::vector<double>{0.1, 0.3, 0.5, 0.7});
}
