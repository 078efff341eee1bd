#include <httplib.h>

#include "bridgegraph/interpret.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <limits>
#include <numeric>
#include <sstream>

#include "bridgegraph/http_util.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

using nlohmann::json;

constexpr std::array<const char*, 5> kSectionTitles = {
    "Cluster Overview", "Strengths", "Weaknesses", "Bridge Role Type",
    "City-Specific Context"};

constexpr const char* kOpenCjk = "\xE3\x80\x90";   // U+3010
constexpr const char* kCloseCjk = "\xE3\x80\x91";  // U+3011
constexpr const char* kColonFw = "\xEF\xBC\x9A";   // U+FF1A

void skip_spaces(const std::string& s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

bool eat(const std::string& s, std::size_t& i, const char* token) {
  const std::size_t len = std::char_traits<char>::length(token);
  if (s.compare(i, len, token) != 0) return false;
  i += len;
  return true;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; }

bool eat_ci(const std::string& s, std::size_t& i, const char* token) {
  const std::size_t len = std::char_traits<char>::length(token);
  if (i + len > s.size()) return false;
  for (std::size_t k = 0; k < len; ++k)
    if (lower(s[i + k]) != lower(token[k])) return false;
  i += len;
  return true;
}

// Strips one numbering token ("1.", "1)", "(1)", "[1]") if present. Returns
// false only when the text starts a numbering form but never completes it,
// which disqualifies the line as a header.
bool eat_numbering(const std::string& s, std::size_t& i) {
  std::size_t j = i;
  char close = 0;
  if (j < s.size() && (s[j] == '(' || s[j] == '[')) {
    close = s[j] == '(' ? ')' : ']';
    ++j;
  }
  std::size_t digits = 0;
  while (j < s.size() && s[j] >= '0' && s[j] <= '9') {
    ++j;
    ++digits;
  }
  if (digits == 0) return close == 0;  // bare '[' may still open a title
  if (close != 0) {
    if (j >= s.size() || s[j] != close) return close == ']';  // "[Strengths" case
    ++j;
  } else {
    if (j >= s.size() || (s[j] != '.' && s[j] != ')')) return false;
    ++j;
  }
  i = j;
  skip_spaces(s, i);
  return true;
}

// Returns the section index (0-4) when the line is a header, -1 otherwise.
// Grammar (documented in the public header): '#'*, numbering token, opening
// bracket, title, closing bracket, colon; every piece but the title optional.
int parse_header(const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t i = 0;
  while (i < s.size() && s[i] == '#') ++i;
  skip_spaces(s, i);
  if (!eat_numbering(s, i)) return -1;

  bool open_sq = false, open_cjk = false;
  if (i < s.size() && s[i] == '[') {
    open_sq = true;
    ++i;
  } else if (eat(s, i, kOpenCjk)) {
    open_cjk = true;
  }
  skip_spaces(s, i);

  int section = -1;
  for (int t = 0; t < int(kSectionTitles.size()); ++t) {
    if (eat_ci(s, i, kSectionTitles[std::size_t(t)])) {
      section = t;
      break;
    }
  }
  if (section < 0) return -1;

  skip_spaces(s, i);
  if (open_sq) {
    if (i >= s.size() || s[i] != ']') return -1;
    ++i;
  } else if (open_cjk) {
    if (!eat(s, i, kCloseCjk)) return -1;
  }
  if (i < s.size() && s[i] == ':') {
    ++i;
  } else {
    eat(s, i, kColonFw);
  }
  skip_spaces(s, i);
  return i == s.size() ? section : -1;
}

}  // namespace

InterpretationRequest make_request(const ClusterProfileTable& table,
                                   std::size_t row) {
  if (row >= table.rows.size())
    throw InterpretError("profile row " + std::to_string(row) +
                         " out of range (table has " +
                         std::to_string(table.rows.size()) + ")");
  const ClusterProfileRow& r = table.rows[row];
  if (r.size <= 0)
    throw InterpretError("cluster " + std::to_string(r.cluster_id) +
                         " has no members; nothing to interpret");
  if (r.city_pct.size() != table.cities.size() ||
      r.z.size() != table.feature_names.size())
    throw InterpretError("profile row " + std::to_string(row) +
                         " is misaligned with the table axes");
  const double total =
      std::accumulate(r.city_pct.begin(), r.city_pct.end(), 0.0);
  if (std::fabs(total - 100.0) > 0.1)
    throw InterpretError("city percentages for cluster " +
                         std::to_string(r.cluster_id) + " sum to " +
                         fmt_g17(total) + ", expected 100");

  InterpretationRequest req;
  req.cluster_id = r.cluster_id;
  req.bridge_count = r.size;
  req.city_names = table.cities;
  req.city_pct = r.city_pct;

  std::vector<std::size_t> order(table.feature_names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double za = std::fabs(r.z[a]), zb = std::fabs(r.z[b]);
    if (za != zb) return za > zb;
    return table.feature_names[a] < table.feature_names[b];
  });
  const std::size_t keep = std::min<std::size_t>(8, order.size());
  req.top_features.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k)
    req.top_features.push_back({table.feature_names[order[k]], r.z[order[k]]});
  return req;
}

std::string render_prompt(const InterpretationRequest& req) {
  std::ostringstream out;
  out << "Please interpret the following cluster using a 5-section "
         "structure:\n\n";
  out << "Cluster ID: " << req.cluster_id << "\n";
  out << "Bridge count: " << req.bridge_count << "\n";
  const std::string label = "City composition: ";
  for (std::size_t c = 0; c < req.city_names.size(); ++c) {
    if (c == 0) {
      out << label;
    } else {
      out << std::string(label.size(), ' ');
    }
    out << req.city_names[c] << " " << fmt_fixed(req.city_pct[c], 1) << "%\n";
  }
  out << "\nKey features (z-scores):\n";
  for (const FeatureZ& f : req.top_features)
    out << "- " << f.name << ": " << fmt_fixed(f.z, 2) << "\n";
  out << "\nOutput in the following 5 sections:\n";
  for (std::size_t t = 0; t < kSectionTitles.size(); ++t)
    out << (t + 1) << ". " << kSectionTitles[t] << "\n";
  return out.str();
}

SectionSplit validate_sections(const std::string& text) {
  struct Line {
    std::size_t begin = 0;  // offset of the line's first byte
    std::size_t next = 0;   // offset just past the trailing newline
  };
  std::vector<Line> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    const std::size_t next = (nl == std::string::npos) ? text.size() : nl + 1;
    lines.push_back({pos, next});
    pos = next;
  }

  SectionSplit sp;
  std::array<std::size_t, 5> at{};  // line index of each matched header
  int expected = 0;
  for (std::size_t l = 0; l < lines.size() && expected < 5; ++l) {
    const std::string line =
        text.substr(lines[l].begin, lines[l].next - lines[l].begin);
    if (parse_header(line) == expected) {
      at[std::size_t(expected)] = l;
      ++expected;
    }
  }
  if (expected < 5) {
    sp.failure = kSectionTitles[std::size_t(expected)];
    return sp;
  }

  std::array<std::string, 5> bodies;
  for (int s = 0; s < 5; ++s) {
    const std::size_t from = lines[at[std::size_t(s)]].next;
    const std::size_t to =
        (s < 4) ? lines[at[std::size_t(s) + 1]].begin : text.size();
    bodies[std::size_t(s)] = trim(text.substr(from, to - from));
    if (bodies[std::size_t(s)].empty()) {
      sp.failure = kSectionTitles[std::size_t(s)];
      return sp;
    }
  }
  sp.ok = true;
  sp.overview = std::move(bodies[0]);
  sp.strengths = std::move(bodies[1]);
  sp.weaknesses = std::move(bodies[2]);
  sp.role = std::move(bodies[3]);
  sp.city_context = std::move(bodies[4]);
  return sp;
}

InterpretationReport generate_report(const LlmConfig& cfg, int cluster_id,
                                     const std::string& prompt) {
  if (cfg.temperature < 0.0 || cfg.temperature > 2.0)
    throw InterpretError("temperature " + fmt_g17(cfg.temperature) +
                         " outside [0, 2]");
  if (cfg.max_retries < 0) throw InterpretError("max_retries must be >= 0");
  const ParsedUrl url = parse_url(cfg.endpoint);

  InterpretationReport rep;
  rep.cluster_id = cluster_id;
  rep.model = cfg.model;
  rep.temperature = cfg.temperature;

  const json payload = {
      {"model", cfg.model},
      {"temperature", cfg.temperature},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string body = payload.dump();

  const auto sec = static_cast<time_t>(cfg.timeout_s);
  const auto usec = static_cast<long>((cfg.timeout_s - double(sec)) * 1e6);

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    rep.attempts = attempt + 1;
    std::string content;
    std::string err;
    {
      httplib::Client client(url.origin());
      client.set_connection_timeout(sec, usec);
      client.set_read_timeout(sec, usec);
      auto res = client.Post(url.path, body, "application/json");
      if (!res) {
        err = "transport: " + httplib::to_string(res.error());
      } else if (res->status != 200) {
        err = "http status " + std::to_string(res->status);
      } else {
        try {
          const json j = json::parse(res->body);
          content =
              j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
          err = std::string("bad completion payload: ") + e.what();
        }
      }
    }
    if (err.empty()) {
      SectionSplit sp = validate_sections(content);
      if (sp.ok) {
        rep.valid = true;
        rep.overview = std::move(sp.overview);
        rep.strengths = std::move(sp.strengths);
        rep.weaknesses = std::move(sp.weaknesses);
        rep.role = std::move(sp.role);
        rep.city_context = std::move(sp.city_context);
        rep.char_count = rep.overview.size() + rep.strengths.size() +
                         rep.weaknesses.size() + rep.role.size() +
                         rep.city_context.size();
        rep.failure.clear();
        break;
      }
      err = "section validation: " + sp.failure;
    }
    rep.failure = err;
  }
  rep.generated_at = iso8601_utc_now();
  return rep;
}

std::vector<InterpretationReport> interpret_clusters(
    const LlmConfig& cfg, const ClusterProfileTable& table) {
  std::vector<InterpretationReport> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const InterpretationRequest req = make_request(table, i);
    out.push_back(generate_report(cfg, req.cluster_id, render_prompt(req)));
  }
  return out;
}

QualityMetrics quality_metrics(
    const std::vector<InterpretationReport>& reports) {
  if (reports.empty())
    throw InterpretError("no interpretation reports to score");
  std::size_t n_valid = 0;
  std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
  double sum = 0.0;
  for (const InterpretationReport& r : reports) {
    if (!r.valid) continue;
    ++n_valid;
    lo = std::min(lo, r.char_count);
    hi = std::max(hi, r.char_count);
    sum += double(r.char_count);
  }
  if (n_valid == 0)
    throw InterpretError("no valid interpretation reports in batch");
  if (lo == 0)
    throw InterpretError("valid report with zero length");  // unreachable

  QualityMetrics m;
  m.completeness_rate = double(n_valid) / double(reports.size());
  m.length_variance_ratio = double(hi) / double(lo);
  m.mean_length = sum / double(n_valid);
  return m;
}

std::vector<double> temperature_sweep() { return {0.1, 0.3, 0.5, 0.7}; }

void write_report_md(const InterpretationReport& r, const std::string& path) {
  std::ostringstream out;
  out << "# Cluster " << r.cluster_id << "\n\n";
  out << "- model: " << r.model << "\n";
  out << "- temperature: " << fmt_fixed(r.temperature, 2) << "\n";
  out << "- generated_at: " << r.generated_at << "\n";
  out << "- attempts: " << r.attempts << "\n";
  out << "- status: "
      << (r.valid ? std::string("valid") : "invalid (" + r.failure + ")")
      << "\n";
  if (r.valid) {
    const std::array<const std::string*, 5> bodies = {
        &r.overview, &r.strengths, &r.weaknesses, &r.role, &r.city_context};
    for (std::size_t t = 0; t < kSectionTitles.size(); ++t)
      out << "\n## " << (t + 1) << ". " << kSectionTitles[t] << "\n\n"
          << *bodies[t] << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_quality_metrics_csv(const std::vector<TemperatureRun>& runs,
                               const std::string& path) {
  std::ostringstream out;
  out << "temperature,completeness_rate,length_variance_ratio,mean_length\n";
  for (const TemperatureRun& run : runs) {
    out << fmt_fixed(run.temperature, 2) << ","
        << fmt_fixed(run.metrics.completeness_rate, 4) << ","
        << fmt_fixed(run.metrics.length_variance_ratio, 4) << ","
        << fmt_fixed(run.metrics.mean_length, 2) << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace bridgegraph
