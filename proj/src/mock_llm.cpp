#include <httplib.h>

#include "bridgegraph/mock_llm.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

using nlohmann::json;

// Pulls "Key: value" style lines and list entries out of the prompt. The
// template is stable (render_prompt is byte-deterministic), so plain string
// scanning is enough.
std::string line_value(const std::string& prompt, const std::string& key) {
  const std::size_t at = prompt.find(key);
  if (at == std::string::npos) return "";
  const std::size_t from = at + key.size();
  const std::size_t to = prompt.find('\n', from);
  return trim(prompt.substr(from, to == std::string::npos ? std::string::npos
                                                          : to - from));
}

// The "- name: z" feature lines, in prompt order.
std::vector<std::string> feature_lines(const std::string& prompt) {
  std::vector<std::string> out;
  std::istringstream in(prompt);
  std::string line;
  bool in_features = false;
  while (std::getline(in, line)) {
    if (line.rfind("Key features", 0) == 0) {
      in_features = true;
      continue;
    }
    if (!in_features) continue;
    if (line.rfind("- ", 0) == 0) {
      out.push_back(line.substr(2));
    } else if (!trim(line).empty()) {
      break;
    }
  }
  return out;
}

}  // namespace

std::string mock_llm_reply(const std::string& prompt, double temperature) {
  const std::string cluster_id = line_value(prompt, "Cluster ID:");
  const std::string count = line_value(prompt, "Bridge count:");
  const std::string first_city = line_value(prompt, "City composition:");
  const std::vector<std::string> features = feature_lines(prompt);

  const std::size_t lead = std::min<std::size_t>(3, features.size());
  const std::size_t tail = features.size() > lead ? features.size() - lead : 0;

  std::ostringstream out;
  out << "1. Cluster Overview\n"
      << "Cluster " << cluster_id << " groups " << count
      << " bridges; the dominant share sits in " << first_city << ".\n\n";

  out << "2. Strengths\nLeading signals:";
  for (std::size_t i = 0; i < lead; ++i)
    out << (i == 0 ? " " : "; ") << features[i];
  out << ".\n";
  const int filler = std::max(0, int(std::lround(temperature * 10.0)));
  for (int i = 0; i < filler; ++i)
    out << "The evidence is consistent across the listed features.\n";
  out << "\n";

  out << "3. Weaknesses\n";
  if (tail > 0) {
    out << "Weaker signals:";
    for (std::size_t i = lead; i < features.size(); ++i)
      out << (i == lead ? " " : "; ") << features[i];
    out << ". Closures here deserve a detour review.\n\n";
  } else {
    out << "No weak signals stand out; monitor routine wear.\n\n";
  }

  out << "4. Bridge Role Type\n";
  if (!features.empty()) {
    const std::string& top = features.front();
    out << top.substr(0, top.find(':')) << " dominant type.\n\n";
  } else {
    out << "General connector type.\n\n";
  }

  out << "5. City-Specific Context\n"
      << "Shares by city start at " << first_city
      << "; local screening should begin with the dominant city.\n";
  return out.str();
}

struct MockLlmServer::Impl {
  httplib::Server srv;
  std::thread th;
  int port = 0;
  std::atomic<int> hits{0};
};

MockLlmServer::MockLlmServer(int port) : impl_(new Impl) {
  impl_->srv.Post(
      "/v1/chat/completions",
      [this](const httplib::Request& req, httplib::Response& res) {
        impl_->hits.fetch_add(1);
        std::string prompt;
        double temperature = 0.0;
        try {
          const json body = json::parse(req.body);
          prompt = body.at("messages").at(0).at("content").get<std::string>();
          temperature = body.value("temperature", 0.0);
        } catch (const json::exception& e) {
          res.status = 400;
          res.set_content(std::string("bad request: ") + e.what(),
                          "text/plain");
          return;
        }
        json reply;
        reply["choices"] = json::array(
            {json{{"message",
                   json{{"role", "assistant"},
                        {"content", mock_llm_reply(prompt, temperature)}}}}});
        res.set_content(reply.dump(), "application/json");
      });

  if (port == 0) {
    impl_->port = impl_->srv.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw std::runtime_error("mock llm: cannot bind a port");
  } else {
    if (!impl_->srv.bind_to_port("127.0.0.1", port))
      throw std::runtime_error("mock llm: cannot bind port " + std::to_string(port));
    impl_->port = port;
  }
  impl_->th = std::thread([this] { impl_->srv.listen_after_bind(); });
  impl_->srv.wait_until_ready();
}

MockLlmServer::~MockLlmServer() {
  impl_->srv.stop();
  if (impl_->th.joinable()) impl_->th.join();
}

int MockLlmServer::port() const { return impl_->port; }

std::string MockLlmServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) +
         "/v1/chat/completions";
}

int MockLlmServer::request_count() const { return impl_->hits.load(); }

}  // namespace bridgegraph
