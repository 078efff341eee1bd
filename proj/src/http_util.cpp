#include "bridgegraph/http_util.hpp"

namespace bridgegraph {

std::string ParsedUrl::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  std::string rest;
  if (url.rfind("http://", 0) == 0) {
    out.scheme = "http";
    out.port = 80;
    rest = url.substr(7);
  } else if (url.rfind("https://", 0) == 0) {
    out.scheme = "https";
    out.port = 443;
    rest = url.substr(8);
  } else {
    throw NetworkError("unsupported URL scheme: " + url);
  }

  const std::size_t slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);

  const std::size_t colon = hostport.find(':');
  if (colon != std::string::npos) {
    out.host = hostport.substr(0, colon);
    try {
      out.port = std::stoi(hostport.substr(colon + 1));
    } catch (const std::exception&) {
      throw NetworkError("bad port in URL: " + url);
    }
  } else {
    out.host = hostport;
  }
  if (out.host.empty()) throw NetworkError("missing host in URL: " + url);
  return out;
}

}  // namespace bridgegraph
