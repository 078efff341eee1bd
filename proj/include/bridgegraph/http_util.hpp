#pragma once

#include <stdexcept>
#include <string>

namespace bridgegraph {

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string path;    // always begins with '/'

  // "http://host:port" form consumed by the HTTP client.
  std::string origin() const;
};

// Accepts http(s)://host[:port][/path]; throws NetworkError on anything else.
ParsedUrl parse_url(const std::string& url);

}  // namespace bridgegraph
