#pragma once

#include <memory>
#include <string>

namespace bridgegraph {

// Deterministic stand-in for a model server: replies to a rendered cluster
// prompt with a well-formed five-section body built from the prompt's own
// numbers. The reply is a pure function of (prompt, temperature); higher
// temperatures pad the strengths section, so a temperature sweep produces
// distinct length statistics while staying reproducible.
std::string mock_llm_reply(const std::string& prompt, double temperature);

// In-process chat-completions server wrapping mock_llm_reply. Serves
// POST /v1/chat/completions; malformed request bodies get HTTP 400.
class MockLlmServer {
 public:
  // Binds 127.0.0.1 immediately; port 0 picks a free one. Throws
  // std::runtime_error when the port cannot be bound.
  explicit MockLlmServer(int port = 0);
  ~MockLlmServer();

  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  int port() const;
  std::string endpoint() const;
  int request_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bridgegraph
