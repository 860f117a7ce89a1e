#pragma once

#include <stdexcept>
#include <string>

namespace facteval {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// On-disk store failed an integrity check (bad magic, truncation, bad offsets).
class StoreError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Request could not reach the backend (after retries).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Backend answered with a non-2xx status.
class ProtocolError : public Error {
 public:
  ProtocolError(int status, const std::string& body_excerpt)
      : Error("protocol error: status " + std::to_string(status) + ": " + body_excerpt),
        status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

/// Backend does not implement the requested operation (logprobs, embeddings).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Mock backend received a request whose digest is not in its script.
class MockScriptMiss : public Error {
 public:
  using Error::Error;
};

}  // namespace facteval
