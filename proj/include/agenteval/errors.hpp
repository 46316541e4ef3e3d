#pragma once

#include <stdexcept>
#include <string>

namespace agenteval {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition (empty corpus, one seed, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A document failed to parse or validate.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Stored digest does not match content.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  enum class Kind { kTransport, kStatus, kMalformed, kMissingFixture };

  BackendError(Kind kind, const std::string& what, int status = 0, std::string body = {})
      : Error(what), kind_(kind), status_(status), body_(std::move(body)) {}

  Kind kind() const { return kind_; }
  int status() const { return status_; }
  const std::string& body() const { return body_; }

  bool retryable() const {
    return kind_ == Kind::kTransport || (kind_ == Kind::kStatus && (status_ == 429 || status_ >= 500));
  }

 private:
  Kind kind_;
  int status_;
  std::string body_;
};

}  // namespace agenteval
