#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gesture_asr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- parsing -----------------------------------------------------------------

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// --- evaluation / reporting ----------------------------------------------------

class EmptyReference : public Error {
 public:
  EmptyReference() : Error("reference word sequence is empty") {}
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("duplicate item id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class InvalidThreshold : public Error {
 public:
  explicit InvalidThreshold(double value);
};

class UnknownFormat : public Error {
 public:
  explicit UnknownFormat(const std::string& name) : Error("unknown output format: " + name) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

// --- backends ----------------------------------------------------------------

class ClientError : public Error {
 public:
  using Error::Error;
};

/// Network failure, timeout or cancellation before a response was received.
class TransportError : public ClientError {
 public:
  using ClientError::ClientError;
};

/// The backend answered, but with a non-2xx status (or the mock refused the input).
class BackendError : public ClientError {
 public:
  BackendError(int status, std::string body);
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class DecodeError : public ClientError {
 public:
  using ClientError::ClientError;
};

class UnparseableLabel : public ClientError {
 public:
  explicit UnparseableLabel(const std::string& response)
      : ClientError("no candidate gesture label found in response: " + response) {}
};

class EmptyResponse : public ClientError {
 public:
  EmptyResponse() : ClientError("backend returned an empty response") {}
};

class TemplateError : public ClientError {
 public:
  using ClientError::ClientError;
};

}  // namespace gesture_asr
