#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace eigenfed {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NotSymmetric : public Error {
public:
  using Error::Error;
};

class NotOrthonormal : public Error {
public:
  using Error::Error;
};

class NotPSD : public Error {
public:
  using Error::Error;
};

class ZeroMatrix : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class InvalidModelParams : public Error {
public:
  using Error::Error;
};

class MissingBound : public Error {
public:
  using Error::Error;
};

/// Raised when a matrix has fewer numerically independent columns than needed.
class RankDeficient : public Error {
public:
  RankDeficient(std::size_t observed_rank, std::size_t required_rank)
      : Error("rank deficient: numerical rank " + std::to_string(observed_rank) +
              " < " + std::to_string(required_rank)),
        observed_rank_(observed_rank) {}

  std::size_t observed_rank() const noexcept { return observed_rank_; }

private:
  std::size_t observed_rank_;
};

// Federation errors.

class MalformedFrame : public Error {
public:
  explicit MalformedFrame(const std::string &reason)
      : Error("malformed frame: " + reason), reason_(reason) {}

  const std::string &reason() const noexcept { return reason_; }

private:
  std::string reason_;
};

class VersionMismatch : public Error {
public:
  VersionMismatch(std::uint8_t expected, std::uint8_t got)
      : Error("protocol version mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

class NodeError : public Error {
public:
  NodeError(const std::string &what, std::uint32_t node_id)
      : Error(what + " (node " + std::to_string(node_id) + ")"),
        node_id_(node_id) {}

  std::uint32_t node_id() const noexcept { return node_id_; }

private:
  std::uint32_t node_id_;
};

class WorkerTimeout : public NodeError {
public:
  explicit WorkerTimeout(std::uint32_t node_id)
      : NodeError("worker timed out or disconnected", node_id) {}
};

class PayloadValidation : public NodeError {
public:
  PayloadValidation(std::uint32_t node_id, const std::string &why)
      : NodeError("invalid payload: " + why, node_id) {}
};

class TransportError : public Error {
public:
  using Error::Error;
};

// Experiment runner errors.

class ConfigError : public Error {
public:
  ConfigError(std::string key, std::string reason)
      : Error("config error [" + key + "]: " + reason), key_(std::move(key)),
        reason_(std::move(reason)) {}

  const std::string &key() const noexcept { return key_; }
  const std::string &reason() const noexcept { return reason_; }

private:
  std::string key_;
  std::string reason_;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace eigenfed
