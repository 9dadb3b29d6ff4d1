#pragma once

#include <stdexcept>
#include <string>

namespace sensegen {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor extents do not line up (e.g. matmul inner dimensions).
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// A call violated an operation's precondition.
class ContractError : public Error {
public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration (sizes, kinds, missing paths).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Input data could not be parsed; message carries line/token context.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Checkpoint file is corrupt, truncated or has an unsupported version.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// A numeric argument is outside the mathematical domain (e.g. sigma <= 0).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

}  // namespace sensegen
