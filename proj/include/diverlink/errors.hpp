#pragma once

#include <stdexcept>
#include <string>

namespace diverlink {

// Invalid argument or precondition violation (bad index, short sequence, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Frame has the wrong channel layout for the requested operation.
class FrameFormatError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Configuration or spec file failed validation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong lifecycle state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Filesystem or decoding failure. what() names the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diverlink
