#pragma once

#include <stdexcept>
#include <string>

namespace wavesim {

/// Broad failure category. The CLI maps each one to a process exit code.
enum class ErrorKind {
  usage,      // bad argument, bad config, violated precondition (exit 2)
  data,       // unreadable or malformed input files (exit 3)
  numerical,  // a kernel could not produce a meaningful answer (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Throws an error of the same concrete type as `e` with `prefix` prepended.
[[noreturn]] inline void rethrow_prefixed(const Error& e, const std::string& prefix) {
  const std::string what = prefix + e.what();
  switch (e.kind()) {
    case ErrorKind::usage: throw UsageError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::numerical: throw NumericalError(what);
  }
  throw Error(e.kind(), what);
}

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numerical: return 4;
  }
  return 1;
}

}  // namespace wavesim
