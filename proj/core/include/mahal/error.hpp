#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace mahal {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
  invalid_input,         ///< malformed or non-finite input data
  invalid_argument,      ///< parameter out of its valid range
  dimension_mismatch,
  insufficient_samples,
  rank_deficiency,
  degenerate_input,
  divergence,
  undefined_test,
  data_error,            ///< external data could not be read or joined
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a requested rank exceeds what the spectrum supports.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(Eigen::Index requested, Eigen::Index attainable,
                      const std::string& context = {});

  Eigen::Index requested() const noexcept { return requested_; }
  Eigen::Index attainable() const noexcept { return attainable_; }

 private:
  Eigen::Index requested_;
  Eigen::Index attainable_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace detail
}  // namespace mahal
