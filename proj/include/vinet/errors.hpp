#ifndef VINET_ERRORS_HPP
#define VINET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vinet {

// Error categories map one-to-one onto CLI exit codes: config 2, data 3,
// numeric 4.  Library code throws; the CLI boundary translates.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or API misuse (bad flag values, out-of-order appends).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Malformed or inconsistent input data (parse failures, label gaps).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// Numerical failure (no convergence, rank deficiency, degenerate normalization).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace vinet

#endif  // VINET_ERRORS_HPP
