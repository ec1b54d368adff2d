#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Class or cluster index per row, 0-based.
using Labels = std::vector<int>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid input data (parse failures, non-finite values, shape mismatches).
class DataError : public Error {
public:
    using Error::Error;
};

/// A precondition on arguments or configuration was violated.
class ConfigError : public Error {
public:
    using Error::Error;
};

using WarningHandler = std::function<void(const std::string&)>;

/// Emits a warning through the installed handler (stderr by default). Thread-safe.
void warn(const std::string& message);

/// Replaces the warning handler and returns the previous one. Passing an empty
/// function restores the default stderr handler.
WarningHandler set_warning_handler(WarningHandler handler);

/// Worker count for internal parallelism: CCR_THREADS if set and positive,
/// otherwise the hardware concurrency (at least 1).
int default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
/// handed out dynamically; callers must make each item independent of scheduling.
/// The first exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

/// Mixes a base seed with a stream index (splitmix64) so that sub-tasks get
/// decorrelated, scheduling-independent seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace ccr
