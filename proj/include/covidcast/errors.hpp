#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covidcast {

enum class DataErrorKind {
    missing_file,
    malformed_row,
    date_order,
    non_monotone,
    out_of_range,
    too_short,
    degenerate_channel,
};

inline const char* to_string(DataErrorKind kind) {
    switch (kind) {
    case DataErrorKind::missing_file: return "missing file";
    case DataErrorKind::malformed_row: return "malformed row";
    case DataErrorKind::date_order: return "date gap/order";
    case DataErrorKind::non_monotone: return "non-monotone cumulative";
    case DataErrorKind::out_of_range: return "out of range";
    case DataErrorKind::too_short: return "series too short";
    case DataErrorKind::degenerate_channel: return "degenerate channel";
    }
    return "data error";
}

/// Error raised by ingestion and windowing. `line()` is the 1-based CSV line
/// for file errors and 0 otherwise.
class DataError : public std::runtime_error {
public:
    DataError(DataErrorKind kind, const std::string& what, std::size_t line = 0)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), line_(line) {}

    DataErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    DataErrorKind kind_;
    std::size_t line_;
};

/// Divergence, singular systems and other failures of a numerical procedure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace covidcast
