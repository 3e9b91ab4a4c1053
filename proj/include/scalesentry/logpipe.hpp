#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalesentry/cluster.hpp"
#include "scalesentry/ipv4.hpp"
#include "scalesentry/rng.hpp"

namespace scalesentry {

/// Wall-clock epoch (ms) that simulation time 0 maps to in emitted logs.
inline constexpr std::int64_t kLogEpochMs = 1'700'000'000'000;

std::int64_t to_log_ms(double t) noexcept;
double from_log_ms(std::int64_t ms) noexcept;

/// One combined-format access line:
/// `<proxy_ip> - - [<msec>] "<METHOD> <path> <PROTO>" <status> <bytes> "<referer>" "<agent>" "<xff_ip>"`
struct AccessEntry {
    std::string proxy_ip = "10.244.0.1";
    std::int64_t msec = kLogEpochMs;
    std::string method = "GET";
    std::string path = "/";
    std::string protocol = "HTTP/1.1";
    int status = 200;
    std::int64_t bytes = 0;
    std::string referer = "-";
    std::string agent;
    Ipv4 xff_ip;

    friend bool operator==(const AccessEntry&, const AccessEntry&) = default;
};

enum class ErrorReason { timeout, connection_refused };

const char* to_string(ErrorReason reason) noexcept;

/// Error line: `[<msec>] <xff_ip> <reason>`.
struct ErrorEntry {
    std::int64_t msec = kLogEpochMs;
    Ipv4 xff_ip;
    ErrorReason reason = ErrorReason::timeout;

    friend bool operator==(const ErrorEntry&, const ErrorEntry&) = default;
};

std::string format_access(const AccessEntry& entry);
std::string format_error(const ErrorEntry& entry);

/// Strict parsers. nullopt means the line is malformed; never throws.
std::optional<AccessEntry> parse_access(std::string_view line) noexcept;
std::optional<ErrorEntry> parse_error(std::string_view line) noexcept;

struct EmittedLines {
    std::string access;
    std::optional<std::string> error;
    bool access_corrupted = false;
};

/// Turns outcomes into log lines. With probability `malformed_rate` the
/// access line is truncated at a random offset so that it no longer parses.
class LogEmitter {
public:
    LogEmitter(double malformed_rate, std::uint64_t seed);

    EmittedLines emit(const Outcome& outcome);

    static AccessEntry access_entry_for(const Outcome& outcome);
    static std::optional<ErrorEntry> error_entry_for(const Outcome& outcome);

private:
    double malformed_rate_;
    Rng rng_;
};

enum class RecordOrigin { access, error };

struct LabeledRecord {
    Ipv4 xff_ip;
    std::string path;  ///< empty for error-log records
    int status = 0;    ///< error records: 499 for timeout, 503 for refused
    double t = 0.0;
    int label = 0;
    RecordOrigin origin = RecordOrigin::access;

    friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
};

/// 403/404 access entries and every error entry are abnormal (1); the rest 0.
int label_for(const LabeledRecord& record) noexcept;

LabeledRecord to_record(const AccessEntry& entry);
LabeledRecord to_record(const ErrorEntry& entry);

struct PreprocessResult {
    std::vector<LabeledRecord> records;  ///< merged, stably sorted by t
    std::size_t malformed_access = 0;
    std::size_t malformed_error = 0;
};

PreprocessResult preprocess(std::span<const std::string> access_lines, std::span<const std::string> error_lines);

}  // namespace scalesentry
