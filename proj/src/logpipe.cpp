#include "scalesentry/logpipe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace scalesentry {

namespace {

constexpr const char* kAgent = "Mozilla/5.0 (X11; Linux x86_64) scalesentry-loadgen/1.0";

std::int64_t body_bytes(int status) {
    switch (status) {
        case 200: return 615;
        case 404: return 153;
        case 503: return 197;
        default: return 0;
    }
}

std::string format_msec(std::int64_t msec) {
    std::string s = std::to_string(msec / 1000);
    std::string frac = std::to_string(msec % 1000);
    s += '.';
    s.append(3 - frac.size(), '0');
    s += frac;
    return s;
}

/// Cursor over a line; every helper returns false on mismatch.
struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    bool done() const { return pos == s.size(); }
    bool literal(std::string_view lit) {
        if (s.substr(pos, lit.size()) != lit) return false;
        pos += lit.size();
        return true;
    }
    /// Reads up to (not including) `stop`; requires at least one char unless allow_empty.
    bool until(char stop, std::string_view& out, bool allow_empty = false) {
        const auto end = s.find(stop, pos);
        if (end == std::string_view::npos) return false;
        out = s.substr(pos, end - pos);
        if (out.empty() && !allow_empty) return false;
        pos = end;
        return true;
    }
    bool number(std::int64_t& out, std::size_t max_digits = 18) {
        std::size_t end = pos;
        while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
        const std::size_t len = end - pos;
        if (len == 0 || len > max_digits || (len > 1 && s[pos] == '0')) return false;
        std::from_chars(s.data() + pos, s.data() + end, out);
        pos = end;
        return true;
    }
    bool msec(std::int64_t& out) {
        std::int64_t secs = 0;
        if (!number(secs, 12) || !literal(".")) return false;
        if (s.size() - pos < 3) return false;
        std::int64_t ms = 0;
        for (int i = 0; i < 3; ++i) {
            const char c = s[pos + i];
            if (c < '0' || c > '9') return false;
            ms = ms * 10 + (c - '0');
        }
        pos += 3;
        out = secs * 1000 + ms;
        return true;
    }
};

bool is_token_char(char c) { return c > ' ' && c != '"' && c != 127; }

bool all_of(std::string_view v, bool (*pred)(char)) { return std::all_of(v.begin(), v.end(), pred); }

}  // namespace

std::int64_t to_log_ms(double t) noexcept { return kLogEpochMs + static_cast<std::int64_t>(std::llround(t * 1000.0)); }

double from_log_ms(std::int64_t ms) noexcept { return static_cast<double>(ms - kLogEpochMs) / 1000.0; }

const char* to_string(ErrorReason reason) noexcept {
    return reason == ErrorReason::timeout ? "timeout" : "connection refused";
}

std::string format_access(const AccessEntry& e) {
    std::string line;
    line.reserve(160);
    line += e.proxy_ip;
    line += " - - [";
    line += format_msec(e.msec);
    line += "] \"";
    line += e.method;
    line += ' ';
    line += e.path;
    line += ' ';
    line += e.protocol;
    line += "\" ";
    line += std::to_string(e.status);
    line += ' ';
    line += std::to_string(e.bytes);
    line += " \"";
    line += e.referer;
    line += "\" \"";
    line += e.agent;
    line += "\" \"";
    line += e.xff_ip.to_string();
    line += '"';
    return line;
}

std::string format_error(const ErrorEntry& e) {
    return '[' + format_msec(e.msec) + "] " + e.xff_ip.to_string() + ' ' + to_string(e.reason);
}

std::optional<AccessEntry> parse_access(std::string_view line) noexcept {
    try {
        Cursor c{line};
        AccessEntry e;
        std::string_view proxy, method, path, protocol, referer, agent, xff;
        if (!c.until(' ', proxy) || !Ipv4::parse(proxy)) return std::nullopt;
        if (!c.literal(" - - [") || !c.msec(e.msec) || !c.literal("] \"")) return std::nullopt;
        if (!c.until(' ', method) || !std::all_of(method.begin(), method.end(), [](char ch) { return ch >= 'A' && ch <= 'Z'; }))
            return std::nullopt;
        if (!c.literal(" ") || !c.until(' ', path) || path.front() != '/' || !all_of(path, is_token_char))
            return std::nullopt;
        if (!c.literal(" ") || !c.until('"', protocol) || !(protocol == "HTTP/1.0" || protocol == "HTTP/1.1"))
            return std::nullopt;
        std::int64_t status = 0;
        if (!c.literal("\" ") || !c.number(status, 3) || status < 100 || status > 599) return std::nullopt;
        if (!c.literal(" ") || !c.number(e.bytes)) return std::nullopt;
        if (!c.literal(" \"") || !c.until('"', referer, true)) return std::nullopt;
        if (!c.literal("\" \"") || !c.until('"', agent, true)) return std::nullopt;
        if (!c.literal("\" \"") || !c.until('"', xff)) return std::nullopt;
        const auto xff_ip = Ipv4::parse(xff);
        if (!xff_ip || !c.literal("\"") || !c.done()) return std::nullopt;
        e.proxy_ip = std::string(proxy);
        e.method = std::string(method);
        e.path = std::string(path);
        e.protocol = std::string(protocol);
        e.status = static_cast<int>(status);
        e.referer = std::string(referer);
        e.agent = std::string(agent);
        e.xff_ip = *xff_ip;
        return e;
    } catch (...) {
        return std::nullopt;
    }
}

std::optional<ErrorEntry> parse_error(std::string_view line) noexcept {
    Cursor c{line};
    ErrorEntry e;
    std::string_view ip;
    if (!c.literal("[") || !c.msec(e.msec) || !c.literal("] ") || !c.until(' ', ip)) return std::nullopt;
    const auto xff = Ipv4::parse(ip);
    if (!xff || !c.literal(" ")) return std::nullopt;
    const auto reason = line.substr(c.pos);
    if (reason == "timeout") e.reason = ErrorReason::timeout;
    else if (reason == "connection refused") e.reason = ErrorReason::connection_refused;
    else return std::nullopt;
    e.xff_ip = *xff;
    return e;
}

LogEmitter::LogEmitter(double malformed_rate, std::uint64_t seed) : malformed_rate_(malformed_rate), rng_(seed) {}

AccessEntry LogEmitter::access_entry_for(const Outcome& o) {
    AccessEntry e;
    e.msec = to_log_ms(o.t_complete);
    e.path = o.request.path;
    e.status = o.status;
    e.bytes = body_bytes(o.status);
    e.agent = kAgent;
    e.xff_ip = o.request.source_ip;
    return e;
}

std::optional<ErrorEntry> LogEmitter::error_entry_for(const Outcome& o) {
    if (o.status != 499 && o.status < 500) return std::nullopt;
    return ErrorEntry{to_log_ms(o.t_complete), o.request.source_ip,
                      o.status == 499 ? ErrorReason::timeout : ErrorReason::connection_refused};
}

EmittedLines LogEmitter::emit(const Outcome& outcome) {
    EmittedLines out;
    out.access = format_access(access_entry_for(outcome));
    if (malformed_rate_ > 0.0 && rng_.chance(malformed_rate_)) {
        out.access.resize(rng_.below(out.access.size()));
        out.access_corrupted = true;
    }
    if (auto err = error_entry_for(outcome)) out.error = format_error(*err);
    return out;
}

int label_for(const LabeledRecord& r) noexcept {
    if (r.origin == RecordOrigin::error) return 1;
    return (r.status == 403 || r.status == 404) ? 1 : 0;
}

LabeledRecord to_record(const AccessEntry& e) {
    LabeledRecord r{e.xff_ip, e.path, e.status, from_log_ms(e.msec), 0, RecordOrigin::access};
    r.label = label_for(r);
    return r;
}

LabeledRecord to_record(const ErrorEntry& e) {
    LabeledRecord r{e.xff_ip, {}, e.reason == ErrorReason::timeout ? 499 : 503, from_log_ms(e.msec), 1,
                    RecordOrigin::error};
    return r;
}

PreprocessResult preprocess(std::span<const std::string> access_lines, std::span<const std::string> error_lines) {
    PreprocessResult out;
    out.records.reserve(access_lines.size() + error_lines.size());
    for (const auto& line : access_lines) {
        if (auto e = parse_access(line)) out.records.push_back(to_record(*e));
        else ++out.malformed_access;
    }
    for (const auto& line : error_lines) {
        if (auto e = parse_error(line)) out.records.push_back(to_record(*e));
        else ++out.malformed_error;
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const LabeledRecord& a, const LabeledRecord& b) { return a.t < b.t; });
    return out;
}

}  // namespace scalesentry
