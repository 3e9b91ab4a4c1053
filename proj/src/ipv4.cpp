#include "scalesentry/ipv4.hpp"

#include <charconv>

namespace scalesentry {

std::string Ipv4::to_string() const {
    const auto o = octets();
    return std::to_string(o[0]) + '.' + std::to_string(o[1]) + '.' + std::to_string(o[2]) + '.' +
           std::to_string(o[3]);
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) noexcept {
    std::uint32_t value = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        if (p == end || *p < '0' || *p > '9') return std::nullopt;
        unsigned octet = 0;
        const char* start = p;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || octet > 255 || next - start > 3) return std::nullopt;
        // "01" style leading zeros do not round-trip.
        if (next - start > 1 && *start == '0') return std::nullopt;
        value = (value << 8) | octet;
        p = next;
        if (i < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return Ipv4{value};
}

}  // namespace scalesentry
