#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace scalesentry {

class Ipv4 {
public:
    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

    constexpr std::uint32_t value() const noexcept { return value_; }
    constexpr std::array<int, 4> octets() const noexcept {
        return {static_cast<int>(value_ >> 24), static_cast<int>((value_ >> 16) & 0xff),
                static_cast<int>((value_ >> 8) & 0xff), static_cast<int>(value_ & 0xff)};
    }

    std::string to_string() const;
    /// Strict dotted-quad parse: four decimal octets 0..255, no leading '+', no spaces.
    static std::optional<Ipv4> parse(std::string_view text) noexcept;

    constexpr auto operator<=>(const Ipv4&) const = default;

private:
    std::uint32_t value_ = 0;
};

}  // namespace scalesentry

template <>
struct std::hash<scalesentry::Ipv4> {
    std::size_t operator()(const scalesentry::Ipv4& ip) const noexcept {
        return std::hash<std::uint32_t>{}(ip.value());
    }
};
