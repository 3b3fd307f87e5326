#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lppl {

/// Calendar day backed by a serial day count since 1970-01-01.
class Date {
public:
    Date() = default;

    static Date from_serial(int days) { return Date(days); }

    static Date from_ymd(int year, int month, int day) {
        namespace chr = std::chrono;
        const chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                                      chr::day{static_cast<unsigned>(day)}};
        if (!ymd.ok())
            throw std::invalid_argument("invalid calendar date");
        return Date(chr::sys_days{ymd}.time_since_epoch().count());
    }

    /// Strict "YYYY-MM-DD"; rejects impossible dates such as 2010-02-30.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            return std::nullopt;
        int digits[8];
        static constexpr int pos[8] = {0, 1, 2, 3, 5, 6, 8, 9};
        for (int i = 0; i < 8; ++i) {
            const char c = text[pos[i]];
            if (c < '0' || c > '9')
                return std::nullopt;
            digits[i] = c - '0';
        }
        const int y = digits[0] * 1000 + digits[1] * 100 + digits[2] * 10 + digits[3];
        const int m = digits[4] * 10 + digits[5];
        const int d = digits[6] * 10 + digits[7];
        try {
            return from_ymd(y, m, d);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }

    static Date parse_or_throw(std::string_view text) {
        const auto date = parse(text);
        if (!date)
            throw std::invalid_argument("invalid date '" + std::string(text) +
                                        "' (expected YYYY-MM-DD)");
        return *date;
    }

    int serial() const { return serial_; }

    std::string to_string() const {
        namespace chr = std::chrono;
        const chr::year_month_day ymd{chr::sys_days{chr::days{serial_}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    Date operator+(int days) const { return Date(serial_ + days); }
    Date operator-(int days) const { return Date(serial_ - days); }
    /// Whole days between two dates.
    int operator-(const Date& other) const { return serial_ - other.serial_; }

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(int days) : serial_(days) {}

    int serial_ = 0;
};

}  // namespace lppl
