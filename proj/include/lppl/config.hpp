#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/ensemble.hpp"
#include "lppl/fit.hpp"
#include "lppl/model.hpp"
#include "lppl/scan.hpp"
#include "lppl/series.hpp"

namespace lppl {

/// Merged pipeline configuration: built-in defaults, overridden by a
/// key=value config file, overridden by command-line flags. The canonical
/// dump of the effective config is hashed into every output's provenance
/// header, so a run is reproducible from its artifacts.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    ScanConfig scan;
    FitConfig fit;
    QualificationFilter filter;
    BootstrapConfig boot;
    std::vector<int> up_windows{30, 60, 90};
    std::vector<int> sg_windows{120, 180};

    void validate() const {
        scan.validate();
        fit.validate();
        filter.validate();
        boot.validate();
        for (const int w : up_windows)
            if (w < 2)
                throw std::invalid_argument("up-fraction windows must cover at least 2 days");
        for (const int w : sg_windows)
            if (w < 5)
                throw std::invalid_argument("derivative windows must cover at least 5 days");
    }

    /// Applies one key=value assignment; unknown keys are an error.
    void set(std::string_view key, std::string_view value);

    /// Parses config-file text: one key=value per line, blank lines and
    /// '#' comments ignored.
    void apply_file_text(std::string_view text);

    /// Deterministic key-sorted dump of the effective configuration.
    std::string canonical_dump() const;
};

namespace detail {

inline double parse_double(std::string_view value, std::string_view key) {
    double out = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size())
        throw std::invalid_argument("config key '" + std::string(key) + "': bad number '" +
                                    std::string(value) + "'");
    return out;
}

inline long long parse_int(std::string_view value, std::string_view key) {
    long long out = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size())
        throw std::invalid_argument("config key '" + std::string(key) + "': bad integer '" +
                                    std::string(value) + "'");
    return out;
}

inline std::uint64_t parse_u64(std::string_view value, std::string_view key) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size())
        throw std::invalid_argument("config key '" + std::string(key) + "': bad integer '" +
                                    std::string(value) + "'");
    return out;
}

inline bool parse_bool(std::string_view value, std::string_view key) {
    if (value == "true" || value == "1")
        return true;
    if (value == "false" || value == "0")
        return false;
    throw std::invalid_argument("config key '" + std::string(key) + "': bad flag '" +
                                std::string(value) + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view value, std::string_view key, Parse parse) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t comma = value.find(',', pos);
        if (comma == std::string_view::npos)
            comma = value.size();
        out.push_back(parse(value.substr(pos, comma - pos), key));
        pos = comma + 1;
    }
    if (out.empty())
        throw std::invalid_argument("config key '" + std::string(key) + "': empty list");
    return out;
}

inline std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& values, std::string (*fmt)(T)) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += fmt(values[i]);
    }
    return out;
}

}  // namespace detail

inline void RunConfig::set(std::string_view key, std::string_view value) {
    using namespace detail;
    if (key == "seed")
        seed = parse_u64(value, key);
    else if (key == "output_dir")
        output_dir = std::string(value);
    else if (key == "scan.dt1")
        scan.dt1 = static_cast<int>(parse_int(value, key));
    else if (key == "scan.dt2")
        scan.dt2 = static_cast<int>(parse_int(value, key));
    else if (key == "scan.min_len")
        scan.min_len = static_cast<int>(parse_int(value, key));
    else if (key == "scan.max_len")
        scan.max_len = static_cast<int>(parse_int(value, key));
    else if (key == "scan.n_t2")
        scan.n_t2 = static_cast<int>(parse_int(value, key));
    else if (key == "scan.top_k")
        scan.top_k = static_cast<int>(parse_int(value, key));
    else if (key == "fit.n_starts")
        fit.n_starts = static_cast<int>(parse_int(value, key));
    else if (key == "fit.tc_grid")
        fit.tc_grid = parse_list<double>(value, key, parse_double);
    else if (key == "fit.alpha_starts")
        fit.alpha_starts = parse_list<double>(value, key, parse_double);
    else if (key == "fit.omega_starts")
        fit.omega_starts = parse_list<double>(value, key, parse_double);
    else if (key == "fit.max_iterations")
        fit.max_iterations = static_cast<int>(parse_int(value, key));
    else if (key == "fit.rel_tol")
        fit.rel_tol = parse_double(value, key);
    else if (key == "filter.alpha_min")
        filter.alpha_min = parse_double(value, key);
    else if (key == "filter.alpha_max")
        filter.alpha_max = parse_double(value, key);
    else if (key == "filter.omega_min")
        filter.omega_min = parse_double(value, key);
    else if (key == "filter.omega_max")
        filter.omega_max = parse_double(value, key);
    else if (key == "filter.require_b_negative")
        filter.require_b_negative = parse_bool(value, key);
    else if (key == "filter.tc_after_t2")
        filter.tc_after_t2 = parse_bool(value, key);
    else if (key == "filter.tc_max_horizon")
        filter.tc_max_horizon = parse_double(value, key);
    else if (key == "filter.min_trend")
        filter.min_trend = parse_double(value, key);
    else if (key == "filter.min_oscillation")
        filter.min_oscillation = parse_double(value, key);
    else if (key == "boot.n_bootstrap")
        boot.n_bootstrap = static_cast<int>(parse_int(value, key));
    else if (key == "boot.horizon_days")
        boot.horizon_days = static_cast<int>(parse_int(value, key));
    else if (key == "analyze.up_windows")
        up_windows = parse_list<int>(value, key, [](std::string_view v, std::string_view k) {
            return static_cast<int>(parse_int(v, k));
        });
    else if (key == "analyze.sg_windows")
        sg_windows = parse_list<int>(value, key, [](std::string_view v, std::string_view k) {
            return static_cast<int>(parse_int(v, k));
        });
    else
        throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

inline void RunConfig::apply_file_text(std::string_view text) {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
            key.remove_suffix(1);
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
            value.remove_prefix(1);
        try {
            set(key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
}

inline std::string RunConfig::canonical_dump() const {
    using namespace detail;
    std::string out;
    const auto put = [&](std::string_view key, const std::string& value) {
        out += std::string(key) + "=" + value + "\n";
    };
    static std::string (*fmt_int)(int) = [](int v) { return std::to_string(v); };
    static std::string (*fmt_dbl)(double) = [](double v) { return format_double(v); };
    put("analyze.sg_windows", join(sg_windows, fmt_int));
    put("analyze.up_windows", join(up_windows, fmt_int));
    put("boot.horizon_days", std::to_string(boot.horizon_days));
    put("boot.n_bootstrap", std::to_string(boot.n_bootstrap));
    put("filter.alpha_max", format_double(filter.alpha_max));
    put("filter.alpha_min", format_double(filter.alpha_min));
    put("filter.min_oscillation", format_double(filter.min_oscillation));
    put("filter.min_trend", format_double(filter.min_trend));
    put("filter.omega_max", format_double(filter.omega_max));
    put("filter.omega_min", format_double(filter.omega_min));
    put("filter.require_b_negative", filter.require_b_negative ? "true" : "false");
    put("filter.tc_after_t2", filter.tc_after_t2 ? "true" : "false");
    put("filter.tc_max_horizon", format_double(filter.tc_max_horizon));
    put("fit.alpha_starts", join(fit.alpha_starts, fmt_dbl));
    put("fit.max_iterations", std::to_string(fit.max_iterations));
    put("fit.n_starts", std::to_string(fit.n_starts));
    put("fit.omega_starts", join(fit.omega_starts, fmt_dbl));
    put("fit.rel_tol", format_double(fit.rel_tol));
    put("fit.tc_grid", join(fit.tc_grid, fmt_dbl));
    put("scan.dt1", std::to_string(scan.dt1));
    put("scan.dt2", std::to_string(scan.dt2));
    put("scan.max_len", std::to_string(scan.max_len));
    put("scan.min_len", std::to_string(scan.min_len));
    put("scan.n_t2", std::to_string(scan.n_t2));
    put("scan.top_k", std::to_string(scan.top_k));
    put("seed", std::to_string(seed));
    return out;
}

}  // namespace lppl
