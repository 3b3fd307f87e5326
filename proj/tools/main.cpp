#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lppl/config.hpp"
#include "lppl/document.hpp"
#include "lppl/ensemble.hpp"
#include "lppl/metrics.hpp"
#include "lppl/scan.hpp"
#include "lppl/series.hpp"
#include "lppl/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;  // no bubble, H1-only, verification mismatch
constexpr int kExitUsage = 2;   // bad arguments, I/O or parse failures

struct CliError : std::runtime_error {
    CliError(int code, const std::string& message) : std::runtime_error(message), code(code) {}
    int code;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CliError(kExitUsage, "cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw CliError(kExitUsage, "cannot write file: " + path.string());
    out << content;
    if (!out)
        throw CliError(kExitUsage, "short write to file: " + path.string());
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// '#'-prefixed provenance lines carried by every output file; the config
/// hash pins the exact effective configuration of the generating run.
std::string provenance_header(const lppl::RunConfig& cfg) {
    std::string out;
    out += std::string("# lppl-version: ") + lppl::kVersion + "\n";
    out += "# seed: " + std::to_string(cfg.seed) + "\n";
    out += "# config-sha256: " + lppl::sha2::sha256_hex(cfg.canonical_dump()) + "\n";
    return out;
}

struct CommonOptions {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key=value configuration file");
    cmd->add_option("--output-dir", opts.output_dir,
                    "output directory (default: $LPPL_OUTPUT_DIR or '.')");
    cmd->add_option("--seed", opts.seed, "seed for all randomized stages");
}

lppl::RunConfig load_config(const CommonOptions& opts) {
    lppl::RunConfig cfg;
    if (const char* env = std::getenv("LPPL_OUTPUT_DIR"))
        cfg.output_dir = env;
    if (!opts.config_path.empty()) {
        try {
            cfg.apply_file_text(read_file(opts.config_path));
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitUsage, std::string(e.what()) + " in " + opts.config_path);
        }
    }
    if (!opts.output_dir.empty())
        cfg.output_dir = opts.output_dir;
    if (opts.seed)
        cfg.seed = *opts.seed;
    cfg.fit.seed = cfg.seed;
    cfg.boot.seed = cfg.seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    return cfg;
}

lppl::PriceSeries load_series(const std::string& csv_path) {
    const fs::path path(csv_path);
    const std::string bytes = read_file(path);
    try {
        return lppl::parse_csv(bytes, path.stem().string());
    } catch (const std::exception& e) {
        throw CliError(kExitUsage, csv_path + ": " + e.what());
    }
}

fs::path ensure_output_dir(const lppl::RunConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw CliError(kExitUsage, "cannot create output directory: " + dir.string());
    return dir;
}

std::string fits_csv(const lppl::RunConfig& cfg, const std::vector<lppl::FitResult>& results) {
    std::string out = provenance_header(cfg);
    out += "t1,t2,A,B,C,alpha,omega,phi,tc,cost,rmse,qualified\n";
    for (const auto& r : results) {
        out += std::to_string(r.window.t1) + "," + std::to_string(r.window.t2) + "," +
               format_double(r.params.A) + "," + format_double(r.params.B) + "," +
               format_double(r.params.C) + "," + format_double(r.params.alpha) + "," +
               format_double(r.params.omega) + "," + format_double(r.params.phi) + "," +
               format_double(r.params.tc) + "," + format_double(r.cost) + "," +
               format_double(r.rmse) + "," + (r.qualified ? "1" : "0") + "\n";
    }
    return out;
}

void print_candidates(const lppl::PriceSeries& series,
                      const std::vector<lppl::FitResult>& candidates) {
    if (candidates.empty()) {
        std::cout << "no qualified fits\n";
        return;
    }
    std::cout << "top candidates (rmse ascending):\n";
    for (const auto& c : candidates) {
        const lppl::Date tc_date =
            series.origin() + static_cast<int>(std::lround(c.params.tc));
        std::printf("  window [%d, %d]  tc %s  alpha %.3f  omega %.2f  rmse %.5g\n",
                    c.window.t1, c.window.t2, tc_date.to_string().c_str(), c.params.alpha,
                    c.params.omega, c.rmse);
    }
}

int cmd_scan(const std::string& csv_path, const CommonOptions& opts,
             std::optional<int> top_k) {
    auto cfg = load_config(opts);
    if (top_k)
        cfg.scan.top_k = *top_k;
    const auto series = load_series(csv_path);
    lppl::ScanOutcome outcome;
    try {
        outcome = lppl::scan(series, cfg.scan, cfg.fit, cfg.filter);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    const fs::path dir = ensure_output_dir(cfg);
    const fs::path out_path = dir / (series.asset_id() + "_fits.csv");
    write_file(out_path, fits_csv(cfg, outcome.results));

    std::cout << series.asset_id() << ": " << outcome.results.size() << " fits, "
              << outcome.failures.size() << " skipped windows -> " << out_path.string()
              << "\n";
    print_candidates(series, lppl::select_candidates(outcome.results, cfg.scan.top_k));
    return kExitOk;
}

int cmd_forecast(const std::string& csv_path, const CommonOptions& opts,
                 std::optional<int> top_k) {
    auto cfg = load_config(opts);
    if (top_k)
        cfg.scan.top_k = *top_k;
    const auto series = load_series(csv_path);
    lppl::ScanOutcome outcome;
    try {
        outcome = lppl::scan(series, cfg.scan, cfg.fit, cfg.filter);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    const auto candidates = lppl::select_candidates(outcome.results, cfg.scan.top_k);
    if (candidates.empty()) {
        std::cout << series.asset_id() << ": no qualified fits, nothing to forecast\n";
        return kExitDomain;
    }
    const auto ensemble =
        lppl::build_ensemble(candidates, series, cfg.boot, cfg.fit, cfg.filter);
    const auto record = lppl::make_forecast(ensemble, cfg.boot.horizon_days);

    const fs::path dir = ensure_output_dir(cfg);
    const fs::path out_path = dir / (series.asset_id() + "_forecast.txt");
    write_file(out_path, provenance_header(cfg) + lppl::render_record_fragment(record));

    std::cout << lppl::render_record_fragment(record);
    if (record.status == lppl::ForecastStatus::H2) {
        std::cout << "H2 forecast written to " << out_path.string() << "\n";
        return kExitOk;
    }
    std::cout << "H1 only (no publishable window) written to " << out_path.string() << "\n";
    return kExitDomain;
}

int cmd_analyze(const std::string& csv_path, const std::string& from_date_text,
                const CommonOptions& opts, const std::vector<int>& up_windows,
                const std::vector<int>& sg_windows) {
    auto cfg = load_config(opts);
    if (!up_windows.empty())
        cfg.up_windows = up_windows;
    if (!sg_windows.empty())
        cfg.sg_windows = sg_windows;
    const auto from_date = lppl::Date::parse(from_date_text);
    if (!from_date)
        throw CliError(kExitUsage, "invalid --from-date '" + from_date_text + "'");
    const auto series = load_series(csv_path);
    if (*from_date > series.last_date())
        throw CliError(kExitUsage, "--from-date " + from_date->to_string() +
                                       " is after the last observation " +
                                       series.last_date().to_string());

    const fs::path dir = ensure_output_dir(cfg);
    const std::string& asset = series.asset_id();
    std::string report = provenance_header(cfg);
    report += "asset: " + asset + "\n";
    report += "from-date: " + from_date->to_string() + "\n";

    lppl::DrawdownReport drawdown;
    try {
        drawdown = lppl::max_drawdown(series, *from_date);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    std::string dd = provenance_header(cfg);
    dd += "peak: " + drawdown.peak_date.to_string() + "\n";
    dd += "trough: " + drawdown.trough_date.to_string() + "\n";
    dd += "relative-drop: " + format_double(drawdown.relative_drop) + "\n";
    dd += "absolute-drop: " + format_double(drawdown.absolute_drop) + "\n";
    write_file(dir / (asset + "_drawdown.txt"), dd);
    report += "max-drawdown: " + format_double(drawdown.relative_drop) + " (peak " +
              drawdown.peak_date.to_string() + ", trough " + drawdown.trough_date.to_string() +
              ")\n";

    const int from_offset = std::max(0, *from_date - series.origin());
    const auto region = lppl::slice(series, from_offset, series.span());
    for (const int window : cfg.up_windows) {
        try {
            const auto points = lppl::up_day_fraction(region, window);
            std::string csv = provenance_header(cfg) + "date,fraction\n";
            for (const auto& p : points)
                csv += p.date.to_string() + "," + format_double(p.fraction) + "\n";
            const fs::path path = dir / (asset + "_upfrac_" + std::to_string(window) + ".csv");
            write_file(path, csv);
            report += "up-fraction window " + std::to_string(window) + ": " +
                      std::to_string(points.size()) + " points\n";
        } catch (const std::invalid_argument& e) {
            report += "up-fraction window " + std::to_string(window) + ": skipped (" +
                      e.what() + ")\n";
        }
    }
    for (const int window : cfg.sg_windows) {
        try {
            const auto points = lppl::sg_derivative(region, window);
            std::string csv = provenance_header(cfg) + "date,growth_rate\n";
            for (const auto& p : points)
                csv += p.date.to_string() + "," + format_double(p.growth_rate) + "\n";
            const fs::path path = dir / (asset + "_deriv_" + std::to_string(window) + ".csv");
            write_file(path, csv);
            report += "derivative window " + std::to_string(window) + ": " +
                      std::to_string(points.size()) + " points\n";
        } catch (const std::invalid_argument& e) {
            report += "derivative window " + std::to_string(window) + ": skipped (" + e.what() +
                      ")\n";
        }
    }
    write_file(dir / (asset + "_analysis.txt"), report);
    std::cout << report;
    return kExitOk;
}

int cmd_seal(const std::string& doc_path) {
    const fs::path path(doc_path);
    const std::string bytes = read_file(path);
    const auto rec = lppl::fingerprint(bytes, path.filename().string());
    write_file(path.string() + ".checksums", lppl::emit_checksum_lines(rec));
    write_file(path.string() + ".sha256", rec.sha256_hex + "  " + rec.filename + "\n");
    write_file(path.string() + ".sha512", rec.sha512_hex + "  " + rec.filename + "\n");
    std::cout << lppl::emit_checksum_table(rec);
    std::cout << "checksums written to " << path.string() << ".checksums\n";
    return kExitOk;
}

int cmd_verify(const std::string& doc_path, const std::string& checksums_path) {
    const std::string bytes = read_file(doc_path);
    lppl::ChecksumRecord claimed;
    try {
        claimed = lppl::parse_checksum_lines(read_file(checksums_path));
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, checksums_path + ": " + e.what());
    }
    const auto outcome = lppl::verify(bytes, claimed);
    std::cout << "SHA256SUM: " << (outcome.sha256_match ? "OK" : "MISMATCH") << "\n";
    std::cout << "SHA512SUM: " << (outcome.sha512_match ? "OK" : "MISMATCH") << "\n";
    return outcome.pass() ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LPPL bubble diagnostics, critical-time forecasts and sealed forecast "
                 "documents"};
    app.require_subcommand(1);

    CommonOptions scan_opts, forecast_opts, analyze_opts;
    std::string scan_csv, forecast_csv, analyze_csv;
    std::optional<int> scan_top_k, forecast_top_k;
    std::string from_date;
    std::vector<int> up_windows, sg_windows;
    std::string seal_doc, verify_doc, verify_checksums;

    auto* scan_cmd = app.add_subcommand("scan", "fit the window grid over a price series");
    scan_cmd->add_option("csv", scan_csv, "price series CSV (date,price)")->required();
    add_common(scan_cmd, scan_opts);
    scan_cmd->add_option("--top-k", scan_top_k, "candidates to report");

    auto* forecast_cmd =
        app.add_subcommand("forecast", "bootstrap-ensemble quantile windows for tc");
    forecast_cmd->add_option("csv", forecast_csv, "price series CSV (date,price)")->required();
    add_common(forecast_cmd, forecast_opts);
    forecast_cmd->add_option("--top-k", forecast_top_k, "candidate fits feeding the ensemble");

    auto* analyze_cmd =
        app.add_subcommand("analyze", "post-forecast measures on data after a date");
    analyze_cmd->add_option("csv", analyze_csv, "price series CSV (date,price)")->required();
    analyze_cmd->add_option("--from-date", from_date, "start of the evaluation region")
        ->required();
    add_common(analyze_cmd, analyze_opts);
    analyze_cmd->add_option("--windows", up_windows, "up-fraction window spans (days)")
        ->delimiter(',');
    analyze_cmd->add_option("--sg-windows", sg_windows, "derivative window spans (days)")
        ->delimiter(',');

    auto* seal_cmd = app.add_subcommand("seal", "fingerprint a forecast document");
    seal_cmd->add_option("document", seal_doc, "file to fingerprint")->required();

    auto* verify_cmd = app.add_subcommand("verify", "check a document against its checksums");
    verify_cmd->add_option("document", verify_doc, "file to verify")->required();
    verify_cmd->add_option("checksums", verify_checksums, "checksum file from 'seal'")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (scan_cmd->parsed())
            return cmd_scan(scan_csv, scan_opts, scan_top_k);
        if (forecast_cmd->parsed())
            return cmd_forecast(forecast_csv, forecast_opts, forecast_top_k);
        if (analyze_cmd->parsed())
            return cmd_analyze(analyze_csv, from_date, analyze_opts, up_windows, sg_windows);
        if (seal_cmd->parsed())
            return cmd_seal(seal_doc);
        if (verify_cmd->parsed())
            return cmd_verify(verify_doc, verify_checksums);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
