#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/date.hpp"
#include "lppl/ensemble.hpp"
#include "lppl/series.hpp"
#include "lppl/sha2.hpp"

namespace lppl {

/// The sealed object of the forecast protocol. The canonical byte form (see
/// canonical_serialize) is what gets fingerprinted: key-per-line UTF-8 text,
/// LF endings, no trailing whitespace, fixed key order, so one logical
/// content has exactly one byte representation.
struct ForecastDocument {
    Date created_on;
    std::vector<std::string> h1_assets;      // descriptors, order is content
    std::vector<ForecastRecord> h2_records;
    std::vector<std::string> notes;          // free-text lines

    bool operator==(const ForecastDocument&) const = default;
};

namespace detail {

inline void require_line_value(std::string_view value, const char* what) {
    if (value.find('\n') != std::string_view::npos)
        throw std::invalid_argument(std::string(what) + " must not contain newlines");
    if (!value.empty() && (std::isspace(static_cast<unsigned char>(value.back())) ||
                           std::isspace(static_cast<unsigned char>(value.front()))))
        throw std::invalid_argument(std::string(what) +
                                    " must not carry leading or trailing whitespace");
}

}  // namespace detail

/// Renders one forecast record in the canonical block layout. H2 records
/// carry the two quantile-window lines; H1 records stop at the ensemble
/// size.
inline std::string render_record_fragment(const ForecastRecord& record) {
    detail::require_line_value(record.asset_id, "asset id");
    std::string out;
    out += "record: " + record.asset_id + "\n";
    out += "status: ";
    out += to_string(record.status);
    out += "\n";
    out += "last-observation: " + record.last_observation.to_string() + "\n";
    out += "ensemble-size: " + std::to_string(record.ensemble_size) + "\n";
    if (record.status == ForecastStatus::H2) {
        if (!record.q05 || !record.q20 || !record.q80 || !record.q95)
            throw std::invalid_argument("H2 record requires all four quantile dates");
        out += "20/80%: " + record.q20->to_string() + "/" + record.q80->to_string() + "\n";
        out += "5/95%: " + record.q05->to_string() + "/" + record.q95->to_string() + "\n";
    }
    return out;
}

inline std::string canonical_serialize(const ForecastDocument& doc) {
    std::string out;
    out += "fbe-document: 1\n";
    out += "created-on: " + doc.created_on.to_string() + "\n";
    for (const auto& asset : doc.h1_assets) {
        detail::require_line_value(asset, "h1 asset");
        out += "h1-asset: " + asset + "\n";
    }
    for (const auto& record : doc.h2_records)
        out += render_record_fragment(record);
    for (const auto& note : doc.notes) {
        detail::require_line_value(note, "note");
        out += "note: " + note + "\n";
    }
    return out;
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::optional<std::string_view> peek() {
        if (!line_ && pos_ < text_.size()) {
            std::size_t eol = text_.find('\n', pos_);
            if (eol == std::string_view::npos)
                throw std::invalid_argument("document line " + std::to_string(line_no_ + 1) +
                                            ": missing final newline");
            line_ = text_.substr(pos_, eol - pos_);
            pos_ = eol + 1;
            ++line_no_;
        }
        return line_;
    }

    std::optional<std::string_view> take() {
        auto line = peek();
        line_.reset();
        return line;
    }

    /// Consumes "key: value" if the next line has this key.
    std::optional<std::string_view> take_key(std::string_view key) {
        const auto line = peek();
        if (!line)
            return std::nullopt;
        const std::string prefix = std::string(key) + ": ";
        if (line->substr(0, prefix.size()) != prefix)
            return std::nullopt;
        const auto value = line->substr(prefix.size());
        line_.reset();
        return value;
    }

    std::string_view require_key(std::string_view key) {
        const auto value = take_key(key);
        if (!value)
            throw std::invalid_argument("document line " + std::to_string(line_no_) +
                                        ": expected '" + std::string(key) + ":'");
        return *value;
    }

    int line_no() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
    std::optional<std::string_view> line_;
};

inline std::pair<Date, Date> parse_date_window(std::string_view value, const char* what) {
    const std::size_t sep = value.find('/');
    if (sep == std::string_view::npos)
        throw std::invalid_argument(std::string(what) + ": expected '<date>/<date>'");
    const Date lo = Date::parse_or_throw(value.substr(0, sep));
    const Date hi = Date::parse_or_throw(value.substr(sep + 1));
    return {lo, hi};
}

}  // namespace detail

/// Parses the canonical layout back into a document; strict about key
/// order, so parse(serialize(doc)) reproduces doc and serialize(parse(b))
/// reproduces b byte for byte.
inline ForecastDocument parse_document(std::string_view bytes) {
    detail::LineReader reader(bytes);
    ForecastDocument doc;
    if (reader.require_key("fbe-document") != "1")
        throw std::invalid_argument("unsupported document version");
    doc.created_on = Date::parse_or_throw(reader.require_key("created-on"));
    while (const auto asset = reader.take_key("h1-asset"))
        doc.h1_assets.emplace_back(*asset);
    while (const auto asset = reader.take_key("record")) {
        ForecastRecord record;
        record.asset_id = std::string(*asset);
        const auto status = reader.require_key("status");
        if (status == "H1")
            record.status = ForecastStatus::H1;
        else if (status == "H2")
            record.status = ForecastStatus::H2;
        else
            throw std::invalid_argument("unknown status '" + std::string(status) + "'");
        record.last_observation = Date::parse_or_throw(reader.require_key("last-observation"));
        const auto size_text = reader.require_key("ensemble-size");
        record.ensemble_size = std::stoi(std::string(size_text));
        if (record.status == ForecastStatus::H2) {
            const auto [q20, q80] =
                detail::parse_date_window(reader.require_key("20/80%"), "20/80% window");
            const auto [q05, q95] =
                detail::parse_date_window(reader.require_key("5/95%"), "5/95% window");
            record.q20 = q20;
            record.q80 = q80;
            record.q05 = q05;
            record.q95 = q95;
            if (!(*record.q05 <= *record.q20 && *record.q20 <= *record.q80 &&
                  *record.q80 <= *record.q95))
                throw std::invalid_argument("quantile dates out of order for '" +
                                            record.asset_id + "'");
        }
        doc.h2_records.push_back(std::move(record));
    }
    while (const auto note = reader.take_key("note"))
        doc.notes.emplace_back(*note);
    if (reader.peek())
        throw std::invalid_argument("document line " + std::to_string(reader.line_no()) +
                                    ": unexpected content");
    return doc;
}

/// SHA-256/SHA-512 fingerprint pair over a named byte sequence.
struct ChecksumRecord {
    std::string sha256_hex;  // 64 lowercase hex chars
    std::string sha512_hex;  // 128 lowercase hex chars
    std::string filename;

    bool operator==(const ChecksumRecord&) const = default;
};

namespace detail {

inline std::string normalized_hex(std::string_view hex, std::size_t expected_len,
                                  const char* what) {
    if (hex.size() != expected_len)
        throw std::invalid_argument(std::string(what) + ": expected " +
                                    std::to_string(expected_len) + " hex chars, got " +
                                    std::to_string(hex.size()));
    std::string out;
    out.reserve(hex.size());
    for (const char c : hex) {
        if (c >= '0' && c <= '9')
            out.push_back(c);
        else if (c >= 'a' && c <= 'f')
            out.push_back(c);
        else if (c >= 'A' && c <= 'F')
            out.push_back(static_cast<char>(c - 'A' + 'a'));
        else
            throw std::invalid_argument(std::string(what) + ": invalid hex character");
    }
    return out;
}

}  // namespace detail

inline ChecksumRecord fingerprint(std::string_view bytes, std::string filename) {
    return {sha2::sha256_hex(bytes), sha2::sha512_hex(bytes), std::move(filename)};
}

/// Two-row checksum table in the style of the published forecast tables.
inline std::string emit_checksum_table(const ChecksumRecord& rec) {
    std::string out;
    out += "Document name: " + rec.filename + "\n";
    out += "SHA256SUM  " + detail::normalized_hex(rec.sha256_hex, 64, "sha256") + "\n";
    out += "SHA512SUM  " + detail::normalized_hex(rec.sha512_hex, 128, "sha512") + "\n";
    return out;
}

/// Conventional checksum-file lines ("<hex><two spaces><filename>"), one
/// per algorithm, verifiable by standard tooling.
inline std::string emit_checksum_lines(const ChecksumRecord& rec) {
    std::string out;
    out += detail::normalized_hex(rec.sha256_hex, 64, "sha256") + "  " + rec.filename + "\n";
    out += detail::normalized_hex(rec.sha512_hex, 128, "sha512") + "  " + rec.filename + "\n";
    return out;
}

/// Parses checksum-file lines back into a record; the algorithm is
/// recognized by digest length, and both algorithms must be present for
/// the same filename.
inline ChecksumRecord parse_checksum_lines(std::string_view text) {
    ChecksumRecord rec;
    bool have256 = false, have512 = false;
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
        if (line.empty())
            continue;
        const std::size_t sep = line.find("  ");
        if (sep == std::string_view::npos)
            throw std::invalid_argument("checksum line " + std::to_string(line_no) +
                                        ": expected '<hex>  <filename>'");
        const std::string_view hex = line.substr(0, sep);
        const std::string_view filename = line.substr(sep + 2);
        if (filename.empty())
            throw std::invalid_argument("checksum line " + std::to_string(line_no) +
                                        ": missing filename");
        std::string normalized;
        bool is256 = false;
        if (hex.size() == 64) {
            normalized = detail::normalized_hex(hex, 64, "sha256");
            is256 = true;
        } else if (hex.size() == 128) {
            normalized = detail::normalized_hex(hex, 128, "sha512");
        } else {
            throw std::invalid_argument("checksum line " + std::to_string(line_no) +
                                        ": digest length " + std::to_string(hex.size()) +
                                        " matches neither SHA-256 nor SHA-512");
        }
        if (!rec.filename.empty() && rec.filename != filename)
            throw std::invalid_argument("checksum lines disagree on the filename");
        rec.filename = std::string(filename);
        if (is256) {
            if (have256)
                throw std::invalid_argument("duplicate SHA-256 checksum line");
            rec.sha256_hex = normalized;
            have256 = true;
        } else {
            if (have512)
                throw std::invalid_argument("duplicate SHA-512 checksum line");
            rec.sha512_hex = normalized;
            have512 = true;
        }
    }
    if (!have256 || !have512)
        throw std::invalid_argument("checksum file must carry one SHA-256 and one SHA-512 line");
    return rec;
}

struct VerifyOutcome {
    bool sha256_match = false;
    bool sha512_match = false;

    bool pass() const { return sha256_match && sha512_match; }
};

/// Recomputes both digests and compares against the claim. Malformed hex in
/// the claim is an error, not a mismatch.
inline VerifyOutcome verify(std::string_view bytes, const ChecksumRecord& claimed) {
    const std::string want256 = detail::normalized_hex(claimed.sha256_hex, 64, "sha256");
    const std::string want512 = detail::normalized_hex(claimed.sha512_hex, 128, "sha512");
    VerifyOutcome outcome;
    outcome.sha256_match = sha2::sha256_hex(bytes) == want256;
    outcome.sha512_match = sha2::sha512_hex(bytes) == want512;
    return outcome;
}

/// Commitment metadata: the fingerprint published on sealed_on, with the
/// document promised public by reveal_due.
struct SealedForecast {
    ChecksumRecord checksum;
    Date sealed_on;
    Date reveal_due;

    void validate() const {
        if (!(sealed_on <= reveal_due))
            throw std::invalid_argument("sealed_on must not postdate reveal_due");
        detail::normalized_hex(checksum.sha256_hex, 64, "sha256");
        detail::normalized_hex(checksum.sha512_hex, 128, "sha512");
    }
};

}  // namespace lppl
