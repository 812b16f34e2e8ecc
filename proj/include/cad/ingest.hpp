#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cad/feature_matrix.hpp"

namespace cad {

/// One parsed observation: (entity, feature, value) at a point in time.
struct Event {
    std::int64_t timestamp = 0; // UTC epoch seconds
    std::string entity;         // IP address or stock symbol
    std::string feature;        // URL path or trading date
    double value = 0.0;         // request count contribution or closing price
};

enum class StreamKind { access_log, price_csv };

struct WindowSpec {
    std::int64_t length = 3600; // seconds (logs) or business days (prices)
    std::int64_t step = 900;    // same unit; 0 < step <= length
    std::size_t min_entities = 2;
};

struct ParseStats {
    std::size_t lines = 0;
    std::size_t events = 0;
    std::size_t skipped = 0;
    std::size_t warnings = 0;
};

/// Apache combined/common log format parser. Malformed lines are skipped,
/// never fatal; the warning counter in `stats` tracks them.
class LogParser {
public:
    explicit LogParser(bool strip_query = true) : strip_query_(strip_query) {}

    std::optional<Event> parse_line(std::string_view line);
    const ParseStats& stats() const { return stats_; }

private:
    bool strip_query_;
    ParseStats stats_;
};

/// Single access-log record -> Event, or nullopt for a skip. Stateless
/// convenience wrapper over LogParser.
std::optional<Event> parse_access_log(std::string_view line, bool strip_query = true);

/// Price CSV: header `symbol,date,close` or, for per-symbol files,
/// `date,close` with the symbol taken from `symbol_hint`. Rows with a
/// nonpositive or unparseable close are skipped. A missing/unusable header
/// throws std::runtime_error.
std::vector<Event> parse_price_csv(std::istream& in, std::string_view symbol_hint,
                                   ParseStats* stats = nullptr);

/// `timestamp` for a YYYY-MM-DD date string (UTC midnight).
std::int64_t parse_date_utc(std::string_view date);

struct WindowStats {
    std::size_t windows_built = 0;
    std::size_t windows_skipped = 0;
    std::size_t dropped_symbols = 0; // price mode: gap or nonpositive price
};

/// Count matrix over the events of one window: data(i,j) = total value of
/// events with feature i and entity j. Returns nullopt if fewer than
/// min_entities distinct entities (or fewer than 2 features) were seen.
std::optional<FeatureMatrix> build_count_matrix(std::span<const Event> events,
                                                std::size_t min_entities);

/// Price-change matrix for one window of aligned dates: columns are symbols
/// with a positive close on every date, entries are percentage changes
/// 100*(p[i+1]-p[i])/p[i]. Symbols with gaps or nonpositive prices are
/// dropped from the window.
std::optional<FeatureMatrix> build_price_change_matrix(
    std::span<const Event> events, std::span<const std::string> window_dates,
    std::size_t min_entities, WindowStats* stats = nullptr);

/// Materialized sliding windows over an event batch. Events are sorted
/// internally; disorder in the input is tolerated. Log windows are
/// [t0 + k*step, t0 + k*step + length) in seconds; price windows cover
/// business-day positions [k*step, k*step + length) of the sorted distinct
/// trading dates. Windows that fail the build rules are skipped.
std::vector<FeatureMatrix> slide_windows(std::vector<Event> events, const WindowSpec& spec,
                                         StreamKind kind, WindowStats* stats = nullptr);

} // namespace cad
