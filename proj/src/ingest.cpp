#include "cad/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace cad {

namespace {

// Howard Hinnant's days-from-civil; avoids timegm and locale issues.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int month_from_abbrev(std::string_view m) {
    static constexpr std::array<std::string_view, 12> names = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun",
        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (std::size_t i = 0; i < names.size(); ++i)
        if (m == names[i]) return static_cast<int>(i) + 1;
    return 0;
}

bool parse_int(std::string_view s, int& out) {
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// [10/Oct/2020:13:55:36 +0000] -> UTC epoch seconds.
std::optional<std::int64_t> parse_clf_time(std::string_view t) {
    // dd/Mon/yyyy:HH:MM:SS zone
    if (t.size() < 20) return std::nullopt;
    int day, year, hh, mm, ss;
    if (t[2] != '/' || t[6] != '/' || t[11] != ':' || t[14] != ':' || t[17] != ':')
        return std::nullopt;
    if (!parse_int(t.substr(0, 2), day) || !parse_int(t.substr(7, 4), year) ||
        !parse_int(t.substr(12, 2), hh) || !parse_int(t.substr(15, 2), mm) ||
        !parse_int(t.substr(18, 2), ss))
        return std::nullopt;
    const int month = month_from_abbrev(t.substr(3, 3));
    if (month == 0 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60)
        return std::nullopt;
    std::int64_t offset = 0;
    const auto space = t.find(' ');
    if (space != std::string_view::npos && t.size() >= space + 6) {
        const char sign = t[space + 1];
        int oh, om;
        if ((sign == '+' || sign == '-') && parse_int(t.substr(space + 2, 2), oh) &&
            parse_int(t.substr(space + 4, 2), om)) {
            offset = oh * 3600 + om * 60;
            if (sign == '-') offset = -offset;
        } else {
            return std::nullopt;
        }
    }
    const std::int64_t local =
        days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
        hh * 3600 + mm * 60 + ss;
    return local - offset; // stored as UTC
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

std::optional<Event> LogParser::parse_line(std::string_view line) {
    ++stats_.lines;
    line = trim(line);
    if (line.empty()) {
        ++stats_.skipped;
        return std::nullopt;
    }
    const auto skip = [this]() -> std::optional<Event> {
        ++stats_.skipped;
        ++stats_.warnings;
        return std::nullopt;
    };

    const auto ip_end = line.find(' ');
    if (ip_end == std::string_view::npos || ip_end == 0) return skip();
    const std::string_view ip = line.substr(0, ip_end);

    const auto tb = line.find('[');
    const auto te = line.find(']', tb == std::string_view::npos ? 0 : tb);
    if (tb == std::string_view::npos || te == std::string_view::npos) return skip();
    const auto ts = parse_clf_time(line.substr(tb + 1, te - tb - 1));
    if (!ts) return skip();

    const auto qb = line.find('"', te);
    const auto qe = qb == std::string_view::npos ? std::string_view::npos : line.find('"', qb + 1);
    if (qb == std::string_view::npos || qe == std::string_view::npos) return skip();
    const std::string_view request = line.substr(qb + 1, qe - qb - 1);

    // "METHOD target PROTO"; the target is what we aggregate on.
    const auto m_end = request.find(' ');
    if (m_end == std::string_view::npos) return skip();
    auto rest = request.substr(m_end + 1);
    const auto p_begin = rest.rfind(' ');
    std::string_view target = p_begin == std::string_view::npos ? rest : rest.substr(0, p_begin);
    target = trim(target);
    if (target.empty()) return skip();
    if (strip_query_) {
        const auto q = target.find('?');
        if (q != std::string_view::npos) target = target.substr(0, q);
        if (target.empty()) return skip();
    }

    ++stats_.events;
    Event ev;
    ev.timestamp = *ts;
    ev.entity = std::string(ip);
    ev.feature = std::string(target);
    ev.value = 1.0;
    return ev;
}

std::optional<Event> parse_access_log(std::string_view line, bool strip_query) {
    LogParser parser(strip_query);
    return parser.parse_line(line);
}

std::int64_t parse_date_utc(std::string_view date) {
    int y, m, d;
    if (date.size() != 10 || date[4] != '-' || date[7] != '-' ||
        !parse_int(date.substr(0, 4), y) || !parse_int(date.substr(5, 2), m) ||
        !parse_int(date.substr(8, 2), d))
        throw std::runtime_error("bad date: " + std::string(date));
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d)) * 86400;
}

std::vector<Event> parse_price_csv(std::istream& in, std::string_view symbol_hint,
                                   ParseStats* stats) {
    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("price csv: empty file");
    ++st.lines;

    int sym_col = -1, date_col = -1, close_col = -1;
    {
        const auto fields = split(trim(line), ',');
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string name = lower(trim(fields[i]));
            if (name == "symbol" || name == "ticker") sym_col = static_cast<int>(i);
            else if (name == "date") date_col = static_cast<int>(i);
            else if (name == "close") close_col = static_cast<int>(i);
        }
    }
    if (date_col < 0 || close_col < 0)
        throw std::runtime_error("price csv: header must contain date and close columns");
    if (sym_col < 0 && symbol_hint.empty())
        throw std::runtime_error("price csv: no symbol column and no per-file symbol");

    std::vector<Event> events;
    while (std::getline(in, line)) {
        ++st.lines;
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto fields = split(t, ',');
        const auto need = static_cast<std::size_t>(std::max({sym_col, date_col, close_col})) + 1;
        if (fields.size() < need) {
            ++st.skipped;
            ++st.warnings;
            continue;
        }
        const std::string date(trim(fields[static_cast<std::size_t>(date_col)]));
        const std::string close_s(trim(fields[static_cast<std::size_t>(close_col)]));
        char* endp = nullptr;
        const double close = std::strtod(close_s.c_str(), &endp);
        if (date.empty() || endp == close_s.c_str() || *endp != '\0' || !(close > 0.0)) {
            ++st.skipped;
            continue;
        }
        std::int64_t ts;
        try {
            ts = parse_date_utc(date);
        } catch (const std::runtime_error&) {
            ++st.skipped;
            ++st.warnings;
            continue;
        }
        Event ev;
        ev.timestamp = ts;
        ev.entity = sym_col >= 0 ? std::string(trim(fields[static_cast<std::size_t>(sym_col)]))
                                 : std::string(symbol_hint);
        ev.feature = date;
        ev.value = close;
        if (ev.entity.empty()) {
            ++st.skipped;
            continue;
        }
        ++st.events;
        events.push_back(std::move(ev));
    }
    return events;
}

std::optional<FeatureMatrix> build_count_matrix(std::span<const Event> events,
                                                std::size_t min_entities) {
    if (events.empty()) return std::nullopt;
    // Canonical (sorted) row/col order so the matrix is independent of
    // event arrival order.
    std::map<std::string, std::size_t> row_index, col_index;
    for (const Event& ev : events) {
        row_index.emplace(ev.feature, 0);
        col_index.emplace(ev.entity, 0);
    }
    if (col_index.size() < min_entities || row_index.size() < 2) return std::nullopt;

    std::vector<std::string> rows, cols;
    rows.reserve(row_index.size());
    cols.reserve(col_index.size());
    for (auto& [id, idx] : row_index) {
        idx = rows.size();
        rows.push_back(id);
    }
    for (auto& [id, idx] : col_index) {
        idx = cols.size();
        cols.push_back(id);
    }
    FeatureMatrix X(std::move(rows), std::move(cols));
    for (const Event& ev : events)
        X.at(row_index[ev.feature], col_index[ev.entity]) += ev.value;
    return X;
}

std::optional<FeatureMatrix> build_price_change_matrix(
    std::span<const Event> events, std::span<const std::string> window_dates,
    std::size_t min_entities, WindowStats* stats) {
    if (window_dates.size() < 3) return std::nullopt; // need M >= 2 changes

    std::unordered_map<std::string_view, std::size_t> date_pos;
    for (std::size_t i = 0; i < window_dates.size(); ++i) date_pos.emplace(window_dates[i], i);

    // symbol -> closing prices aligned with window_dates (0 = missing).
    std::map<std::string, std::vector<double>> series;
    for (const Event& ev : events) {
        const auto it = date_pos.find(ev.feature);
        if (it == date_pos.end()) continue;
        auto& prices = series.try_emplace(ev.entity, window_dates.size(), 0.0).first->second;
        prices[it->second] = ev.value;
    }

    std::vector<std::string> cols;
    for (const auto& [symbol, prices] : series) {
        const bool complete =
            std::all_of(prices.begin(), prices.end(), [](double p) { return p > 0.0; });
        if (complete)
            cols.push_back(symbol);
        else if (stats)
            ++stats->dropped_symbols;
    }
    if (cols.size() < min_entities) return std::nullopt;

    std::vector<std::string> rows(window_dates.begin() + 1, window_dates.end());
    FeatureMatrix X(std::move(rows), std::move(cols));
    for (std::size_t c = 0; c < X.cols(); ++c) {
        const auto& prices = series[X.col_ids[c]];
        for (std::size_t r = 0; r + 1 < window_dates.size(); ++r)
            X.at(r, c) = 100.0 * (prices[r + 1] - prices[r]) / prices[r];
    }
    return X;
}

std::vector<FeatureMatrix> slide_windows(std::vector<Event> events, const WindowSpec& spec,
                                         StreamKind kind, WindowStats* stats) {
    if (spec.step <= 0 || spec.step > spec.length)
        throw std::invalid_argument("WindowSpec: need 0 < step <= length");
    if (spec.min_entities < 2)
        throw std::invalid_argument("WindowSpec: min_entities must be at least 2");
    WindowStats local;
    WindowStats& st = stats ? *stats : local;
    std::vector<FeatureMatrix> out;
    if (events.empty()) return out;

    // Canonical order: tolerant of disorder and duplicates in the input.
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.timestamp, a.entity, a.feature, a.value) <
               std::tie(b.timestamp, b.entity, b.feature, b.value);
    });

    if (kind == StreamKind::access_log) {
        const std::int64_t t0 = events.front().timestamp;
        const std::int64_t t_max = events.back().timestamp;
        for (std::size_t k = 0;; ++k) {
            const std::int64_t start = t0 + static_cast<std::int64_t>(k) * spec.step;
            const std::int64_t end = start + spec.length;
            if (end > t_max + 1) break;
            const auto lo = std::lower_bound(events.begin(), events.end(), start,
                                             [](const Event& e, std::int64_t t) { return e.timestamp < t; });
            const auto hi = std::lower_bound(lo, events.end(), end,
                                             [](const Event& e, std::int64_t t) { return e.timestamp < t; });
            auto X = build_count_matrix(std::span<const Event>(&*lo, static_cast<std::size_t>(hi - lo)),
                                        spec.min_entities);
            if (X) {
                X->window_id = k;
                X->start = start;
                X->end = end;
                out.push_back(std::move(*X));
                ++st.windows_built;
            } else {
                ++st.windows_skipped;
            }
        }
    } else {
        std::vector<std::string> dates;
        for (const Event& ev : events) dates.push_back(ev.feature);
        std::sort(dates.begin(), dates.end());
        dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

        const auto len = static_cast<std::size_t>(spec.length);
        const auto step = static_cast<std::size_t>(spec.step);
        for (std::size_t k = 0; k * step + len <= dates.size(); ++k) {
            const std::span<const std::string> slice(dates.data() + k * step, len);
            auto X = build_price_change_matrix(events, slice, spec.min_entities, &st);
            if (X) {
                X->window_id = k;
                X->start = parse_date_utc(slice.front());
                X->end = parse_date_utc(slice.back()) + 86400;
                out.push_back(std::move(*X));
                ++st.windows_built;
            } else {
                ++st.windows_skipped;
            }
        }
    }
    return out;
}

} // namespace cad
