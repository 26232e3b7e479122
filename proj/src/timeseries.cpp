#include "trendlab/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace trendlab {

void TimeSeries::validate() const {
    if (ticks.size() != values.size())
        throw std::invalid_argument("TimeSeries: ticks/values length mismatch");
    for (std::size_t i = 1; i < ticks.size(); ++i)
        if (ticks[i] <= ticks[i - 1])
            throw std::invalid_argument(
                "TimeSeries: ticks must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("TimeSeries: non-finite value");
}

TimeSeries TimeSeries::from_values(std::vector<double> v,
                                   std::int64_t first_tick) {
    TimeSeries s;
    s.values = std::move(v);
    s.ticks.resize(s.values.size());
    for (std::size_t i = 0; i < s.ticks.size(); ++i)
        s.ticks[i] = first_tick + static_cast<std::int64_t>(i);
    return s;
}

TimeSeries diff(const TimeSeries& s) {
    if (s.size() < 2)
        throw std::invalid_argument("diff: need at least two samples");
    TimeSeries d;
    d.ticks.assign(s.ticks.begin() + 1, s.ticks.end());
    d.values.resize(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i)
        d.values[i - 1] = s.values[i] - s.values[i - 1];
    return d;
}

TimeSeries cumsum(const TimeSeries& d, double s0) {
    TimeSeries s;
    s.ticks.reserve(d.size() + 1);
    s.values.reserve(d.size() + 1);
    s.ticks.push_back(d.empty() ? 0 : d.ticks.front() - 1);
    s.values.push_back(s0);
    double acc = s0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc += d.values[i];
        s.ticks.push_back(d.ticks[i]);
        s.values.push_back(acc);
    }
    return s;
}

TimeSeries AssetPanel::series(std::size_t k) const {
    if (k >= columns.size())
        throw std::invalid_argument("AssetPanel: asset index out of range");
    TimeSeries s;
    s.ticks = ticks;
    s.values = columns[k];
    return s;
}

void AssetPanel::validate() const {
    if (names.size() != columns.size())
        throw std::invalid_argument("AssetPanel: names/columns mismatch");
    for (const auto& col : columns)
        if (col.size() != ticks.size())
            throw std::invalid_argument("AssetPanel: ragged columns");
    if (!filled.empty() && filled.size() != columns.size())
        throw std::invalid_argument("AssetPanel: fill mask shape mismatch");
    for (std::size_t i = 1; i < ticks.size(); ++i)
        if (ticks[i] <= ticks[i - 1])
            throw std::invalid_argument(
                "AssetPanel: ticks must be strictly increasing");
}

AssetPanel align(const std::vector<TimeSeries>& series,
                 const std::vector<std::string>& names, JoinPolicy policy) {
    if (series.empty())
        throw std::invalid_argument("align: no series given");
    if (names.size() != series.size())
        throw std::invalid_argument("align: one name per series required");
    for (const auto& s : series) s.validate();

    AssetPanel panel;
    panel.names = names;

    if (policy == JoinPolicy::inner_join) {
        // intersect the (sorted) tick axes
        std::vector<std::int64_t> common = series[0].ticks;
        for (std::size_t k = 1; k < series.size(); ++k) {
            std::vector<std::int64_t> next;
            std::set_intersection(common.begin(), common.end(),
                                  series[k].ticks.begin(),
                                  series[k].ticks.end(),
                                  std::back_inserter(next));
            common.swap(next);
        }
        panel.ticks = std::move(common);
        panel.columns.resize(series.size());
        for (std::size_t k = 0; k < series.size(); ++k) {
            panel.columns[k].reserve(panel.ticks.size());
            std::size_t j = 0;
            for (std::int64_t t : panel.ticks) {
                while (series[k].ticks[j] < t) ++j;
                panel.columns[k].push_back(series[k].values[j]);
            }
        }
        return panel;
    }

    // forward_fill: union of axes, carry the last seen value, flag the carries
    std::vector<std::int64_t> all;
    for (const auto& s : series)
        all.insert(all.end(), s.ticks.begin(), s.ticks.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    panel.columns.assign(series.size(), {});
    panel.filled.assign(series.size(), {});
    std::vector<std::size_t> pos(series.size(), 0);
    std::vector<double> last(series.size(), std::nan(""));
    std::vector<char> seen(series.size(), 0);

    std::vector<std::int64_t> kept;
    for (std::int64_t t : all) {
        bool all_seen = true;
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (pos[k] < series[k].ticks.size() && series[k].ticks[pos[k]] == t) {
                last[k] = series[k].values[pos[k]];
                seen[k] = 1;
                ++pos[k];
            }
            all_seen = all_seen && seen[k];
        }
        // rows before every series has started cannot be filled; drop them
        if (!all_seen) continue;
        kept.push_back(t);
        for (std::size_t k = 0; k < series.size(); ++k) {
            bool fresh = pos[k] > 0 && series[k].ticks[pos[k] - 1] == t;
            panel.columns[k].push_back(last[k]);
            panel.filled[k].push_back(fresh ? 0 : 1);
        }
    }
    panel.ticks = std::move(kept);
    return panel;
}

// --- calendar helpers (civil <-> day serial, proleptic Gregorian) ---

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_tick(const std::string& token, std::int64_t& tick, bool& is_date) {
    // ISO date: yyyy-mm-dd
    if (token.size() == 10 && token[4] == '-' && token[7] == '-') {
        int y, m, d;
        if (std::sscanf(token.c_str(), "%4d-%2d-%2d", &y, &m, &d) == 3 &&
            m >= 1 && m <= 12 && d >= 1 && d <= 31) {
            tick = days_from_civil(y, m, d);
            is_date = true;
            return true;
        }
        return false;
    }
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [p, ec] = std::from_chars(first, last, tick);
    if (ec == std::errc() && p == last) {
        is_date = false;
        return true;
    }
    return false;
}

std::string format_tick(std::int64_t tick, bool dated) {
    if (!dated) return std::to_string(tick);
    int y, m, d;
    civil_from_days(tick, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

// --- CSV ---

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        // trim surrounding whitespace
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{}
                                             : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

} // namespace

AssetPanel load_csv_panel(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_csv_panel: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv_panel: '" + path + "' is empty");
    auto header = split_line(line, opts.delimiter);
    if (header.size() < 2)
        throw std::runtime_error("load_csv_panel: '" + path +
                                 "' needs a time column and at least one value column");

    std::size_t time_col = 0;
    if (!opts.time_column.empty()) {
        auto it = std::find(header.begin(), header.end(), opts.time_column);
        if (it == header.end())
            throw std::runtime_error("load_csv_panel: time column '" +
                                     opts.time_column + "' not in header");
        time_col = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::string> names;
    std::vector<std::size_t> value_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == time_col) continue;
        names.push_back(header[c]);
        value_cols.push_back(c);
    }

    std::vector<TimeSeries> series(names.size());
    bool dated = false, dated_set = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto cells = split_line(line, opts.delimiter);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv_panel: " + path + ":" +
                                     std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        std::int64_t tick;
        bool is_date;
        if (!parse_tick(cells[time_col], tick, is_date))
            throw std::runtime_error("load_csv_panel: " + path + ":" +
                                     std::to_string(line_no) +
                                     ": bad time value '" + cells[time_col] + "'");
        if (!dated_set) {
            dated = is_date;
            dated_set = true;
        } else if (is_date != dated) {
            throw std::runtime_error("load_csv_panel: " + path + ":" +
                                     std::to_string(line_no) +
                                     ": mixed date and integer time values");
        }
        for (std::size_t k = 0; k < value_cols.size(); ++k) {
            const std::string& cell = cells[value_cols[k]];
            if (cell.empty()) continue; // missing observation for this asset
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw std::runtime_error("load_csv_panel: " + path + ":" +
                                         std::to_string(line_no) +
                                         ": bad number '" + cell + "' in column '" +
                                         names[k] + "'");
            if (opts.log_prices) {
                if (v <= 0.0)
                    throw std::runtime_error(
                        "load_csv_panel: " + path + ":" + std::to_string(line_no) +
                        ": log_prices requires positive levels, got '" + cell + "'");
                v = std::log(v);
            }
            if (!series[k].ticks.empty() && tick <= series[k].ticks.back())
                throw std::runtime_error("load_csv_panel: " + path + ":" +
                                         std::to_string(line_no) +
                                         ": time values must be strictly increasing");
            series[k].ticks.push_back(tick);
            series[k].values.push_back(v);
        }
    }
    for (std::size_t k = 0; k < series.size(); ++k)
        if (series[k].empty())
            throw std::runtime_error("load_csv_panel: column '" + names[k] +
                                     "' has no data");

    AssetPanel panel = align(series, names, opts.join);
    panel.dated = dated;
    return panel;
}

void write_csv(const std::string& path, const AssetPanel& panel) {
    panel.validate();
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_csv: cannot open '" + path + "'");
    out << (panel.dated ? "date" : "tick");
    for (const auto& n : panel.names) out << ',' << n;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < panel.n_ticks(); ++i) {
        out << format_tick(panel.ticks[i], panel.dated);
        for (std::size_t k = 0; k < panel.n_assets(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", panel.columns[k][i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

} // namespace trendlab
