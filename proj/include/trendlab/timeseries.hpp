#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trendlab {

// A single series on a strictly increasing integer tick axis. Ticks are plain
// integers for synthetic data, or day serials (days since 1970-01-01) when the
// source CSV carries ISO dates.
struct TimeSeries {
    std::vector<std::int64_t> ticks;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    // throws std::invalid_argument on non-increasing ticks, NaN/inf values,
    // or mismatched vector lengths
    void validate() const;

    static TimeSeries from_values(std::vector<double> v,
                                  std::int64_t first_tick = 0);
};

// First differences D_t = S_t - S_{t-1}. One element shorter than the input;
// each difference keeps the tick of its right endpoint.
TimeSeries diff(const TimeSeries& s);

// Cumulative sum anchored at s0, the inverse of diff up to the anchor value.
// The anchor point is placed one tick before the first increment.
TimeSeries cumsum(const TimeSeries& d, double s0 = 0.0);

enum class JoinPolicy {
    inner_join,   // keep only ticks present in every series
    forward_fill, // union of ticks; missing values carried forward and flagged
};

// Aligned multi-asset panel. columns[k][i] is asset k at ticks[i]. When the
// panel was built with forward_fill, filled[k][i] == 1 marks carried values;
// the mask is empty for inner joins.
struct AssetPanel {
    std::vector<std::int64_t> ticks;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::vector<std::uint8_t>> filled;
    bool dated = false;

    std::size_t n_assets() const { return columns.size(); }
    std::size_t n_ticks() const { return ticks.size(); }
    TimeSeries series(std::size_t k) const;
    void validate() const;
};

AssetPanel align(const std::vector<TimeSeries>& series,
                 const std::vector<std::string>& names,
                 JoinPolicy policy = JoinPolicy::inner_join);

struct CsvOptions {
    char delimiter = ',';
    std::string time_column;  // empty: first column is the time axis
    JoinPolicy join = JoinPolicy::inner_join; // treatment of blank cells
    bool log_prices = false;  // store log(level) so returns are additive
};

// Reads a (time, asset...) table. Blank cells mean "no observation for that
// asset on that row" and are resolved by the join policy; any other
// unparseable cell is an error that reports file and line.
AssetPanel load_csv_panel(const std::string& path, const CsvOptions& opts = {});

void write_csv(const std::string& path, const AssetPanel& panel);

// Civil-calendar day serials (proleptic Gregorian, 1970-01-01 == 0).
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

// Accepts either a plain integer tick or an ISO yyyy-mm-dd date.
// Returns false if the token is neither.
bool parse_tick(const std::string& token, std::int64_t& tick, bool& is_date);
std::string format_tick(std::int64_t tick, bool dated);

} // namespace trendlab
