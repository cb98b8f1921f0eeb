#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fsv {

struct GmmFit;

// Daily volatility-proxy series in variance units.
struct VolSeries {
    std::vector<std::string> dates;  // empty, or same length as values and strictly increasing
    std::vector<double> values;
    std::optional<int> n_intraday;
    std::string label;
};

struct CsvFormat {
    int date_col = 0;
    int value_col = 1;
    char delimiter = ',';
    bool has_header = true;
};

// What the outlier filter did; indices refer to the original input order.
struct FilterReport {
    std::size_t removed_zero = 0;
    std::vector<std::size_t> removed_mad;
    std::size_t kept = 0;
};

// Reads a CSV of (date, value) rows. Tolerates a UTF-8 BOM and CRLF line
// endings; any unparsable or non-finite row is an error naming the row.
VolSeries load_series(const std::filesystem::path& path, const CsvFormat& format = {});

// Removes exact zeros, then removes points deviating from their neighborhood
// mean by more than mad_mult mean absolute deviations. Neighborhood: up to
// `window` nearest observations centered on the point and excluding it,
// truncated at the series edges. Single pass; decisions use original values.
std::pair<VolSeries, FilterReport> filter_outliers(const VolSeries& series, int window = 50,
                                                   double mad_mult = 30.0);

// CSV writer (`date,value` header, shortest round-trip numbers). Writes to a
// temp file in the target directory and renames, so failures leave no
// partial output.
void write_series(const std::filesystem::path& path, const VolSeries& series);

// JSON fit document; same atomic-replace discipline.
void write_fit(const std::filesystem::path& path, const GmmFit& fit);

// Display-only conversion to annualized volatility units; estimation always
// stays in daily variance.
double annualized_vol(double daily_variance);

}  // namespace fsv
