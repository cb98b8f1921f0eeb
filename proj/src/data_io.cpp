#include "fsv/data_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "fsv/errors.hpp"
#include "fsv/estimator.hpp"
#include "fsv/version.hpp"

namespace fsv {

namespace {

std::string trim(std::string s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == delimiter) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Shortest decimal representation that parses back to the same double.
std::string round_trip(double x) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

// Write-to-temp-then-rename so failures never leave a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& body) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot open '" + tmp.string() + "' for writing");
        }
        out << body;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot rename temp file onto '" + path.string() + "'");
    }
}

nlohmann::json matrix_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

}  // namespace

VolSeries load_series(const std::filesystem::path& path, const CsvFormat& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    VolSeries series;
    series.label = path.stem().string();
    const int need = std::max(format.date_col, format.value_col) + 1;

    std::string line;
    std::size_t row = 0;
    bool header_pending = format.has_header;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1 && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
            line[2] == '\xBF') {
            line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto fields = split(line, format.delimiter);
        if (fields.size() < static_cast<std::size_t>(need)) {
            throw DataError("row " + std::to_string(row) + " of '" + path.string() + "' has " +
                                std::to_string(fields.size()) + " column(s), need " +
                                std::to_string(need),
                            row);
        }
        const std::string value_str = trim(fields[static_cast<std::size_t>(format.value_col)]);
        double value = 0.0;
        const auto res =
            std::from_chars(value_str.data(), value_str.data() + value_str.size(), value);
        if (res.ec != std::errc() || res.ptr != value_str.data() + value_str.size() ||
            !std::isfinite(value)) {
            throw DataError("row " + std::to_string(row) + " of '" + path.string() +
                                "': cannot parse value '" + value_str + "'",
                            row);
        }
        const std::string date = trim(fields[static_cast<std::size_t>(format.date_col)]);
        if (!series.dates.empty() && !(series.dates.back() < date)) {
            throw DataError("row " + std::to_string(row) + " of '" + path.string() +
                                "': dates are not strictly increasing ('" + series.dates.back() +
                                "' then '" + date + "')",
                            row);
        }
        series.dates.push_back(date);
        series.values.push_back(value);
    }
    return series;
}

std::pair<VolSeries, FilterReport> filter_outliers(const VolSeries& series, int window,
                                                   double mad_mult) {
    if (window < 2 || window % 2 != 0) {
        throw std::invalid_argument("filter_outliers: window must be even and >= 2");
    }
    if (!(mad_mult > 0.0)) {
        throw std::invalid_argument("filter_outliers: mad_mult must be > 0");
    }
    const auto& v = series.values;
    if (v.size() < 11) {
        throw DataError("filter_outliers: series shorter than 11 observations");
    }
    const bool dated = !series.dates.empty();

    // Zero removals first; MAD neighborhoods are built on the zero-free series.
    std::vector<std::size_t> orig_index;
    std::vector<double> kept;
    FilterReport report;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw DataError("filter_outliers: non-finite value at position " + std::to_string(i + 1),
                            i + 1);
        }
        if (v[i] == 0.0) {
            ++report.removed_zero;
        } else {
            orig_index.push_back(i);
            kept.push_back(v[i]);
        }
    }
    const std::size_t n = kept.size();
    if (n < 11) {
        throw DataError("filter_outliers: fewer than 11 nonzero observations");
    }

    // Single pass: every decision reads the pre-filter values.
    const std::size_t half = static_cast<std::size_t>(window) / 2;
    std::vector<char> drop(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lo = j >= half ? j - half : 0;
        const std::size_t hi = std::min(n - 1, j + half);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = lo; i <= hi; ++i) {
            if (i == j) continue;
            sum += kept[i];
            ++count;
        }
        const double nb_mean = sum / static_cast<double>(count);
        double abs_dev = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            if (i == j) continue;
            abs_dev += std::abs(kept[i] - nb_mean);
        }
        const double mad = abs_dev / static_cast<double>(count);
        if (std::abs(kept[j] - nb_mean) > mad_mult * mad) drop[j] = 1;
    }

    VolSeries out;
    out.n_intraday = series.n_intraday;
    out.label = series.label;
    for (std::size_t j = 0; j < n; ++j) {
        if (drop[j]) {
            report.removed_mad.push_back(orig_index[j]);
        } else {
            out.values.push_back(kept[j]);
            if (dated) out.dates.push_back(series.dates[orig_index[j]]);
        }
    }
    report.kept = out.values.size();
    return {std::move(out), report};
}

void write_series(const std::filesystem::path& path, const VolSeries& series) {
    if (!series.dates.empty() && series.dates.size() != series.values.size()) {
        throw std::invalid_argument("write_series: dates/values length mismatch");
    }
    std::string body = "date,value\n";
    // Synthetic indices are zero-padded so they sort lexicographically and
    // survive the strictly-increasing date check on reload.
    const std::size_t width = std::to_string(series.values.size()).size();
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (series.dates.empty()) {
            const std::string idx = std::to_string(i + 1);
            body += std::string(width - idx.size(), '0');
            body += idx;
        } else {
            body += series.dates[i];
        }
        body += ',';
        body += round_trip(series.values[i]);
        body += '\n';
    }
    atomic_write(path, body);
}

void write_fit(const std::filesystem::path& path, const GmmFit& fit) {
    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["theta"] = {{"xi", fit.theta.xi},
                    {"lambda", fit.theta.lambda},
                    {"nu", fit.theta.nu},
                    {"hurst", fit.theta.hurst}};
    doc["se"] = fit.se;
    doc["vcov"] = matrix_json(fit.vcov);
    doc["j_stat"] = fit.j_stat;
    doc["j_dof"] = fit.j_dof;
    doc["j_pvalue"] = fit.j_pvalue;
    doc["objective_trace"] = fit.objective_trace;
    doc["weight_matrix"] = matrix_json(fit.weight_matrix);
    doc["converged"] = fit.converged;

    const GmmConfig& c = fit.config;
    nlohmann::json hac = {
        {"kernel", c.hac.kernel == HacKernel::Parzen ? "parzen" : "bartlett"},
        {"bandwidth",
         c.hac.bandwidth == BandwidthRule::AndrewsArma11 ? nlohmann::json("andrews-arma11")
                                                         : nlohmann::json(c.hac.fixed_bandwidth)}};
    nlohmann::json config = {{"lags", c.spec.lags},
                             {"correction", to_string(c.spec.correction)},
                             {"n_intraday", c.spec.n_intraday},
                             {"max_iterations", c.max_iterations},
                             {"tol", c.tol},
                             {"bounds_lower", c.bounds.lower},
                             {"bounds_upper", c.bounds.upper},
                             {"hac", hac},
                             {"max_restarts", c.max_restarts},
                             {"restart_seed", c.restart_seed}};
    if (c.init_overrides) {
        config["init_overrides"] = {{"xi", c.init_overrides->xi},
                                    {"lambda", c.init_overrides->lambda},
                                    {"nu", c.init_overrides->nu},
                                    {"hurst", c.init_overrides->hurst}};
    }
    doc["config"] = config;
    atomic_write(path, doc.dump(2) + "\n");
}

double annualized_vol(double daily_variance) { return std::sqrt(252.0 * daily_variance); }

}  // namespace fsv
