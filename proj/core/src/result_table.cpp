#include "rsmastat/result_table.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace rsmastat {

const char* const kRowHeader =
    "scenario,strategy,snr_db,draw,mmf_rate_bps_hz,iterations,converged,wall_ms,mmf_rate_eval_bps_hz,status";
const char* const kAggregateHeader =
    "scenario,strategy,snr_db,mean_mmf_rate,stderr,n_draws,mean_mmf_rate_eval,stderr_eval";
const char* const kStartHeader =
    "scenario,strategy,snr_db,draw,start,mmf_rate_bps_hz,iterations,converged,monotonicity_warning,status";

namespace {

auto sort_key(const std::string& scenario, Strategy s, double snr, int draw) {
    return std::make_tuple(scenario, static_cast<int>(s), snr, draw);
}

struct Moments {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    double sum = 0.0;
    for (double x : v) sum += x;
    m.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        const double n = static_cast<double>(v.size());
        m.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return m;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
    return out;
}

void check_written(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double to_double(const std::string& s, int line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

int to_int(const std::string& s, int line) {
    const double v = to_double(s, line);
    if (v != std::floor(v)) throw std::runtime_error("line " + std::to_string(line) + ": bad integer '" + s + "'");
    return static_cast<int>(v);
}

}  // namespace

void ResultTable::sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return sort_key(a.scenario, a.strategy, a.snr_db, a.draw) < sort_key(b.scenario, b.strategy, b.snr_db, b.draw);
    });
    std::stable_sort(starts.begin(), starts.end(), [](const StartRecord& a, const StartRecord& b) {
        return sort_key(a.scenario, a.strategy, a.snr_db, a.draw) < sort_key(b.scenario, b.strategy, b.snr_db, b.draw);
    });
}

bool ResultTable::has_failures() const {
    return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.ok(); });
}

std::vector<AggregateRow> ResultTable::aggregate() const {
    using Key = std::tuple<std::string, int, double>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const ResultRow& r : rows) {
        if (!r.ok()) continue;
        auto& g = groups[Key{r.scenario, static_cast<int>(r.strategy), r.snr_db}];
        g.first.push_back(r.mmf_rate);
        g.second.push_back(r.mmf_rate_eval);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, values] : groups) {
        AggregateRow a;
        a.scenario = std::get<0>(key);
        a.strategy = static_cast<Strategy>(std::get<1>(key));
        a.snr_db = std::get<2>(key);
        const Moments in = moments(values.first);
        const Moments ev = moments(values.second);
        a.mean_mmf_rate = in.mean;
        a.stderr_mmf_rate = in.stderr_;
        a.mean_mmf_rate_eval = ev.mean;
        a.stderr_mmf_rate_eval = ev.stderr_;
        a.n_draws = static_cast<int>(values.first.size());
        out.push_back(a);
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void emit_csv(std::ostream& os, const ResultTable& table) {
    os << kRowHeader << '\n';
    for (const ResultRow& r : table.rows) {
        os << r.scenario << ',' << to_string(r.strategy) << ',' << format_number(r.snr_db) << ',' << r.draw << ','
           << format_number(r.mmf_rate) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
           << format_number(r.wall_ms) << ',' << format_number(r.mmf_rate_eval) << ',' << r.status << '\n';
    }
}

void emit_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    os << kAggregateHeader << '\n';
    for (const AggregateRow& a : rows) {
        os << a.scenario << ',' << to_string(a.strategy) << ',' << format_number(a.snr_db) << ','
           << format_number(a.mean_mmf_rate) << ',' << format_number(a.stderr_mmf_rate) << ',' << a.n_draws << ','
           << format_number(a.mean_mmf_rate_eval) << ',' << format_number(a.stderr_mmf_rate_eval) << '\n';
    }
}

void emit_starts_csv(std::ostream& os, const ResultTable& table) {
    os << kStartHeader << '\n';
    for (const StartRecord& s : table.starts) {
        os << s.scenario << ',' << to_string(s.strategy) << ',' << format_number(s.snr_db) << ',' << s.draw << ','
           << s.start << ',' << format_number(s.mmf_rate) << ',' << s.iterations << ',' << (s.converged ? 1 : 0)
           << ',' << (s.monotonicity_warning ? 1 : 0) << ',' << s.status << '\n';
    }
}

void emit_csv(const std::string& path, const ResultTable& table) {
    std::ofstream out = open_for_write(path);
    emit_csv(out, table);
    check_written(out, path);
}

void emit_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    std::ofstream out = open_for_write(path);
    emit_aggregate_csv(out, rows);
    check_written(out, path);
}

void emit_starts_csv(const std::string& path, const ResultTable& table) {
    std::ofstream out = open_for_write(path);
    emit_starts_csv(out, table);
    check_written(out, path);
}

ResultTable parse_csv(std::istream& is) {
    ResultTable table;
    std::string line;
    if (!std::getline(is, line) || line != kRowHeader)
        throw std::runtime_error("line 1: expected header '" + std::string(kRowHeader) + "'");
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != 10)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                                     std::to_string(f.size()));
        ResultRow r;
        r.scenario = f[0];
        try {
            r.strategy = parse_strategy(f[1]);
        } catch (const std::exception&) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": unknown strategy '" + f[1] + "'");
        }
        r.snr_db = to_double(f[2], line_no);
        r.draw = to_int(f[3], line_no);
        r.mmf_rate = to_double(f[4], line_no);
        r.iterations = to_int(f[5], line_no);
        r.converged = to_int(f[6], line_no) != 0;
        r.wall_ms = to_double(f[7], line_no);
        r.mmf_rate_eval = to_double(f[8], line_no);
        r.status = f[9];
        table.rows.push_back(std::move(r));
    }
    return table;
}

ResultTable parse_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": " + std::strerror(errno));
    try {
        return parse_csv(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw PreconditionError("least_squares_slope: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw PreconditionError("least_squares_slope: abscissae are all equal");
    return sxy / sxx;
}

double estimate_slope(const ResultTable& table, Strategy strategy, double snr_lo, double snr_hi,
                      RateColumn column, const std::string& scenario) {
    if (snr_lo > snr_hi) throw PreconditionError("estimate_slope: window lower end exceeds upper end");
    std::vector<double> x, y;
    for (const AggregateRow& a : table.aggregate()) {
        if (a.strategy != strategy || a.snr_db < snr_lo || a.snr_db > snr_hi) continue;
        if (!scenario.empty() && a.scenario != scenario) continue;
        if (!scenario.empty() || std::find(x.begin(), x.end(), a.snr_db * std::log2(10.0) / 10.0) == x.end()) {
            x.push_back(a.snr_db * std::log2(10.0) / 10.0);
            y.push_back(column == RateColumn::kInSample ? a.mean_mmf_rate : a.mean_mmf_rate_eval);
        } else {
            throw PreconditionError("estimate_slope: several scenarios share an SNR point; name one");
        }
    }
    if (x.size() < 2) throw PreconditionError("estimate_slope: window holds fewer than two SNR points");
    return least_squares_slope(x, y);
}

}  // namespace rsmastat
