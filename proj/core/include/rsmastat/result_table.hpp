#pragma once

// Per-draw result rows, per-start records, aggregation, CSV emission and
// parsing, and the empirical high-SNR slope.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsmastat/ratecore.hpp"

namespace rsmastat {

struct ResultRow {
    std::string scenario;
    Strategy strategy = Strategy::kRsma;
    double snr_db = 0.0;
    int draw = 0;
    double mmf_rate = 0.0;       // in-sample, on the optimization samples
    int iterations = 0;
    bool converged = false;
    double wall_ms = 0.0;
    double mmf_rate_eval = 0.0;  // out-of-sample, fresh samples from the true statistics
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

/// One optimizer start within a cell; the row reports the best start.
struct StartRecord {
    std::string scenario;
    Strategy strategy = Strategy::kRsma;
    double snr_db = 0.0;
    int draw = 0;
    std::string start;  // "default", "from-sdma", "random-<n>"
    double mmf_rate = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotonicity_warning = false;
    std::string status;
};

struct AggregateRow {
    std::string scenario;
    Strategy strategy = Strategy::kRsma;
    double snr_db = 0.0;
    double mean_mmf_rate = 0.0;
    double stderr_mmf_rate = 0.0;  // sample standard error; 0 for a single draw
    int n_draws = 0;
    double mean_mmf_rate_eval = 0.0;
    double stderr_mmf_rate_eval = 0.0;
};

enum class RateColumn { kInSample, kOutOfSample };

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<StartRecord> starts;

    /// Stable order: scenario, strategy (rsma, sdma, noma), SNR, draw.
    void sort();
    bool has_failures() const;
    /// Mean and standard error over the rows with status ok.
    std::vector<AggregateRow> aggregate() const;
};

extern const char* const kRowHeader;
extern const char* const kAggregateHeader;
extern const char* const kStartHeader;

/// Decimal, 12 significant digits.
std::string format_number(double v);

void emit_csv(std::ostream& os, const ResultTable& table);
void emit_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void emit_starts_csv(std::ostream& os, const ResultTable& table);
/// Opens `path` for writing; I/O failures throw std::runtime_error naming the path and errno text.
void emit_csv(const std::string& path, const ResultTable& table);
void emit_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);
void emit_starts_csv(const std::string& path, const ResultTable& table);

/// Parses a per-draw CSV written by emit_csv. Throws std::runtime_error with a line number.
ResultTable parse_csv(std::istream& is);
ResultTable parse_csv_file(const std::string& path);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Empirical DoF: least-squares slope of the mean MMF rate against
/// log2(P_t) = snr_db log2(10) / 10 over SNR points in [snr_lo, snr_hi].
/// `scenario` empty matches all scenarios. Fewer than two distinct SNR points
/// in the window throws PreconditionError.
double estimate_slope(const ResultTable& table, Strategy strategy, double snr_lo, double snr_hi,
                      RateColumn column = RateColumn::kOutOfSample, const std::string& scenario = {});

}  // namespace rsmastat
