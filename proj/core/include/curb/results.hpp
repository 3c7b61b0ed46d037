#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace curb {

/// One (policy, tunable, seed) evaluation. Metrics are absent when undefined, e.g. precision
/// with no dispatches.
struct ResultsRow {
    std::string policy;
    double tunable = 0.0;  ///< q, or the threshold for flag_sum
    std::uint64_t seed = 0;
    std::int64_t n_fact_checks = 0;
    std::optional<double> precision;
    std::optional<double> misinfo_reduction;        ///< pooled over fake exposures
    std::optional<double> misinfo_reduction_macro;  ///< averaged over fake stories
    double runtime_s = 0.0;
    std::string variant;  ///< sweep dimension tag, e.g. "p_f1_m1=0.3"
    std::string error;    ///< non-empty when the point failed

    friend bool operator==(const ResultsRow&, const ResultsRow&) = default;
};

struct ResultsTable {
    std::vector<ResultsRow> rows;

    /// Sorts rows by (variant, policy, tunable, seed).
    void sort();
    /// Throws PreconditionError on non-finite or out-of-range values.
    void validate() const;

    friend bool operator==(const ResultsTable&, const ResultsTable&) = default;
};

enum class ResultsFormat : std::uint8_t { csv, jsonl };

ResultsFormat parse_results_format(std::string_view name);

void export_results(const ResultsTable& table, const std::filesystem::path& path, ResultsFormat format);
void export_results(const ResultsTable& table, std::ostream& out, ResultsFormat format);
ResultsTable read_results(std::istream& in, ResultsFormat format);
ResultsTable read_results(const std::filesystem::path& path, ResultsFormat format);

}  // namespace curb
