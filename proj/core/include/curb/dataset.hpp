#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curb/rng.hpp"
#include "curb/tpp.hpp"

namespace curb {

/// Malformed or invariant-violating input data. `line` is 1-based, 0 when not line-specific.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& message, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

enum class Label : std::uint8_t { fake, genuine };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

/// One labeled cascade. `user_ids` runs parallel to `events`.
struct Story {
    std::string story_id;
    Label label = Label::genuine;
    std::vector<EventRecord> events;
    std::vector<std::string> user_ids;
    std::vector<double> fact_checks;  ///< recorded dispatch times, if the log carries any

    std::int64_t exposure_count() const;
    /// Posts plus reshared exposures: the activity visible in a posts/reshares dataset.
    std::int64_t activity_count() const;

    friend bool operator==(const Story&, const Story&) = default;
};

struct CascadeDataset {
    std::map<std::string, Story> stories;
    std::string source;
    std::vector<std::string> log;  ///< preprocessing and provenance notes, in order

    std::size_t fake_count() const;
    /// Fraction of fake stories; 0 for an empty dataset.
    double fake_fraction() const;
    /// Throws DataError when any story violates the dataset invariants.
    void validate() const;

    friend bool operator==(const CascadeDataset&, const CascadeDataset&) = default;
};

enum class DatasetFormat : std::uint8_t { canonical_jsonl, cascade_csv };

DatasetFormat parse_dataset_format(std::string_view name);

struct IngestOptions {
    /// Labels for cascade CSV files without a label column.
    std::map<std::string, Label> labels;
};

CascadeDataset ingest(const std::filesystem::path& path, DatasetFormat format, const IngestOptions& options = {});
CascadeDataset ingest_canonical(std::istream& in, std::string source = "stream");
CascadeDataset ingest_cascade_csv(std::istream& in, const IngestOptions& options = {}, std::string source = "stream");

/// Writes the canonical event log: a provenance header line then one record per line,
/// sorted by (story_id, time_s).
void export_dataset(const CascadeDataset& dataset, const std::filesystem::path& path);
void export_dataset(const CascadeDataset& dataset, std::ostream& out);

/// Reads a two-column (story_id,label) CSV.
std::map<std::string, Label> read_labels_csv(const std::filesystem::path& path);

/// Shifts every time so the earliest record sits at `first_time`.
CascadeDataset rebase_times(CascadeDataset dataset, double first_time);

struct PreprocessOptions {
    std::int64_t max_events = 3000;        ///< drop stories with more posts+reshares than this
    double tail_decile_cap = 0.01;         ///< drop stories with more than this share of activity in the last decile
    double fake_cap = 0.15;                ///< subsample fakes until their share is below this
};

/// Activity cap, tail-decile filter, then random fake subsampling. Every removal is logged.
CascadeDataset preprocess(CascadeDataset dataset, const PreprocessOptions& options, Rng& rng);

}  // namespace curb
