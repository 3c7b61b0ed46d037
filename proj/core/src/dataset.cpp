#include "curb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace curb {

using nlohmann::json;

DataError::DataError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string_view to_string(Label label) { return label == Label::fake ? "fake" : "genuine"; }

Label parse_label(std::string_view text) {
    if (text == "fake") return Label::fake;
    if (text == "genuine") return Label::genuine;
    throw DataError("unknown label '" + std::string(text) + "'");
}

std::int64_t Story::exposure_count() const {
    return std::count_if(events.begin(), events.end(), [](const EventRecord& e) { return e.kind == EventKind::exposure; });
}

std::int64_t Story::activity_count() const {
    return std::count_if(events.begin(), events.end(), [](const EventRecord& e) { return e.triggers(); });
}

std::size_t CascadeDataset::fake_count() const {
    return std::count_if(stories.begin(), stories.end(), [](const auto& kv) { return kv.second.label == Label::fake; });
}

double CascadeDataset::fake_fraction() const {
    return stories.empty() ? 0.0 : static_cast<double>(fake_count()) / static_cast<double>(stories.size());
}

void CascadeDataset::validate() const {
    for (const auto& [id, story] : stories) {
        if (id != story.story_id) throw DataError("story key '" + id + "' does not match id '" + story.story_id + "'");
        if (story.user_ids.size() != story.events.size()) {
            throw DataError("story " + id + ": user id count does not match event count");
        }
        for (std::size_t i = 0; i < story.events.size(); ++i) {
            const EventRecord& e = story.events[i];
            if (!std::isfinite(e.time)) throw DataError("story " + id + ": non-finite event time");
            if (i > 0 && e.time < story.events[i - 1].time) throw DataError("story " + id + ": events not sorted");
            if (e.kind == EventKind::post && (e.flag || e.reshare)) {
                throw DataError("story " + id + ": post carries reshare/flag marks");
            }
        }
    }
}

DatasetFormat parse_dataset_format(std::string_view name) {
    if (name == "canonical_jsonl" || name == "jsonl") return DatasetFormat::canonical_jsonl;
    if (name == "cascade_csv" || name == "csv") return DatasetFormat::cascade_csv;
    throw DataError("unknown dataset format '" + std::string(name) + "'");
}

namespace {

struct StoryBuilder {
    Story story;
    double last_time = -INFINITY;
};

Story& story_for(std::map<std::string, StoryBuilder>& builders, const std::string& id, Label label, std::size_t line) {
    auto [it, inserted] = builders.try_emplace(id);
    if (inserted) {
        it->second.story.story_id = id;
        it->second.story.label = label;
    } else if (it->second.story.label != label) {
        throw DataError("story " + id + " has conflicting labels", line);
    }
    return it->second.story;
}

template <typename T>
T field(const json& record, const char* name, std::size_t line) {
    const auto it = record.find(name);
    if (it == record.end()) throw DataError(std::string("missing field '") + name + "'", line);
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw DataError(std::string("field '") + name + "' has the wrong type", line);
    }
}

CascadeDataset finish(std::map<std::string, StoryBuilder>&& builders, std::string source) {
    CascadeDataset out;
    out.source = std::move(source);
    for (auto& [id, builder] : builders) out.stories.emplace(id, std::move(builder.story));
    return out;
}

}  // namespace

CascadeDataset ingest_canonical(std::istream& in, std::string source) {
    std::map<std::string, StoryBuilder> builders;
    std::optional<json> provenance;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& err) {
            throw DataError(std::string("parse error: ") + err.what(), line);
        }
        if (!record.is_object()) throw DataError("record is not a JSON object", line);
        if (record.contains("provenance")) {
            if (provenance || !builders.empty()) throw DataError("provenance header must be the first record", line);
            provenance = record["provenance"];
            continue;
        }

        const auto id = field<std::string>(record, "story_id", line);
        const auto user = field<std::string>(record, "user_id", line);
        const auto time = field<double>(record, "time_s", line);
        const auto kind = field<std::string>(record, "kind", line);
        const auto reshare = field<bool>(record, "reshare", line);
        const auto flag = field<bool>(record, "flag", line);
        const auto label_text = field<std::string>(record, "label", line);

        Label label;
        try {
            label = parse_label(label_text);
        } catch (const DataError& err) {
            throw DataError(err.what(), line);
        }
        if (!std::isfinite(time)) throw DataError("non-finite time_s", line);

        Story& story = story_for(builders, id, label, line);
        StoryBuilder& builder = builders[id];
        if (time < builder.last_time) throw DataError("story " + id + " records are not sorted by time_s", line);
        builder.last_time = time;

        if (kind == "post") {
            if (reshare || flag) throw DataError("post record carries reshare/flag marks", line);
            story.events.push_back(EventRecord::post(time));
            story.user_ids.push_back(user);
        } else if (kind == "exposure") {
            story.events.push_back(EventRecord::exposure(time, reshare, flag));
            story.user_ids.push_back(user);
        } else if (kind == "fact_check") {
            if (reshare || flag) throw DataError("fact_check record carries reshare/flag marks", line);
            story.fact_checks.push_back(time);
        } else {
            throw DataError("unknown kind '" + kind + "'", line);
        }
    }

    CascadeDataset out = finish(std::move(builders), std::move(source));
    if (provenance) {
        if (provenance->contains("source")) out.source = (*provenance)["source"].get<std::string>();
        if (provenance->contains("log")) out.log = (*provenance)["log"].get<std::vector<std::string>>();
    }
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : text) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

bool parse_bool_cell(const std::string& cell, std::size_t line) {
    if (cell == "1" || cell == "true" || cell == "True") return true;
    if (cell == "0" || cell == "false" || cell == "False") return false;
    throw DataError("is_reshare must be 0/1 or true/false, got '" + cell + "'", line);
}

}  // namespace

CascadeDataset ingest_cascade_csv(std::istream& in, const IngestOptions& options, std::string source) {
    std::string text;
    std::size_t line = 0;
    std::map<std::string, std::size_t> column;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto header = split_csv(text);
        for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
        break;
    }
    if (column.empty()) return finish({}, std::move(source));
    for (const char* required : {"story_id", "user_id", "time", "is_reshare"}) {
        if (!column.count(required)) throw DataError(std::string("missing column '") + required + "'", line);
    }
    const bool has_label = column.count("label") > 0;

    struct Row {
        double time;
        bool reshare;
        std::string user;
        std::size_t order;
    };
    std::map<std::string, std::vector<Row>> rows;
    std::map<std::string, Label> labels;
    std::size_t order = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(text);
        if (cells.size() < column.size()) throw DataError("expected " + std::to_string(column.size()) + " columns", line);
        const std::string& id = cells[column["story_id"]];
        double time = 0.0;
        try {
            std::size_t used = 0;
            time = std::stod(cells[column["time"]], &used);
        } catch (const std::exception&) {
            throw DataError("bad time '" + cells[column["time"]] + "'", line);
        }
        if (!std::isfinite(time)) throw DataError("non-finite time", line);

        Label label;
        if (has_label) {
            try {
                label = parse_label(cells[column["label"]]);
            } catch (const DataError& err) {
                throw DataError(err.what(), line);
            }
        } else if (auto it = options.labels.find(id); it != options.labels.end()) {
            label = it->second;
        } else {
            throw DataError("unknown label for story '" + id + "'", line);
        }
        if (auto [it, inserted] = labels.emplace(id, label); !inserted && it->second != label) {
            throw DataError("story " + id + " has conflicting labels", line);
        }
        rows[id].push_back({time, parse_bool_cell(cells[column["is_reshare"]], line), cells[column["user_id"]], order++});
    }

    CascadeDataset out;
    out.source = std::move(source);
    bool resorted = false;
    for (auto& [id, story_rows] : rows) {
        if (!std::is_sorted(story_rows.begin(), story_rows.end(),
                            [](const Row& a, const Row& b) { return a.time < b.time; })) {
            resorted = true;
            std::stable_sort(story_rows.begin(), story_rows.end(),
                             [](const Row& a, const Row& b) { return a.time < b.time; });
        }
        Story story;
        story.story_id = id;
        story.label = labels.at(id);
        for (const Row& row : story_rows) {
            // A reshare is an exposure whose user passed the story on.
            story.events.push_back(row.reshare ? EventRecord::exposure(row.time, true, false) : EventRecord::post(row.time));
            story.user_ids.push_back(row.user);
        }
        out.stories.emplace(id, std::move(story));
    }
    if (resorted) out.log.push_back("ingest: cascade rows re-sorted by time within story");
    return out;
}

CascadeDataset ingest(const std::filesystem::path& path, DatasetFormat format, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    const std::string tag = format == DatasetFormat::canonical_jsonl ? "canonical_jsonl:" : "cascade_csv:";
    CascadeDataset out = format == DatasetFormat::canonical_jsonl ? ingest_canonical(in, tag + path.string())
                                                                  : ingest_cascade_csv(in, options, tag + path.string());
    out.validate();
    return out;
}

void export_dataset(const CascadeDataset& dataset, std::ostream& out) {
    dataset.validate();
    out << json{{"provenance", {{"source", dataset.source}, {"log", dataset.log}}}}.dump() << '\n';
    for (const auto& [id, story] : dataset.stories) {
        const std::string label(to_string(story.label));
        auto write = [&](const std::string& user, double time, std::string_view kind, bool reshare, bool flag) {
            json record = {{"story_id", id},         {"user_id", user}, {"time_s", time}, {"kind", kind},
                           {"reshare", reshare},     {"flag", flag},    {"label", label}};
            out << record.dump() << '\n';
        };
        // Merge events and fact checks by time; events first on ties.
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < story.events.size() || j < story.fact_checks.size()) {
            const bool take_event =
                j == story.fact_checks.size() || (i < story.events.size() && story.events[i].time <= story.fact_checks[j]);
            if (take_event) {
                const EventRecord& e = story.events[i];
                write(story.user_ids[i], e.time, e.kind == EventKind::post ? "post" : "exposure", e.reshare, e.flag);
                ++i;
            } else {
                write("", story.fact_checks[j], "fact_check", false, false);
                ++j;
            }
        }
    }
}

void export_dataset(const CascadeDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    export_dataset(dataset, out);
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::map<std::string, Label> read_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::map<std::string, Label> labels;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        const auto cells = split_csv(text);
        if (cells.size() < 2 || (line == 1 && cells[0] == "story_id")) continue;
        try {
            labels[cells[0]] = parse_label(cells[1]);
        } catch (const DataError& err) {
            throw DataError(err.what(), line);
        }
    }
    return labels;
}

CascadeDataset rebase_times(CascadeDataset dataset, double first_time) {
    double earliest = INFINITY;
    for (const auto& [id, story] : dataset.stories) {
        if (!story.events.empty()) earliest = std::min(earliest, story.events.front().time);
        if (!story.fact_checks.empty()) earliest = std::min(earliest, story.fact_checks.front());
    }
    if (!std::isfinite(earliest)) return dataset;
    const double shift = first_time - earliest;
    for (auto& [id, story] : dataset.stories) {
        for (auto& e : story.events) e.time += shift;
        for (auto& t : story.fact_checks) t += shift;
    }
    std::ostringstream note;
    note << "rebase: shifted times by " << shift << " s";
    dataset.log.push_back(note.str());
    return dataset;
}

CascadeDataset preprocess(CascadeDataset dataset, const PreprocessOptions& options, Rng& rng) {
    auto remove_if = [&](auto&& predicate) {
        for (auto it = dataset.stories.begin(); it != dataset.stories.end();) {
            if (auto reason = predicate(it->second)) {
                dataset.log.push_back("preprocess: removed " + it->first + ": " + *reason);
                it = dataset.stories.erase(it);
            } else {
                ++it;
            }
        }
    };

    remove_if([&](const Story& story) -> std::optional<std::string> {
        const auto activity = story.activity_count();
        if (activity <= options.max_events) return std::nullopt;
        return "more than " + std::to_string(options.max_events) + " posts/reshares (" + std::to_string(activity) + ")";
    });

    remove_if([&](const Story& story) -> std::optional<std::string> {
        std::vector<double> times;
        for (const auto& e : story.events) {
            if (e.triggers()) times.push_back(e.time);
        }
        if (times.empty()) return std::nullopt;
        const double cutoff = times.front() + 0.9 * (times.back() - times.front());
        const auto tail = std::count_if(times.begin(), times.end(), [&](double t) { return t > cutoff; });
        const double share = static_cast<double>(tail) / static_cast<double>(times.size());
        if (share <= options.tail_decile_cap) return std::nullopt;
        std::ostringstream reason;
        reason << "last-decile activity share " << share << " exceeds " << options.tail_decile_cap
               << " (per-story observation period)";
        return reason.str();
    });

    std::vector<std::string> fakes;
    for (const auto& [id, story] : dataset.stories) {
        if (story.label == Label::fake) fakes.push_back(id);
    }
    while (!fakes.empty() &&
           static_cast<double>(fakes.size()) / static_cast<double>(dataset.stories.size()) >= options.fake_cap) {
        const auto pick = static_cast<std::size_t>(rng.below(fakes.size()));
        std::ostringstream reason;
        reason << "preprocess: removed " << fakes[pick] << ": fake subsampling to share < " << options.fake_cap;
        dataset.log.push_back(reason.str());
        dataset.stories.erase(fakes[pick]);
        fakes.erase(fakes.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return dataset;
}

}  // namespace curb
