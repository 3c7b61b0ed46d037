#include "curb/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "curb/dataset.hpp"
#include "curb/tpp.hpp"

namespace curb {

using nlohmann::json;

namespace {

constexpr const char* kColumns[] = {"policy", "tunable", "seed", "n_fact_checks", "precision",
                                    "misinfo_reduction", "misinfo_reduction_macro", "runtime_s", "variant", "error"};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& text) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad number '" + s + "'", line);
    }
}

std::optional<double> parse_optional(const std::string& s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, line);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

}  // namespace

void ResultsTable::sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultsRow& a, const ResultsRow& b) {
        return std::tie(a.variant, a.policy, a.tunable, a.seed) < std::tie(b.variant, b.policy, b.tunable, b.seed);
    });
}

void ResultsTable::validate() const {
    auto unit = [](const std::optional<double>& v, const char* name) {
        if (!v) return;
        if (!std::isfinite(*v)) throw PreconditionError(std::string(name) + " is not finite");
        if (*v < 0.0 || *v > 1.0) throw PreconditionError(std::string(name) + " outside [0,1]");
    };
    for (const auto& row : rows) {
        if (!std::isfinite(row.tunable)) throw PreconditionError("tunable is not finite");
        if (!std::isfinite(row.runtime_s)) throw PreconditionError("runtime is not finite");
        unit(row.precision, "precision");
        unit(row.misinfo_reduction, "misinfo_reduction");
        unit(row.misinfo_reduction_macro, "misinfo_reduction_macro");
    }
}

ResultsFormat parse_results_format(std::string_view name) {
    if (name == "csv") return ResultsFormat::csv;
    if (name == "jsonl") return ResultsFormat::jsonl;
    throw DataError("unknown results format '" + std::string(name) + "'");
}

void export_results(const ResultsTable& table, std::ostream& out, ResultsFormat format) {
    table.validate();
    if (format == ResultsFormat::csv) {
        for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
        out << '\n';
        for (const auto& r : table.rows) {
            out << quote_csv(r.policy) << ',' << format_double(r.tunable) << ',' << r.seed << ',' << r.n_fact_checks << ','
                << format_optional(r.precision) << ',' << format_optional(r.misinfo_reduction) << ','
                << format_optional(r.misinfo_reduction_macro) << ',' << format_double(r.runtime_s) << ','
                << quote_csv(r.variant) << ',' << quote_csv(r.error) << '\n';
        }
        return;
    }
    for (const auto& r : table.rows) {
        json record = {{"policy", r.policy},
                       {"tunable", r.tunable},
                       {"seed", r.seed},
                       {"n_fact_checks", r.n_fact_checks},
                       {"precision", optional_json(r.precision)},
                       {"misinfo_reduction", optional_json(r.misinfo_reduction)},
                       {"misinfo_reduction_macro", optional_json(r.misinfo_reduction_macro)},
                       {"runtime_s", r.runtime_s},
                       {"variant", r.variant},
                       {"error", r.error}};
        out << record.dump() << '\n';
    }
}

void export_results(const ResultsTable& table, const std::filesystem::path& path, ResultsFormat format) {
    table.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    export_results(table, out, format);
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

ResultsTable read_results(std::istream& in, ResultsFormat format) {
    ResultsTable table;
    std::string text;
    std::size_t line = 0;
    if (format == ResultsFormat::csv) {
        if (!std::getline(in, text)) return table;
        ++line;
        if (split_csv_line(text).size() != std::size(kColumns)) throw DataError("unexpected results header", line);
        while (std::getline(in, text)) {
            ++line;
            if (text.empty()) continue;
            const auto c = split_csv_line(text);
            if (c.size() != std::size(kColumns)) throw DataError("wrong column count", line);
            ResultsRow r;
            r.policy = c[0];
            r.tunable = parse_double(c[1], line);
            r.seed = std::stoull(c[2]);
            r.n_fact_checks = std::stoll(c[3]);
            r.precision = parse_optional(c[4], line);
            r.misinfo_reduction = parse_optional(c[5], line);
            r.misinfo_reduction_macro = parse_optional(c[6], line);
            r.runtime_s = parse_double(c[7], line);
            r.variant = c[8];
            r.error = c[9];
            table.rows.push_back(std::move(r));
        }
        return table;
    }
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        try {
            const json j = json::parse(text);
            ResultsRow r;
            r.policy = j.at("policy").get<std::string>();
            r.tunable = j.at("tunable").get<double>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.n_fact_checks = j.at("n_fact_checks").get<std::int64_t>();
            r.precision = optional_from_json(j.at("precision"));
            r.misinfo_reduction = optional_from_json(j.at("misinfo_reduction"));
            r.misinfo_reduction_macro = optional_from_json(j.at("misinfo_reduction_macro"));
            r.runtime_s = j.at("runtime_s").get<double>();
            r.variant = j.at("variant").get<std::string>();
            r.error = j.at("error").get<std::string>();
            table.rows.push_back(std::move(r));
        } catch (const json::exception& err) {
            throw DataError(err.what(), line);
        }
    }
    return table;
}

ResultsTable read_results(const std::filesystem::path& path, ResultsFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_results(in, format);
}

}  // namespace curb
