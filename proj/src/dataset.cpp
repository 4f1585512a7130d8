#include "paretoscl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::size_t column_index(const std::string& column, const std::vector<std::string>& header, bool has_header,
                         const std::string& role) {
    if (has_header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == column) return i;
        }
        throw SchemaError("column '" + column + "' (" + role + ") not found in header");
    }
    std::size_t idx = 0;
    const auto* end = column.data() + column.size();
    const auto [ptr, ec] = std::from_chars(column.data(), end, idx);
    if (ec != std::errc() || ptr != end) {
        throw SchemaError("files without a header need integer column indices; got '" + column + "' for " + role);
    }
    return idx;
}

}  // namespace

int Dataset::label_id(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    throw DataError("unknown label '" + label + "'");
}

std::vector<std::vector<std::size_t>> Dataset::ids_by_class(const std::vector<std::size_t>& ids) const {
    std::vector<std::vector<std::size_t>> out(num_classes());
    if (ids.empty()) {
        for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<std::size_t>(rows[i].label)].push_back(i);
    } else {
        for (auto i : ids) out[static_cast<std::size_t>(rows.at(i).label)].push_back(i);
    }
    return out;
}

std::uint64_t Dataset::digest() const {
    std::uint64_t h = fnv1a64(kind == TaskKind::pair ? "pair" : "single");
    for (const auto& l : labels) {
        h = fnv1a64(l, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    for (const auto& r : rows) {
        h = fnv1a64(r.text, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
        if (r.text2) h = fnv1a64(*r.text2, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
        h = fnv1a64_u64(static_cast<std::uint64_t>(r.label), h);
    }
    return h;
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.label < 0 || static_cast<std::size_t>(r.label) >= labels.size()) {
            throw DataError("row " + std::to_string(i) + " has label id out of range");
        }
        if ((kind == TaskKind::pair) != r.text2.has_value()) {
            throw DataError("row " + std::to_string(i) + " does not match the task kind");
        }
    }
}

Dataset load_tsv(const std::filesystem::path& path, const TsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());

    Dataset ds;
    ds.kind = schema.kind();
    ds.labels = schema.labels;
    const bool explicit_labels = !schema.labels.empty();
    std::unordered_map<std::string, int> label_ids;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (!label_ids.emplace(ds.labels[i], static_cast<int>(i)).second) {
            throw ConfigError("duplicate label '" + ds.labels[i] + "' in label list", "labels");
        }
    }

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::size_t text_col = 0;
    std::size_t text2_col = 0;
    std::size_t label_col = 0;
    bool columns_ready = false;

    auto resolve_columns = [&] {
        text_col = column_index(schema.text_column, header, schema.has_header, "text");
        if (schema.text2_column) text2_col = column_index(*schema.text2_column, header, schema.has_header, "text2");
        label_col = column_index(schema.label_column, header, schema.has_header, "label");
        columns_ready = true;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (schema.has_header && !columns_ready) {
            header = split_tabs(line);
            resolve_columns();
            continue;
        }
        if (line.empty()) continue;
        if (!columns_ready) resolve_columns();

        const auto fields = split_tabs(line);
        const auto need = std::max({text_col, label_col, schema.text2_column ? text2_col : 0}) + 1;
        if (fields.size() < need) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected at least " +
                            std::to_string(need) + " fields, found " + std::to_string(fields.size()));
        }

        Example ex;
        ex.text = fields[text_col];
        if (schema.text2_column) ex.text2 = fields[text2_col];
        const auto& label = fields[label_col];
        if (auto it = label_ids.find(label); it != label_ids.end()) {
            ex.label = it->second;
        } else if (explicit_labels) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": label '" + label +
                            "' is not in the configured label list");
        } else {
            ex.label = static_cast<int>(ds.labels.size());
            label_ids.emplace(label, ex.label);
            ds.labels.push_back(label);
        }
        ds.rows.push_back(std::move(ex));
    }
    if (ds.rows.empty()) throw DataError(path.string() + ": no data rows");
    return ds;
}

std::string hex_digest(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace paretoscl
