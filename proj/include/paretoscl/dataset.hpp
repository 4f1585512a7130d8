#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace paretoscl {

enum class TaskKind { single, pair };

struct Example {
    std::string text;
    std::optional<std::string> text2;
    int label = 0;

    bool operator==(const Example&) const = default;
};

struct Dataset {
    std::vector<Example> rows;
    std::vector<std::string> labels;  // id → label string
    TaskKind kind = TaskKind::single;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t num_classes() const noexcept { return labels.size(); }
    int label_id(const std::string& label) const;

    /// Row ids grouped by label id, restricted to `ids` (all rows when empty).
    std::vector<std::vector<std::size_t>> ids_by_class(const std::vector<std::size_t>& ids = {}) const;

    /// FNV-1a over labels and rows; stable across runs and platforms.
    std::uint64_t digest() const;

    /// Checks label ranges and the single/pair shape of every row.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Column selection for GLUE-style TSV files. Without a header the column
/// entries must be 0-based integer indices.
struct TsvSchema {
    std::string text_column = "sentence";
    std::optional<std::string> text2_column;
    std::string label_column = "label";
    bool has_header = true;
    /// Explicit label order. Empty → first-appearance order.
    std::vector<std::string> labels;

    TaskKind kind() const noexcept { return text2_column ? TaskKind::pair : TaskKind::single; }
};

Dataset load_tsv(const std::filesystem::path& path, const TsvSchema& schema);

std::string hex_digest(std::uint64_t value);

}  // namespace paretoscl
