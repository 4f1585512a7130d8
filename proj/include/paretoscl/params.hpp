#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace paretoscl {

/// One named block of the flat parameter vector. Rank-2 shapes are weight
/// matrices stored row-major as (fan_in, fan_out); rank-1 shapes are biases.
struct Segment {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;

    std::size_t size() const noexcept;
    bool is_bias() const noexcept { return shape.size() == 1; }

    bool operator==(const Segment&) const = default;
};

class ParamLayout {
public:
    ParamLayout() = default;

    /// Appends a segment directly after the previous one.
    ParamLayout& add(std::string name, std::vector<std::size_t> shape);

    const std::vector<Segment>& segments() const noexcept { return m_segments; }
    const Segment& segment(std::string_view name) const;
    bool empty() const noexcept { return m_segments.empty(); }
    std::size_t total_size() const noexcept { return m_total; }

    /// Name of the segment containing flat index `i`.
    const std::string& segment_of(std::size_t i) const;

    bool operator==(const ParamLayout&) const = default;

private:
    std::vector<Segment> m_segments;
    std::size_t m_total = 0;
};

/// Flat 64-bit parameter storage shared by the encoder, optimizer and
/// checkpoint code.
struct ParamVector {
    ParamLayout layout;
    std::vector<double> values;

    std::span<double> view(std::string_view name);
    std::span<const double> view(std::string_view name) const;
    std::size_t size() const noexcept { return values.size(); }
};

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
ParamVector init_params(const ParamLayout& layout, std::uint64_t seed);

/// Throws NumericError naming the first segment holding a NaN/Inf.
void require_finite(const ParamLayout& layout, std::span<const double> values, std::string_view what);

/// Checkpoint file: text header with segment descriptors and metadata,
/// followed by the flat values as little-endian IEEE-754 doubles. See
/// docs/checkpoint-format.md.
void save_checkpoint(const std::filesystem::path& path, const ParamVector& params,
                     const std::map<std::string, std::string>& meta = {});

struct Checkpoint {
    ParamVector params;
    std::map<std::string, std::string> meta;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace paretoscl
