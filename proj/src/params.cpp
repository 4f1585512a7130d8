#include "paretoscl/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

constexpr std::string_view kMagic = "PARETOSCL-CHECKPOINT 1";

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
        return r;
    }
    return v;
}

}  // namespace

std::size_t Segment::size() const noexcept {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

ParamLayout& ParamLayout::add(std::string name, std::vector<std::size_t> shape) {
    if (shape.empty() || shape.size() > 2) {
        throw ConfigError("segment '" + name + "' must have rank 1 or 2");
    }
    for (auto s : shape) {
        if (s == 0) throw ConfigError("segment '" + name + "' has a zero extent");
    }
    for (const auto& seg : m_segments) {
        if (seg.name == name) throw ConfigError("duplicate segment '" + name + "'");
    }
    Segment seg{std::move(name), std::move(shape), m_total};
    m_total += seg.size();
    m_segments.push_back(std::move(seg));
    return *this;
}

const Segment& ParamLayout::segment(std::string_view name) const {
    for (const auto& seg : m_segments) {
        if (seg.name == name) return seg;
    }
    throw ContractViolation("no parameter segment named '" + std::string(name) + "'");
}

const std::string& ParamLayout::segment_of(std::size_t i) const {
    for (const auto& seg : m_segments) {
        if (i >= seg.offset && i < seg.offset + seg.size()) return seg.name;
    }
    throw ContractViolation("flat index outside the parameter layout");
}

std::span<double> ParamVector::view(std::string_view name) {
    const auto& seg = layout.segment(name);
    return std::span<double>(values).subspan(seg.offset, seg.size());
}

std::span<const double> ParamVector::view(std::string_view name) const {
    const auto& seg = layout.segment(name);
    return std::span<const double>(values).subspan(seg.offset, seg.size());
}

ParamVector init_params(const ParamLayout& layout, std::uint64_t seed) {
    if (layout.empty()) throw ConfigError("cannot initialise an empty parameter layout");
    ParamVector p{layout, std::vector<double>(layout.total_size(), 0.0)};
    for (std::size_t s = 0; s < layout.segments().size(); ++s) {
        const auto& seg = layout.segments()[s];
        if (seg.is_bias()) continue;
        const double limit = std::sqrt(6.0 / static_cast<double>(seg.shape[0] + seg.shape[1]));
        Rng rng(mix_seed(seed, s));
        for (std::size_t i = 0; i < seg.size(); ++i) {
            p.values[seg.offset + i] = rng.uniform(-limit, limit);
        }
    }
    return p;
}

void require_finite(const ParamLayout& layout, std::span<const double> values, std::string_view what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw NumericError(std::string(what) + ": non-finite entry in segment '" + layout.segment_of(i) +
                               "' at flat index " + std::to_string(i));
        }
    }
}

void save_checkpoint(const std::filesystem::path& path, const ParamVector& params,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());

    out << kMagic << '\n';
    out << "segments " << params.layout.segments().size() << '\n';
    for (const auto& seg : params.layout.segments()) {
        out << "segment " << seg.name << ' ' << seg.shape.size();
        for (auto s : seg.shape) out << ' ' << s;
        out << ' ' << seg.offset << '\n';
    }
    for (const auto& [k, v] : meta) {
        if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
            throw ContractViolation("checkpoint metadata must be single-line, key without spaces: " + k);
        }
        out << "meta " << k << ' ' << v << '\n';
    }
    out << "values " << params.values.size() << '\n';
    for (double v : params.values) {
        const auto le = to_le(std::bit_cast<std::uint64_t>(v));
        char buf[8];
        std::memcpy(buf, &le, 8);
        out.write(buf, 8);
    }
    if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());

    auto bad = [&](const std::string& why) { return DataError("malformed checkpoint " + path.string() + ": " + why); };

    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw bad("missing header");

    Checkpoint ck;
    std::size_t expected_segments = 0;
    for (;;) {
        if (!std::getline(in, line)) throw bad("truncated header");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "segments") {
            ls >> expected_segments;
        } else if (tag == "segment") {
            std::string name;
            std::size_t rank = 0;
            ls >> name >> rank;
            std::vector<std::size_t> shape(rank);
            for (auto& s : shape) ls >> s;
            std::size_t offset = 0;
            ls >> offset;
            if (!ls) throw bad("bad segment line");
            ck.params.layout.add(name, shape);
            if (ck.params.layout.segments().back().offset != offset) throw bad("non-contiguous segment " + name);
        } else if (tag == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls >> std::ws, value);
            ck.meta[key] = value;
        } else if (tag == "values") {
            std::size_t n = 0;
            ls >> n;
            if (n != ck.params.layout.total_size()) throw bad("value count does not match layout");
            if (ck.params.layout.segments().size() != expected_segments) throw bad("segment count mismatch");
            ck.params.values.resize(n);
            for (auto& v : ck.params.values) {
                char buf[8];
                if (!in.read(buf, 8)) throw bad("truncated value block");
                std::uint64_t le = 0;
                std::memcpy(&le, buf, 8);
                v = std::bit_cast<double>(to_le(le));
            }
            if (in.peek() != std::char_traits<char>::eof()) throw bad("trailing bytes after value block");
            return ck;
        } else {
            throw bad("unknown header line '" + tag + "'");
        }
    }
}

}  // namespace paretoscl
