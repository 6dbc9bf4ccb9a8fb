#include "evpr/descriptor.hpp"

#include <cmath>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"

namespace evpr {

namespace {
constexpr std::string_view kDescMagic = "EVPD";
constexpr std::uint16_t kDescVersion = 1;
}  // namespace

Eigen::VectorXd grid_descriptor(const RenderedFrame& frame, int grid) {
    if (grid < 1 || grid > std::min<int>(frame.width, frame.height)) {
        throw ConfigError("grid_descriptor: grid " + std::to_string(grid) + " outside [1, min(width, height)]");
    }
    const int g = grid;
    Eigen::VectorXd d(3 * g * g);
    for (int c = 0; c < 3; ++c) {
        for (int gy = 0; gy < g; ++gy) {
            const int y0 = gy * frame.height / g, y1 = (gy + 1) * frame.height / g;
            for (int gx = 0; gx < g; ++gx) {
                const int x0 = gx * frame.width / g, x1 = (gx + 1) * frame.width / g;
                double sum = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) sum += frame.at(c, y, x);
                }
                d[(c * g + gy) * g + gx] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
            }
        }
    }
    // shifted mean: exact for constant vectors
    const double pivot = d[0];
    const double mean = pivot + (d.array() - pivot).sum() / static_cast<double>(d.size());
    d.array() -= mean;
    const double norm = d.norm();
    if (norm > 0.0) d /= norm;
    return d;
}

DescriptorSet describe_frames(std::span<const RenderedFrame> frames, int grid, std::string label) {
    DescriptorSet set;
    set.label = std::move(label);
    set.descriptors.resize(static_cast<Eigen::Index>(frames.size()), 3 * grid * grid);
    set.timestamps.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        set.descriptors.row(static_cast<Eigen::Index>(i)) = grid_descriptor(frames[i], grid).transpose();
        set.timestamps.push_back(frames[i].t_end);
    }
    validate(set);
    return set;
}

void validate(const DescriptorSet& set) {
    if (static_cast<std::size_t>(set.count()) != set.timestamps.size()) {
        throw DataError("descriptor set: row count and timestamp count differ");
    }
    for (Eigen::Index r = 0; r < set.count(); ++r) {
        if (!set.descriptors.row(r).allFinite()) throw DataError("descriptor set: non-finite values in row " + std::to_string(r));
    }
    for (std::size_t i = 1; i < set.timestamps.size(); ++i) {
        if (!(set.timestamps[i] > set.timestamps[i - 1])) {
            throw DataError("descriptor set: timestamps not strictly increasing at row " + std::to_string(i));
        }
    }
}

DescriptorSet select_rows(const DescriptorSet& set, std::span<const std::size_t> rows) {
    DescriptorSet out;
    out.label = set.label;
    out.descriptors.resize(static_cast<Eigen::Index>(rows.size()), set.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.descriptors.row(static_cast<Eigen::Index>(i)) = set.descriptors.row(static_cast<Eigen::Index>(rows[i]));
        out.timestamps.push_back(set.timestamps[rows[i]]);
    }
    return out;
}

std::vector<std::uint8_t> encode_descriptors(const DescriptorSet& set) {
    validate(set);
    binio::Writer payload;
    for (Eigen::Index r = 0; r < set.count(); ++r) {
        for (Eigen::Index c = 0; c < set.dim(); ++c) payload.f32(static_cast<float>(set.descriptors(r, c)));
    }
    for (double t : set.timestamps) payload.u64(static_cast<std::uint64_t>(to_microseconds(t)));
    payload.u32(static_cast<std::uint32_t>(set.label.size()));
    payload.magic(set.label);

    binio::Writer w;
    w.magic(kDescMagic);
    w.u16(kDescVersion);
    w.u64(static_cast<std::uint64_t>(set.count()));
    w.u32(static_cast<std::uint32_t>(set.dim()));
    w.bytes(payload.buffer());
    w.u32(binio::crc32(payload.buffer()));
    return w.take();
}

DescriptorSet decode_descriptors(std::span<const std::uint8_t> bytes) {
    binio::Reader r(bytes, "descriptor file");
    r.expect_magic(kDescMagic);
    if (const auto v = r.u16(); v != kDescVersion) throw DataError("descriptor file: unsupported version " + std::to_string(v));
    const std::uint64_t count = r.u64();
    const std::uint32_t dim = r.u32();
    const std::size_t header = r.offset();
    if (r.remaining() / 4 / std::max<std::uint64_t>(dim + 2, 1) < count) throw DataError("descriptor file: truncated payload");

    DescriptorSet set;
    set.descriptors.resize(static_cast<Eigen::Index>(count), dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        for (std::uint32_t c = 0; c < dim; ++c) set.descriptors(static_cast<Eigen::Index>(i), c) = r.f32();
    }
    set.timestamps.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) set.timestamps.push_back(from_microseconds(static_cast<std::int64_t>(r.u64())));
    const auto label = r.bytes(r.u32());
    set.label.assign(label.begin(), label.end());
    const std::size_t end = r.offset();
    if (r.u32() != binio::crc32(bytes.subspan(header, end - header))) throw DataError("descriptor file: CRC mismatch");
    if (r.remaining() != 0) throw DataError("descriptor file: trailing bytes after CRC");
    validate(set);
    return set;
}

void save_descriptors(const DescriptorSet& set, const std::string& path) {
    binio::write_file(path, encode_descriptors(set));
}

DescriptorSet load_descriptors(const std::string& path) {
    const auto bytes = binio::read_file(path);
    try {
        return decode_descriptors(bytes);
    } catch (const Error& e) {
        rethrow_with_context(e, path);
    }
}

}  // namespace evpr
