#include <string>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"
#include "evpr/reconstruct.hpp"

namespace evpr {

namespace {
constexpr std::string_view kFrameMagic = "EVPF";
constexpr std::uint16_t kFrameVersion = 1;
}  // namespace

// Per frame: t_start_us u64, t_end_us u64, H*W*3 interleaved RGB bytes, then a
// CRC-32 over those timestamp and pixel bytes.
std::vector<std::uint8_t> encode_frames(const std::vector<RenderedFrame>& frames, SensorSize dims) {
    binio::Writer w;
    w.magic(kFrameMagic);
    w.u16(kFrameVersion);
    w.u16(dims.width);
    w.u16(dims.height);
    w.u64(frames.size());
    const std::size_t plane = static_cast<std::size_t>(dims.width) * dims.height;
    for (const auto& f : frames) {
        if (f.width != dims.width || f.height != dims.height) throw InvariantError("encode_frames: frame dims differ from header");
        binio::Writer rec;
        rec.u64(static_cast<std::uint64_t>(to_microseconds(f.t_start)));
        rec.u64(static_cast<std::uint64_t>(to_microseconds(f.t_end)));
        for (std::size_t i = 0; i < plane; ++i) {
            for (int c = 0; c < 3; ++c) rec.u8(f.data[c * plane + i]);
        }
        w.bytes(rec.buffer());
        w.u32(binio::crc32(rec.buffer()));
    }
    return w.take();
}

std::vector<RenderedFrame> decode_frames(std::span<const std::uint8_t> bytes, SensorSize expected) {
    binio::Reader r(bytes, "frame file");
    r.expect_magic(kFrameMagic);
    if (const auto v = r.u16(); v != kFrameVersion) throw DataError("frame file: unsupported version " + std::to_string(v));
    const SensorSize dims{r.u16(), r.u16()};
    const std::uint64_t count = r.u64();
    if (expected.width != 0 && !(expected == dims)) {
        throw DataError("frame file: dims " + std::to_string(dims.width) + "x" + std::to_string(dims.height) +
                        " do not match configured sensor " + std::to_string(expected.width) + "x" +
                        std::to_string(expected.height));
    }
    const std::size_t plane = static_cast<std::size_t>(dims.width) * dims.height;
    const std::size_t record = 16 + 3 * plane;
    if (r.remaining() / (record + 4) < count) throw DataError("frame file: truncated payload (" + std::to_string(count) + " frames declared)");

    std::vector<RenderedFrame> frames;
    frames.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        const auto payload = r.bytes(record);
        if (r.u32() != binio::crc32(payload)) throw DataError("frame file: CRC mismatch in frame " + std::to_string(k));
        binio::Reader fr(payload, "frame");
        RenderedFrame f;
        f.width = dims.width;
        f.height = dims.height;
        f.bin_index = k;
        f.t_start = from_microseconds(static_cast<std::int64_t>(fr.u64()));
        f.t_end = from_microseconds(static_cast<std::int64_t>(fr.u64()));
        f.data.resize(3 * plane);
        const auto px = fr.bytes(3 * plane);
        for (std::size_t i = 0; i < plane; ++i) {
            for (int c = 0; c < 3; ++c) f.data[c * plane + i] = px[3 * i + c];
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

void save_frames(const std::vector<RenderedFrame>& frames, SensorSize dims, const std::string& path) {
    binio::write_file(path, encode_frames(frames, dims));
}

std::vector<RenderedFrame> ingest_external_frames(const std::string& path, SensorSize expected) {
    const auto bytes = binio::read_file(path);
    try {
        return decode_frames(bytes, expected);
    } catch (const Error& e) {
        rethrow_with_context(e, path);
    }
}

}  // namespace evpr
