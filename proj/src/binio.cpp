#include "evpr/binio.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "evpr/error.hpp"

namespace evpr::binio {

void Reader::need(std::size_t n) const {
    if (remaining() < n) {
        throw DataError(what_ + ": truncated payload at offset " + std::to_string(pos_) + " (need " +
                        std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")");
    }
}

std::uint8_t Reader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint64_t Reader::get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
}

std::span<const std::uint8_t> Reader::bytes(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

void Reader::expect_magic(std::string_view m) {
    auto got = bytes(m.size());
    if (!std::equal(got.begin(), got.end(), m.begin(), [](std::uint8_t a, char b) {
            return a == static_cast<std::uint8_t>(b);
        })) {
        throw DataError(what_ + ": bad magic (expected '" + std::string(m) + "')");
    }
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large buffers
    std::size_t off = 0;
    while (off < data.size()) {
        const std::size_t n = std::min<std::size_t>(data.size() - off, 1u << 30);
        crc = ::crc32(crc, data.data() + off, static_cast<uInt>(n));
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("write failed for '" + path + "'");
}

void write_text(const std::string& path, std::string_view text) {
    write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace evpr::binio
