#pragma once

// Little-endian encode/decode helpers shared by the interchange formats.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evpr::binio {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void i8(std::int8_t v) { buf_.push_back(static_cast<std::uint8_t>(v)); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u32(bits);
    }
    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void magic(std::string_view m) { buf_.insert(buf_.end(), m.begin(), m.end()); }

    std::size_t size() const { return buf_.size(); }
    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; throws DataError naming `what` on truncation.
class Reader {
public:
    Reader(std::span<const std::uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

    std::uint8_t u8();
    std::int8_t i8() { return static_cast<std::int8_t>(u8()); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::span<const std::uint8_t> bytes(std::size_t n);
    void expect_magic(std::string_view m);

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::uint64_t get(int n);
    void need(std::size_t n) const;

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> data);
void write_text(const std::string& path, std::string_view text);

}  // namespace evpr::binio
