#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "lpurify/errors.hpp"

namespace lpurify {

// CRC-64/XZ (reflected, poly 0xC96C5795D7870F42, init/xorout all-ones).
class Crc64 {
  public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i)
            state_ = table()[(state_ ^ p[i]) & 0xFF] ^ (state_ >> 8);
    }

    std::uint64_t value() const { return ~state_; }

    static std::uint64_t of(const void* data, std::size_t n) {
        Crc64 c;
        c.update(data, n);
        return c.value();
    }

  private:
    static const std::array<std::uint64_t, 256>& table() {
        static const std::array<std::uint64_t, 256> t = [] {
            std::array<std::uint64_t, 256> out{};
            for (std::uint64_t i = 0; i < 256; ++i) {
                std::uint64_t c = i;
                for (int k = 0; k < 8; ++k)
                    c = (c & 1) ? (0xC96C5795D7870F42ull ^ (c >> 1)) : (c >> 1);
                out[i] = c;
            }
            return out;
        }();
        return t;
    }

    std::uint64_t state_ = ~0ull;
};

// Append-only little-endian byte buffer for the binary artifact formats.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u16(std::uint16_t v) { le(&v, 2); }
    void u32(std::uint32_t v) { le(&v, 4); }
    void u64(std::uint64_t v) { le(&v, 8); }

    void f32(float v) {
        static_assert(sizeof(float) == 4);
        le(&v, 4);
    }

    void bytes(const void* data, std::size_t n) {
        const char* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }

    void f32_array(std::span<const float> v) { bytes(v.data(), v.size() * 4); }
    void u16_array(std::span<const std::uint16_t> v) { bytes(v.data(), v.size() * 2); }

    const std::vector<char>& buffer() const { return buf_; }

    // Appends the CRC64 of everything written so far, then writes to disk.
    void save_with_crc(const std::string& path) {
        std::uint64_t crc = Crc64::of(buf_.data(), buf_.size());
        u64(crc);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw MissingInputError("cannot open for writing: " + path);
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw MissingInputError("short write: " + path);
    }

  private:
    void le(const void* v, std::size_t n) {
        // Little-endian host assumed (x86-64 / aarch64 targets).
        bytes(v, n);
    }

    std::vector<char> buf_;
};

// Cursor over an in-memory file image with bounds and checksum validation.
class ByteReader {
  public:
    explicit ByteReader(std::vector<char> data)
        : buf_(std::move(data)), limit_(buf_.size()) {}

    static ByteReader from_file(const std::string& path) {
        if (!std::filesystem::exists(path))
            throw MissingInputError("no such file: " + path);
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw MissingInputError("cannot open: " + path);
        auto size = static_cast<std::size_t>(in.tellg());
        std::vector<char> data(size);
        in.seekg(0);
        in.read(data.data(), static_cast<std::streamsize>(size));
        if (!in) throw LengthError("short read: " + path);
        return ByteReader(std::move(data));
    }

    // Verifies the trailing 8-byte CRC64 and excludes it from further reads.
    void check_crc_trailer() {
        if (buf_.size() < 8) throw LengthError("file too small for checksum trailer");
        std::size_t body = buf_.size() - 8;
        std::uint64_t stored;
        std::memcpy(&stored, buf_.data() + body, 8);
        std::uint64_t actual = Crc64::of(buf_.data(), body);
        if (stored != actual) throw ChecksumError("CRC64 mismatch");
        limit_ = body;
    }

    void expect_magic(const char (&magic)[5]) {
        if (remaining() < 4) throw LengthError("truncated before magic");
        if (std::memcmp(buf_.data() + pos_, magic, 4) != 0)
            throw FormatError(std::string("bad magic, expected ") + magic);
        pos_ += 4;
    }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }

    std::uint16_t u16() { return read_le<std::uint16_t>(); }
    std::uint32_t u32() { return read_le<std::uint32_t>(); }
    std::uint64_t u64() { return read_le<std::uint64_t>(); }
    float f32() { return read_le<float>(); }

    std::string string(std::size_t n) {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }

    std::vector<float> f32_array(std::size_t n) {
        need(n * 4);
        std::vector<float> out(n);
        std::memcpy(out.data(), buf_.data() + pos_, n * 4);
        pos_ += n * 4;
        return out;
    }

    std::vector<std::uint16_t> u16_array(std::size_t n) {
        need(n * 2);
        std::vector<std::uint16_t> out(n);
        std::memcpy(out.data(), buf_.data() + pos_, n * 2);
        pos_ += n * 2;
        return out;
    }

    std::size_t remaining() const { return limit_ - pos_; }

  private:
    template <typename T>
    T read_le() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void need(std::size_t n) const {
        if (pos_ + n > limit_) throw LengthError("truncated payload");
    }

    std::vector<char> buf_;
    std::size_t pos_ = 0;
    std::size_t limit_ = 0;
};

inline std::uint64_t file_crc64(const std::string& path) {
    if (!std::filesystem::exists(path)) throw MissingInputError("no such file: " + path);
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw MissingInputError("cannot open: " + path);
    auto size = static_cast<std::size_t>(in.tellg());
    std::vector<char> data(size);
    in.seekg(0);
    in.read(data.data(), static_cast<std::streamsize>(size));
    return Crc64::of(data.data(), data.size());
}

}  // namespace lpurify
