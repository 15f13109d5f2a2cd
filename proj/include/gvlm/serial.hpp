#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "gvlm/tensor.hpp"

namespace gvlm {

/// CRC-32 (IEEE, reflected polynomial 0xEDB88320).
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

/// Little-endian byte stream writer for the GSVL / GVLP formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void f32(float v);
    void f64(double v);
    void bytes(const void* p, std::size_t n);
    void f32_array(const std::vector<float>& v);
    void f64_array(const std::vector<double>& v);
    /// CRC32 of everything written so far, appended as u32.
    void append_crc();

    std::size_t size() const { return buf_.size(); }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; every failure throws DataError naming the format.
class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& buf, std::string what);

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    float f32();
    double f64();
    void read_bytes(void* p, std::size_t n);
    void f32_array(std::vector<float>& out);
    void f64_array(std::vector<double>& out);

    /// Validates the trailing CRC32 over the preceding bytes and excludes
    /// it from the readable region. Call before any other reads.
    void check_crc();
    /// Throws if readable bytes remain.
    void expect_end() const;

    std::size_t remaining() const { return end_ - pos_; }

private:
    const std::uint8_t* data_;
    std::size_t pos_ = 0;
    std::size_t end_;
    std::string what_;

    void need(std::size_t n) const;
};

}  // namespace gvlm
