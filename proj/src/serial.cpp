#include "gvlm/serial.hpp"

#include <array>
#include <bit>

namespace gvlm {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = make_crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void ByteWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void ByteWriter::f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
}

void ByteWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

void ByteWriter::bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
}

void ByteWriter::f32_array(const std::vector<float>& v) {
    for (float x : v) f32(x);
}

void ByteWriter::f64_array(const std::vector<double>& v) {
    for (double x : v) f64(x);
}

void ByteWriter::append_crc() { u32(crc32(buf_.data(), buf_.size())); }

ByteReader::ByteReader(const std::vector<std::uint8_t>& buf, std::string what)
    : data_(buf.data()), end_(buf.size()), what_(std::move(what)) {}

void ByteReader::need(std::size_t n) const {
    if (pos_ + n > end_) throw DataError(what_ + ": truncated payload");
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

float ByteReader::f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

double ByteReader::f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void ByteReader::read_bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
}

void ByteReader::f32_array(std::vector<float>& out) {
    for (float& x : out) x = f32();
}

void ByteReader::f64_array(std::vector<double>& out) {
    for (double& x : out) x = f64();
}

void ByteReader::check_crc() {
    if (end_ < 4) throw DataError(what_ + ": truncated payload");
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(data_[end_ - 4 + i]) << (8 * i);
    std::uint32_t actual = crc32(data_, end_ - 4);
    if (stored != actual) throw DataError(what_ + ": checksum mismatch");
    end_ -= 4;
}

void ByteReader::expect_end() const {
    if (pos_ != end_) throw DataError(what_ + ": trailing bytes");
}

}  // namespace gvlm
