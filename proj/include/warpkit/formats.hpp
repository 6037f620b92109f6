#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "warpkit/image.hpp"

namespace warpkit {

// UVF1: magic "UVF1", u32le width, u32le height, then width*height (u,v)
// float32le pairs, row-major.
// KMF1: magic "KMF1", same header, one float32le per pixel, row-major.

class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, size_t byte_offset)
        : std::runtime_error(msg + " (at byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    size_t offset;
};

namespace detail {

inline void put_u32le(std::vector<uint8_t>& buf, uint32_t v) {
    buf.push_back(static_cast<uint8_t>(v & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
}

inline void put_f32le(std::vector<uint8_t>& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(buf, bits);
}

inline uint32_t get_u32le(const std::vector<uint8_t>& buf, size_t off) {
    return static_cast<uint32_t>(buf[off]) | (static_cast<uint32_t>(buf[off + 1]) << 8) |
           (static_cast<uint32_t>(buf[off + 2]) << 16) | (static_cast<uint32_t>(buf[off + 3]) << 24);
}

inline float get_f32le(const std::vector<uint8_t>& buf, size_t off) {
    const uint32_t bits = get_u32le(buf, off);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline std::vector<uint8_t> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_all(const std::string& path, const std::vector<uint8_t>& buf) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void check_header(const std::vector<uint8_t>& buf, const char magic[4], const std::string& path,
                         uint32_t& w, uint32_t& h) {
    if (buf.size() < 12) throw FormatError(path + ": truncated header, expected >= 12 bytes, got " +
                                           std::to_string(buf.size()), buf.size());
    if (std::memcmp(buf.data(), magic, 4) != 0)
        throw FormatError(path + ": bad magic, expected \"" + std::string(magic, 4) + "\"", 0);
    w = get_u32le(buf, 4);
    h = get_u32le(buf, 8);
    if (w == 0 || h == 0) throw FormatError(path + ": zero dimension in header", 4);
}

}  // namespace detail

inline std::vector<uint8_t> encode_uvf(const UVField& field) {
    std::vector<uint8_t> buf;
    buf.reserve(12 + field.u_values().size() * 8);
    buf.insert(buf.end(), {'U', 'V', 'F', '1'});
    detail::put_u32le(buf, static_cast<uint32_t>(field.width()));
    detail::put_u32le(buf, static_cast<uint32_t>(field.height()));
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) {
            detail::put_f32le(buf, static_cast<float>(field.u(x, y)));
            detail::put_f32le(buf, static_cast<float>(field.v(x, y)));
        }
    }
    return buf;
}

inline void write_uvf(const std::string& path, const UVField& field) {
    detail::write_all(path, encode_uvf(field));
}

inline UVField read_uvf(const std::string& path) {
    const auto buf = detail::read_all(path);
    uint32_t w, h;
    detail::check_header(buf, "UVF1", path, w, h);
    const size_t expected = 12 + static_cast<size_t>(w) * h * 8;
    if (buf.size() != expected)
        throw FormatError(path + ": expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(buf.size()), buf.size());
    UVField field(static_cast<int>(w), static_cast<int>(h));
    size_t off = 12;
    for (uint32_t y = 0; y < h; ++y) {
        for (uint32_t x = 0; x < w; ++x) {
            field.u(static_cast<int>(x), static_cast<int>(y)) = detail::get_f32le(buf, off);
            field.v(static_cast<int>(x), static_cast<int>(y)) = detail::get_f32le(buf, off + 4);
            off += 8;
        }
    }
    return field;
}

inline std::vector<uint8_t> encode_kmf(const ScalarField& field) {
    std::vector<uint8_t> buf;
    buf.reserve(12 + field.values().size() * 4);
    buf.insert(buf.end(), {'K', 'M', 'F', '1'});
    detail::put_u32le(buf, static_cast<uint32_t>(field.width()));
    detail::put_u32le(buf, static_cast<uint32_t>(field.height()));
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) detail::put_f32le(buf, static_cast<float>(field.at(x, y)));
    return buf;
}

inline void write_kmf(const std::string& path, const ScalarField& field) {
    detail::write_all(path, encode_kmf(field));
}

inline ScalarField read_kmf(const std::string& path) {
    const auto buf = detail::read_all(path);
    uint32_t w, h;
    detail::check_header(buf, "KMF1", path, w, h);
    const size_t expected = 12 + static_cast<size_t>(w) * h * 4;
    if (buf.size() != expected)
        throw FormatError(path + ": expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(buf.size()), buf.size());
    ScalarField field(static_cast<int>(w), static_cast<int>(h));
    size_t off = 12;
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x, off += 4)
            field.at(static_cast<int>(x), static_cast<int>(y)) = detail::get_f32le(buf, off);
    return field;
}

}  // namespace warpkit
