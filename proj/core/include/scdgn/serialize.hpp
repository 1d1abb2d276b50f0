#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "scdgn/errors.hpp"
#include "scdgn/matrix.hpp"

namespace scdgn {

// Little-endian fixed-width binary archives. Every file starts with an
// 8-byte magic tag and a u32 format version.

class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path)
        : path_(path.string()), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw DataError("cannot open for writing: " + path_);
    }

    void magic(const char tag[8], std::uint32_t version) {
        out_.write(tag, 8);
        u32(version);
    }
    void u8(std::uint8_t v) { raw(&v, sizeof v); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }

    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    template <typename T>
    void vec(const std::vector<T>& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        u64(v.size());
        raw(v.data(), v.size() * sizeof(T));
    }
    void strings(const std::vector<std::string>& v) {
        u64(v.size());
        for (const auto& s : v) str(s);
    }
    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        raw(m.data().data(), m.data().size() * sizeof(double));
    }

    void close() {
        out_.close();
        if (!out_) throw DataError("write failed: " + path_);
    }

private:
    void raw(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) throw DataError("write failed: " + path_);
    }
    std::string path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path)
        : path_(path.string()), in_(path, std::ios::binary) {
        if (!in_) throw DataError("cannot open: " + path_);
    }

    std::uint32_t magic(const char tag[8]) {
        char got[8];
        raw(got, 8);
        if (std::memcmp(got, tag, 8) != 0)
            throw DataError(path_ + ": bad magic, expected " + std::string(tag, 8));
        return u32();
    }
    std::uint8_t u8() { std::uint8_t v; raw(&v, sizeof v); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    std::int64_t i64() { std::int64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }

    std::string str() {
        std::string s(u64(), '\0');
        raw(s.data(), s.size());
        return s;
    }
    template <typename T>
    std::vector<T> vec() {
        static_assert(std::is_trivially_copyable_v<T>);
        std::vector<T> v(u64());
        raw(v.data(), v.size() * sizeof(T));
        return v;
    }
    std::vector<std::string> strings() {
        std::vector<std::string> v(u64());
        for (auto& s : v) s = str();
        return v;
    }
    Matrix matrix() {
        const std::uint64_t r = u64();
        const std::uint64_t c = u64();
        Matrix m(r, c);
        raw(m.data().data(), m.data().size() * sizeof(double));
        return m;
    }

private:
    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw DataError(path_ + ": truncated file");
    }
    std::string path_;
    std::ifstream in_;
};

} // namespace scdgn
