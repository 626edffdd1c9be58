#pragma once

// Bit-exact state files.
//
// Layout, all integers little-endian, doubles as IEEE-754 binary64 bit
// patterns stored like u64:
//   magic      8 bytes  "RSPHCKPT"
//   version    u32      (kCheckpointVersion)
//   arithmetic u8       0 = fixpa, 1 = flopa
//   scheme     u8       0 = sym, 1 = std
//   reserved   u16      0
//   count      u64      particle count
//   step       u64      steps since start or last reversal
//   time       f64      global simulation time
//   dissipated f64
//   config     u32      CRC-32 of the rendered configuration
//   per particle:
//     kind u8, mass f64, offset f64, density f64,
//     position 2 x (i64 raw Q31.32 | f64), velocity 2 x (i64 | f64)
//   crc        u32      CRC-32 (zlib) of every preceding byte

#include <rsph/error.hpp>
#include <rsph/integrate.hpp>

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsph::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 8> kCheckpointMagic{'R', 'S', 'P', 'H', 'C', 'K', 'P', 'T'};

class CheckpointError : public Error {
public:
    using Error::Error;
};

struct CheckpointHeader {
    std::uint32_t version = kCheckpointVersion;
    Arithmetic arithmetic = Arithmetic::fixpa;
    Scheme scheme = Scheme::sym;
    std::uint64_t count = 0;
    std::uint64_t step = 0;
    double time = 0.0;
    double dissipated = 0.0;
    std::uint32_t config_hash = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in bounded pieces.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
        crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

inline std::uint32_t crc32_of(std::string_view text) {
    return crc32_of(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace detail {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    std::vector<std::uint8_t>& buffer() { return buf_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
    double f64() { return std::bit_cast<double>(get(8)); }
    void bytes(char* p, std::size_t n) {
        need(n);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw CheckpointError("checkpoint truncated");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

inline void put_vec(Writer& w, const FixedVector2& v) {
    w.i64(v.x.raw());
    w.i64(v.y.raw());
}
inline void put_vec(Writer& w, const Vec2& v) {
    w.f64(v.x);
    w.f64(v.y);
}
inline void get_vec(Reader& r, FixedVector2& v) {
    try {
        v.x = FixedValue::from_raw(r.i64());
        v.y = FixedValue::from_raw(r.i64());
    } catch (const OverflowError& e) {
        throw CheckpointError(std::string("invalid fixed-point value in checkpoint: ") + e.what());
    }
}
inline void get_vec(Reader& r, Vec2& v) {
    v.x = r.f64();
    v.y = r.f64();
}

} // namespace detail

template <class Arith>
std::vector<std::uint8_t> serialize_checkpoint(const SimState<Arith>& s, Scheme scheme, double time,
                                               std::uint32_t config_hash) {
    detail::Writer w;
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.u32(kCheckpointVersion);
    w.u8(Arith::kind == Arithmetic::fixpa ? 0 : 1);
    w.u8(scheme == Scheme::sym ? 0 : 1);
    w.u16(0);
    w.u64(s.ps.size());
    w.u64(s.step);
    w.f64(time);
    w.f64(s.dissipated);
    w.u32(config_hash);
    for (std::size_t a = 0; a < s.ps.size(); ++a) {
        w.u8(static_cast<std::uint8_t>(s.ps.kind[a]));
        w.f64(s.ps.mass[a]);
        w.f64(s.ps.offset[a]);
        w.f64(s.ps.density[a]);
        detail::put_vec(w, s.position[a]);
        detail::put_vec(w, s.velocity[a]);
    }
    const std::uint32_t crc = crc32_of(w.buffer());
    w.u32(crc);
    return std::move(w.buffer());
}

/// Header only; validates magic, version and checksum.
inline CheckpointHeader read_checkpoint_header(std::span<const std::uint8_t> data) {
    if (data.size() < kCheckpointMagic.size() + 4) throw CheckpointError("checkpoint truncated");
    if (std::memcmp(data.data(), kCheckpointMagic.data(), kCheckpointMagic.size()) != 0) {
        throw CheckpointError("not a checkpoint file (bad magic)");
    }
    detail::Reader r(data);
    std::array<char, 8> magic{};
    r.bytes(magic.data(), magic.size());
    CheckpointHeader h;
    h.version = r.u32();
    if (h.version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(h.version));
    }
    const std::uint8_t arith = r.u8();
    const std::uint8_t scheme = r.u8();
    if (arith > 1 || scheme > 1) throw CheckpointError("corrupt checkpoint header");
    h.arithmetic = arith == 0 ? Arithmetic::fixpa : Arithmetic::flopa;
    h.scheme = scheme == 0 ? Scheme::sym : Scheme::std;
    (void)r.u16();
    h.count = r.u64();
    h.step = r.u64();
    h.time = r.f64();
    h.dissipated = r.f64();
    h.config_hash = r.u32();
    const std::size_t vec_bytes = 16;
    const std::size_t header_bytes = 8 + 4 + 4 + 8 + 8 + 8 + 8 + 4;
    const std::size_t per_particle = 1 + 24 + 2 * vec_bytes;
    if (h.count > (data.size() - header_bytes) / per_particle ||
        data.size() != header_bytes + h.count * per_particle + 4) {
        throw CheckpointError("checkpoint truncated or has trailing bytes");
    }
    const std::uint32_t stored = static_cast<std::uint32_t>(data[data.size() - 4]) |
                                 static_cast<std::uint32_t>(data[data.size() - 3]) << 8 |
                                 static_cast<std::uint32_t>(data[data.size() - 2]) << 16 |
                                 static_cast<std::uint32_t>(data[data.size() - 1]) << 24;
    if (crc32_of(data.first(data.size() - 4)) != stored) throw CheckpointError("checkpoint checksum mismatch");
    return h;
}

template <class Arith>
SimState<Arith> deserialize_checkpoint(std::span<const std::uint8_t> data, CheckpointHeader* header_out = nullptr) {
    const CheckpointHeader h = read_checkpoint_header(data);
    if (h.arithmetic != Arith::kind) {
        throw CheckpointError("checkpoint arithmetic mode mismatch: file is " + std::string(to_string(h.arithmetic)) +
                              ", reader expects " + std::string(to_string(Arith::kind)));
    }
    detail::Reader r(data.subspan(52));
    SimState<Arith> s;
    s.position.resize(h.count);
    s.velocity.resize(h.count);
    for (std::size_t a = 0; a < h.count; ++a) {
        const std::uint8_t kind = r.u8();
        if (kind > 2) throw CheckpointError("corrupt particle kind in checkpoint");
        const double m = r.f64();
        if (!(m > 0.0)) throw CheckpointError("non-positive particle mass in checkpoint");
        s.ps.add(static_cast<ParticleKind>(kind), {}, {}, m);
        s.ps.offset[a] = r.f64();
        s.ps.density[a] = r.f64();
        detail::get_vec(r, s.position[a]);
        detail::get_vec(r, s.velocity[a]);
    }
    s.step = h.step;
    s.dissipated = h.dissipated;
    s.acceleration.assign(h.count, Vec2{});
    s.acceleration_current = false;
    s.sync_positions();
    s.sync_velocities();
    if (header_out) *header_out = h;
    return s;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write failed: '" + path + "'");
}

template <class Arith>
void write_checkpoint(const std::string& path, const SimState<Arith>& s, Scheme scheme, double time,
                      std::uint32_t config_hash) {
    write_file_bytes(path, serialize_checkpoint(s, scheme, time, config_hash));
}

template <class Arith>
SimState<Arith> read_checkpoint(const std::string& path, CheckpointHeader* header_out = nullptr) {
    return deserialize_checkpoint<Arith>(read_file_bytes(path), header_out);
}

} // namespace rsph::io
