#include "serenqa/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <tuple>

#include "serenqa/errors.hpp"

namespace serenqa {

namespace {

constexpr uint64_t kMagic = 0x3158525441'4d5153ull;  // "SQMATRX1" little-endian

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    put_u64(out, std::bit_cast<uint64_t>(d));
}

struct Reader {
    const unsigned char* p;
    size_t len;
    size_t off = 0;
    const std::string& path;

    uint32_t u32() {
        if (off + 4 > len) throw ParseError("cache '" + path + "' truncated");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    uint64_t u64() {
        if (off + 8 > len) throw ParseError("cache '" + path + "' truncated");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[off + i]) << (8 * i);
        off += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

std::string header_bytes(const CacheHeader& h, uint64_t count) {
    std::string out;
    put_u64(out, kMagic);
    put_u64(out, h.dim);
    put_u32(out, h.k);
    put_u32(out, 0);
    put_u64(out, h.hash);
    put_u64(out, count);
    return out;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for cache file '" + path + "'");
}

struct Loaded {
    CacheHeader header;
    std::vector<std::tuple<uint32_t, uint32_t, double>> triples;
};

std::optional<Loaded> read_file(const std::string& path, const CacheHeader& expect) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0, path};
    if (r.u64() != kMagic) throw ParseError("cache '" + path + "' has a bad magic number");
    Loaded l;
    l.header.dim = r.u64();
    l.header.k = r.u32();
    r.u32();
    l.header.hash = r.u64();
    uint64_t count = r.u64();
    if (l.header.dim != expect.dim || l.header.k != expect.k || l.header.hash != expect.hash) {
        throw StaleCacheError("cache '" + path + "' was built from different inputs");
    }
    l.triples.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t row = r.u32();
        uint32_t col = r.u32();
        double v = r.f64();
        if (row >= l.header.dim || col >= l.header.dim) {
            throw ParseError("cache '" + path + "' has an out-of-range coordinate");
        }
        l.triples.emplace_back(row, col, v);
    }
    if (r.off != r.len) throw ParseError("cache '" + path + "' has trailing bytes");
    return l;
}

}  // namespace

void write_matrix_cache(const std::string& path, const CacheHeader& h, const ProbMatrix& m) {
    std::string bytes = header_bytes(h, m.nonzeros());
    for (size_t r = 0; r < m.dim(); ++r) {
        m.scan_row(r, [&](uint32_t c, double v) {
            put_u32(bytes, static_cast<uint32_t>(r));
            put_u32(bytes, c);
            put_f64(bytes, v);
        });
    }
    write_file(path, bytes);
}

void write_vector_cache(const std::string& path, const CacheHeader& h,
                        const std::vector<double>& v) {
    uint64_t count = 0;
    for (double x : v)
        if (x != 0.0) ++count;
    std::string bytes = header_bytes(h, count);
    for (size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        put_u32(bytes, static_cast<uint32_t>(i));
        put_u32(bytes, 0);
        put_f64(bytes, v[i]);
    }
    write_file(path, bytes);
}

std::optional<ProbMatrix> read_matrix_cache(const std::string& path, const CacheHeader& expect) {
    auto l = read_file(path, expect);
    if (!l) return std::nullopt;
    ProbMatrix m(l->header.dim);
    std::vector<std::vector<ProbMatrix::Entry>> rows(l->header.dim);
    for (const auto& [r, c, v] : l->triples) rows[r].emplace_back(c, v);
    for (size_t r = 0; r < rows.size(); ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end());
        m.set_row(r, std::move(row));
    }
    m.maybe_densify();
    return m;
}

std::optional<std::vector<double>> read_vector_cache(const std::string& path,
                                                     const CacheHeader& expect) {
    auto l = read_file(path, expect);
    if (!l) return std::nullopt;
    std::vector<double> v(l->header.dim, 0.0);
    for (const auto& [r, c, x] : l->triples) {
        if (c != 0) throw ParseError("cache '" + path + "' is not a vector");
        v[r] = x;
    }
    return v;
}

bool cache_valid(const std::string& path, const CacheHeader& expect) {
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) return false;
        auto l = read_file(path, expect);
        return l.has_value();
    } catch (const Error&) {
        return false;
    }
}

}  // namespace serenqa
