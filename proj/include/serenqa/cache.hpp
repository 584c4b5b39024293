#pragma once

// Binary on-disk cache for matrices and marginal vectors. Little-endian
// layout:
//
//   magic   u64   "SQMATRX1"
//   V       u64   dimension
//   k       u32   hop count (0 for one-hop / vectors without a hop mix)
//   pad     u32
//   hash    u64   content hash of the source edge file
//   count   u64   number of triples
//   triples count * (u32 row, u32 col, f64 value)
//
// A vector is stored as triples with col = 0.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "serenqa/matrix.hpp"

namespace serenqa {

struct CacheHeader {
    uint64_t dim = 0;
    uint32_t k = 0;
    uint64_t hash = 0;
};

void write_matrix_cache(const std::string& path, const CacheHeader& h, const ProbMatrix& m);
void write_vector_cache(const std::string& path, const CacheHeader& h,
                        const std::vector<double>& v);

// Returns nothing when the file is absent. Throws ParseError on a corrupt
// file, StaleCacheError when `expect` disagrees with the stored header.
std::optional<ProbMatrix> read_matrix_cache(const std::string& path, const CacheHeader& expect);
std::optional<std::vector<double>> read_vector_cache(const std::string& path,
                                                     const CacheHeader& expect);

// True when the file exists and its header matches.
bool cache_valid(const std::string& path, const CacheHeader& expect);

}  // namespace serenqa
