#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sprig/query.hpp"

namespace sprig {

// Versioned binary index dump: grid, cell-ordered records, block directory,
// model configuration, and trained error guarantee. Loading refits the model
// from the stored configuration (fits are deterministic).
void save_index(const SprigIndex& index, const ModelOptions& options,
                const std::string& path);

struct LoadedIndex {
  SprigIndex index;
  ModelOptions options;
};
LoadedIndex load_index(const std::string& path);

// Query files: range "b_x,b_y,t_x,t_y" per line; knn "x,y,k" per line.
// '#' lines are ignored. Malformed lines throw.
std::vector<RangeQuery> read_range_queries(const std::string& path);
std::vector<KnnQuery> read_knn_queries(const std::string& path);

void write_range_queries(const std::vector<RangeQuery>& queries,
                         const std::string& path);
void write_knn_queries(const std::vector<KnnQuery>& queries,
                       const std::string& path);

// Deterministic 64-bit fold (FNV-1a) over ids sorted ascending.
std::uint64_t checksum_ids(std::vector<std::uint64_t> ids);
std::uint64_t checksum_points(const std::vector<Point>& pts);

struct QueryResultLine {
  std::size_t query_index = 0;
  std::size_t result_count = 0;
  std::uint64_t checksum = 0;
};

// "query_index,result_count,checksum" per line, checksum in hex.
void write_query_results(const std::vector<QueryResultLine>& lines,
                         const std::string& path);

}  // namespace sprig
