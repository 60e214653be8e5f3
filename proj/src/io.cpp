#include "sprig/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace sprig {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'R', 'I', 'G', 'I', 'X', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated index file");
  return v;
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::ifstream& in) {
  const auto size = get<std::uint64_t>(in);
  std::vector<double> v(size);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(size * sizeof(double)));
  if (!in) throw std::runtime_error("truncated index file");
  return v;
}

}  // namespace

void save_index(const SprigIndex& index, const ModelOptions& options,
                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open index file for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_doubles(out, index.grid.bx);
  put_doubles(out, index.grid.by);

  put<std::uint64_t>(out, index.table.data.size());
  for (const Point& p : index.table.data) {
    put(out, p.x);
    put(out, p.y);
    put<std::uint64_t>(out, p.id);
  }
  put<std::uint64_t>(out, index.table.blocks.size());
  for (const CellBlock& b : index.table.blocks) {
    put<std::uint64_t>(out, b.cell_id);
    put<std::uint64_t>(out, b.first_offset);
    put<std::uint64_t>(out, b.size);
    put(out, b.pivot.x);
    put(out, b.pivot.y);
    out.write(reinterpret_cast<const char*>(b.pivot_dists.data()),
              static_cast<std::streamsize>(b.pivot_dists.size() * sizeof(double)));
  }

  put<std::uint8_t>(out, static_cast<std::uint8_t>(index.model.kind()));
  put(out, options.shepard_power);
  put(out, options.rbf_width);
  put<std::uint64_t>(out, options.rbf_mem_budget);
  put(out, index.eg.eg);
  put<std::uint64_t>(out, index.eg.eg_x);
  put<std::uint64_t>(out, index.eg.eg_y);
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a sprig index file (bad magic): " + path);
  }

  LoadedIndex loaded;
  SprigIndex& index = loaded.index;
  index.grid.bx = get_doubles(in);
  index.grid.by = get_doubles(in);

  const auto npoints = get<std::uint64_t>(in);
  index.table.data.resize(npoints);
  for (auto& p : index.table.data) {
    p.x = get<double>(in);
    p.y = get<double>(in);
    p.id = get<std::uint64_t>(in);
  }
  const auto nblocks = get<std::uint64_t>(in);
  index.table.blocks.resize(nblocks);
  for (auto& b : index.table.blocks) {
    b.cell_id = get<std::uint64_t>(in);
    b.first_offset = get<std::uint64_t>(in);
    b.size = get<std::uint64_t>(in);
    b.pivot.x = get<double>(in);
    b.pivot.y = get<double>(in);
    b.pivot_dists.resize(b.size);
    in.read(reinterpret_cast<char*>(b.pivot_dists.data()),
            static_cast<std::streamsize>(b.size * sizeof(double)));
    if (!in) throw std::runtime_error("truncated index file");
  }

  const auto kind = static_cast<ModelKind>(get<std::uint8_t>(in));
  loaded.options.shepard_power = get<double>(in);
  loaded.options.rbf_width = get<double>(in);
  loaded.options.rbf_mem_budget = get<std::uint64_t>(in);
  index.eg.eg = get<double>(in);
  index.eg.eg_x = get<std::uint64_t>(in);
  index.eg.eg_y = get<std::uint64_t>(in);

  index.model = fit_model(index.grid, kind, loaded.options);
  return loaded;
}

namespace {

std::vector<double> parse_fields(const std::string& line, std::size_t expect) {
  std::vector<double> fields;
  const char* p = line.c_str();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
    if (p >= end) break;
    double v = 0.0;
    auto r = std::from_chars(p, end, v);
    if (r.ec != std::errc{}) throw std::runtime_error("malformed query line: " + line);
    fields.push_back(v);
    p = r.ptr;
  }
  if (fields.size() != expect) {
    throw std::runtime_error("malformed query line (expected " +
                             std::to_string(expect) + " fields): " + line);
  }
  return fields;
}

bool skippable(const std::string& line) {
  const std::size_t first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

std::vector<RangeQuery> read_range_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file: " + path);
  std::vector<RangeQuery> queries;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto f = parse_fields(line, 4);
    RangeQuery q{Point{f[0], f[1], 0}, Point{f[2], f[3], 0}};
    if (!q.valid()) throw std::runtime_error("invalid range window: " + line);
    queries.push_back(q);
  }
  return queries;
}

std::vector<KnnQuery> read_knn_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file: " + path);
  std::vector<KnnQuery> queries;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto f = parse_fields(line, 3);
    if (f[2] < 1.0) throw std::runtime_error("invalid k: " + line);
    queries.push_back(KnnQuery{Point{f[0], f[1], 0}, static_cast<std::size_t>(f[2])});
  }
  return queries;
}

void write_range_queries(const std::vector<RangeQuery>& queries,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  char buf[160];
  for (const RangeQuery& q : queries) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", q.q_b.x, q.q_b.y,
                  q.q_t.x, q.q_t.y);
    out << buf;
  }
}

void write_knn_queries(const std::vector<KnnQuery>& queries,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  char buf[120];
  for (const KnnQuery& q : queries) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", q.q_k.x, q.q_k.y, q.k);
    out << buf;
  }
}

std::uint64_t checksum_ids(std::vector<std::uint64_t> ids) {
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t id : ids) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (id >> (byte * 8)) & 0xffULL;
      h *= 0x00000100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t checksum_points(const std::vector<Point>& pts) {
  std::vector<std::uint64_t> ids;
  ids.reserve(pts.size());
  for (const Point& p : pts) ids.push_back(p.id);
  return checksum_ids(std::move(ids));
}

void write_query_results(const std::vector<QueryResultLine>& lines,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << "query_index,result_count,checksum\n";
  char buf[96];
  for (const QueryResultLine& l : lines) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%016llx\n", l.query_index,
                  l.result_count, static_cast<unsigned long long>(l.checksum));
    out << buf;
  }
}

}  // namespace sprig
