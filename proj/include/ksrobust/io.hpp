#pragma once

// Plain-text edge lists and label files, plus a little-endian binary format
// for dense Z2 matrices.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ksrobust/error.hpp"
#include "ksrobust/graph.hpp"
#include "ksrobust/model.hpp"
#include "ksrobust/operators.hpp"

namespace ksrobust {

// Header line "n m", then m lines "u v" with u < v.
inline void write_edge_list(std::ostream& out, const Graph& graph) {
  out << graph.n() << ' ' << graph.num_edges() << '\n';
  for (const Edge& e : graph.edges()) out << e.u << ' ' << e.v << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing edge list");
}

inline Graph read_edge_list(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw Error(ErrorCode::kIo, "edge list: missing 'n m' header");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    long long u = -1, v = -1;
    if (!(in >> u >> v)) throw Error(ErrorCode::kIo, "edge list: expected " + std::to_string(m) + " edges");
    if (u < 0 || v < 0) throw Error(ErrorCode::kIo, "edge list: negative vertex index");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  return Graph(n, std::move(edges));
}

inline void write_labels(std::ostream& out, const SignVector& labels) {
  for (auto x : labels) out << (x > 0 ? "+1" : "-1") << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing labels");
}

inline SignVector read_labels(std::istream& in) {
  SignVector labels;
  std::string token;
  while (in >> token) {
    if (token == "+1" || token == "1") {
      labels.push_back(1);
    } else if (token == "-1") {
      labels.push_back(-1);
    } else {
      throw Error(ErrorCode::kIo, "label file: unexpected token '" + token + "'");
    }
  }
  return labels;
}

namespace detail {

inline void put_le64(std::ostream& out, std::uint64_t bits) {
  unsigned char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t get_le64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw Error(ErrorCode::kIo, "matrix file truncated");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return bits;
}

}  // namespace detail

/// 8-byte n, then n*n row-major doubles, all little-endian.
inline void write_matrix(std::ostream& out, const DenseMatrix& m) {
  require(m.rows() == m.cols(), "write_matrix: matrix must be square");
  detail::put_le64(out, static_cast<std::uint64_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) detail::put_le64(out, std::bit_cast<std::uint64_t>(m(i, j)));
  if (!out) throw Error(ErrorCode::kIo, "failed writing matrix");
}

inline DenseMatrix read_matrix(std::istream& in) {
  const std::uint64_t n = detail::get_le64(in);
  if (n > (std::uint64_t{1} << 20)) throw Error(ErrorCode::kIo, "matrix file: implausible size");
  DenseMatrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = std::bit_cast<double>(detail::get_le64(in));
  return m;
}

template <class T, class Reader>
T read_file(const std::string& path, Reader reader, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return reader(in);
}

template <class Writer>
void write_file(const std::string& path, Writer writer, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  writer(out);
}

}  // namespace ksrobust
