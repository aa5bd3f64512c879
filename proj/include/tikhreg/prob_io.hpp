#pragma once

// `.prob` container for a ProblemInstance:
//
//   offset 0   8 bytes   magic "TKHPROB1"
//   offset 8   8 bytes   header length H, unsigned little-endian
//   offset 16  H bytes   UTF-8 JSON header
//   then                 little-endian float64 arrays, in the order listed
//                        by header["arrays"]: A (n*n, row-major), x_star (n),
//                        y (n), and W (n*n, row-major) when w_kind == "explicit".

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/problems.hpp"

namespace tikhreg {

inline constexpr std::array<char, 8> kProbMagic = {'T', 'K', 'H', 'P', 'R', 'O', 'B', '1'};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf{};
  for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf.data(), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), 8);
  if (!is) throw Error(Errc::io_error, "truncated .prob stream");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
  return v;
}

inline void put_f64(std::ostream& os, double x) { put_u64(os, std::bit_cast<std::uint64_t>(x)); }

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

inline void put_row_major(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_f64(os, m(i, j));
}

inline Matrix get_row_major(std::istream& is, Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = get_f64(is);
  return m;
}

}  // namespace detail

inline void write_prob(std::ostream& os, const ProblemInstance& p) {
  nlohmann::json header;
  header["format"] = "tikhreg-prob";
  header["version"] = 1;
  header["n"] = p.n;
  header["label"] = p.label;
  header["w_kind"] = p.W.is_identity() ? "identity" : "explicit";
  header["byte_order"] = "little";
  header["layout"] = "row-major";
  std::vector<std::string> arrays = {"A", "x_star", "y"};
  if (!p.W.is_identity()) arrays.emplace_back("W");
  header["arrays"] = arrays;
  const std::string text = header.dump();

  os.write(kProbMagic.data(), kProbMagic.size());
  detail::put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  detail::put_row_major(os, p.A);
  for (Index i = 0; i < p.n; ++i) detail::put_f64(os, p.x_star[i]);
  for (Index i = 0; i < p.n; ++i) detail::put_f64(os, p.y[i]);
  if (!p.W.is_identity()) detail::put_row_major(os, p.W.matrix());
  if (!os) throw Error(Errc::io_error, "failed writing .prob stream");
}

inline ProblemInstance read_prob(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kProbMagic) throw Error(Errc::io_error, "not a .prob stream (bad magic)");
  const std::uint64_t len = detail::get_u64(is);
  if (len > (std::uint64_t{1} << 24)) throw Error(Errc::io_error, ".prob header too large");
  std::string text(static_cast<std::size_t>(len), '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw Error(Errc::io_error, "truncated .prob header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string(".prob header is not JSON: ") + e.what());
  }
  if (header.value("format", "") != "tikhreg-prob" || header.value("version", 0) != 1) {
    throw Error(Errc::io_error, "unsupported .prob format or version");
  }
  ProblemInstance p;
  p.n = header.at("n").get<Index>();
  if (p.n < 2) throw Error(Errc::io_error, ".prob header has n < 2");
  p.label = header.value("label", "");
  p.A = detail::get_row_major(is, p.n);
  p.x_star.resize(p.n);
  p.y.resize(p.n);
  for (Index i = 0; i < p.n; ++i) p.x_star[i] = detail::get_f64(is);
  for (Index i = 0; i < p.n; ++i) p.y[i] = detail::get_f64(is);
  const std::string kind = header.value("w_kind", "identity");
  if (kind == "explicit") {
    p.W = WeightSpec::from_matrix(detail::get_row_major(is, p.n));
  } else if (kind == "identity") {
    p.W = WeightSpec::identity();
  } else {
    throw Error(Errc::io_error, "unknown w_kind in .prob header");
  }
  validate(p);
  return p;
}

inline void save_prob(const std::string& path, const ProblemInstance& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  write_prob(os, p);
}

inline ProblemInstance load_prob(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open " + path);
  return read_prob(is);
}

}  // namespace tikhreg
