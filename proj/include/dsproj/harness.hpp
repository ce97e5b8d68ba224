#pragma once

// Instance generation and matrix file I/O.
//
// Randomness: all generators consume a std::mt19937_64 engine directly and
// convert its output with fixed arithmetic (no std distributions, whose
// sequences vary between standard library implementations), so a seed fully
// determines the generated instance.  Gaussians come from the Box-Muller
// transform of two (0,1) uniforms.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dsproj/core_model.hpp"

namespace dsproj {

// Stable seed derivation for independent benchmark trials:
// derive_seed(master, n, trial) = splitmix64(splitmix64(master + n) + trial).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return splitmix64(splitmix64(master + a) + b);
}

// Deterministic scalar streams over a mt19937_64 engine.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : rng_(seed) {}

  // Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    constexpr double kTwoPi = 6.28318530717958647692;
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double m = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = m * std::sin(a);
    have_spare_ = true;
    return m * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Dense matrix of i.i.d. standard normal entries, filled column-major.
inline ProblemInstance gen_normal(Index n, std::uint64_t seed) {
  if (n < 1) throw Error("gen_normal requires n >= 1");
  RandomStream rs(seed);
  Matrix X(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) X(i, j) = rs.normal();
  }
  return ProblemInstance(std::move(X));
}

// Block-structured instance: K nearly equal diagonal blocks, each a random
// doubly stochastic matrix (positive uniform entries balanced by alternating
// row/column normalization), value -1 outside the blocks, plus optional
// additive Gaussian noise of the given magnitude everywhere.
inline ProblemInstance gen_blocky(Index n, Index K, double noise,
                                  std::uint64_t seed) {
  if (n < 1) throw Error("gen_blocky requires n >= 1");
  if (K < 1 || K > n) throw Error("gen_blocky requires 1 <= K <= n");
  if (!(noise >= 0.0)) throw Error("gen_blocky requires noise >= 0");

  RandomStream rs(seed);
  Matrix X = Matrix::Constant(n, n, -1.0);
  const Index base = n / K, extra = n % K;
  Index offset = 0;
  for (Index k = 0; k < K; ++k) {
    const Index m = base + (k < extra ? 1 : 0);
    Matrix D(m, m);
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) D(i, j) = rs.uniform01();
    }
    for (int round = 0; round < 500; ++round) {
      const Eigen::ArrayXd row_sums = D.rowwise().sum();
      D.array().colwise() /= row_sums;
      const Eigen::Array<double, 1, Eigen::Dynamic> col_sums = D.colwise().sum();
      D.array().rowwise() /= col_sums;
      const double row_err = (D.rowwise().sum().array() - 1.0).abs().maxCoeff();
      if (row_err <= 1e-13) break;
    }
    X.block(offset, offset, m, m) = D;
    offset += m;
  }
  if (noise > 0.0) {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) X(i, j) += noise * rs.normal();
    }
  }
  return ProblemInstance(std::move(X));
}

// Validated generator request; the CLI forwards its flags through this.
struct GenSpec {
  enum class Kind { normal, blocky };
  Kind kind = Kind::normal;
  Index n = 0;
  Index K = 1;         // blocky only
  double noise = 0.1;  // blocky only
  std::uint64_t seed = 0;
};

inline ProblemInstance generate(const GenSpec& spec) {
  switch (spec.kind) {
    case GenSpec::Kind::normal:
      return gen_normal(spec.n, spec.seed);
    case GenSpec::Kind::blocky:
      return gen_blocky(spec.n, spec.K, spec.noise, spec.seed);
  }
  throw Error("unknown generator kind");
}

enum class MatrixFormat { csv, matrixmarket };

// Format from a file name: .mtx/.mm are MatrixMarket, anything else CSV.
inline MatrixFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    const std::string ext = path.substr(dot + 1);
    if (ext == "mtx" || ext == "mm") return MatrixFormat::matrixmarket;
  }
  return MatrixFormat::csv;
}

namespace detail {

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_entry(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_entry(const std::string& token, const std::string& where) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw ParseError("bad numeric token '" + token + "' " + where);
  }
  return v;
}

}  // namespace detail

inline void write_matrix(const std::string& path, const Matrix& X,
                         MatrixFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const Index rows = X.rows(), cols = X.cols();
  if (format == MatrixFormat::csv) {
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (j) out << ',';
        out << detail::format_entry(X(i, j));
      }
      out << '\n';
    }
  } else {
    out << "%%MatrixMarket matrix array real general\n";
    out << rows << ' ' << cols << '\n';
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        out << detail::format_entry(X(i, j)) << '\n';
      }
    }
  }
  if (!out.flush()) throw Error("failed writing '" + path + "'");
}

inline void write_matrix(const std::string& path, const Matrix& X) {
  write_matrix(path, X, format_for_path(path));
}

inline Matrix read_matrix(const std::string& path, MatrixFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");

  if (format == MatrixFormat::matrixmarket) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
      throw ParseError("missing MatrixMarket header in '" + path + "'");
    }
    {
      std::istringstream hs(line);
      std::string tag, object, fmt, field, symmetry;
      hs >> tag >> object >> fmt >> field >> symmetry;
      if (object != "matrix" || fmt != "array" || field != "real" ||
          symmetry != "general") {
        throw ParseError("unsupported MatrixMarket flavor '" + line + "'");
      }
    }
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    Index rows = 0, cols = 0;
    if (!(dims >> rows >> cols) || rows < 1 || cols < 1) {
      throw ParseError("bad dimension line '" + line + "' in '" + path + "'");
    }
    if (rows != cols) {
      throw NonSquare("matrix in '" + path + "' is " + std::to_string(rows) +
                      "x" + std::to_string(cols));
    }
    Matrix X(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        std::string token;
        if (!(in >> token)) {
          throw ParseError("truncated entry list in '" + path + "'");
        }
        X(i, j) = detail::parse_entry(token, "in '" + path + "'");
      }
    }
    return X;
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string token;
    while (std::getline(ls, token, ',')) {
      row.push_back(detail::parse_entry(
          token, "at line " + std::to_string(lineno) + " of '" + path + "'"));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged row at line " + std::to_string(lineno) +
                       " of '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("'" + path + "' contains no data");
  const Index m = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.front().size());
  if (m != c) {
    throw NonSquare("matrix in '" + path + "' is " + std::to_string(m) + "x" +
                    std::to_string(c));
  }
  Matrix X(m, c);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < c; ++j) X(i, j) = rows[i][j];
  }
  return X;
}

inline Matrix read_matrix(const std::string& path) {
  return read_matrix(path, format_for_path(path));
}

}  // namespace dsproj
