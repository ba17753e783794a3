#ifndef BPGMF_MATRIX_HPP_
#define BPGMF_MATRIX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bpgmf {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major dense real matrix. All loops run in a fixed order so results are
/// bit-reproducible between runs.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("DenseMatrix: data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw std::invalid_argument("DenseMatrix: non-finite entry");
    }
  }

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("DenseMatrix: ragged initializer");
      for (double v : r) {
        if (!std::isfinite(v)) throw std::invalid_argument("DenseMatrix: non-finite entry");
        data_.push_back(v);
      }
    }
  }

  static DenseMatrix zeros(std::size_t rows, std::size_t cols) {
    DenseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_.assign(rows * cols, 0.0);
    return m;
  }

  static DenseMatrix filled(std::size_t rows, std::size_t cols, double v) {
    DenseMatrix m = zeros(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), v);
    return m;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

inline double fro_inner(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "fro_inner");
  double s = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

inline double fro_norm_sq(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return s;
}

inline double fro_norm(const DenseMatrix& m) { return std::sqrt(fro_norm_sq(m)); }

inline double l1_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += std::abs(v);
  return s;
}

inline std::size_t count_nonzero(const DenseMatrix& m) {
  return static_cast<std::size_t>(
      std::count_if(m.values().begin(), m.values().end(), [](double v) { return v != 0.0; }));
}

inline DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("gemm: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  }
  DenseMatrix c = DenseMatrix::zeros(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

// a^T b without materialising the transpose.
inline DenseMatrix gemm_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("gemm_at_b: row counts differ");
  DenseMatrix c = DenseMatrix::zeros(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

// a b^T without materialising the transpose.
inline DenseMatrix gemm_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("gemm_a_bt: column counts differ");
  DenseMatrix c = DenseMatrix::zeros(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t = DenseMatrix::zeros(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "operator+");
  DenseMatrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "operator-");
  DenseMatrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.values()) v = -v;
  return c;
}

inline DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.values()) v *= s;
  return c;
}

/// y += alpha * x
inline void axpy(double alpha, const DenseMatrix& x, DenseMatrix& y) {
  require_same_shape(x, y, "axpy");
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += alpha * xv[i];
}

/// The iterate (U, Z) with U of shape MxK and Z of shape KxN.
struct FactorPair {
  DenseMatrix u;
  DenseMatrix z;

  FactorPair() = default;
  FactorPair(DenseMatrix u_, DenseMatrix z_) : u(std::move(u_)), z(std::move(z_)) {
    if (u.cols() != z.rows()) {
      throw ShapeError("FactorPair: U has " + std::to_string(u.cols()) + " columns but Z has " +
                       std::to_string(z.rows()) + " rows");
    }
  }

  static FactorPair zeros(std::size_t m, std::size_t k, std::size_t n) {
    return {DenseMatrix::zeros(m, k), DenseMatrix::zeros(k, n)};
  }

  std::size_t m() const { return u.rows(); }
  std::size_t k() const { return u.cols(); }
  std::size_t n() const { return z.cols(); }
  bool same_shape(const FactorPair& o) const { return u.same_shape(o.u) && z.same_shape(o.z); }

  friend bool operator==(const FactorPair&, const FactorPair&) = default;
};

inline void require_same_shape(const FactorPair& a, const FactorPair& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": factor shapes differ");
}

inline double sq_norm(const FactorPair& x) { return fro_norm_sq(x.u) + fro_norm_sq(x.z); }

inline double inner(const FactorPair& a, const FactorPair& b) {
  return fro_inner(a.u, b.u) + fro_inner(a.z, b.z);
}

inline FactorPair operator-(const FactorPair& a, const FactorPair& b) {
  return {a.u - b.u, a.z - b.z};
}

inline FactorPair operator+(const FactorPair& a, const FactorPair& b) {
  return {a.u + b.u, a.z + b.z};
}

inline FactorPair operator*(double s, const FactorPair& a) { return {s * a.u, s * a.z}; }

/// x + gamma * (x - prev), evaluated entrywise so gamma == 0 returns x bit for bit.
inline DenseMatrix extrapolate(const DenseMatrix& x, const DenseMatrix& prev, double gamma) {
  require_same_shape(x, prev, "extrapolate");
  DenseMatrix y = x;
  auto out = y.values();
  auto cur = x.values();
  auto old = prev.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cur[i] + gamma * (cur[i] - old[i]);
  return y;
}

inline FactorPair extrapolate(const FactorPair& x, const FactorPair& prev, double gamma) {
  return {extrapolate(x.u, prev.u, gamma), extrapolate(x.z, prev.z, gamma)};
}

/// Observed entry of a partially known matrix.
struct Entry {
  std::size_t row;
  std::size_t col;
  double value;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse set of observed entries (the index set Omega together with the
/// values of A on it). Entries are kept sorted by (row, col) and unique.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;

  MaskedMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      const Entry& en = entries_[e];
      if (en.row >= rows_ || en.col >= cols_) {
        throw std::out_of_range("MaskedMatrix: entry (" + std::to_string(en.row) + "," +
                                std::to_string(en.col) + ") outside " + std::to_string(rows_) +
                                "x" + std::to_string(cols_));
      }
      if (!std::isfinite(en.value)) throw std::invalid_argument("MaskedMatrix: non-finite value");
      if (e > 0 && entries_[e - 1].row == en.row && entries_[e - 1].col == en.col) {
        throw std::invalid_argument("MaskedMatrix: duplicate entry (" + std::to_string(en.row) +
                                    "," + std::to_string(en.col) + ")");
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  double fro_norm() const {
    double s = 0.0;
    for (const Entry& e : entries_) s += e.value * e.value;
    return std::sqrt(s);
  }

  DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::zeros(rows_, cols_);
    for (const Entry& e : entries_) d(e.row, e.col) = e.value;
    return d;
  }

  friend bool operator==(const MaskedMatrix&, const MaskedMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Entry> entries_;
};

/// (UZ)_{ij} without forming the product.
inline double predict(const FactorPair& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.k(); ++k) s += x.u(i, k) * x.z(k, j);
  return s;
}

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": cannot parse number '" + tok + "'");
  }
  while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
  if (used != tok.size()) throw std::runtime_error(where + ": trailing characters in '" + tok + "'");
  return v;
}

/// Dense CSV: comma separated rows, '.' decimal point, no header.
inline DenseMatrix read_dense_csv(std::istream& in, const std::string& name = "csv") {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string tok;
    std::size_t c = 0;
    const std::string where = name + ":" + std::to_string(lineno);
    while (std::getline(ss, tok, ',')) {
      data.push_back(parse_real(tok, where));
      ++c;
    }
    if (rows == 0) {
      cols = c;
    } else if (c != cols) {
      throw std::runtime_error(where + ": expected " + std::to_string(cols) + " columns, got " +
                               std::to_string(c));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(name + ": empty matrix file");
  return DenseMatrix(rows, cols, std::move(data));
}

inline DenseMatrix read_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dense_csv(in, path);
}

inline void write_dense_csv(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

/// Masked matrix text format: a "rows,cols" header line followed by one
/// "row,col,value" line per observed entry (0-based indices).
inline void write_masked(std::ostream& out, const MaskedMatrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (const Entry& e : m.entries()) out << e.row << ',' << e.col << ',' << format_real(e.value) << '\n';
}

inline MaskedMatrix read_masked(std::istream& in, const std::string& name = "masked") {
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  auto parse_index = [](const std::string& tok, const std::string& where) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": bad index '" + tok + "'");
    }
    if (used != tok.size() || tok.front() == '-') throw std::runtime_error(where + ": bad index '" + tok + "'");
    return static_cast<std::size_t>(v);
  };
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty file");
  ++lineno;
  auto head = split(line);
  if (head.size() != 2) throw std::runtime_error(name + ":1: expected 'rows,cols'");
  const std::size_t rows = parse_index(head[0], name + ":1");
  const std::size_t cols = parse_index(head[1], name + ":1");
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    auto f = split(line);
    if (f.size() != 3) throw std::runtime_error(where + ": expected 'row,col,value'");
    entries.push_back({parse_index(f[0], where), parse_index(f[1], where), parse_real(f[2], where)});
  }
  return MaskedMatrix(rows, cols, std::move(entries));
}

}  // namespace bpgmf

#endif  // BPGMF_MATRIX_HPP_
