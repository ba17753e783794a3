#ifndef BPGMF_DATA_IO_HPP_
#define BPGMF_DATA_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpgmf/matrix.hpp"
#include "bpgmf/rng.hpp"

namespace bpgmf {

enum class MovieLensFormat { ml100k, ml1m, ml10m };

inline MovieLensFormat parse_movielens_format(const std::string& s) {
  if (s == "ml100k") return MovieLensFormat::ml100k;
  if (s == "ml1m") return MovieLensFormat::ml1m;
  if (s == "ml10m") return MovieLensFormat::ml10m;
  throw std::invalid_argument("unknown MovieLens format '" + s + "' (expected ml100k, ml1m or ml10m)");
}

/// Published (users, movies) for each release.
inline std::pair<std::size_t, std::size_t> movielens_table_shape(MovieLensFormat f) {
  switch (f) {
    case MovieLensFormat::ml100k: return {943, 1682};
    case MovieLensFormat::ml1m: return {6040, 3952};
    case MovieLensFormat::ml10m: return {71567, 10681};
  }
  return {0, 0};
}

/// Original ids by dense index, one table per axis.
struct IdMap {
  std::vector<std::int64_t> users;
  std::vector<std::int64_t> items;
};

struct MovieLensData {
  MaskedMatrix ratings;
  IdMap ids;
};

namespace detail {

// Index ids on one axis. When every id lies in [1, table] the index is
// id - 1 and the dimension is the table value; otherwise ids are ranked.
inline std::vector<std::size_t> index_axis(const std::vector<std::int64_t>& raw, std::size_t table,
                                           std::vector<std::int64_t>& ids_out) {
  std::vector<std::int64_t> distinct = raw;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> idx(raw.size());
  const bool fits = !distinct.empty() && distinct.front() >= 1 &&
                    static_cast<std::uint64_t>(distinct.back()) <= table;
  if (fits) {
    ids_out.resize(table);
    for (std::size_t i = 0; i < table; ++i) ids_out[i] = static_cast<std::int64_t>(i + 1);
    for (std::size_t e = 0; e < raw.size(); ++e) idx[e] = static_cast<std::size_t>(raw[e] - 1);
  } else {
    ids_out = distinct;
    for (std::size_t e = 0; e < raw.size(); ++e)
      idx[e] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), raw[e]) - distinct.begin());
  }
  return idx;
}

inline std::int64_t parse_id(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": bad id '" + tok + "'");
  }
  if (used != tok.size()) throw std::runtime_error(where + ": bad id '" + tok + "'");
  return v;
}

}  // namespace detail

/// ml100k: "user<TAB>item<TAB>rating<TAB>timestamp"; ml1m / ml10m: the same
/// fields separated by "::".
inline MovieLensData load_movielens(std::istream& in, MovieLensFormat fmt, const std::string& name = "ratings") {
  const std::string sep = fmt == MovieLensFormat::ml100k ? "\t" : "::";
  std::vector<std::int64_t> users, items;
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(sep, pos);
      f.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + sep.size();
    }
    if (f.size() != 4) {
      throw std::runtime_error(where + ": expected 4 fields separated by '" + (sep == "\t" ? "\\t" : sep) +
                               "', got " + std::to_string(f.size()));
    }
    users.push_back(detail::parse_id(f[0], where));
    items.push_back(detail::parse_id(f[1], where));
    values.push_back(parse_real(f[2], where));
    detail::parse_id(f[3], where);
  }
  if (values.empty()) throw std::runtime_error(name + ": no ratings found");
  const auto [tu, ti] = movielens_table_shape(fmt);
  MovieLensData out;
  const auto ui = detail::index_axis(users, tu, out.ids.users);
  const auto ii = detail::index_axis(items, ti, out.ids.items);
  std::vector<Entry> entries(values.size());
  for (std::size_t e = 0; e < values.size(); ++e) entries[e] = {ui[e], ii[e], values[e]};
  out.ratings = MaskedMatrix(out.ids.users.size(), out.ids.items.size(), std::move(entries));
  return out;
}

inline MovieLensData load_movielens(const std::string& path, MovieLensFormat fmt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_movielens(in, fmt, path);
}

/// "axis,index,id" rows mapping dense indices back to the original ids.
inline void write_id_map(std::ostream& out, const IdMap& ids) {
  out << "axis,index,id\n";
  for (std::size_t i = 0; i < ids.users.size(); ++i) out << "user," << i << ',' << ids.users[i] << '\n';
  for (std::size_t i = 0; i < ids.items.size(); ++i) out << "item," << i << ',' << ids.items[i] << '\n';
}

struct RatingDataset {
  MaskedMatrix train;
  MaskedMatrix test;
  double min_rating = 0.0;
  double max_rating = 0.0;
};

/// Uniform random partition of the observed entries: a Fisher-Yates shuffle
/// of the entry order, the first round(frac * nnz) going to train.
inline RatingDataset split_train_test(const MaskedMatrix& m, double frac, std::uint64_t seed) {
  if (!(frac > 0.0 && frac < 1.0)) throw std::invalid_argument("split_train_test: frac must lie in (0, 1)");
  const auto& all = m.entries();
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(frac * static_cast<double>(all.size())));
  std::vector<Entry> train, test;
  train.reserve(n_train);
  test.reserve(all.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train : test).push_back(all[order[i]]);
  RatingDataset d;
  d.train = MaskedMatrix(m.rows(), m.cols(), std::move(train));
  d.test = MaskedMatrix(m.rows(), m.cols(), std::move(test));
  if (!all.empty()) {
    auto [lo, hi] = std::minmax_element(all.begin(), all.end(),
                                        [](const Entry& a, const Entry& b) { return a.value < b.value; });
    d.min_rating = lo->value;
    d.max_rating = hi->value;
  }
  return d;
}

/// sqrt(mean over the test entries of (A_ij - (UZ)_ij)^2).
inline double test_rmse(const FactorPair& x, const MaskedMatrix& test) {
  if (test.nnz() == 0) throw std::invalid_argument("test_rmse: empty test set");
  if (x.m() != test.rows() || x.n() != test.cols()) throw ShapeError("test_rmse: factor shape does not match test set");
  double s = 0.0;
  for (const Entry& e : test.entries()) {
    const double r = e.value - predict(x, e.row, e.col);
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(test.nnz()));
}

/// I.i.d. uniform [lo, hi) entries in row-major order from Rng(seed).
inline DenseMatrix synthetic_dense(std::size_t m, std::size_t n, std::uint64_t seed, double lo = 0.0,
                                   double hi = 1.0) {
  if (m < 1 || n < 1) throw std::invalid_argument("synthetic_dense: dimensions must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("synthetic_dense: need lo < hi");
  Rng rng(seed);
  return random_uniform(m, n, rng, lo, hi);
}

}  // namespace bpgmf

#endif  // BPGMF_DATA_IO_HPP_
