#include "klab/poly.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace klab {

namespace mp = boost::multiprecision;

MultiIndex unpack_index(int d, std::uint32_t k) {
  int i2 = 0;
  std::uint32_t row_start = 0;
  while (true) {
    const auto row_len = static_cast<std::uint32_t>(d + 1 - i2);
    if (k < row_start + row_len) break;
    row_start += row_len;
    ++i2;
    if (i2 > d) throw std::out_of_range("unpack_index: index out of range");
  }
  const int i1 = static_cast<int>(k - row_start);
  return {d - i1 - i2, i1, i2};
}

// ---------------------------------------------------------------------------
// HomogeneousPoly

HomogeneousPoly::HomogeneousPoly(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("HomogeneousPoly: negative degree");
}

HomogeneousPoly HomogeneousPoly::from_dense(int degree, std::span<const double> coeffs) {
  if (coeffs.size() != dim_homogeneous(degree)) {
    throw std::invalid_argument("HomogeneousPoly::from_dense: expected N_d coefficients");
  }
  HomogeneousPoly p(degree);
  std::size_t k = 0;
  for (int i2 = 0; i2 <= degree; ++i2) {
    for (int i1 = 0; i1 + i2 <= degree; ++i1, ++k) {
      if (coeffs[k] != 0.0) p.terms_.push_back({{degree - i1 - i2, i1, i2}, coeffs[k]});
    }
  }
  return p;
}

HomogeneousPoly HomogeneousPoly::monomial(const MultiIndex& m, double c) {
  if (m.i0 < 0 || m.i1 < 0 || m.i2 < 0) throw std::invalid_argument("negative exponent");
  HomogeneousPoly p(m.degree());
  p.set(m, c);
  return p;
}

std::vector<Term>::iterator HomogeneousPoly::find(std::uint32_t key) {
  return std::lower_bound(terms_.begin(), terms_.end(), key, [](const Term& t, std::uint32_t k) {
    return pack_index(t.index) < k;
  });
}

double HomogeneousPoly::coeff(const MultiIndex& m) const {
  if (m.degree() != degree_) return 0.0;
  const auto key = pack_index(m);
  auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                             [](const Term& t, std::uint32_t k) { return pack_index(t.index) < k; });
  return (it != terms_.end() && it->index == m) ? it->coeff : 0.0;
}

void HomogeneousPoly::set(const MultiIndex& m, double c) {
  if (m.degree() != degree_ || m.i0 < 0 || m.i1 < 0 || m.i2 < 0) {
    throw std::invalid_argument("HomogeneousPoly::set: multi-index has wrong degree");
  }
  auto it = find(pack_index(m));
  const bool present = it != terms_.end() && it->index == m;
  if (c == 0.0) {
    if (present) terms_.erase(it);
  } else if (present) {
    it->coeff = c;
  } else {
    terms_.insert(it, Term{m, c});
  }
}

void HomogeneousPoly::add(const MultiIndex& m, double c) { set(m, coeff(m) + c); }

std::vector<double> HomogeneousPoly::dense() const {
  std::vector<double> out(dim_homogeneous(degree_), 0.0);
  for (const auto& t : terms_) out[pack_index(t.index)] = t.coeff;
  return out;
}

namespace {

template <class Op>
std::vector<Term> merge_terms(const std::vector<Term>& a, std::span<const Term> b, Op op) {
  std::vector<Term> out;
  out.reserve(a.size() + b.size());
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && pack_index(ia->index) < pack_index(ib->index))) {
      out.push_back(*ia++);
    } else if (ia == a.end() || pack_index(ib->index) < pack_index(ia->index)) {
      out.push_back({ib->index, op(0.0, ib->coeff)});
      ++ib;
    } else {
      const double c = op(ia->coeff, ib->coeff);
      if (c != 0.0) out.push_back({ia->index, c});
      ++ia;
      ++ib;
    }
  }
  return out;
}

}  // namespace

HomogeneousPoly& HomogeneousPoly::operator+=(const HomogeneousPoly& rhs) {
  if (rhs.degree_ != degree_) throw std::invalid_argument("HomogeneousPoly: degree mismatch");
  terms_ = merge_terms(terms_, rhs.terms(), [](double x, double y) { return x + y; });
  return *this;
}

HomogeneousPoly& HomogeneousPoly::operator-=(const HomogeneousPoly& rhs) {
  if (rhs.degree_ != degree_) throw std::invalid_argument("HomogeneousPoly: degree mismatch");
  terms_ = merge_terms(terms_, rhs.terms(), [](double x, double y) { return x - y; });
  return *this;
}

HomogeneousPoly& HomogeneousPoly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= s;
  return *this;
}

bool HomogeneousPoly::operator==(const HomogeneousPoly& rhs) const {
  if (degree_ != rhs.degree_ || terms_.size() != rhs.terms_.size()) return false;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].index != rhs.terms_[k].index || terms_[k].coeff != rhs.terms_[k].coeff) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <class T>
T evaluate_impl(const HomogeneousPoly& p, const std::array<T, 3>& x) {
  const int d = p.degree();
  thread_local std::vector<T> pw;
  pw.resize(3 * static_cast<std::size_t>(d + 1));
  for (int v = 0; v < 3; ++v) {
    T* row = pw.data() + static_cast<std::size_t>(v) * (d + 1);
    row[0] = T(1);
    for (int k = 1; k <= d; ++k) row[k] = row[k - 1] * x[v];
  }
  const T* p0 = pw.data();
  const T* p1 = p0 + (d + 1);
  const T* p2 = p1 + (d + 1);
  T sum(0);
  for (const auto& t : p.terms()) {
    sum += t.coeff * (p0[t.index.i0] * p1[t.index.i1] * p2[t.index.i2]);
  }
  return sum;
}

// Every monomial present, so terms()[k] holds packed index k. Nested Horner
// in the ratios x_j / x_pivot (all at most 1 in modulus), one multiply-add
// per term.
double evaluate_dense(const HomogeneousPoly& p, const Vec3& x) {
  const int d = p.degree();
  const auto t = p.terms();
  int pivot = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(x[k]) > std::abs(x[pivot])) pivot = k;
  if (x[pivot] == 0.0) return 0.0;
  const double inv = 1.0 / x[pivot];
  double acc = 0.0;
  if (pivot == 0) {
    const double u = x[1] * inv;
    const double v = x[2] * inv;
    for (int i2 = d; i2 >= 0; --i2) {
      const std::size_t start = pack_index(d, 0, i2);
      double inner = 0.0;
      for (int i1 = d - i2; i1 >= 0; --i1) inner = inner * u + t[start + i1].coeff;
      acc = acc * v + inner;
    }
  } else if (pivot == 1) {
    const double w = x[0] * inv;
    const double v = x[2] * inv;
    for (int i2 = d; i2 >= 0; --i2) {
      const std::size_t start = pack_index(d, 0, i2);
      double inner = 0.0;  // sum_i1 c w^{d - i1 - i2}
      for (int i1 = 0; i1 <= d - i2; ++i1) inner = inner * w + t[start + i1].coeff;
      acc = acc * v + inner;
    }
  } else {
    const double w = x[0] * inv;
    const double u = x[1] * inv;
    for (int i1 = d; i1 >= 0; --i1) {
      double inner = 0.0;  // sum_i2 c w^{d - i1 - i2}
      for (int i2 = 0; i2 <= d - i1; ++i2) inner = inner * w + t[pack_index(d, i1, i2)].coeff;
      acc = acc * u + inner;
    }
  }
  // x_pivot^d by squaring; |x_pivot| >= 1/sqrt(3) for unit x, so no underflow
  // trouble at moderate degree.
  double scale = 1.0;
  double base = x[pivot];
  for (int e = d; e > 0; e >>= 1) {
    if (e & 1) scale *= base;
    base *= base;
  }
  return acc * scale;
}

}  // namespace

double evaluate_homogeneous(const HomogeneousPoly& p, const Vec3& x) {
  if (p.degree() > 0 && p.degree() <= 600 && p.size() == dim_homogeneous(p.degree())) return evaluate_dense(p, x);
  return evaluate_impl(p, x);
}

namespace {

bool dense_fast_path(const HomogeneousPoly& p) {
  return p.degree() > 0 && p.degree() <= 600 && p.size() == dim_homogeneous(p.degree());
}

// Same nested Horner as evaluate_dense, over a block of points sharing one
// pivot coordinate; the innermost loops run across points.
template <int Pivot>
void horner_block(int d, const double* c, const Vec3* const* pts, std::size_t nb, double* out) {
  constexpr std::size_t B = 32;
  double a[B], b[B], acc[B], in[B];
  constexpr int ia = Pivot == 0 ? 1 : 0;
  constexpr int ib = Pivot == 2 ? 1 : 2;
  for (std::size_t j = 0; j < nb; ++j) {
    const double inv = 1.0 / (*pts[j])[Pivot];
    a[j] = (*pts[j])[ia] * inv;
    b[j] = (*pts[j])[ib] * inv;
    acc[j] = 0.0;
  }
  if constexpr (Pivot == 0) {
    for (int i2 = d; i2 >= 0; --i2) {
      const double* row = c + pack_index(d, 0, i2);
      for (std::size_t j = 0; j < nb; ++j) in[j] = 0.0;
      for (int i1 = d - i2; i1 >= 0; --i1) {
        const double coef = row[i1];
        for (std::size_t j = 0; j < nb; ++j) in[j] = in[j] * a[j] + coef;
      }
      for (std::size_t j = 0; j < nb; ++j) acc[j] = acc[j] * b[j] + in[j];
    }
  } else if constexpr (Pivot == 1) {
    for (int i2 = d; i2 >= 0; --i2) {
      const double* row = c + pack_index(d, 0, i2);
      for (std::size_t j = 0; j < nb; ++j) in[j] = 0.0;
      for (int i1 = 0; i1 <= d - i2; ++i1) {
        const double coef = row[i1];
        for (std::size_t j = 0; j < nb; ++j) in[j] = in[j] * a[j] + coef;
      }
      for (std::size_t j = 0; j < nb; ++j) acc[j] = acc[j] * b[j] + in[j];
    }
  } else {
    for (int i1 = d; i1 >= 0; --i1) {
      for (std::size_t j = 0; j < nb; ++j) in[j] = 0.0;
      std::size_t off = static_cast<std::size_t>(i1);  // pack_index(d, i1, 0)
      for (int i2 = 0; i2 <= d - i1; ++i2) {
        const double coef = c[off];
        for (std::size_t j = 0; j < nb; ++j) in[j] = in[j] * a[j] + coef;
        off += static_cast<std::size_t>(d + 1 - i2);
      }
      for (std::size_t j = 0; j < nb; ++j) acc[j] = acc[j] * b[j] + in[j];
    }
  }
  for (std::size_t j = 0; j < nb; ++j) {
    double scale = 1.0;
    double base = (*pts[j])[Pivot];
    for (int e = d; e > 0; e >>= 1) {
      if (e & 1) scale *= base;
      base *= base;
    }
    out[j] = acc[j] * scale;
  }
}

}  // namespace

void evaluate_homogeneous(const HomogeneousPoly& p, std::span<const Vec3> xs, std::span<double> out) {
  if (xs.size() != out.size()) throw std::invalid_argument("evaluate_homogeneous: size mismatch");
  if (!dense_fast_path(p) || xs.size() < 4) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate_homogeneous(p, xs[i]);
    return;
  }
  const int d = p.degree();
  thread_local std::vector<double> c;
  c.resize(p.size());
  const auto t = p.terms();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = t[k].coeff;

  constexpr std::size_t B = 32;
  std::array<std::vector<std::size_t>, 3> groups;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vec3& x = xs[i];
    int pivot = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(x[k]) > std::abs(x[pivot])) pivot = k;
    if (x[pivot] == 0.0) {
      out[i] = 0.0;
      continue;
    }
    groups[static_cast<std::size_t>(pivot)].push_back(i);
  }
  const Vec3* pts[B];
  double vals[B];
  for (int pivot = 0; pivot < 3; ++pivot) {
    const auto& g = groups[static_cast<std::size_t>(pivot)];
    for (std::size_t s = 0; s < g.size(); s += B) {
      const std::size_t nb = std::min(B, g.size() - s);
      for (std::size_t j = 0; j < nb; ++j) pts[j] = &xs[g[s + j]];
      if (pivot == 0) horner_block<0>(d, c.data(), pts, nb, vals);
      else if (pivot == 1) horner_block<1>(d, c.data(), pts, nb, vals);
      else horner_block<2>(d, c.data(), pts, nb, vals);
      for (std::size_t j = 0; j < nb; ++j) out[g[s + j]] = vals[j];
    }
  }
}

std::vector<double> evaluate_homogeneous(const HomogeneousPoly& p, std::span<const Vec3> xs) {
  std::vector<double> out(xs.size());
  evaluate_homogeneous(p, xs, out);
  return out;
}

std::complex<double> evaluate_homogeneous(const HomogeneousPoly& p,
                                          const std::array<std::complex<double>, 3>& x) {
  return evaluate_impl(p, x);
}

double evaluate_affine(const HomogeneousPoly& p, double z1, double z2) {
  return evaluate_homogeneous(p, Vec3{1.0, z1, z2});
}

std::complex<double> evaluate_affine(const HomogeneousPoly& p, std::complex<double> z1,
                                     std::complex<double> z2) {
  return evaluate_homogeneous(p, std::array<std::complex<double>, 3>{1.0, z1, z2});
}

double fs_norm_sq_at(const HomogeneousPoly& p, double z1, double z2) {
  const double s = 1.0 / std::sqrt(1.0 + z1 * z1 + z2 * z2);
  const double v = evaluate_homogeneous(p, Vec3{s, z1 * s, z2 * s});
  return v * v;
}

double fs_norm_sq_at(const HomogeneousPoly& p, std::complex<double> z1, std::complex<double> z2) {
  const double s = 1.0 / std::sqrt(1.0 + std::norm(z1) + std::norm(z2));
  const auto v = evaluate_homogeneous(p, std::array<std::complex<double>, 3>{s, z1 * s, z2 * s});
  return std::norm(v);
}

double fs_norm_sq_at_point(const HomogeneousPoly& p, const Vec3& x) {
  const double v = evaluate_homogeneous(p, normalized(x));
  return v * v;
}

std::vector<double> evaluate_affine_grid_fs(const HomogeneousPoly& p, std::span<const double> xs,
                                            std::span<const double> ys) {
  const int d = p.degree();
  const std::vector<double> c = p.dense();
  std::vector<double> out(xs.size() * ys.size());
  std::vector<double> b(static_cast<std::size_t>(d + 1));
  std::vector<std::size_t> row_start(static_cast<std::size_t>(d + 1));
  for (int i2 = 0; i2 <= d; ++i2) row_start[i2] = pack_index(d, 0, i2);

  for (std::size_t iy = 0; iy < ys.size(); ++iy) {
    const double y = ys[iy];
    // b[i1] = sum_{i2} c(i1, i2) y^{i2}
    for (int i1 = 0; i1 <= d; ++i1) {
      double acc = 0.0;
      for (int i2 = d - i1; i2 >= 0; --i2) acc = acc * y + c[row_start[i2] + i1];
      b[i1] = acc;
    }
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const double x = xs[ix];
      double acc = 0.0;
      for (int i1 = d; i1 >= 0; --i1) acc = acc * x + b[i1];
      out[iy * xs.size() + ix] = acc * std::exp(-0.5 * d * std::log1p(x * x + y * y));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monomial norms

namespace {

std::mutex g_norm_mutex;

const mp::cpp_int& factorial(int n) {
  static std::vector<mp::cpp_int> memo{1};
  // Caller holds g_norm_mutex.
  while (static_cast<int>(memo.size()) <= n) {
    memo.push_back(memo.back() * static_cast<unsigned>(memo.size()));
  }
  return memo[static_cast<std::size_t>(n)];
}

long double log_factorial(int n) {
  static std::vector<long double> memo{0.0L};
  while (static_cast<int>(memo.size()) <= n) {
    memo.push_back(memo.back() + std::log(static_cast<long double>(memo.size())));
  }
  return memo[static_cast<std::size_t>(n)];
}

struct NormPair {
  double norm_sq;
  double norm;
};

// Caller holds g_norm_mutex.
NormPair compute_norm_locked(const MultiIndex& m) {
  const int d = m.degree();
  if (d <= kExactNormDegree) {
    // (d+2)! / (i0! i1! i2! 2!) is an integer; invert it in extended precision.
    factorial(d + 2);  // grow the memo first so the references below stay valid
    const mp::cpp_int denom = factorial(m.i0) * factorial(m.i1) * factorial(m.i2) * 2;
    const mp::cpp_int ratio = factorial(d + 2) / denom;
    const mp::cpp_bin_float_50 inv = 1 / mp::cpp_bin_float_50(ratio);
    return {static_cast<double>(inv), static_cast<double>(mp::sqrt(inv))};
  }
  const long double log_sq = log_factorial(m.i0) + log_factorial(m.i1) + log_factorial(m.i2) +
                             std::log(2.0L) - log_factorial(d + 2);
  return {static_cast<double>(std::exp(log_sq)), static_cast<double>(std::exp(0.5L * log_sq))};
}

constexpr int kTableMaxDegree = 1500;

std::map<int, std::unique_ptr<const std::vector<double>>>& norm_tables() {
  static std::map<int, std::unique_ptr<const std::vector<double>>> tables;
  return tables;
}

}  // namespace

double monomial_l2_norm_sq(const MultiIndex& m) {
  std::lock_guard lock(g_norm_mutex);
  return compute_norm_locked(m).norm_sq;
}

double monomial_l2_norm(const MultiIndex& m) {
  if (m.degree() <= kTableMaxDegree) return monomial_norm_table(m.degree())[pack_index(m)];
  std::lock_guard lock(g_norm_mutex);
  return compute_norm_locked(m).norm;
}

std::span<const double> monomial_norm_table(int d) {
  if (d < 0 || d > kTableMaxDegree) {
    throw std::out_of_range("monomial_norm_table: degree outside the cached range");
  }
  std::lock_guard lock(g_norm_mutex);
  auto& tables = norm_tables();
  auto it = tables.find(d);
  if (it == tables.end()) {
    auto table = std::make_unique<std::vector<double>>(dim_homogeneous(d));
    std::size_t k = 0;
    for (int i2 = 0; i2 <= d; ++i2)
      for (int i1 = 0; i1 + i2 <= d; ++i1, ++k)
        (*table)[k] = compute_norm_locked({d - i1 - i2, i1, i2}).norm;
    it = tables.emplace(d, std::move(table)).first;
  }
  return *it->second;
}

std::vector<double> orthonormal_coords(const HomogeneousPoly& p) {
  std::vector<double> out(dim_homogeneous(p.degree()), 0.0);
  for (const auto& t : p.terms()) out[pack_index(t.index)] = t.coeff * monomial_l2_norm(t.index);
  return out;
}

HomogeneousPoly from_orthonormal_coords(int d, std::span<const double> coords) {
  if (coords.size() != dim_homogeneous(d)) {
    throw std::invalid_argument("from_orthonormal_coords: expected N_d coordinates");
  }
  std::vector<double> c(coords.begin(), coords.end());
  std::size_t k = 0;
  for (int i2 = 0; i2 <= d; ++i2)
    for (int i1 = 0; i1 + i2 <= d; ++i1, ++k)
      if (c[k] != 0.0) c[k] /= monomial_l2_norm({d - i1 - i2, i1, i2});
  return HomogeneousPoly::from_dense(d, c);
}

double l2_inner(const HomogeneousPoly& p, const HomogeneousPoly& q) {
  if (p.degree() != q.degree()) throw std::invalid_argument("l2_inner: degree mismatch");
  const auto a = p.terms();
  const auto b = q.terms();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const auto ka = pack_index(a[i].index);
    const auto kb = pack_index(b[j].index);
    if (ka < kb) {
      ++i;
    } else if (kb < ka) {
      ++j;
    } else {
      const double n = monomial_l2_norm(a[i].index);
      sum += (a[i].coeff * n) * (b[j].coeff * n);
      ++i;
      ++j;
    }
  }
  return sum;
}

double l2_norm_sq(const HomogeneousPoly& p) { return l2_inner(p, p); }
double l2_norm(const HomogeneousPoly& p) { return std::sqrt(l2_norm_sq(p)); }

HomogeneousPoly normalize_l2(const HomogeneousPoly& p) {
  const double n = l2_norm(p);
  if (!(n > 0.0)) throw std::domain_error("normalize_l2: zero polynomial");
  return p * (1.0 / n);
}

// ---------------------------------------------------------------------------
// Rotation pullback

namespace {

using Dense = std::vector<double>;

// out (degree j+1) = in (degree j) * (l0 X0 + l1 X1 + l2 X2)
void mul_linear(const Dense& in, int j, const Vec3& l, Dense& out) {
  out.assign(dim_homogeneous(j + 1), 0.0);
  std::size_t k = 0;
  for (int i2 = 0; i2 <= j; ++i2) {
    const std::size_t up0 = pack_index(j + 1, 0, i2);
    const std::size_t up2 = pack_index(j + 1, 0, i2 + 1);
    for (int i1 = 0; i1 + i2 <= j; ++i1, ++k) {
      const double c = in[k];
      if (c == 0.0) continue;
      out[up0 + i1] += l[0] * c;
      out[up0 + i1 + 1] += l[1] * c;
      out[up2 + i1] += l[2] * c;
    }
  }
}

void axpy(double a, const Dense& x, Dense& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

// y (degree j+1) <- y * l + a * x  (x has degree j+1)
void horner_step(Dense& y, int j, const Vec3& l, double a, const Dense& x, Dense& scratch) {
  mul_linear(y, j, l, scratch);
  if (a != 0.0) axpy(a, x, scratch);
  y.swap(scratch);
}

std::array<Vec3, 3> linear_forms(const Rotation& r) {
  // X_k -> (R^T x)_k = sum_l R(l, k) x_l
  std::array<Vec3, 3> forms{};
  for (int k = 0; k < 3; ++k) forms[k] = {r(0, k), r(1, k), r(2, k)};
  return forms;
}

Dense rotate_sparse(const HomogeneousPoly& p, const std::array<Vec3, 3>& L) {
  const int d = p.degree();
  std::vector<Term> terms(p.terms().begin(), p.terms().end());
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.index.i0 < b.index.i0; });
  Dense result(dim_homogeneous(d), 0.0);
  Dense power{1.0};  // L0^cur
  int cur = 0;
  Dense work;
  Dense scratch;
  for (const auto& t : terms) {
    while (cur < t.index.i0) {
      mul_linear(power, cur, L[0], scratch);
      power.swap(scratch);
      ++cur;
    }
    work = power;
    int deg = cur;
    for (int s = 0; s < t.index.i1; ++s, ++deg) {
      mul_linear(work, deg, L[1], scratch);
      work.swap(scratch);
    }
    for (int s = 0; s < t.index.i2; ++s, ++deg) {
      mul_linear(work, deg, L[2], scratch);
      work.swap(scratch);
    }
    axpy(t.coeff, work, result);
  }
  return result;
}

Dense rotate_dense(const HomogeneousPoly& p, const std::array<Vec3, 3>& L) {
  const int d = p.degree();
  const Dense c = p.dense();
  auto coeff = [&](int i0, int i1, int i2) { return c[pack_index(i0 + i1 + i2, i1, i2)]; };

  std::vector<Dense> l2_pow(static_cast<std::size_t>(d + 1));
  l2_pow[0] = {1.0};
  for (int k = 1; k <= d; ++k) mul_linear(l2_pow[k - 1], k - 1, L[2], l2_pow[k]);

  Dense scratch;
  Dense h;
  // Outer Horner in L0: acc = sum_n L0^{d-n} S_n, S_n bivariate part with i0 = d - n.
  Dense acc{coeff(d, 0, 0)};
  for (int n = 1; n <= d; ++n) {
    const int i0 = d - n;
    // S_n = sum_{i1} c(i0, i1, n - i1) L1^{i1} L2^{n - i1}, Horner in L1.
    h.assign(1, coeff(i0, n, 0));
    for (int i1 = n - 1; i1 >= 0; --i1) {
      horner_step(h, n - 1 - i1, L[1], coeff(i0, i1, n - i1), l2_pow[n - i1], scratch);
    }
    mul_linear(acc, n - 1, L[0], scratch);
    acc.swap(scratch);
    axpy(1.0, h, acc);
  }
  return acc;
}

}  // namespace

HomogeneousPoly rotate_poly(const HomogeneousPoly& p, const Rotation& r) {
  const int d = p.degree();
  if (p.is_zero()) return HomogeneousPoly(d);
  const auto L = linear_forms(r);
  const double nd = static_cast<double>(dim_homogeneous(d));
  double sparse_cost = nd * d / 3.0;
  for (const auto& t : p.terms()) sparse_cost += nd * (t.index.i1 + t.index.i2 + 1);
  const double dense_cost = std::pow(static_cast<double>(d + 1), 4) / 24.0;
  const bool use_dense = d <= 400 && dense_cost < sparse_cost;
  const Dense out = use_dense ? rotate_dense(p, L) : rotate_sparse(p, L);
  return HomogeneousPoly::from_dense(d, out);
}

// ---------------------------------------------------------------------------
// Text format

void write_text(std::ostream& os, const HomogeneousPoly& p) {
  os << "degree " << p.degree() << '\n';
  char buf[64];
  for (const auto& t : p.terms()) {
    auto res = std::to_chars(buf, buf + sizeof buf, t.coeff);
    os << t.index.i0 << ' ' << t.index.i1 << ' ' << t.index.i2 << ' '
       << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

std::string to_text(const HomogeneousPoly& p) {
  std::ostringstream os;
  write_text(os, p);
  return os.str();
}

HomogeneousPoly read_text(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_text: empty input");
  std::istringstream header(line);
  std::string word;
  int d = -1;
  if (!(header >> word >> d) || word != "degree" || d < 0) {
    throw std::invalid_argument("read_text: expected 'degree d' header");
  }
  HomogeneousPoly p(d);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    MultiIndex m;
    std::string coeff_text;
    if (!(ls >> m.i0 >> m.i1 >> m.i2 >> coeff_text)) {
      throw std::invalid_argument("read_text: malformed term on line " + std::to_string(line_no));
    }
    double c = 0.0;
    const auto res = std::from_chars(coeff_text.data(), coeff_text.data() + coeff_text.size(), c);
    if (res.ec != std::errc{} || res.ptr != coeff_text.data() + coeff_text.size()) {
      throw std::invalid_argument("read_text: bad coefficient on line " + std::to_string(line_no));
    }
    if (m.degree() != d || m.i0 < 0 || m.i1 < 0 || m.i2 < 0) {
      throw std::invalid_argument("read_text: multi-index degree mismatch on line " +
                                  std::to_string(line_no));
    }
    p.add(m, c);
  }
  return p;
}

HomogeneousPoly from_text(const std::string& text) {
  std::istringstream is(text);
  return read_text(is);
}

}  // namespace klab
