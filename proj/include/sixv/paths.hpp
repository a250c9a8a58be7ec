#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "core.hpp"
#include "weights.hpp"

namespace sixv {

using BigRational = boost::multiprecision::cpp_rational;

// Lattice rows come in two flavors: F-type rows receive one path from the
// left edge, G-type rows do not.
enum class Family { F, Gc };

inline bool left_entry(Family f) noexcept { return f == Family::F; }

// Calls fn(next) for every signature reachable from `below` through one row.
// A row is valid iff the horizontal occupancy stays in {0,1} and vanishes far
// right, which is equivalent to weak interlacing:
//   next_1 >= below_1 >= next_2 >= ... (plus one extra part >= 0 for F rows).
// Parts are capped at `cap`; if `bound` is given, next_i <= bound_i.
template <typename Fn>
void for_each_next_row(const Signature& below, bool entry, int cap, const Signature* bound, Fn&& fn) {
  const std::size_t n = below.size() + (entry ? 1 : 0);
  if (bound && bound->size() < n) return;
  std::vector<int> parts(n);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      fn(Signature(parts));
      return;
    }
    int hi = (i == 0) ? cap : below[i - 1];
    int lo = (i < below.size()) ? below[i] : 0;
    if (bound) hi = std::min(hi, (*bound)[i]);
    for (int x = lo; x <= hi; ++x) {
      parts[i] = x;
      self(self, i + 1);
    }
  };
  if (n == 0) {
    fn(Signature());
    return;
  }
  rec(rec, 0);
}

// Walks the columns of one row; calls fn(x, vertex) for event columns and
// gap(from, to, carry) for runs of columns with no vertical paths. Returns
// false if the pair (below, above) admits no valid row.
template <typename Below, typename Above, typename VertexFn, typename GapFn>
bool walk_row(const Below& below, const Above& above, bool entry, VertexFn&& vertex, GapFn&& gap) {
  std::size_t ib = below.size(), ia = above.size();  // scan from smallest part
  int carry = entry ? 1 : 0;
  int col = 0;
  while (ib > 0 || ia > 0) {
    int x = std::numeric_limits<int>::max();
    if (ib > 0) x = std::min(x, below[ib - 1]);
    if (ia > 0) x = std::min(x, above[ia - 1]);
    if (x < 0) return false;
    int i1 = 0, i2 = 0;
    while (ib > 0 && below[ib - 1] == x) { ++i1; --ib; }
    while (ia > 0 && above[ia - 1] == x) { ++i2; --ia; }
    if (x > col) gap(col, x, carry);
    const int j2 = i1 + carry - i2;
    if (j2 != 0 && j2 != 1) return false;
    vertex(x, VertexType{i1, carry, i2, j2});
    carry = j2;
    col = x + 1;
  }
  return carry == 0;
}

// Product of vertex weights along one row. Each vertex with an outgoing
// horizontal edge is multiplied by `hscale` (used to keep long products in
// range; hscale = 1 gives the plain weight). Rows are any indexable
// weakly decreasing sequences.
template <typename Below, typename Above>
cplx row_weight(const Below& below, const Above& above, bool entry, const WeightKernel& kernel, cplx hscale = 1.0) {
  cplx result = 1.0;
  const cplx run = kernel(VertexType{0, 1, 0, 1}) * hscale;
  const bool ok = walk_row(
      below, above, entry,
      [&](int, const VertexType& v) { result *= kernel(v) * (v.j2 ? hscale : cplx(1.0)); },
      [&](int from, int to, int carry) {
        if (carry) result *= ipow(run, to - from);
      });
  return ok ? result : cplx(0.0);
}

// Vertex types of one row on columns 0..width-1 (empty optional if invalid).
inline std::optional<std::vector<VertexType>> row_vertices(const Signature& below, const Signature& above,
                                                           bool entry, int width) {
  std::vector<VertexType> row(static_cast<std::size_t>(width));
  bool fits = true;
  const bool ok = walk_row(
      below, above, entry,
      [&](int x, const VertexType& v) {
        if (x < width) row[x] = v; else fits = false;
      },
      [&](int from, int to, int carry) {
        for (int x = from; x < to && x < width; ++x) row[x] = VertexType{0, carry, 0, carry};
        if (to > width) fits = false;
      });
  if (!ok || !fits) return std::nullopt;
  return row;
}

// A finite collection of up-right paths on columns 0..width-1, rows 1..n,
// stored as its cross-sections λ^0 (bottom boundary) .. λ^n plus the dense
// vertex grid. Columns >= width are empty by construction.
class PathCollection {
 public:
  PathCollection(Family family, std::vector<Signature> sections, int width)
      : family_(family), sections_(std::move(sections)), width_(width) {
    if (sections_.empty()) throw DomainError("collection-shape", "a collection needs a bottom boundary");
    grid_.reserve(static_cast<std::size_t>(rows()) * width_);
    for (int y = 1; y <= rows(); ++y) {
      auto row = row_vertices(sections_[y - 1], sections_[y], left_entry(family_), width_);
      if (!row) throw DomainError("collection-shape", "cross-sections do not form a valid row");
      grid_.insert(grid_.end(), row->begin(), row->end());
    }
  }

  Family family() const noexcept { return family_; }
  int rows() const noexcept { return static_cast<int>(sections_.size()) - 1; }
  int width() const noexcept { return width_; }
  const std::vector<Signature>& cross_sections() const noexcept { return sections_; }
  const Signature& bottom() const { return sections_.front(); }
  const Signature& top() const { return sections_.back(); }

  // Vertex at column x, row y (1-based rows, like the lattice).
  const VertexType& vertex(int x, int y) const { return grid_[static_cast<std::size_t>(y - 1) * width_ + x]; }

  bool six_vertex() const {
    for (const auto& v : grid_) {
      if (v.i1 > 1 || v.i2 > 1) return false;
    }
    return true;
  }

  json to_json() const {
    json rows_json = json::array();
    for (int y = 1; y <= rows(); ++y) {
      json r = json::array();
      for (int x = 0; x < width_; ++x) {
        const auto& v = vertex(x, y);
        r.push_back({v.i1, v.j1, v.i2, v.j2});
      }
      rows_json.push_back(std::move(r));
    }
    json sections = json::array();
    for (const auto& s : sections_) sections.push_back(s);
    return json{{"family", family_ == Family::F ? "F" : "Gc"},
                {"width", width_},
                {"cross_sections", sections},
                {"rows", rows_json}};
  }

 private:
  Family family_;
  std::vector<Signature> sections_;
  int width_;
  std::vector<VertexType> grid_;
};

struct EnumerateOptions {
  bool six_vertex_only = false;
  std::size_t limit = 5'000'000;
};

namespace detail {

inline std::vector<PathCollection> enumerate_collections(Family family, const Signature& mu, const Signature& lambda,
                                                         int n, const EnumerateOptions& opts) {
  if (n < 0) throw DomainError("rows-nonneg", "number of rows must be nonnegative");
  if (!mu.nonnegative() || !lambda.nonnegative()) {
    throw DomainError("signature-nonneg", "collections need nonnegative signatures");
  }
  const bool entry = left_entry(family);
  const std::size_t expected = mu.size() + (entry ? static_cast<std::size_t>(n) : 0);
  if (lambda.size() != expected) {
    throw DomainError("length-mismatch", entry ? "F collections need N(lambda) = N(mu) + n"
                                               : "G collections need N(lambda) = N(mu)");
  }
  const int width = std::max(lambda.largest(), mu.largest()) + 1;
  std::vector<PathCollection> out;
  std::vector<Signature> sections{mu};
  auto rec = [&](auto&& self, int y) -> void {
    if (y == n) {
      if (sections.back() != lambda) return;
      PathCollection pc(family, sections, width);
      if (opts.six_vertex_only && !pc.six_vertex()) return;
      if (out.size() >= opts.limit) throw std::length_error("path enumeration exceeded its cap");
      out.push_back(std::move(pc));
      return;
    }
    const Signature current = sections.back();
    for_each_next_row(current, entry, width - 1, &lambda, [&](const Signature& next) {
      sections.push_back(next);
      self(self, y + 1);
      sections.pop_back();
    });
  };
  rec(rec, 0);
  return out;
}

}  // namespace detail

inline std::vector<PathCollection> enumerate_F_collections(const Signature& mu, const Signature& lambda, int n,
                                                           const EnumerateOptions& opts = {}) {
  return detail::enumerate_collections(Family::F, mu, lambda, n, opts);
}

inline std::vector<PathCollection> enumerate_Gc_collections(const Signature& mu, const Signature& lambda, int n,
                                                            const EnumerateOptions& opts = {}) {
  return detail::enumerate_collections(Family::Gc, mu, lambda, n, opts);
}

// Product of vertex weights over the window, row y using spectral[y-1].
inline cplx collection_weight(const PathCollection& pc, const std::vector<cplx>& spectral, bool conjugated,
                              const SpinParams& spin) {
  if (static_cast<int>(spectral.size()) != pc.rows()) {
    throw DomainError("length-mismatch", "collection weight needs one spectral value per row");
  }
  cplx result = 1.0;
  for (int y = 1; y <= pc.rows(); ++y) {
    const WeightKernel kernel(spin, spectral[y - 1], conjugated);
    for (int x = 0; x < pc.width(); ++x) result *= kernel(pc.vertex(x, y));
  }
  return result;
}

inline constexpr std::array<VertexType, 4> kTypicalTypes{{
    {0, 0, 0, 0},
    {0, 1, 0, 1},
    {0, 1, 1, 0},
    {1, 0, 0, 1},
}};

inline bool is_typical(const PathCollection& pc) {
  for (int y = 1; y <= pc.rows(); ++y) {
    for (int x = 0; x < pc.width(); ++x) {
      const auto& v = pc.vertex(x, y);
      if (std::find(kTypicalTypes.begin(), kTypicalTypes.end(), v) == kTypicalTypes.end()) return false;
    }
  }
  return true;
}

inline long long count_vertices(const PathCollection& pc, const VertexType& type) {
  long long n = 0;
  for (int y = 1; y <= pc.rows(); ++y) {
    for (int x = 0; x < pc.width(); ++x) n += (pc.vertex(x, y) == type);
  }
  return n;
}

// Number of F-type collections from the empty signature to a strict λ:
// prod_{i<j} (λ_i - λ_j + j - i) / (j - i).
inline BigInt count_collections_formula(const Signature& lambda) {
  if (!lambda.strict()) throw DomainError("signature-strict", "counting formula needs a strict signature");
  BigInt num = 1, den = 1;
  const int k = static_cast<int>(lambda.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      num *= lambda[i] - lambda[j] + j - i;
      den *= j - i;
    }
  }
  return num / den;
}

// prod_{i<j} (λ_i - λ_j - j + i) / (j - i); a lower bound on the number of
// typical collections when every factor is positive.
inline BigRational typical_count_bound(const Signature& lambda) {
  BigRational r = 1;
  const int k = static_cast<int>(lambda.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) r *= BigRational(lambda[i] - lambda[j] - j + i, j - i);
  }
  return r;
}

// Weight shared by every typical collection with top row λ (k rows, all with
// spectral parameter u).
inline cplx typical_weight(const Signature& lambda, cplx u, const SpinParams& spin) {
  const long long k = static_cast<long long>(lambda.size());
  const double q = spin.q, s = spin.s;
  const cplx den = 1.0 - s * u;
  return ipow((1.0 - q) / den, k * (k + 1) / 2) * ipow((1.0 - s * s) * u / den, binom2(k)) *
         ipow((u - s) / den, lambda.weight() - binom2(k));
}

}  // namespace sixv
