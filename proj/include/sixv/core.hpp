#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace sixv {

using cplx = std::complex<double>;
using BigInt = boost::multiprecision::cpp_int;
using json = nlohmann::json;

// Raised when an input violates a documented domain constraint. `constraint()`
// is a stable short identifier so callers (and the CLI) can report which rule
// was broken.
class DomainError : public std::invalid_argument {
 public:
  DomainError(std::string constraint, const std::string& what)
      : std::invalid_argument(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

// Raised when a numerical procedure fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, json diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const json& diagnostics() const noexcept { return diagnostics_; }

 private:
  json diagnostics_;
};

template <typename T>
T q_pochhammer(T a, T q, int n) {
  T result(1);
  T qj(1);
  for (int j = 0; j < n; ++j) {
    result *= T(1) - a * qj;
    qj *= q;
  }
  return result;
}

inline cplx ipow(cplx z, long long n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  cplx result(1.0);
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

inline double ipow(double x, long long n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

inline long long binom2(long long k) { return k * (k - 1) / 2; }

using Multiplicities = std::map<int, int>;

// Weakly decreasing integer vector.
class Signature {
 public:
  Signature() = default;
  Signature(std::initializer_list<int> parts) : Signature(std::vector<int>(parts)) {}
  explicit Signature(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i) {
      if (parts_[i] < parts_[i + 1]) {
        throw DomainError("signature-order", "signature parts must be weakly decreasing");
      }
    }
  }

  // Builds a nonnegative signature from its multiplicity view.
  static Signature from_multiplicities(const Multiplicities& m) {
    std::vector<int> parts;
    for (auto it = m.rbegin(); it != m.rend(); ++it) {
      if (it->first < 0) throw DomainError("signature-nonneg", "negative part in multiplicities");
      if (it->second < 0) throw DomainError("signature-nonneg", "negative multiplicity");
      parts.insert(parts.end(), static_cast<std::size_t>(it->second), it->first);
    }
    return Signature(std::move(parts));
  }

  std::size_t size() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }
  int operator[](std::size_t i) const { return parts_[i]; }
  const std::vector<int>& parts() const noexcept { return parts_; }
  auto begin() const noexcept { return parts_.begin(); }
  auto end() const noexcept { return parts_.end(); }

  bool nonnegative() const noexcept { return parts_.empty() || parts_.back() >= 0; }
  bool strict() const noexcept {
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i) {
      if (parts_[i] == parts_[i + 1]) return false;
    }
    return true;
  }
  long long weight() const noexcept {
    long long w = 0;
    for (int p : parts_) w += p;
    return w;
  }
  int largest() const noexcept { return parts_.empty() ? 0 : parts_.front(); }
  int smallest() const noexcept { return parts_.empty() ? 0 : parts_.back(); }
  // m_i(λ) as a sorted map; only parts that occur are present.
  Multiplicities multiplicities() const {
    if (!nonnegative()) throw DomainError("signature-nonneg", "multiplicities need a nonnegative signature");
    Multiplicities m;
    for (int p : parts_) ++m[p];
    return m;
  }
  int multiplicity(int i) const noexcept {
    int c = 0;
    for (int p : parts_) c += (p == i);
    return c;
  }
  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(parts_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Signature&, const Signature&) = default;
  friend auto operator<=>(const Signature& a, const Signature& b) { return a.parts_ <=> b.parts_; }

 private:
  std::vector<int> parts_;
};

inline Multiplicities signature_multiplicities(const Signature& s) { return s.multiplicities(); }

// Colexicographic order: shorter signatures first, then compare from the last
// (smallest) part upwards.
struct ColexLess {
  bool operator()(const Signature& a, const Signature& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  }
};

struct SignatureHash {
  std::size_t operator()(const Signature& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.size();
    for (int p : s) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline void to_json(json& j, const Signature& s) { j = s.parts(); }
inline void from_json(const json& j, Signature& s) { s = Signature(j.get<std::vector<int>>()); }

// Parameters of the spin weights: q and the spin s. The measure fixes
// s = q^{-1/2}; the symmetric-function routes work for any s.
struct SpinParams {
  double q = 0.5;
  double s = std::sqrt(2.0);

  static SpinParams make(double q, double s) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q-range", "q must lie in (0,1)");
    if (!std::isfinite(s) || s == 0.0) throw DomainError("spin-nonzero", "s must be finite and nonzero");
    return {q, s};
  }
  static SpinParams from_q(double q) { return make(q, 1.0 / std::sqrt(q)); }
};

// Ferroelectric model parameters: 1 < s = q^{-1/2} < u < 1/v, with optional
// inhomogeneous row values u_i and column values v_j.
class ModelParams {
 public:
  static ModelParams make(double q, double u, double v) {
    return make(q, u, v, {}, {});
  }

  static ModelParams make(double q, double u, double v, std::vector<double> us, std::vector<double> vs) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q-range", "q must lie in (0,1)");
    ModelParams p;
    p.q_ = q;
    p.s_ = 1.0 / std::sqrt(q);
    p.u_ = u;
    p.v_ = v;
    p.us_ = std::move(us);
    p.vs_ = std::move(vs);
    p.validate();
    return p;
  }

  double q() const noexcept { return q_; }
  double s() const noexcept { return s_; }
  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }
  bool homogeneous() const noexcept { return us_.empty() && vs_.empty(); }
  const std::vector<double>& row_values() const noexcept { return us_; }
  const std::vector<double>& column_values() const noexcept { return vs_; }
  SpinParams spin() const noexcept { return {q_, s_}; }

  // u_i for rows i = 0..n-1 (explicit values first, then the homogeneous u).
  std::vector<double> rows(int n) const {
    std::vector<double> out(static_cast<std::size_t>(n), u_);
    for (int i = 0; i < n && i < static_cast<int>(us_.size()); ++i) out[i] = us_[i];
    return out;
  }
  std::vector<double> columns(int m) const {
    std::vector<double> out(static_cast<std::size_t>(m), v_);
    for (int j = 0; j < m && j < static_cast<int>(vs_.size()); ++j) out[j] = vs_[j];
    return out;
  }

  ModelParams with_rows(std::vector<double> us) const { return make(q_, u_, v_, std::move(us), vs_); }
  ModelParams with_columns(std::vector<double> vs) const { return make(q_, u_, v_, us_, std::move(vs)); }

 private:
  ModelParams() = default;

  void validate() const {
    auto check_u = [&](double u) {
      if (!(u > s_)) {
        throw DomainError("ferroelectric-order",
                          "ferroelectric ordering 1 < s < u < 1/v violated: need u > s = q^{-1/2}");
      }
    };
    auto check_v = [&](double v) {
      if (!(v > 0.0)) throw DomainError("ferroelectric-order", "column parameter v must be positive");
    };
    check_u(u_);
    check_v(v_);
    for (double u : us_) check_u(u);
    for (double v : vs_) check_v(v);
    double umax = u_, vmax = v_;
    for (double u : us_) umax = std::max(umax, u);
    for (double v : vs_) vmax = std::max(vmax, v);
    if (!(umax * vmax < 1.0)) {
      throw DomainError("ferroelectric-order",
                        "ferroelectric ordering 1 < s < u < 1/v violated: need max u_i v_j < 1");
    }
  }

  double q_ = 0.5, s_ = std::sqrt(2.0), u_ = 2.0, v_ = 0.25;
  std::vector<double> us_, vs_;
};

inline void to_json(json& j, const ModelParams& p) {
  j = json{{"q", p.q()}, {"u", p.u()}, {"v", p.v()}};
  if (!p.row_values().empty()) j["u_rows"] = p.row_values();
  if (!p.column_values().empty()) j["v_columns"] = p.column_values();
}

inline ModelParams model_params_from_json(const json& j) {
  std::vector<double> us, vs;
  if (j.contains("u_rows")) us = j.at("u_rows").get<std::vector<double>>();
  if (j.contains("v_columns")) vs = j.at("v_columns").get<std::vector<double>>();
  return ModelParams::make(j.at("q").get<double>(), j.at("u").get<double>(), j.at("v").get<double>(),
                           std::move(us), std::move(vs));
}

// Anisotropy of a six-vertex weight table (a1,a2,b1,b2,c1,c2).
inline double delta_parameter(double a1, double a2, double b1, double b2, double c1, double c2) {
  for (double w : {a1, a2, b1, b2, c1, c2}) {
    if (!(w > 0.0)) throw DomainError("weights-positive", "anisotropy needs six positive weights");
  }
  return (a1 * a2 + b1 * b2 - c1 * c2) / (2.0 * std::sqrt(a1 * a2 * b1 * b2));
}

}  // namespace sixv

namespace nlohmann {
template <>
struct adl_serializer<sixv::ModelParams> {
  static sixv::ModelParams from_json(const json& j) { return sixv::model_params_from_json(j); }
  static void to_json(json& j, const sixv::ModelParams& p) { sixv::to_json(j, p); }
};
}  // namespace nlohmann
