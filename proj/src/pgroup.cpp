#include "braceforge/pgroup.hpp"

#include <algorithm>
#include <sstream>

namespace braceforge {

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  if (n % 3 == 0) return n == 3;
  for (u64 d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

u64 powmod(u64 base, u64 exp, u64 m) {
  u64 r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 m) {
  i64 t = 0, newt = 1;
  i64 r = static_cast<i64>(m), newr = static_cast<i64>(a % m);
  while (newr != 0) {
    i64 q = r / newr;
    t = std::exchange(newt, t - q * newt);
    r = std::exchange(newr, r - q * newr);
  }
  if (r != 1) throw std::domain_error("invmod: argument not a unit");
  if (t < 0) t += static_cast<i64>(m);
  return static_cast<u64>(t);
}

unsigned valuation(u64 n, u64 p) {
  if (n == 0) throw std::domain_error("valuation of zero");
  unsigned v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

u64 ipow(u64 base, unsigned exp) {
  u64 r = 1;
  while (exp--) r *= base;
  return r;
}

// ---- GroupShape ----

GroupShape::GroupShape(u64 p, std::vector<unsigned> exponents)
    : p_(p), exps_(std::move(exponents)) {
  if (p_ < 3 || !is_prime_u64(p_))
    throw structural_error("GroupShape: p must be an odd prime, got " +
                           std::to_string(p_));
  // An empty exponent list is the one-element group (quotient by the
  // whole group produces it).
  n_ = 0;
  emax_ = 0;
  order_ = 1;
  mods_.reserve(exps_.size());
  strides_.reserve(exps_.size());
  for (unsigned a : exps_) {
    if (a == 0) throw structural_error("GroupShape: zero exponent");
    u64 mod = ipow(p_, a);
    strides_.push_back(order_);
    u128 next = static_cast<u128>(order_) * mod;
    if (next > static_cast<u128>(1) << 62)
      throw structural_error("GroupShape: order exceeds exact index range");
    order_ = static_cast<u64>(next);
    mods_.push_back(mod);
    n_ += a;
    emax_ = std::max(emax_, a);
  }
}

void GroupShape::require_same(const GroupShape& o) const {
  if (!(*this == o)) throw structural_error("GroupShape mismatch");
}

void GroupShape::require_element(const GElement& x) const {
  if (x.size() != exps_.size())
    throw structural_error("element rank mismatch");
  for (unsigned i = 0; i < x.size(); ++i)
    if (x[i] >= mods_[i]) throw structural_error("element not canonical");
}

GElement GroupShape::basis(unsigned i) const {
  GElement e = zero();
  e.at(i) = 1;
  return e;
}

GElement GroupShape::add(const GElement& x, const GElement& y) const {
  GElement r(rank());
  for (unsigned i = 0; i < rank(); ++i) {
    u64 s = x[i] + y[i];
    r[i] = s >= mods_[i] ? s - mods_[i] : s;
  }
  return r;
}

GElement GroupShape::sub(const GElement& x, const GElement& y) const {
  GElement r(rank());
  for (unsigned i = 0; i < rank(); ++i)
    r[i] = x[i] >= y[i] ? x[i] - y[i] : x[i] + mods_[i] - y[i];
  return r;
}

GElement GroupShape::neg(const GElement& x) const {
  GElement r(rank());
  for (unsigned i = 0; i < rank(); ++i) r[i] = x[i] ? mods_[i] - x[i] : 0;
  return r;
}

GElement GroupShape::smul(i64 m, const GElement& x) const {
  GElement r(rank());
  for (unsigned i = 0; i < rank(); ++i) {
    u64 mm = static_cast<u64>(((m % static_cast<i64>(mods_[i])) +
                               static_cast<i64>(mods_[i])) %
                              static_cast<i64>(mods_[i]));
    r[i] = mulmod(mm, x[i], mods_[i]);
  }
  return r;
}

bool GroupShape::is_zero(const GElement& x) const {
  for (u64 c : x)
    if (c) return false;
  return true;
}

u64 GroupShape::index_of(const GElement& x) const {
  u64 idx = 0;
  for (unsigned i = 0; i < rank(); ++i) idx += x[i] * strides_[i];
  return idx;
}

GElement GroupShape::element(u64 index) const {
  GElement r(rank());
  for (unsigned i = 0; i < rank(); ++i) {
    r[i] = index % mods_[i];
    index /= mods_[i];
  }
  return r;
}

u64 GroupShape::idx_add(u64 a, u64 b) const {
  u64 idx = 0;
  for (unsigned i = 0; i < rank(); ++i) {
    u64 s = a % mods_[i] + b % mods_[i];
    if (s >= mods_[i]) s -= mods_[i];
    idx += s * strides_[i];
    a /= mods_[i];
    b /= mods_[i];
  }
  return idx;
}

u64 GroupShape::idx_sub(u64 a, u64 b) const {
  u64 idx = 0;
  for (unsigned i = 0; i < rank(); ++i) {
    u64 xa = a % mods_[i], xb = b % mods_[i];
    idx += (xa >= xb ? xa - xb : xa + mods_[i] - xb) * strides_[i];
    a /= mods_[i];
    b /= mods_[i];
  }
  return idx;
}

u64 GroupShape::idx_neg(u64 a) const {
  u64 idx = 0;
  for (unsigned i = 0; i < rank(); ++i) {
    u64 xa = a % mods_[i];
    idx += (xa ? mods_[i] - xa : 0) * strides_[i];
    a /= mods_[i];
  }
  return idx;
}

u64 GroupShape::idx_smul(i64 m, u64 a) const {
  u64 idx = 0;
  for (unsigned i = 0; i < rank(); ++i) {
    u64 mm = static_cast<u64>(((m % static_cast<i64>(mods_[i])) +
                               static_cast<i64>(mods_[i])) %
                              static_cast<i64>(mods_[i]));
    idx += mulmod(mm, a % mods_[i], mods_[i]) * strides_[i];
    a /= mods_[i];
  }
  return idx;
}

std::string GroupShape::str(const GElement& x) const {
  std::ostringstream os;
  os << '(';
  for (unsigned i = 0; i < x.size(); ++i) {
    if (i) os << ',';
    os << x[i];
  }
  os << ')';
  return os.str();
}

std::string GroupShape::str_idx(u64 a) const { return str(element(a)); }

// ---- BoxSubgroup ----

BoxSubgroup::BoxSubgroup(GroupShape shape, std::vector<unsigned> betas)
    : shape_(std::move(shape)), betas_(std::move(betas)) {
  if (betas_.size() != shape_.rank())
    throw structural_error("BoxSubgroup: beta rank mismatch");
  for (unsigned i = 0; i < betas_.size(); ++i)
    if (betas_[i] > shape_.exponents()[i])
      throw structural_error("BoxSubgroup: beta exceeds exponent");
}

u64 BoxSubgroup::subgroup_order() const {
  u64 o = 1;
  for (unsigned i = 0; i < betas_.size(); ++i)
    o *= ipow(shape_.p(), shape_.exponents()[i] - betas_[i]);
  return o;
}

u64 BoxSubgroup::quotient_order() const {
  u64 o = 1;
  for (unsigned b : betas_) o *= ipow(shape_.p(), b);
  return o;
}

bool BoxSubgroup::contains(const GElement& x) const {
  for (unsigned i = 0; i < betas_.size(); ++i)
    if (x[i] % ipow(shape_.p(), betas_[i]) != 0) return false;
  return true;
}

bool BoxSubgroup::contains_idx(u64 a) const {
  return contains(shape_.element(a));
}

GElement BoxSubgroup::coset_rep(const GElement& x) const {
  GElement r(x.size());
  for (unsigned i = 0; i < x.size(); ++i)
    r[i] = x[i] % ipow(shape_.p(), betas_[i]);
  return r;
}

u64 BoxSubgroup::coset_rep_idx(u64 a) const {
  return shape_.index_of(coset_rep(shape_.element(a)));
}

GroupShape BoxSubgroup::quotient_shape() const {
  std::vector<unsigned> exps;
  for (unsigned b : betas_)
    if (b > 0) exps.push_back(b);
  return GroupShape(shape_.p(), exps);
}

GElement BoxSubgroup::lift(const GroupShape& qshape, const GElement& q) const {
  GElement r = shape_.zero();
  unsigned qi = 0;
  for (unsigned i = 0; i < betas_.size(); ++i) {
    if (betas_[i] > 0) r[i] = q[qi++];
  }
  (void)qshape;
  return r;
}

GElement BoxSubgroup::project(const GroupShape& qshape,
                              const GElement& x) const {
  GElement r(qshape.rank(), 0);
  unsigned qi = 0;
  for (unsigned i = 0; i < betas_.size(); ++i) {
    if (betas_[i] > 0) r[qi++] = x[i] % ipow(shape_.p(), betas_[i]);
  }
  return r;
}

u64 BoxSubgroup::project_idx(const GroupShape& qshape, u64 a) const {
  return qshape.index_of(project(qshape, shape_.element(a)));
}

u64 BoxSubgroup::lift_idx(const GroupShape& qshape, u64 q) const {
  return shape_.index_of(lift(qshape, qshape.element(q)));
}

GElement BoxSubgroup::member(u64 t) const {
  GElement r(shape_.rank());
  for (unsigned i = 0; i < betas_.size(); ++i) {
    u64 step = ipow(shape_.p(), betas_[i]);
    u64 count = shape_.modulus(i) / step;
    r[i] = (t % count) * step;
    t /= count;
  }
  return r;
}

BoxSubgroup BoxSubgroup::intersect(const BoxSubgroup& o) const {
  shape_.require_same(o.shape_);
  std::vector<unsigned> b(betas_.size());
  for (unsigned i = 0; i < b.size(); ++i)
    b[i] = std::max(betas_[i], o.betas_[i]);
  return BoxSubgroup(shape_, b);
}

BoxSubgroup BoxSubgroup::scaled(unsigned j) const {
  std::vector<unsigned> b(betas_.size());
  for (unsigned i = 0; i < b.size(); ++i)
    b[i] = std::min(betas_[i] + j, shape_.exponents()[i]);
  return BoxSubgroup(shape_, b);
}

bool BoxSubgroup::subgroup_of(const BoxSubgroup& o) const {
  for (unsigned i = 0; i < betas_.size(); ++i)
    if (betas_[i] < o.betas_[i]) return false;
  return true;
}

BoxSubgroup p_power_subgroup(const GroupShape& shape, unsigned i) {
  std::vector<unsigned> betas(shape.rank());
  for (unsigned j = 0; j < shape.rank(); ++j)
    betas[j] = std::min(i, shape.exponents()[j]);
  return BoxSubgroup(shape, betas);
}

BoxSubgroup annihilator(const GroupShape& shape, unsigned i) {
  std::vector<unsigned> betas(shape.rank());
  for (unsigned j = 0; j < shape.rank(); ++j)
    betas[j] = shape.exponents()[j] > i ? shape.exponents()[j] - i : 0;
  return BoxSubgroup(shape, betas);
}

// ---- pullbacks ----

std::string PullbackChoice::str() const {
  if (mode == Mode::canonical) return "canonical";
  return "offset:" + std::to_string(seed);
}

namespace {

// Seeded ann(p) offset: coordinatewise p^{alpha_i - 1} * t_i with t_i < p.
GElement ann_p_offset(const GroupShape& shape, u64 x_index, u64 seed) {
  GElement r(shape.rank());
  for (unsigned i = 0; i < shape.rank(); ++i) {
    u64 word = rng_stream(seed, x_index * 131 + i);
    u64 t = rng_below(word, shape.p());
    r[i] = (shape.modulus(i) / shape.p()) * t;
  }
  return r;
}

}  // namespace

GElement rho_inv(const GroupShape& shape, const GElement& x,
                 const PullbackChoice& choice) {
  shape.require_element(x);
  GElement r(shape.rank());
  for (unsigned i = 0; i < shape.rank(); ++i) {
    if (x[i] % shape.p() != 0)
      throw std::domain_error("rho_inv: argument not in pA at coordinate " +
                              std::to_string(i));
    r[i] = x[i] / shape.p();
  }
  if (choice.mode == PullbackChoice::Mode::offset)
    r = shape.add(r, ann_p_offset(shape, shape.index_of(x), choice.seed));
  return r;
}

GElement wp_inv(const GroupShape& shape, const GElement& x, unsigned k,
                const PullbackChoice& choice) {
  GElement cur = x;
  for (unsigned step = 0; step < k; ++step) {
    for (unsigned i = 0; i < shape.rank(); ++i) {
      if (cur[i] % shape.p() != 0)
        throw std::domain_error(
            "wp_inv: intermediate left pA at step " + std::to_string(step) +
            " (element " + shape.str(cur) + ")");
    }
    cur = rho_inv(shape, cur, choice);
  }
  return cur;
}

u64 rho_inv_idx(const GroupShape& shape, u64 x, const PullbackChoice& choice) {
  const unsigned r = shape.rank();
  if (r > 32) return shape.index_of(rho_inv(shape, shape.element(x), choice));
  u64 coords[32];
  u64 rem = x;
  for (unsigned i = 0; i < r; ++i) {
    u64 c = rem % shape.modulus(i);
    rem /= shape.modulus(i);
    if (c % shape.p() != 0)
      throw std::domain_error("rho_inv: argument not in pA at coordinate " +
                              std::to_string(i));
    coords[i] = c / shape.p();
  }
  if (choice.mode == PullbackChoice::Mode::offset) {
    for (unsigned i = 0; i < r; ++i) {
      u64 word = rng_stream(choice.seed, x * 131 + i);
      u64 t = rng_below(word, shape.p());
      u64 off = (shape.modulus(i) / shape.p()) * t;
      coords[i] = (coords[i] + off) % shape.modulus(i);
    }
  }
  u64 idx = 0;
  for (unsigned i = r; i-- > 0;) idx = idx * shape.modulus(i) + coords[i];
  return idx;
}

u64 wp_inv_idx(const GroupShape& shape, u64 x, unsigned k,
               const PullbackChoice& choice) {
  u64 cur = x;
  for (unsigned step = 0; step < k; ++step) {
    try {
      cur = rho_inv_idx(shape, cur, choice);
    } catch (const std::domain_error&) {
      throw std::domain_error("wp_inv: intermediate left pA at step " +
                              std::to_string(step) + " (element " +
                              shape.str_idx(cur) + ")");
    }
  }
  return cur;
}

unsigned min_k(const GroupShape& shape) {
  unsigned k = 1;
  while (k * (shape.p() - 1) < shape.max_exponent()) ++k;
  return k;
}

}  // namespace braceforge
