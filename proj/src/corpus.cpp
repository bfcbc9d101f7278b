#include "braceforge/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace braceforge {

using nlohmann::json;

namespace {

Budget fastfail_budget() {
  Budget b;
  b.max_triples = 200'000;  // constructors get a cheap smoke verification
  b.samples = 20'000;
  return b;
}

void constructor_check_brace(const Brace& B, const char* who) {
  BraceReport rep = verify_brace(B, fastfail_budget());
  if (!rep.passed)
    throw structural_error(std::string(who) +
                           ": constructor output failed verification: " +
                           rep.summary());
}

}  // namespace

Brace trivial_brace(GroupShape shape) {
  auto sh = std::make_shared<GroupShape>(shape);
  Brace B = Brace::from_rule(
      shape, [sh](u64 a, u64 b) { return sh->idx_add(a, b); },
      BraceKind::brace, "trivial");
  constructor_check_brace(B, "trivial_brace");
  return B;
}

Brace radical_ring_brace(u64 p, unsigned n, u64 lambda) {
  if (lambda % p != 0)
    throw precondition_error("radical_ring_brace: p must divide lambda");
  GroupShape shape(p, {n});
  const u64 mod = shape.modulus(0);
  Brace B = Brace::from_rule(
      shape,
      [mod, lambda](u64 a, u64 b) {
        u64 t = mulmod(mulmod(lambda % mod, a, mod), b, mod);
        return (a + b + t) % mod;
      },
      BraceKind::brace,
      "radical(p=" + std::to_string(p) + ",n=" + std::to_string(n) +
          ",lambda=" + std::to_string(lambda) + ")");
  constructor_check_brace(B, "radical_ring_brace");
  return B;
}

Brace shear_brace(u64 p, unsigned alpha) {
  GroupShape shape(p, {alpha, alpha});
  const u64 mod = shape.modulus(0);
  Brace B = Brace::from_rule(
      shape,
      [mod](u64 a, u64 b) {
        u64 a1 = a % mod, a2 = a / mod;
        u64 b1 = b % mod, b2 = b / mod;
        u64 c1 = (a1 + b1) % mod;
        u64 c2 = (a2 + b2 + mulmod(a1, b1, mod)) % mod;
        return c1 + mod * c2;
      },
      BraceKind::brace,
      "shear(p=" + std::to_string(p) + ",alpha=" + std::to_string(alpha) + ")");
  constructor_check_brace(B, "shear_brace");
  return B;
}

namespace {

BraceKind combine_kinds(BraceKind a, BraceKind b) {
  if (a == BraceKind::unverified || b == BraceKind::unverified)
    return BraceKind::unverified;
  if (a == BraceKind::pseudobrace || b == BraceKind::pseudobrace)
    return BraceKind::pseudobrace;
  return BraceKind::brace;
}

}  // namespace

Brace direct_sum(const Brace& B1, const Brace& B2) {
  if (B1.shape().p() != B2.shape().p())
    throw structural_error("direct_sum: prime mismatch");
  std::vector<unsigned> exps = B1.shape().exponents();
  for (unsigned e : B2.shape().exponents()) exps.push_back(e);
  GroupShape shape(B1.shape().p(), exps);
  const u64 N1 = B1.shape().order();
  auto L = std::make_shared<Brace>(B1);
  auto R = std::make_shared<Brace>(B2);
  Brace B = Brace::from_rule(
      shape,
      [L, R, N1](u64 a, u64 b) {
        u64 lo = L->circ(a % N1, b % N1);
        u64 hi = R->circ(a / N1, b / N1);
        return lo + N1 * hi;
      },
      combine_kinds(B1.kind(), B2.kind()),
      B1.label() + "(+)" + B2.label());
  return B;
}

Brace perturb(const Brace& B, u64 seed) {
  if (!B.table_backed())
    throw precondition_error("perturb: requires a table-backed brace");
  std::vector<u32> tab = B.table();
  const u64 N = B.shape().order();
  const u64 cells = N * N;
  u64 c1 = rng_below(rng_stream(seed, 0), cells);
  u64 c2 = c1;
  for (u64 t = 1; tab[c2] == tab[c1]; ++t)
    c2 = rng_below(rng_stream(seed, t), cells);
  std::swap(tab[c1], tab[c2]);
  return Brace::from_table(B.shape(), std::move(tab), BraceKind::unverified,
                           B.label() + "#perturbed" + std::to_string(seed));
}

PreLie zero_prelie(GroupShape shape) {
  return PreLie::from_rule(
      shape, [](u64, u64) { return 0; }, "prelie_zero", true);
}

PreLie scaled_prelie(u64 p, unsigned n, u64 mu) {
  if (mu % p != 0)
    throw precondition_error("scaled_prelie: p must divide mu");
  GroupShape shape(p, {n});
  const u64 mod = shape.modulus(0);
  return PreLie::from_rule(
      shape,
      [mod, mu](u64 a, u64 b) { return mulmod(mulmod(mu % mod, a, mod), b, mod); },
      "prelie_scaled(p=" + std::to_string(p) + ",n=" + std::to_string(n) +
          ",mu=" + std::to_string(mu) + ")",
      true);
}

PreLie shear_prelie(u64 p, unsigned alpha) {
  GroupShape shape(p, {alpha, alpha});
  const u64 mod = shape.modulus(0);
  return PreLie::from_rule(
      shape,
      [mod](u64 a, u64 b) {
        u64 a1 = a % mod, b1 = b % mod;
        return mod * mulmod(a1, b1, mod);
      },
      "prelie_shear(p=" + std::to_string(p) + ",alpha=" + std::to_string(alpha) +
          ")",
      true);
}

PreLie direct_sum(const PreLie& P1, const PreLie& P2) {
  if (P1.shape().p() != P2.shape().p())
    throw structural_error("direct_sum: prime mismatch");
  std::vector<unsigned> exps = P1.shape().exponents();
  for (unsigned e : P2.shape().exponents()) exps.push_back(e);
  GroupShape shape(P1.shape().p(), exps);
  const u64 N1 = P1.shape().order();
  auto L = std::make_shared<PreLie>(P1);
  auto R = std::make_shared<PreLie>(P2);
  return PreLie::from_rule(
      shape,
      [L, R, N1](u64 a, u64 b) {
        return L->dot(a % N1, b % N1) + N1 * R->dot(a / N1, b / N1);
      },
      P1.label() + "(+)" + P2.label());
}

PreLie perturb(const PreLie& P, u64 seed) {
  if (!P.table_backed())
    throw precondition_error("perturb: requires a table-backed pre-Lie ring");
  std::vector<u32> tab = P.table();
  const u64 N = P.shape().order();
  const u64 cells = N * N;
  u64 c1 = rng_below(rng_stream(seed, 0), cells);
  u64 c2 = c1;
  for (u64 t = 1; tab[c2] == tab[c1]; ++t)
    c2 = rng_below(rng_stream(seed, t), cells);
  std::swap(tab[c1], tab[c2]);
  return PreLie::from_table(P.shape(), std::move(tab),
                            P.label() + "#perturbed" + std::to_string(seed));
}

// ---- spec parsing ----

namespace {

struct ParsedSpec {
  std::string name;
  std::map<std::string, std::string> params;
};

ParsedSpec parse_spec(const std::string& spec) {
  ParsedSpec out;
  auto colon = spec.find(':');
  out.name = spec.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::string rest = spec.substr(colon + 1);
  std::istringstream is(rest);
  std::string item;
  while (std::getline(is, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw parse_error("spec parameter without '=': " + item);
    out.params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

u64 spec_u64(const ParsedSpec& s, const std::string& key) {
  auto it = s.params.find(key);
  if (it == s.params.end())
    throw parse_error("spec missing parameter '" + key + "'");
  return std::stoull(it->second);
}

std::vector<unsigned> spec_exps(const ParsedSpec& s) {
  auto it = s.params.find("exps");
  if (it == s.params.end()) throw parse_error("spec missing parameter 'exps'");
  std::vector<unsigned> exps;
  std::istringstream is(it->second);
  std::string item;
  while (std::getline(is, item, '+'))
    exps.push_back(static_cast<unsigned>(std::stoul(item)));
  return exps;
}

}  // namespace

bool spec_is_prelie(const std::string& spec) {
  return parse_spec(spec).name.rfind("prelie_", 0) == 0;
}

Brace make_brace(const std::string& spec) {
  ParsedSpec s = parse_spec(spec);
  if (s.name == "trivial")
    return trivial_brace(GroupShape(spec_u64(s, "p"), spec_exps(s)));
  if (s.name == "radical")
    return radical_ring_brace(spec_u64(s, "p"),
                              static_cast<unsigned>(spec_u64(s, "n")),
                              spec_u64(s, "lambda"));
  if (s.name == "shear")
    return shear_brace(spec_u64(s, "p"),
                       static_cast<unsigned>(spec_u64(s, "alpha")));
  if (s.name == "sumpow") {
    unsigned copies = static_cast<unsigned>(spec_u64(s, "copies"));
    if (copies == 0) throw parse_error("sumpow: copies must be positive");
    Brace acc = radical_ring_brace(spec_u64(s, "p"),
                                   static_cast<unsigned>(spec_u64(s, "n")),
                                   spec_u64(s, "lambda"));
    Brace one = acc;
    for (unsigned c = 1; c < copies; ++c) acc = direct_sum(acc, one);
    return acc;
  }
  throw parse_error("unknown brace constructor '" + s.name + "'");
}

PreLie make_prelie(const std::string& spec) {
  ParsedSpec s = parse_spec(spec);
  if (s.name == "prelie_zero")
    return zero_prelie(GroupShape(spec_u64(s, "p"), spec_exps(s)));
  if (s.name == "prelie_scaled")
    return scaled_prelie(spec_u64(s, "p"),
                         static_cast<unsigned>(spec_u64(s, "n")),
                         spec_u64(s, "mu"));
  if (s.name == "prelie_shear")
    return shear_prelie(spec_u64(s, "p"),
                        static_cast<unsigned>(spec_u64(s, "alpha")));
  if (s.name == "prelie_sumpow") {
    unsigned copies = static_cast<unsigned>(spec_u64(s, "copies"));
    if (copies == 0) throw parse_error("prelie_sumpow: copies must be positive");
    PreLie acc = scaled_prelie(spec_u64(s, "p"),
                               static_cast<unsigned>(spec_u64(s, "n")),
                               spec_u64(s, "mu"));
    PreLie one = acc;
    for (unsigned c = 1; c < copies; ++c) acc = direct_sum(acc, one);
    return acc;
  }
  throw parse_error("unknown pre-Lie constructor '" + s.name + "'");
}

// ---- persistence ----

namespace {

constexpr u64 kJsonExactInt = u64(1) << 53;

json json_u64(u64 v) {
  if (v < kJsonExactInt) return json(v);
  return json(std::to_string(v));
}

u64 parse_u64_field(const json& j) {
  if (j.is_number_unsigned()) return j.get<u64>();
  if (j.is_string()) return std::stoull(j.get<std::string>());
  throw parse_error("expected integer or decimal string");
}

json shape_to_json(const GroupShape& shape) {
  json j;
  j["p"] = json_u64(shape.p());
  j["exponents"] = shape.exponents();
  return j;
}

GroupShape shape_from_json(const json& j) {
  if (!j.contains("p") || !j.contains("exponents"))
    throw parse_error("shape: missing p or exponents");
  std::vector<unsigned> exps;
  for (const auto& e : j.at("exponents")) exps.push_back(e.get<unsigned>());
  return GroupShape(parse_u64_field(j.at("p")), exps);
}

void write_doc(const json& doc, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open for writing: " + path);
  os << doc.dump(1, ' ') << "\n";
}

}  // namespace

void save_spec(const std::string& spec, const std::string& path) {
  const bool prelie = spec_is_prelie(spec);
  ParsedSpec parsed = parse_spec(spec);
  GroupShape shape =
      prelie ? make_prelie(spec).shape() : make_brace(spec).shape();
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = prelie ? "prelie" : "brace";
  doc["shape"] = shape_to_json(shape);
  json params = json::object();
  for (auto& [k, v] : parsed.params) params[k] = v;
  doc["backing"] = {{"kind", "rule"}, {"rule", parsed.name}, {"params", params}};
  doc["metadata"] = {{"provenance", spec},
                     {"verified_properties", json::array()}};
  write_doc(doc, path);
}

void save_table(const Brace& B, const std::string& path) {
  auto tab = B.dense_table();
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "brace";
  doc["shape"] = shape_to_json(B.shape());
  json entries = json::array();
  for (u32 e : *tab) entries.push_back(e);
  doc["backing"] = {{"kind", "table"}, {"circ_table", std::move(entries)}};
  doc["metadata"] = {{"provenance", B.label()},
                     {"verified_properties", json::array({kind_name(B.kind())})}};
  write_doc(doc, path);
}

void save_table(const PreLie& P, const std::string& path) {
  auto tab = P.dense_table();
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "prelie";
  doc["shape"] = shape_to_json(P.shape());
  json entries = json::array();
  for (u32 e : *tab) entries.push_back(e);
  doc["backing"] = {{"kind", "table"}, {"dot_table", std::move(entries)}};
  doc["metadata"] = {{"provenance", P.label()},
                     {"verified_properties",
                      json::array({P.verified() ? "verified" : "unverified"})}};
  write_doc(doc, path);
}

LoadedFile load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw parse_error("cannot open: " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("malformed file: ") + e.what());
  }
  if (!doc.contains("format_version") || doc["format_version"] != 1)
    throw parse_error("unsupported format_version (expected 1)");
  const std::string kind = doc.at("kind").get<std::string>();
  GroupShape shape = shape_from_json(doc.at("shape"));
  const json& backing = doc.at("backing");
  LoadedFile out;
  out.provenance = doc.value("metadata", json::object())
                       .value("provenance", std::string{});
  const std::string bkind = backing.at("kind").get<std::string>();
  if (bkind == "rule") {
    std::string spec = backing.at("rule").get<std::string>();
    std::string sep = ":";
    for (const auto& [k, v] : backing.at("params").items()) {
      spec += sep + k + "=" +
              (v.is_string() ? v.get<std::string>() : v.dump());
      sep = ",";
    }
    if (kind == "brace") {
      Brace B = make_brace(spec);
      B.shape().require_same(shape);
      out.brace = std::move(B);
    } else if (kind == "prelie") {
      PreLie P = make_prelie(spec);
      P.shape().require_same(shape);
      out.prelie = std::move(P);
    } else {
      throw parse_error("unknown kind '" + kind + "'");
    }
  } else if (bkind == "table") {
    const char* field = kind == "brace" ? "circ_table" : "dot_table";
    if (!backing.contains(field))
      throw parse_error(std::string("table backing missing ") + field);
    std::vector<u32> tab;
    tab.reserve(backing.at(field).size());
    for (const auto& e : backing.at(field))
      tab.push_back(static_cast<u32>(parse_u64_field(e)));
    if (tab.size() != shape.order() * shape.order())
      throw parse_error("table size does not match shape order");
    if (kind == "brace")
      out.brace = Brace::from_table(shape, std::move(tab),
                                    BraceKind::unverified, out.provenance);
    else if (kind == "prelie")
      out.prelie = PreLie::from_table(shape, std::move(tab), out.provenance);
    else
      throw parse_error("unknown kind '" + kind + "'");
  } else {
    throw parse_error("unknown backing kind '" + bkind + "'");
  }
  return out;
}

bool same_operation(const Brace& A, const Brace& B) {
  if (!(A.shape() == B.shape())) return false;
  const u64 N = A.shape().order();
  for (u64 a = 0; a < N; ++a)
    for (u64 b = 0; b < N; ++b)
      if (A.circ(a, b) != B.circ(a, b)) return false;
  return true;
}

bool same_operation(const PreLie& A, const PreLie& B) {
  if (!(A.shape() == B.shape())) return false;
  const u64 N = A.shape().order();
  for (u64 a = 0; a < N; ++a)
    for (u64 b = 0; b < N; ++b)
      if (A.dot(a, b) != B.dot(a, b)) return false;
  return true;
}

}  // namespace braceforge
