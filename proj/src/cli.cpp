#include "braceforge/cli.hpp"

#include <CLI11.hpp>
#include <optional>
#include <sstream>

#include "braceforge/corpus.hpp"
#include "braceforge/corr.hpp"
#include "braceforge/flows.hpp"
#include "braceforge/props.hpp"

namespace braceforge {

namespace {

struct RunConfig {
  std::string subcommand;
  std::string gen;
  std::string in;
  std::string out_path;
  unsigned k = 0;  // 0 = default min_k
  u64 budget = 1'000'000'000ULL;
  u64 samples = 1'000'000ULL;
  u64 seed = 0;
  std::string choice = "canonical";
  unsigned depth = 3;
  std::string format = "human";
  bool as_table = false;
};

struct Emit {
  std::ostream& os;
  bool machine;

  void kv(const std::string& key, const std::string& val) {
    if (machine)
      os << key << "=" << val << "\n";
    else
      os << key << ": " << val << "\n";
  }
  void kv(const std::string& key, u64 v) { kv(key, std::to_string(v)); }
  void kv(const std::string& key, bool v) { kv(key, std::string(v ? "yes" : "no")); }
  void section(const std::string& name) {
    if (!machine) os << "-- " << name << " --\n";
  }
};

PullbackChoice parse_choice(const std::string& s) {
  if (s == "canonical") return PullbackChoice::canonical();
  if (s.rfind("offset:", 0) == 0)
    return PullbackChoice::offset(std::stoull(s.substr(7)));
  throw parse_error("bad --choice (expected canonical or offset:SEED)");
}

std::string witness_str(const GroupShape& shape, const AxiomFailure& f) {
  std::ostringstream os;
  os << f.axiom << " @";
  for (u64 w : f.witness) {
    if (w < shape.order())
      os << " " << shape.str_idx(w);
    else
      os << " " << w;
  }
  if (!f.detail.empty()) os << " (" << f.detail << ")";
  return os.str();
}

void emit_config(Emit& e, const RunConfig& cfg) {
  e.kv("cfg.subcommand", cfg.subcommand);
  if (!cfg.gen.empty()) e.kv("cfg.gen", cfg.gen);
  if (!cfg.in.empty()) e.kv("cfg.in", cfg.in);
  e.kv("cfg.k", static_cast<u64>(cfg.k));
  e.kv("cfg.budget", cfg.budget);
  e.kv("cfg.samples", cfg.samples);
  e.kv("cfg.seed", cfg.seed);
  e.kv("cfg.choice", cfg.choice);
  e.kv("cfg.depth", static_cast<u64>(cfg.depth));
}

struct Input {
  std::optional<Brace> brace;
  std::optional<PreLie> prelie;
};

Input load_input(const RunConfig& cfg) {
  Input in;
  if (!cfg.gen.empty()) {
    if (spec_is_prelie(cfg.gen))
      in.prelie = make_prelie(cfg.gen);
    else
      in.brace = make_brace(cfg.gen);
    return in;
  }
  if (!cfg.in.empty()) {
    LoadedFile lf = load_file(cfg.in);
    in.brace = std::move(lf.brace);
    in.prelie = std::move(lf.prelie);
    return in;
  }
  throw parse_error("one of --gen or --in is required");
}

Budget make_budget(const RunConfig& cfg) {
  Budget b;
  b.max_triples = cfg.budget;
  b.samples = cfg.samples;
  b.seed = cfg.seed;
  return b;
}

void emit_brace_report(Emit& e, const std::string& prefix,
                       const GroupShape& shape, const BraceReport& rep) {
  e.kv(prefix + ".passed", rep.passed);
  e.kv(prefix + ".mode", rep.exhaustive ? std::string("exhaustive")
                                        : "sampled:" + std::to_string(rep.samples));
  if (rep.series_length) e.kv(prefix + ".series_length", static_cast<u64>(rep.series_length));
  if (!rep.failures.empty())
    e.kv(prefix + ".witness", witness_str(shape, rep.failures.front()));
}

void emit_property(Emit& e, const GroupShape& shape, const PropertyReport& rep) {
  std::string prefix = "props." + rep.property_id;
  e.kv(prefix + ".holds", rep.holds);
  e.kv(prefix + ".mode", rep.exhaustive ? std::string("exhaustive")
                                        : "sampled:" + std::to_string(rep.samples));
  if (rep.critical) e.kv(prefix + ".CRITICAL", true);
  if (!rep.note.empty()) e.kv(prefix + ".note", rep.note);
  if (rep.witness) e.kv(prefix + ".witness", witness_str(shape, *rep.witness));
}

void emit_witness_report(Emit& e, const std::string& prefix,
                         const GroupShape& shape, const WitnessReport& rep) {
  e.kv(prefix + ".passed", rep.passed);
  e.kv(prefix + ".mode", rep.exhaustive ? std::string("exhaustive")
                                        : "sampled:" + std::to_string(rep.samples));
  if (rep.witness) e.kv(prefix + ".witness", witness_str(shape, *rep.witness));
}

void emit_roundtrip(Emit& e, const GroupShape& shape,
                    const RoundtripReport& rep, const std::string& prefix) {
  e.kv(prefix + ".passed", rep.passed);
  e.kv(prefix + ".property1p", rep.property1p);
  e.kv(prefix + ".property1pp", rep.property1pp);
  e.kv(prefix + ".property3", rep.property3);
  e.kv(prefix + ".w_bijective", rep.w_bijective);
  e.kv(prefix + ".final_quotient_order", rep.final_quotient_order);
  e.kv(prefix + ".mode", rep.exhaustive ? std::string("exhaustive")
                                        : "sampled:" + std::to_string(rep.samples));
  if (!rep.failed_stage.empty()) e.kv(prefix + ".failed_stage", rep.failed_stage);
  if (rep.witness) e.kv(prefix + ".witness", witness_str(shape, *rep.witness));
}

unsigned effective_k(const RunConfig& cfg, const GroupShape& shape) {
  return cfg.k ? cfg.k : min_k(shape);
}

int cmd_verify(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  Budget budget = make_budget(cfg);
  if (in.prelie) {
    BraceReport rep = verify_prelie(*in.prelie, budget);
    e.kv("input.kind", std::string("prelie"));
    e.kv("input.order", in.prelie->shape().order());
    emit_brace_report(e, "verify_prelie", in.prelie->shape(), rep);
    return rep.passed ? 0 : 1;
  }
  const Brace& B = *in.brace;
  e.kv("input.kind", std::string("brace"));
  e.kv("input.order", B.shape().order());
  BraceReport rep = verify_brace(B, budget);
  emit_brace_report(e, "verify_brace", B.shape(), rep);
  BraceReport prep = verify_pseudobrace(B, budget);
  emit_brace_report(e, "verify_pseudobrace", B.shape(), prep);
  return rep.passed ? 0 : 1;
}

int cmd_props(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  Budget budget = make_budget(cfg);
  bool critical = false;
  if (in.prelie) {
    PropertyReport p3 = check_property3(*in.prelie, budget);
    emit_property(e, in.prelie->shape(), p3);
    return 0;
  }
  const Brace& B = *in.brace;
  unsigned k = effective_k(cfg, B.shape());
  e.kv("input.order", B.shape().order());
  e.kv("effective_k", static_cast<u64>(k));
  PropertyReport p1 = check_property1(B, budget);
  PropertyReport p1p = check_property1p(B, budget);
  PropertyReport p1pp = check_property1pp(B, budget);
  PropertyReport p2 = check_property2(B, k, budget);
  PropertyReport rk = rank_criterion(B, budget);
  PropertyReport uni = uniform_criterion(B, budget);
  for (const auto* r : {&p1, &p1p, &p1pp, &p2, &rk, &uni}) {
    emit_property(e, B.shape(), *r);
    critical |= r->critical;
  }
  // implication lattice on this instance
  bool lat1 = !(p1p.holds && p1pp.holds) || p1.holds;
  bool lat2 = !p1.holds || p2.holds;
  e.kv("lattice.1p_1pp_implies_1", lat1);
  e.kv("lattice.1_implies_2", lat2);
  critical |= !lat1 || !lat2;
  return critical ? 1 : 0;
}

int cmd_extract(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  if (!in.brace) throw parse_error("extract: input must be a brace");
  Budget budget = make_budget(cfg);
  const Brace& B = *in.brace;
  unsigned k = effective_k(cfg, B.shape());
  e.kv("effective_k", static_cast<u64>(k));
  PreLie P = extract_prelie(B, k, parse_choice(cfg.choice), budget);
  e.kv("extract.carrier_order", P.shape().order());
  BraceReport rep = verify_prelie(P, budget);
  emit_brace_report(e, "verify_prelie", P.shape(), rep);
  unsigned idx = left_nilpotency_index(P);
  e.kv("extract.left_nilpotency_index", static_cast<u64>(idx));
  if (!cfg.out_path.empty()) save_table(P, cfg.out_path);
  return rep.passed && idx > 0 ? 0 : 1;
}

int cmd_flows(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  if (!in.prelie) throw parse_error("flows: input must be a pre-Lie ring");
  Budget budget = make_budget(cfg);
  const PreLie& P = *in.prelie;
  PropertyReport p3 = check_property3(P, budget);
  emit_property(e, P.shape(), p3);
  if (!p3.holds) return 1;
  auto ctx = std::make_shared<FlowsContext>(
      make_flows_context(P, parse_choice(cfg.choice)));
  e.kv("flows.span_index", static_cast<u64>(ctx->span_index));
  e.kv("flows.j_max", static_cast<u64>(ctx->j_max));
  Brace F = flows_circ(ctx);
  BraceReport rep = verify_pseudobrace(F, budget);
  emit_brace_report(e, "verify_pseudobrace", F.shape(), rep);
  WitnessReport trunc = verify_truncation(*ctx, budget);
  emit_witness_report(e, "truncation", F.shape(), trunc);
  WitnessReport wp = verify_w_powers(*ctx, F, 4, budget);
  emit_witness_report(e, "w_powers", F.shape(), wp);
  PropertyReport fp1p = check_property1p(F, budget);
  PropertyReport fp1pp = check_property1pp(F, budget);
  emit_property(e, F.shape(), fp1p);
  emit_property(e, F.shape(), fp1pp);
  bool ok = rep.passed && trunc.passed && wp.passed && fp1p.holds && fp1pp.holds;
  if (!cfg.out_path.empty() && F.shape().order() <= Brace::kTableCap)
    save_table(F, cfg.out_path);
  return ok ? 0 : 1;
}

int cmd_roundtrip(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  if (!in.brace) throw parse_error("roundtrip: input must be a brace");
  Budget budget = make_budget(cfg);
  const Brace& B = *in.brace;
  unsigned k = effective_k(cfg, B.shape());
  e.kv("effective_k", static_cast<u64>(k));
  PullbackChoice choice = parse_choice(cfg.choice);
  RoundtripReport rep = verify_roundtrip(B, k, choice, budget);
  emit_roundtrip(e, B.shape(), rep, "roundtrip");
  RoundtripReport oeq = verify_odot_equality(B, k, choice, budget);
  emit_roundtrip(e, B.shape(), oeq, "odot_equality");
  return rep.passed && oeq.passed ? 0 : 1;
}

int cmd_corr(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  if (!in.brace) throw parse_error("corr: input must be a brace");
  Budget budget = make_budget(cfg);
  const Brace& B = *in.brace;
  unsigned k = effective_k(cfg, B.shape());
  e.kv("effective_k", static_cast<u64>(k));
  CorrContext ctx(B, k, parse_choice(cfg.choice), budget);
  WitnessReport wazny = verify_wazny(ctx, budget);
  emit_witness_report(e, "wazny", B.shape(), wazny);
  WitnessReport e0 = verify_e0_lemma(ctx, budget);
  emit_witness_report(e, "e0_lemma", B.shape(), e0);
  WitnessReport si = verify_star_iterates(ctx, budget);
  emit_witness_report(e, "star_iterates", B.shape(), si);
  WitnessReport fo = verify_fstar_odot(ctx, cfg.depth, budget);
  emit_witness_report(e, "fstar_odot", B.shape(), fo);
  GMap gm = g_map(ctx);
  e.kv("g_map.quotient_order", gm.qshape.order());
  e.kv("g_map.max_cycle", gm.max_cycle);
  bool cycles_ok = gm.max_cycle <= B.shape().order();
  e.kv("g_map.cycles_divide_pn_factorial", cycles_ok);
  bool ok = wazny.passed && e0.passed && si.passed && fo.passed && cycles_ok;
  return ok ? 0 : 1;
}

int cmd_gen(const RunConfig& cfg, Emit& e) {
  if (cfg.gen.empty()) throw parse_error("gen: --gen SPEC is required");
  if (cfg.out_path.empty()) throw parse_error("gen: --out PATH is required");
  if (cfg.as_table) {
    if (spec_is_prelie(cfg.gen))
      save_table(make_prelie(cfg.gen), cfg.out_path);
    else
      save_table(make_brace(cfg.gen), cfg.out_path);
  } else {
    save_spec(cfg.gen, cfg.out_path);
  }
  e.kv("gen.written", cfg.out_path);
  return 0;
}

int cmd_info(const RunConfig& cfg, Emit& e) {
  Input in = load_input(cfg);
  const GroupShape& shape =
      in.brace ? in.brace->shape() : in.prelie->shape();
  e.kv("info.kind", std::string(in.brace ? "brace" : "prelie"));
  e.kv("info.p", shape.p());
  std::ostringstream exps;
  for (unsigned i = 0; i < shape.rank(); ++i) {
    if (i) exps << "+";
    exps << shape.exponents()[i];
  }
  e.kv("info.exponents", exps.str());
  e.kv("info.order", shape.order());
  e.kv("info.rank", static_cast<u64>(shape.rank()));
  e.kv("info.min_k", static_cast<u64>(min_k(shape)));
  if (in.brace) {
    e.kv("info.structure_kind", kind_name(in.brace->kind()));
    e.kv("info.label", in.brace->label());
  } else {
    e.kv("info.label", in.prelie->label());
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"braceforge: exact verification of brace / pre-Lie ring "
               "correspondences on finite p-groups"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--gen", cfg.gen, "constructor spec, e.g. radical:p=7,n=3,lambda=7");
    sub->add_option("--in", cfg.in, "input file path");
    sub->add_option("--k", cfg.k, "level k (default: min_k of the shape)");
    sub->add_option("--budget", cfg.budget, "exhaustive-triple budget");
    sub->add_option("--samples", cfg.samples, "sample count above the budget");
    sub->add_option("--seed", cfg.seed, "sampling seed");
    sub->add_option("--choice", cfg.choice, "canonical | offset:SEED");
    sub->add_option("--depth", cfg.depth, "star-iterate depth");
    sub->add_option("--format", cfg.format, "human | machine");
    sub->add_option("--out", cfg.out_path, "output file path");
  };
  for (const char* name : {"verify", "props", "extract", "flows", "roundtrip",
                           "corr", "gen", "info"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "gen")
      sub->add_flag("--table", cfg.as_table, "materialize a dense table");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& pe) {
    err << pe.get_name() << ": " << pe.what() << "\n";
    return 2;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  Emit e{out, cfg.format == "machine"};
  try {
    emit_config(e, cfg);
    int rc = 0;
    if (cfg.subcommand == "verify") rc = cmd_verify(cfg, e);
    else if (cfg.subcommand == "props") rc = cmd_props(cfg, e);
    else if (cfg.subcommand == "extract") rc = cmd_extract(cfg, e);
    else if (cfg.subcommand == "flows") rc = cmd_flows(cfg, e);
    else if (cfg.subcommand == "roundtrip") rc = cmd_roundtrip(cfg, e);
    else if (cfg.subcommand == "corr") rc = cmd_corr(cfg, e);
    else if (cfg.subcommand == "gen") rc = cmd_gen(cfg, e);
    else if (cfg.subcommand == "info") rc = cmd_info(cfg, e);
    e.kv("exit", static_cast<u64>(rc));
    return rc;
  } catch (const parse_error& ex) {
    err << "parse error: " << ex.what() << "\n";
    return 2;
  } catch (const critical_error& ex) {
    out << (cfg.format == "machine" ? "CRITICAL=" : "CRITICAL: ") << ex.what()
        << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace braceforge
