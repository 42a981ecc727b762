#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oelab/bsll.hpp"
#include "oelab/coupling.hpp"
#include "oelab/errors.hpp"
#include "oelab/functional.hpp"
#include "oelab/hyperbolicity.hpp"
#include "oelab/parallel.hpp"
#include "oelab/tiling.hpp"
#include "oelab/wreath.hpp"

using namespace oelab;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Rows {
    std::vector<json> rows;
    void add(json r) { rows.push_back(std::move(r)); }
};

std::string rat(const Rational& q) {
    return q.denominator() == 1 ? std::to_string(q.numerator())
                                : std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

bool failed(const Rows& r) {
    for (auto& row : r.rows)
        for (const char* key : {"ok", "pass"})
            if (row.contains(key) && row[key].is_boolean() && !row[key].get<bool>()) return true;
    return false;
}

std::string csv_cell(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.is_null() ? "" : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

void emit_csv(const Rows& r, std::ostream& os) {
    std::vector<std::string> cols;
    for (auto& row : r.rows)
        for (auto& [k, v] : row.items())
            if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (auto& row : r.rows) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            os << (i ? "," : "") << (row.contains(cols[i]) ? csv_cell(row[cols[i]]) : "");
        os << "\n";
    }
}

Side parse_side(const std::string& s) {
    if (s == "left") return Side::Left;
    if (s == "right") return Side::Right;
    throw UsageError("side must be left or right, got '" + s + "'");
}

const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

// the side whose group parses gamma; --side wins when given
Side infer_side(const MatchedCoupling& C, const std::string& gamma, const std::string& side) {
    if (!side.empty()) return parse_side(side);
    for (Side s : {Side::Left, Side::Right}) {
        try {
            C.tiling(s).group().parse_element(gamma);
            return s;
        } catch (const UsageError&) {
        }
    }
    throw UsageError("'" + gamma + "' belongs to neither " + C.tiling(Side::Left).group().name() + " nor " +
                     C.tiling(Side::Right).group().name());
}

CylinderSet parse_cylinders(const std::string& s) {
    CylinderSet X;
    std::stringstream ss(s);
    std::string cyl;
    while (std::getline(ss, cyl, ';')) {
        std::vector<uint64_t> c;
        std::stringstream cs(cyl);
        std::string v;
        while (std::getline(cs, v, ',')) {
            try {
                std::size_t used = 0;
                c.push_back(std::stoull(v, &used));
                if (used != v.size()) throw UsageError("");
            } catch (...) {
                throw UsageError("bad cylinder coordinate '" + v + "'");
            }
        }
        if (c.empty()) throw UsageError("empty cylinder in '" + s + "'");
        X.cylinders.push_back(std::move(c));
    }
    if (X.cylinders.empty()) throw UsageError("no cylinders given");
    return X;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string v;
    while (std::getline(ss, v, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(v, &used));
            if (used != v.size()) throw UsageError("");
        } catch (...) {
            throw UsageError("bad integer '" + v + "'");
        }
    }
    return out;
}

// ---- commands ----

struct TilingOpts {
    std::string builtin, group;
    int k = 0;
    bool upto = false, exactDiameter = false;
    uint64_t diameterSamples = 10000;
};

Rows cmd_tiling_verify(const TilingOpts& o, uint64_t seed) {
    TilingPtr t = builtin(o.builtin);
    if (!o.group.empty() && !(Group::parse(o.group) == t->group()))
        throw UsageError("tiling " + o.builtin + " lives on " + t->group().name() + ", not " + o.group);
    Rows r;
    for (int k = o.upto ? 0 : o.k; k <= o.k; ++k) {
        json row;
        row["k"] = k;
        row["size"] = t->tile_size(k);
        Rational eps = folner_constant(*t, k);
        row["epsilon_computed"] = rat(eps);
        auto claim = t->claimed_epsilon(k);
        row["epsilon_claimed"] = claim ? json(rat(*claim)) : json(nullptr);
        auto radius = t->claimed_radius(k);
        row["radius_claimed"] = radius ? json(*radius) : json(nullptr);
        bool diamOk = true;
        try {
            DiameterReport d = (o.exactDiameter || t->diameter_fast(k))
                                   ? tile_diameter_exact(*t, k)
                                   : tile_diameter_sampled(*t, k, o.diameterSamples, seed);
            row["diameter"] = d.value;
            row["diameter_exact"] = d.exact;
            row["diameter_checked"] = true;
            diamOk = d.ok;
        } catch (const CapExceeded& e) {
            // word lengths beyond the BFS cap: the diameter is not certified either way
            row["diameter"] = nullptr;
            row["diameter_exact"] = nullptr;
            row["diameter_checked"] = false;
            row["diameter_note"] = e.what();
        }
        row["ok"] = (!claim || eps <= *claim) && diamOk;
        r.add(row);
    }
    return r;
}

struct CoupleOpts {
    std::string left, right, gamma, side, gauge = "power:0.5", cylinders;
    int k = 6, maxDepth = 40, n = 4;
    uint64_t samples = 10000;
};

Rows cmd_couple_tail(const CoupleOpts& o, uint64_t seed) {
    MatchedCoupling C = make_coupling(o.left, o.right, o.maxDepth);
    Side s = infer_side(C, o.gamma, o.side);
    const Tiling& T = C.tiling(s);
    Element g = T.group().parse_element(o.gamma);
    Rows r;
    if (o.samples == 0) {
        for (int k = 0; k <= std::min(o.k, C.max_depth()); ++k)
            r.add(json{{"k", k}, {"side", side_name(s)}, {"exact_tail", rat(exact_tail(T, g, k))}});
        return r;
    }
    for (auto& row : mc_tail(C, s, g, o.k, o.samples, seed)) {
        json j{{"k", row.k}, {"side", side_name(s)}};
        j["exact_tail"] = row.exact ? json(rat(*row.exact)) : json(nullptr);
        j["mc_freq"] = row.freq;
        j["stderr"] = row.stderr_;
        if (row.exact) {
            double p = boost::rational_cast<double>(*row.exact);
            // within 4 standard errors of the exact law (its own, so p in {0,1} needs equality)
            double se = std::sqrt(p * (1 - p) / static_cast<double>(o.samples));
            j["ok"] = std::abs(row.freq - p) <= 4 * se + 1e-12;
        }
        r.add(j);
    }
    return r;
}

Rows cmd_couple_integrate(const CoupleOpts& o, uint64_t seed) {
    MatchedCoupling C = make_coupling(o.left, o.right, o.maxDepth);
    Side s = infer_side(C, o.gamma, o.side);
    Element g = C.tiling(s).group().parse_element(o.gamma);
    Gauge gauge = Gauge::parse(o.gauge);
    auto rep = mc_integrability(C, s, g, gauge, o.samples, seed);
    json j{{"gauge", gauge.name()}, {"side", side_name(s)}, {"estimate", rep.estimate}, {"stderr", rep.stderr_}};
    j["stratified_bound"] = rep.stratifiedBound ? json(*rep.stratifiedBound) : json(nullptr);
    j["exhausted_fraction"] = rep.exhaustedFraction;
    j["diverging"] = rep.diverging;
    Rows r;
    r.add(j);
    return r;
}

Rows cmd_couple_return(const CoupleOpts& o, uint64_t seed) {
    MatchedCoupling C = make_coupling(o.left, o.right, o.maxDepth);
    Side s = o.side.empty() ? Side::Left : parse_side(o.side);
    CylinderSet X = parse_cylinders(o.cylinders);
    auto rep = return_time_density(C, s, X, o.n, o.samples, seed);
    Rows r;
    r.add(json{{"side", side_name(s)},
               {"n", o.n},
               {"measure", rep.measure},
               {"lhs", rep.lhs},
               {"stderr", rep.stderr_},
               {"rhs", rep.rhs},
               {"exhausted_fraction", rep.exhaustedFraction},
               {"ok", rep.lhs + 3 * rep.stderr_ >= rep.rhs - 1e-12}});
    return r;
}

struct BsllOpts {
    int k = 2;
    std::string g = "bs:a=1,s=0,n=0", Ms = "1,2,3,4,5,6,7,8";
    uint64_t samples = 100000;
};

Rows cmd_bsll_tail(const BsllOpts& o, uint64_t seed) {
    Group BS = Group::bs(o.k);
    Element g = BS.parse_element(o.g);
    Rows r;
    auto Ms = parse_int_list(o.Ms);
    auto checks = tail_bound_checks(o.k, g, Ms, o.samples, seed);
    for (std::size_t i = 0; i < Ms.size(); ++i) {
        auto& c = checks[i];
        r.add(json{{"k", o.k},
                   {"g", BS.format(g)},
                   {"g_length", c.gLength},
                   {"M", Ms[i]},
                   {"threshold", c.threshold},
                   {"freq", c.freq},
                   {"stderr", c.stderr_},
                   {"paper_bound", c.bound},
                   {"exhausted_fraction", c.exhaustedFraction},
                   {"pass", c.pass}});
    }
    return r;
}

Rows cmd_bsll_linf(const BsllOpts& o, uint64_t seed) {
    Group LL = Group::lamplighter(o.k);
    auto c = linf_constants(o.k, seed);
    Rows r;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const bool shift = !std::get<LampEl>(LL.generators()[i]).lamps.size();
        r.add(json{{"generator", LL.format(LL.generators()[i])},
                   {"max_distance", c[i]},
                   {"ok", shift ? c[i] == 1 : c[i] <= o.k - 1}});
    }
    return r;
}

struct ProfileOpts {
    std::string group = "zn:1", mode = "sets";
    int n = 4;
    bool upto = false;
    uint64_t budget = 200000000;
};

Rows cmd_profile(const ProfileOpts& o) {
    Group G = Group::parse(o.group);
    ProfileMode mode = ProfileMode::Sets;
    int maxVal = 1;
    if (o.mode.rfind("int:", 0) == 0) {
        mode = ProfileMode::IntegerValued;
        maxVal = parse_int_list(o.mode.substr(4)).at(0);
    } else if (o.mode != "sets") {
        throw UsageError("mode must be sets or int:V");
    }
    Rows r;
    for (int n = o.upto ? 1 : o.n; n <= o.n; ++n) {
        auto p = isoperimetric_profile(G, n, mode, maxVal, o.budget);
        std::string w;
        for (std::size_t i = 0; i < p.witness.size(); ++i) {
            w += (i ? " " : "") + G.format(p.witness[i]);
            if (mode == ProfileMode::IntegerValued) w += "=" + std::to_string(p.witnessValues[i]);
        }
        r.add(json{{"n", n},
                   {"value_num", p.value.numerator()},
                   {"value_den", p.value.denominator()},
                   {"witness", w},
                   {"searched", p.searched},
                   {"heuristic", p.heuristic},
                   {"convention", p.convention}});
    }
    return r;
}

struct WreathOpts {
    std::string base = "zn:2/zn:1", lamp = "zn:2/zn:1";
    int maxDepth = 24;
    uint64_t samples = 200;
};

Rows cmd_wreath_check(const WreathOpts& o, uint64_t seed) {
    WreathCoupling W(parse_matched(o.base, o.maxDepth), parse_matched(o.lamp, o.maxDepth));
    Rows r;
    for (Side s : {Side::Left, Side::Right}) {
        struct Tally {
            uint64_t checked = 0, failures = 0, exhausted = 0;
        };
        Tally base, lamp, ident, law;
        for (uint64_t i = 0; i < o.samples; ++i) {
            WreathPoint P = W.random_point(seed, i);
            auto run = [&](Tally& t, const WreathElement& w) {
                try {
                    ++t.checked;
                    t.failures += !prop72_check(W, s, w, P).ok;
                } catch (const DepthExhausted&) {
                    --t.checked;
                    ++t.exhausted;
                }
            };
            for (const auto& g : W.base_group(s).generators()) run(base, W.embed_base(s, g));
            for (const auto& l : W.lamp_group(s).generators()) run(lamp, W.embed_lamp(s, l));
            run(ident, W.identity(s));
            Stream rs(seed ^ 0x77, i * 2 + (s == Side::Left ? 0 : 1));
            auto a = W.random_element(s, rs, 2, 2), b = W.random_element(s, rs, 2, 2);
            try {
                ++law.checked;
                law.failures += !W.same(W.act(s, W.multiply(s, a, b), P), W.act(s, a, W.act(s, b, P)));
            } catch (const DepthExhausted&) {
                --law.checked;
                ++law.exhausted;
            }
        }
        auto row = [&](const char* name, const Tally& t) {
            r.add(json{{"identity", name},
                       {"side", side_name(s)},
                       {"checked", t.checked},
                       {"failures", t.failures},
                       {"exhausted", t.exhausted},
                       {"pass", t.failures == 0}});
        };
        row("base-distance", base);
        row("lamp-distance", lamp);
        row("identity-move", ident);
        row("action-law", law);
    }
    return r;
}

struct HypOpts {
    std::string family, edges, cycle;
    bool fourPoint = false, naive = false, boundary = false;
    int64_t targetDelta = -1;
};

MetricGraph load_graph(const HypOpts& o, uint64_t seed) {
    if (!o.family.empty() == !o.edges.empty()) throw UsageError("give exactly one of --family and --edges");
    if (!o.family.empty()) return MetricGraph::family(o.family, seed);
    std::ifstream in(o.edges);
    if (!in) throw UsageError("cannot read " + o.edges);
    return MetricGraph::parse_edge_list(in);
}

Rows cmd_hyp_delta(const HypOpts& o, uint64_t seed) {
    MetricGraph G = load_graph(o, seed);
    RipsResult R = o.naive ? rips_delta_naive(G) : rips_delta(G);
    json j{{"graph", G.name()},
           {"vertices", G.size()},
           {"edges", G.edge_count()},
           {"diameter", G.diameter()},
           {"delta", R.delta},
           {"a", G.label(R.a)},
           {"b", G.label(R.b)},
           {"c", G.label(R.c)},
           {"x", G.label(R.x)}};
    if (o.fourPoint) j["four_point"] = rat(four_point_delta(G));
    Rows r;
    r.add(j);
    return r;
}

Rows cmd_hyp_audit(const HypOpts& o, uint64_t seed) {
    MetricGraph G = load_graph(o, seed);
    std::vector<int> cyc;
    if (o.boundary) {
        auto spec = o.family;
        auto colon = spec.find(':');
        if (spec.rfind("grid:", 0) != 0) throw UsageError("--boundary needs a grid family");
        auto dims = spec.substr(colon + 1);
        auto x = dims.find('x');
        int rows = std::stoi(dims.substr(0, x)), cols = x == std::string::npos ? rows : std::stoi(dims.substr(x + 1));
        cyc = grid_boundary(rows, cols);
    } else {
        cyc = parse_int_list(o.cycle);
    }
    RipsResult R = rips_delta(G);
    auto a = prop92_audit(G, cyc, R.delta);
    Rows r;
    r.add(json{{"graph", G.name()},
               {"cycle_length", a.distortion.n},
               {"a", rat(a.distortion.a)},
               {"b", rat(a.distortion.b)},
               {"delta", a.delta},
               {"bound", a.bound},
               {"delta_floor", a.deltaFloor},
               {"ok", a.ok}});
    return r;
}

Rows cmd_hyp_extract(const HypOpts& o, uint64_t seed) {
    MetricGraph G = load_graph(o, seed);
    FatCycleParams p;
    if (o.targetDelta >= 0) p.targetDelta = o.targetDelta;
    auto rep = extract_fat_cycle(G, p);
    std::string cyc;
    for (std::size_t i = 0; i < rep.cycle.size(); ++i) cyc += (i ? "," : "") + std::to_string(rep.cycle[i]);
    auto audit = cycle_distortion(G, rep.cycle);
    Rows r;
    r.add(json{{"graph", G.name()},
               {"D", rep.D},
               {"case", rep.caseName},
               {"polygon_corners", rep.polygonCorners},
               {"length", rep.cycle.size()},
               {"length_target", rep.lengthTarget},
               {"a", rat(rep.distortion.a)},
               {"b", rat(rep.distortion.b)},
               {"contraction_target", rep.contractionTarget},
               {"slack", rep.slack},
               {"self_audit", audit.a == rep.distortion.a && audit.b == rep.distortion.b},
               {"ok", rep.meetsTargets},
               {"cycle", cyc}});
    return r;
}

// small exact checks, each with a known answer
Rows cmd_selftest(bool quick, uint64_t seed) {
    Rows r;
    auto check = [&](const std::string& name, auto&& f) {
        bool ok = false;
        std::string err;
        try {
            ok = f();
        } catch (const std::exception& e) {
            err = e.what();
        }
        json j{{"check", name}, {"pass", ok}};
        if (!err.empty()) j["error"] = err;
        r.add(j);
    };
    check("zn:1 folner constant at k=3 is 1/16", [] { return folner_constant(*builtin("zn:1"), 3) == Rational(1, 16); });
    check("zn:2 folner constant at k=2 is 1/8", [] { return folner_constant(*builtin("zn:2"), 2) == Rational(1, 8); });
    check("heisenberg tile T_1 has 256 elements", [] { return builtin("heis")->materialize(1)->size() == 256; });
    check("lamplighter |F_1| = 2 m^2", [] { return builtin("ll:2")->letter_count(1) == 8; });
    check("identity element fixes coupling points", [] {
        auto C = make_coupling("zn:2", "zn:1", 20);
        auto x = C.random_point(1, 0);
        return C.same_point(C.act(Side::Left, ZnEl{{0, 0}}, x).point, x, 20);
    });
    check("zn:1 self coupling moves by one", [] {
        auto C = make_coupling("zn:1", "zn:1", 30);
        auto x = C.random_point(2, 5);
        return C.transfer_cocycle(Side::Left, ZnEl{{1}}, x) == Element(ZnEl{{1}});
    });
    check("gradient of a point mass is 2|S|", [] {
        FiniteFunction f(Group::heis());
        f.set(Group::heis().identity(), 1);
        return gradient_norm(f, GradSide::Left, 1) == 8;
    });
    check("profile of Z at n=1 is 1/4", [] { return isoperimetric_profile(Group::zn(1), 1).value == Rational(1, 4); });
    check("bs-ll shift moves distance one", [] { return linf_constants(2, 7).at(0) == 1; });
    check("path graph is 0-hyperbolic", [] { return rips_delta(MetricGraph::path(10)).delta == 0; });
    check("C8 Rips constant is 2", [] { return rips_delta(MetricGraph::cycle(8)).delta == 2; });
    check("distortion bound at delta=0, n=10 is 0.6",
          [] { return std::abs(prop92_bound(0, 10, 1).bound - 0.6) < 1e-12; });
    check("grid boundary has a = 1/2", [] {
        auto g = MetricGraph::grid(7, 7);
        return cycle_distortion(g, grid_boundary(7, 7)).a == Rational(1, 2);
    });
    check("wreath identity move has length 0", [] {
        WreathCoupling W(parse_matched("zn:2/zn:1", 20), parse_matched("zn:1/zn:1", 20));
        auto res = prop72_check(W, Side::Left, W.identity(Side::Left), W.random_point(3, 3));
        return res.ok && res.dist == 0;
    });
    if (!quick) {
        check("zn:2 to zn:1 tail matches the exact law", [&] {
            auto C = make_coupling("zn:2", "zn:1", 30);
            for (auto& row : mc_tail(C, Side::Left, ZnEl{{1, 0}}, 6, 20000, seed)) {
                double p = boost::rational_cast<double>(*row.exact);
                if (std::abs(row.freq - p) > 4 * std::sqrt(p * (1 - p) / 20000) + 1e-12) return false;
            }
            return true;
        });
        check("heisenberg k=2 folner constant within claim", [] {
            auto t = builtin("heis");
            return folner_constant(*t, 2) <= *t->claimed_epsilon(2);
        });
    }
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oelab: orbit equivalence couplings, tilings and hyperbolicity audits"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "json";
    int threads = 0;
    uint64_t seed = 1;
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", threads, "worker threads (0 = all)");
    app.add_option("--seed", seed, "global seed");
    app.set_version_flag("--version", kVersion);

    std::function<Rows()> run;
    CLI::App* active = nullptr;

    auto* tiling = app.add_subcommand("tiling", "tiling checks")->require_subcommand(1);
    TilingOpts to;
    auto* tv = tiling->add_subcommand("verify", "folner constant and diameter of T_k");
    tv->add_option("--builtin", to.builtin, "tiling spec, e.g. zn:2, heis, ll:2")->required();
    tv->add_option("--group", to.group, "expected group");
    tv->add_option("--k", to.k, "depth")->required();
    tv->add_flag("--upto", to.upto, "report every depth 0..k");
    tv->add_flag("--exact-diameter", to.exactDiameter, "pairwise BFS diameter");
    tv->add_option("--diameter-samples", to.diameterSamples, "pairs for the sampled diameter");
    tv->callback([&] { active = tv; run = [&] { return cmd_tiling_verify(to, seed); }; });

    auto* couple = app.add_subcommand("couple", "matched tiling couplings")->require_subcommand(1);
    CoupleOpts co;
    auto coupling_opts = [&](CLI::App* c) {
        c->add_option("--left", co.left, "left tiling spec")->required();
        c->add_option("--right", co.right, "right tiling spec")->required();
        c->add_option("--side", co.side, "left or right (default: the group of --gamma)");
        c->add_option("--samples", co.samples, "Monte Carlo samples");
        c->add_option("--max-depth", co.maxDepth, "coupling depth cap");
    };
    auto* ct = couple->add_subcommand("tail", "exact and sampled depth tails");
    coupling_opts(ct);
    ct->add_option("--gamma", co.gamma, "group element, e.g. zn:1,0")->required();
    ct->add_option("--k", co.k, "largest depth");
    ct->callback([&] { active = ct; run = [&] { return cmd_couple_tail(co, seed); }; });
    auto* ci = couple->add_subcommand("integrate", "gauge integrability estimate");
    coupling_opts(ci);
    ci->add_option("--gamma", co.gamma, "group element")->required();
    ci->add_option("--gauge", co.gauge, "power:P, exp:C, logpow:E or identity");
    ci->callback([&] { active = ci; run = [&] { return cmd_couple_integrate(co, seed); }; });
    auto* cr = couple->add_subcommand("return-time", "return-time density against 2 mu(X0) - 1");
    coupling_opts(cr);
    cr->add_option("--cylinders", co.cylinders, "prefixes, e.g. '0;1,2'")->required();
    cr->add_option("--n", co.n, "ball radius");
    cr->callback([&] { active = cr; run = [&] { return cmd_couple_return(co, seed); }; });

    auto* bsll = app.add_subcommand("bs-ll", "BS(1,k) and lamplighter coupling")->require_subcommand(1);
    BsllOpts bo;
    auto* bt = bsll->add_subcommand("tail", "exponential tail of move distances");
    bt->add_option("--k", bo.k, "k >= 2");
    bt->add_option("--g", bo.g, "BS element, e.g. bs:a=1,s=0,n=0");
    bt->add_option("--M", bo.Ms, "one or more M, comma separated");
    bt->add_option("--samples", bo.samples, "samples");
    bt->callback([&] { active = bt; run = [&] { return cmd_bsll_tail(bo, seed); }; });
    auto* bl = bsll->add_subcommand("linf", "bounded move distances of lamplighter generators");
    bl->add_option("--k", bo.k, "k >= 2");
    bl->callback([&] { active = bl; run = [&] { return cmd_bsll_linf(bo, seed); }; });

    ProfileOpts po;
    auto* pr = app.add_subcommand("profile", "l^1 isoperimetric profile");
    pr->add_option("--group", po.group, "group spec");
    pr->add_option("--n", po.n, "support size");
    pr->add_option("--mode", po.mode, "sets or int:V");
    pr->add_flag("--upto", po.upto, "report every n from 1");
    pr->add_option("--budget", po.budget, "set enumeration budget");
    pr->callback([&] { active = pr; run = [&] { return cmd_profile(po); }; });

    auto* wreath = app.add_subcommand("wreath", "wreath product couplings")->require_subcommand(1);
    WreathOpts wo;
    auto* wc = wreath->add_subcommand("check", "distance identities and the action law");
    wc->add_option("--base", wo.base, "base coupling LEFT/RIGHT");
    wc->add_option("--lamp", wo.lamp, "lamp coupling LEFT/RIGHT");
    wc->add_option("--samples", wo.samples, "sampled points");
    wc->add_option("--max-depth", wo.maxDepth, "coupling depth cap");
    wc->callback([&] { active = wc; run = [&] { return cmd_wreath_check(wo, seed); }; });

    auto* hyp = app.add_subcommand("hyp", "hyperbolicity of finite graphs")->require_subcommand(1);
    HypOpts ho;
    auto graph_opts = [&](CLI::App* c) {
        c->add_option("--family", ho.family, "grid:10, cycle:8, path:10, tree:30, cayley-ball:heis:4");
        c->add_option("--edges", ho.edges, "edge-list file");
    };
    auto* hd = hyp->add_subcommand("delta", "Rips constant over metric intervals");
    graph_opts(hd);
    hd->add_flag("--four-point", ho.fourPoint, "also the four-point constant");
    hd->add_flag("--naive", ho.naive, "use the reference triple search");
    hd->callback([&] { active = hd; run = [&] { return cmd_hyp_delta(ho, seed); }; });
    auto* ha = hyp->add_subcommand("audit-cycle", "cycle distortion against the hyperbolic bound");
    graph_opts(ha);
    ha->add_option("--cycle", ho.cycle, "comma separated vertices");
    ha->add_flag("--boundary", ho.boundary, "use the grid boundary");
    ha->callback([&] { active = ha; run = [&] { return cmd_hyp_audit(ho, seed); }; });
    auto* he = hyp->add_subcommand("extract", "fat cycle from the fattest triangle");
    graph_opts(he);
    he->add_option("--target-delta", ho.targetDelta, "require a triangle fatter than this");
    he->callback([&] { active = he; run = [&] { return cmd_hyp_extract(ho, seed); }; });

    bool quick = false;
    auto* st = app.add_subcommand("selftest", "built-in checks");
    st->add_flag("--quick", quick, "exact checks only");
    st->callback([&] { active = st; run = [&] { return cmd_selftest(quick, seed); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string command;
    for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
    json params;
    for (CLI::App* a = active; a; a = a->get_parent())
        for (const auto* opt : a->get_options())
            if (opt->count() > 0 && !opt->get_lnames().empty()) {
                auto res = opt->results();
                params[opt->get_lnames()[0]] = res.size() == 1 ? json(res[0]) : json(res);
            }

    set_threads(threads);
    const auto t0 = std::chrono::steady_clock::now();
    Rows rows;
    std::string error;
    int code = 0;
    try {
        rows = run();
        code = failed(rows) ? 2 : 0;
    } catch (const std::exception& e) {
        error = e.what();
        code = 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (format == "csv") {
        if (!error.empty()) {
            std::cout << "error\n" << csv_cell(error) << "\n";
        } else {
            emit_csv(rows, std::cout);
        }
    } else {
        json rep;
        rep["command"] = command;
        rep["parameters"] = params;
        rep["seed"] = seed;
        rep["version"] = kVersion;
        rep["status"] = code == 0 ? "ok" : code == 2 ? "audit-fail" : "error";
        if (!error.empty()) rep["error"] = error;
        rep["results"] = rows.rows;
        rep["timing_s"] = secs;
        std::cout << rep.dump(2) << "\n";
    }
    if (!error.empty()) std::cerr << "oelab: " << error << "\n";
    return code;
}
