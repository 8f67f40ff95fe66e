#include <invmeas/invmeas.hpp>
#include <invmeas/io.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace invmeas;

namespace {

enum Exit { kOk = 0, kUsage = 1, kEliminated = 2, kBudget = 3 };

struct Common {
    std::string output;
    std::string format = "json";
};

struct MapOpts {
    std::string name;
    std::vector<std::string> params;

    MapModel build() const
    {
        MapParams p;
        for (const auto& kv : params) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw UsageError("--param expects key=value, got '" + kv + "'");
            p[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return example_map(name, p);
    }
};

struct RegOpts {
    std::string alpha = "1";
    std::string K;

    std::optional<RegularityClass> build() const
    {
        if (K.empty())
            return std::nullopt;
        RegularityClass r{parse_rational(alpha), parse_rational(K), {}};
        r.validate();
        return r;
    }
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("-o,--output", c.output, "result file (JSON, or CSV base name)");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void add_map(CLI::App* sub, MapOpts& m)
{
    sub->add_option("--map", m.name, "example map name")->required();
    sub->add_option("--param", m.params, "map parameter key=value (repeatable)");
}

void add_reg(CLI::App* sub, RegOpts& r, bool required)
{
    sub->add_option("--alpha", r.alpha, "regularity exponent in (0,1]");
    auto* k = sub->add_option("--K", r.K, "regularity constant");
    if (required)
        k->required();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write '" + path + "'");
    out << text;
}

// Exact value when it is short, otherwise a decimal approximation.
std::string brief(const Rational& q)
{
    std::string e = to_string(q);
    if (e.size() <= 24)
        return e;
    std::ostringstream os;
    os << "~" << q.get_d();
    return os.str();
}

std::string csv_sibling(const std::string& base, const std::string& tag)
{
    auto dot = base.rfind('.');
    std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
    return stem + "_" + tag + ".csv";
}

void emit(const Common& c, const Json& j, const std::vector<std::pair<std::string, std::string>>& csv)
{
    if (c.output.empty())
        return;
    if (c.format == "json") {
        write_file(c.output, j.dump(2) + "\n");
        return;
    }
    if (csv.empty())
        throw UsageError("this command has no CSV form; use --format json");
    write_file(c.output, csv.front().second);
    for (std::size_t i = 1; i < csv.size(); ++i)
        write_file(csv_sibling(c.output, csv[i].first), csv[i].second);
}

IntervalFn observable(const std::string& f)
{
    if (f == "x")
        return [](const RatInterval& x) { return x; };
    if (f == "x2")
        return [](const RatInterval& x) { return isqr(x); };
    throw UsageError("unknown observable '" + f + "' (expected x or x2)");
}

int exit_for(LocalizeStatus s)
{
    switch (s) {
    case LocalizeStatus::Certified:
        return kOk;
    case LocalizeStatus::Eliminated:
        return kEliminated;
    default:
        return kBudget;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certified computation of invariant measures"};
    app.set_config("--config", "", "key = value config file; [command] sections address subcommands");
    app.require_subcommand(1);

    // localize
    Common lc;
    MapOpts lm;
    RegOpts lr;
    std::string ltol = "1/64", lcenter, lradius;
    unsigned lmax = 8, lmin = 2, lsuggest_n = 20, lsuggest_level = 6;
    unsigned long lbudget = 100000;
    auto* loc = app.add_subcommand("localize", "certify an invariant measure inside an isolating ball");
    add_common(loc, lc);
    add_map(loc, lm);
    add_reg(loc, lr, true);
    loc->add_option("--tol", ltol, "target certified W1 radius");
    loc->add_option("--level", lmax, "finest level")->check(CLI::Range(1u, kMaxLocalizeLevel));
    loc->add_option("--min-level", lmin, "first level")->check(CLI::Range(1u, kMaxLocalizeLevel));
    loc->add_option("--budget", lbudget, "LP solve budget");
    loc->add_option("--center", lcenter, "isolating ball center (measure file)");
    loc->add_option("--radius", lradius, "isolating ball radius");
    loc->add_option("--suggest-iterations", lsuggest_n, "pushforward iterations for the default ball");

    // pushforward
    Common pc;
    MapOpts pm;
    RegOpts pr;
    unsigned plevel = 8, piter = 1;
    std::string pinput;
    auto* push = app.add_subcommand("pushforward", "certified pushforward iterates of a histogram");
    add_common(push, pc);
    add_map(push, pm);
    add_reg(push, pr, false);
    push->add_option("--level", plevel, "histogram level (ignored with --input)")->check(CLI::Range(0u, 16u));
    push->add_option("--iterations", piter, "number of pushforwards")->check(CLI::Range(1u, 100000u));
    push->add_option("--input", pinput, "initial histogram (measure file); default uniform");

    // w1
    Common wc;
    std::string wa, wb;
    bool woracle = false;
    auto* w1c = app.add_subcommand("w1", "exact Wasserstein-1 distance");
    add_common(w1c, wc);
    w1c->add_option("--a", wa, "first measure file")->required();
    w1c->add_option("--b", wb, "second measure file")->required();
    w1c->add_flag("--oracle", woracle, "also solve the transport LP and compare");

    // net
    Common nc;
    std::string nspace = "interval", nr = "1/4";
    unsigned long ncap = 100000;
    auto* net = app.add_subcommand("net", "explicit 2r-net of probability measures");
    add_common(net, nc);
    net->add_option("--space", nspace, "interval or circle");
    net->add_option("--r", nr, "net parameter r");
    net->add_option("--cap", ncap, "refuse nets larger than this");

    // birkhoff
    Common bc;
    MapOpts bm;
    std::string bx0 = "1/3", bf = "x";
    unsigned bn = 100;
    auto* bir = app.add_subcommand("birkhoff", "enclosure of a Birkhoff average along an exact orbit");
    add_common(bir, bc);
    add_map(bir, bm);
    bir->add_option("--x0", bx0, "initial point");
    bir->add_option("--f", bf, "observable: x or x2");
    bir->add_option("--n", bn, "orbit length")->check(CLI::Range(1u, 100000u));

    // demo
    Common dc;
    std::string dsystem = "staircase", dtol = "1/64", deps = "1/8";
    unsigned long dbudget = 64;
    unsigned dmax = 6;
    auto* demo = app.add_subcommand("demo", "budgeted non-convergence demonstrations");
    add_common(demo, dc);
    demo->add_option("--system", dsystem, "staircase, staircase-sanity or circle")
        ->check(CLI::IsMember({"staircase", "staircase-sanity", "circle"}));
    demo->add_option("--budget", dbudget, "largest budget N (schedule 8, 16, ... up to N)")
        ->check(CLI::Range(8ul, 4096ul));
    demo->add_option("--tol", dtol, "localization tolerance");
    demo->add_option("--eps", deps, "circle system margin");
    demo->add_option("--level", dmax, "finest localization level")->check(CLI::Range(2u, kMaxLocalizeLevel));

    // attractor
    Common ac;
    MapOpts am;
    unsigned aiter = 10, alevel = 10;
    auto* att = app.add_subcommand("attractor", "enclosure of the maximal invariant compact set");
    add_common(att, ac);
    add_map(att, am);
    att->add_option("--iterations", aiter, "image iterations");
    att->add_option("--level", alevel, "cell level")->check(CLI::Range(0u, kMaxEnclosureLevel));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*loc) {
            LocalizeRequest req;
            req.map = lm.build();
            req.reg = *lr.build();
            req.tol = parse_rational(ltol);
            req.max_level = lmax;
            req.min_level = lmin;
            req.budget = Budget{lbudget};
            if (!lcenter.empty()) {
                if (lradius.empty())
                    throw UsageError("--center needs --radius");
                req.isolating = {read_measure_file(lcenter), parse_rational(lradius)};
            } else {
                req.isolating = suggest_isolating_ball(req.map, req.reg, lsuggest_n,
                                                       std::min(lsuggest_level, lmax));
                req.isolating.radius = rmax(req.isolating.radius, 2 * req.tol);
                if (!lradius.empty())
                    req.isolating.radius = parse_rational(lradius);
            }
            LocalizeReport rep = localize_invariant(req);
            Json j = to_json(rep);
            j = Json{{"command", "localize"}, {"map", req.map.name}, {"tol", to_pq(req.tol)},
                     {"ball_radius", to_pq(req.isolating.radius)}, {"report", std::move(j)}};
            std::vector<std::pair<std::string, std::string>> csv{{"trace", trace_csv(rep.trace)}};
            if (rep.result)
                csv.push_back({"density", density_csv(rep.result->measure)});
            emit(lc, j, csv);
            std::cout << "localize " << req.map.name << ": " << to_string(rep.status);
            if (rep.result)
                std::cout << " radius " << brief(rep.result->err);
            if (!rep.note.empty())
                std::cout << " [" << rep.note << "]";
            std::cout << "\n";
            return exit_for(rep.status);
        }
        if (*push) {
            MapModel T = pm.build();
            auto reg = pr.build();
            HistogramMeasure mu0 = uniform_histogram(T.space, plevel);
            if (!pinput.empty()) {
                Measure m = read_measure_file(pinput);
                auto* h = std::get_if<HistogramMeasure>(&m);
                mu0 = h ? *h : histogram_project(m, plevel);
            }
            const RegularityClass* rp = reg ? &*reg : nullptr;
            IterateResult it = iterate_pushforward(T, mu0, piter, rp);
            RatInterval res = residual(T, it.result.measure, rp);
            Json errs = Json::array();
            for (const auto& e : it.errs)
                errs.push_back(to_pq(e));
            Json j{{"command", "pushforward"}, {"map", T.name},       {"iterations", piter},
                   {"result", to_json(it.result)}, {"errs", errs},    {"residual", to_json(res)},
                   {"contraction_unverified", it.contraction_unverified}, {"vacuous", it.vacuous}};
            emit(pc, j, {{"density", density_csv(it.result.measure)}});
            std::cout << "pushforward " << T.name << " x" << piter << ": radius " << brief(it.result.err)
                      << ", residual <= " << brief(res.hi) << (it.vacuous ? " [vacuous]" : "") << "\n";
            return kOk;
        }
        if (*w1c) {
            Measure a = read_measure_file(wa), b = read_measure_file(wb);
            Rational d = w1(a, b);
            Json j{{"command", "w1"}, {"w1", to_pq(d)}};
            if (woracle) {
                auto* fa = std::get_if<FinSupportMeasure>(&a);
                auto* fb = std::get_if<FinSupportMeasure>(&b);
                Rational o;
                if (fa && fb)
                    o = w1_lp_oracle(*fa, *fb);
                else if (space_of(a).is_circle())
                    throw UsageError("--oracle on the circle needs two atomic measures");
                else
                    o = w1_lp_oracle_line(a, b);
                j["oracle"] = to_pq(o);
                j["agree"] = o == d;
            }
            emit(wc, j, {});
            std::cout << "w1 = " << to_string(d) << "\n";
            return kOk;
        }
        if (*net) {
            Space s = parse_space(nspace);
            Rational r = parse_rational(nr);
            auto pts = measure_net(s, r, ncap);
            Json arr = Json::array();
            for (const auto& m : pts)
                arr.push_back(to_json(Measure(m)));
            Json j{{"command", "net"}, {"space", to_string(s)}, {"r", to_pq(r)}, {"size", pts.size()},
                   {"measures", std::move(arr)}};
            emit(nc, j, {});
            std::cout << "net " << to_string(s) << " r=" << to_string(r) << ": " << pts.size()
                      << " measures, covering radius " << to_string(2 * r) << "\n";
            return kOk;
        }
        if (*bir) {
            MapModel T = bm.build();
            BirkhoffResult b = birkhoff_average(T, creal_const(parse_rational(bx0)), observable(bf), bn);
            Json j{{"command", "birkhoff"}, {"map", T.name},        {"x0", bx0},
                   {"f", bf},               {"n", bn},              {"average", to_json(b.average)},
                   {"steps", b.steps},      {"complete", b.complete}};
            emit(bc, j, {});
            std::cout << "birkhoff " << T.name << " n=" << bn << ": [" << b.average.lo.get_d() << ", "
                      << b.average.hi.get_d() << "] width " << brief(b.average.width())
                      << (b.complete ? "" : " [orbit enclosure blew up]") << "\n";
            return kOk;
        }
        if (*demo) {
            std::vector<unsigned long> schedule;
            for (unsigned long N = 8; N <= dbudget; N *= 2)
                schedule.push_back(N);
            if (schedule.back() != dbudget)
                schedule.push_back(dbudget);
            DemoOptions opt;
            opt.max_level = dmax;
            Rational tol = parse_rational(dtol);
            DemoSystem sys = StaircaseSystem{converging_to_half(), Rational(1, 2)};
            if (dsystem == "staircase") {
                auto progs = toy_programs();
                sys = StaircaseSystem{dovetail_enumerator(progs, Rational(1, 4)),
                                      dovetail_enumerator_cap(progs.size(), Rational(1, 4))};
            } else if (dsystem == "circle") {
                Rational eps = parse_rational(deps);
                sys = CircleSystem{dovetail_intervals(toy_programs(), eps), eps};
            }
            DemoReport rep = demo_nonconvergence(sys, tol, schedule, opt);
            Json j{{"command", "demo"}, {"system", dsystem}, {"tol", to_pq(tol)}, {"report", to_json(rep)}};
            emit(dc, j, {{"rows", demo_csv(rep)}});
            const DemoRow& last = rep.rows.back();
            std::cout << "demo " << dsystem << " N=" << last.N << ": " << to_string(last.status) << " diameter ~"
                      << last.diameter.get_d() << " gap ~" << last.gap.get_d();
            if (last.result)
                std::cout << " radius ~" << last.result->err.get_d();
            std::cout << (rep.bound_holds ? " (diameter >= gap at every budget)" : " (stall bound violated)")
                      << "\n";
            return kOk;
        }
        if (*att) {
            MapModel T = am.build();
            CompactEnclosure K = attractor_enclosure(T, T.space, aiter, alevel);
            Json j{{"command", "attractor"}, {"map", T.name}, {"iterations", aiter}, {"enclosure", to_json(K)}};
            emit(ac, j, {});
            std::cout << "attractor " << T.name << ": " << K.cells.size() << " cells at level " << alevel
                      << ", diameter " << to_pq(enclosure_diameter(K)) << "\n";
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
