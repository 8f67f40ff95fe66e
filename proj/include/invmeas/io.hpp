#pragma once

// Text and JSON forms of the library's values. Every certified number is a
// "p/q" string; JSON numbers only carry counts, levels and flags.

#include "counterexamples.hpp"
#include "enclosure.hpp"
#include "localizer.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace invmeas {

using Json = nlohmann::ordered_json;

// Measure text format:
//
//   # comment
//   space circle            (optional, default interval)
//   atoms                   then one "position mass" pair per line
//   histogram <level>       then 2^level masses, whitespace separated
inline Measure parse_measure_text(std::istream& in, const std::string& origin = "<measure>")
{
    Space space = Space::unit_interval();
    std::string line;
    enum { None, Atoms, Hist } mode = None;
    std::vector<Atom> atoms;
    std::vector<Rational> mass;
    unsigned level = 0;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw UsageError(origin + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok))
            continue;
        if (tok == "space") {
            std::string s;
            if (!(ls >> s))
                fail("space needs a value");
            space = parse_space(s);
        } else if (tok == "atoms") {
            mode = Atoms;
        } else if (tok == "histogram") {
            long l = -1;
            if (!(ls >> l) || l < 0 || l > static_cast<long>(kMaxHistogramLevel))
                fail("histogram needs a level in [0, " + std::to_string(kMaxHistogramLevel) + "]");
            level = static_cast<unsigned>(l);
            mode = Hist;
        } else if (mode == Atoms) {
            std::string m;
            if (!(ls >> m))
                fail("atom line needs 'position mass'");
            atoms.push_back({parse_rational(tok), parse_rational(m)});
        } else if (mode == Hist) {
            mass.push_back(parse_rational(tok));
            while (ls >> tok)
                mass.push_back(parse_rational(tok));
        } else {
            fail("unexpected '" + tok + "' before 'atoms' or 'histogram'");
        }
    }
    if (mode == None)
        throw UsageError(origin + ": no 'atoms' or 'histogram' section");
    if (mode == Atoms)
        return make_atoms(space, std::move(atoms));
    return make_histogram(space, level, std::move(mass));
}

inline std::string measure_text(const Measure& mu)
{
    std::ostringstream os;
    os << "space " << to_string(space_of(mu)) << "\n";
    if (auto* a = std::get_if<FinSupportMeasure>(&mu)) {
        os << "atoms\n";
        for (const auto& at : a->atoms)
            os << to_pq(at.pos) << " " << to_pq(at.mass) << "\n";
    } else {
        const auto& h = std::get<HistogramMeasure>(mu);
        os << "histogram " << h.level << "\n";
        for (const auto& m : h.mass)
            os << to_pq(m) << "\n";
    }
    return os.str();
}

inline Json to_json(const Rational& q) { return to_pq(q); }

inline Rational rational_from_json(const Json& j)
{
    if (j.is_string())
        return parse_rational(j.get<std::string>());
    if (j.is_number_integer())
        return Rational(Integer(std::to_string(j.get<long long>())));
    throw UsageError("expected a rational string \"p/q\", got " + j.dump());
}

inline Json to_json(const RatInterval& x) { return Json::array({to_pq(x.lo), to_pq(x.hi)}); }

// {space, kind: atoms|histogram, level?, entries: [[position-or-cell, num, den]]}
// with positions as "p/q" strings, cell indices as integers and the mass as
// decimal numerator and denominator strings.
inline Json to_json(const Measure& mu)
{
    Json j;
    j["space"] = to_string(space_of(mu));
    Json entries = Json::array();
    auto entry = [&](Json key, const Rational& m) {
        entries.push_back(Json::array({std::move(key), m.get_num().get_str(), m.get_den().get_str()}));
    };
    if (auto* a = std::get_if<FinSupportMeasure>(&mu)) {
        j["kind"] = "atoms";
        for (const auto& at : a->atoms)
            entry(to_pq(at.pos), at.mass);
    } else {
        const auto& h = std::get<HistogramMeasure>(mu);
        j["kind"] = "histogram";
        j["level"] = h.level;
        for (std::size_t k = 0; k < h.size(); ++k)
            entry(k, h.mass[k]);
    }
    j["entries"] = std::move(entries);
    return j;
}

inline Rational mass_from_entry(const Json& e)
{
    if (!e.is_array() || e.size() != 3 || !e[1].is_string() || !e[2].is_string())
        throw UsageError("measure entries are [key, \"numerator\", \"denominator\"]");
    return parse_rational(e[1].get<std::string>() + "/" + e[2].get<std::string>());
}

// Histogram entries may be sparse; missing cells carry zero mass.
inline Measure measure_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.contains("entries"))
        throw UsageError("measure JSON needs 'kind' and 'entries'");
    Space s = parse_space(j.value("space", std::string("interval")));
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "atoms") {
        std::vector<Atom> atoms;
        for (const auto& e : j.at("entries"))
            atoms.push_back({rational_from_json(e.at(0)), mass_from_entry(e)});
        return make_atoms(s, std::move(atoms));
    }
    if (kind == "histogram") {
        unsigned level = j.at("level").get<unsigned>();
        if (level > kMaxHistogramLevel)
            throw UsageError("histogram level too fine");
        std::vector<Rational> mass(std::size_t{1} << level, Rational(0));
        for (const auto& e : j.at("entries")) {
            if (!e.is_array() || e.empty() || !e[0].is_number_unsigned() || e[0].get<std::size_t>() >= mass.size())
                throw UsageError("histogram entry needs a cell index below 2^level");
            mass[e[0].get<std::size_t>()] = mass_from_entry(e);
        }
        return make_histogram(s, level, std::move(mass));
    }
    throw UsageError("unknown measure kind '" + kind + "'");
}

inline Json to_json(const CertifiedMeasure& c)
{
    return Json{{"measure", to_json(Measure(c.measure))}, {"err", to_pq(c.err)}};
}

inline CertifiedMeasure certified_from_json(const Json& j)
{
    Measure m = measure_from_json(j.at("measure"));
    auto* h = std::get_if<HistogramMeasure>(&m);
    if (!h)
        throw UsageError("certified measures are histograms");
    return {std::move(*h), rational_from_json(j.at("err"))};
}

// Files ending in .json hold measure JSON (or a certified measure, whose
// "measure" member is taken); anything else is the text format.
inline Measure read_measure_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open measure file '" + path + "'");
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw UsageError(path + ": " + e.what());
        }
        return measure_from_json(j.contains("measure") ? j.at("measure") : j);
    }
    return parse_measure_text(in, path);
}

inline Json to_json(const TraceRow& r)
{
    return Json{{"level", r.level},
                {"count", r.count},
                {"min_residual", to_pq(r.min_residual)},
                {"diameter", to_pq(r.diameter)}};
}

inline Json to_json(const CdfBox& b)
{
    Json lo = Json::array(), hi = Json::array();
    for (std::size_t k = 0; k < b.lo.size(); ++k) {
        lo.push_back(to_pq(b.lo[k]));
        hi.push_back(to_pq(b.hi[k]));
    }
    return Json{{"level", b.level}, {"lo", std::move(lo)}, {"hi", std::move(hi)}};
}

inline Json to_json(const LocalizeReport& r)
{
    Json j;
    j["status"] = to_string(r.status);
    j["result"] = r.result ? to_json(*r.result) : Json(nullptr);
    Json tr = Json::array();
    for (const auto& t : r.trace)
        tr.push_back(to_json(t));
    j["trace"] = std::move(tr);
    j["note"] = r.note;
    return j;
}

inline Json to_json(const DemoRow& r)
{
    Json j{{"N", r.N},
           {"status", to_string(r.status)},
           {"diameter", to_pq(r.diameter)},
           {"gap", to_pq(r.gap)},
           {"count", r.count}};
    j["result"] = r.result ? to_json(*r.result) : Json(nullptr);
    return j;
}

inline Json to_json(const DemoReport& r)
{
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(to_json(row));
    return Json{{"c", to_pq(r.c)}, {"bound_holds", r.bound_holds}, {"rows", std::move(rows)}};
}

inline Json to_json(const CompactEnclosure& K)
{
    Json cells = Json::array();
    for (auto c : K.cells)
        cells.push_back(c);
    return Json{{"space", to_string(K.space)},
                {"level", K.level},
                {"cells", std::move(cells)},
                {"diameter", to_pq(enclosure_diameter(K))},
                {"fallback_cells", K.fallback_cells}};
}

// CSV helpers for plotting: one header line, rationals as p/q plus a
// decimal column for convenience.
inline std::string trace_csv(const std::vector<TraceRow>& trace)
{
    std::ostringstream os;
    os << "level,count,min_residual,diameter,diameter_approx\n";
    for (const auto& r : trace)
        os << r.level << "," << r.count << "," << to_pq(r.min_residual) << "," << to_pq(r.diameter) << ","
           << r.diameter.get_d() << "\n";
    return os.str();
}

inline std::string density_csv(const HistogramMeasure& h)
{
    std::ostringstream os;
    os << "cell,left,right,mass,density_approx\n";
    const Rational w = h.width();
    for (std::size_t k = 0; k < h.size(); ++k) {
        Rational left = w * static_cast<unsigned long>(k);
        os << k << "," << to_pq(left) << "," << to_pq(left + w) << "," << to_pq(h.mass[k]) << ","
           << Rational(h.mass[k] / w).get_d() << "\n";
    }
    return os.str();
}

inline std::string demo_csv(const DemoReport& r)
{
    std::ostringstream os;
    os << "N,status,diameter,gap,diameter_approx,gap_approx\n";
    for (const auto& row : r.rows)
        os << row.N << "," << to_string(row.status) << "," << to_pq(row.diameter) << "," << to_pq(row.gap) << ","
           << row.diameter.get_d() << "," << row.gap.get_d() << "\n";
    return os.str();
}

}  // namespace invmeas
