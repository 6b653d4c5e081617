#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loomlab/io.hpp"
#include "loomlab/measure.hpp"
#include "loomlab/recurrence.hpp"
#include "loomlab/svg.hpp"
#include "loomlab/weaving.hpp"

using namespace loomlab;

namespace {

enum Exit { ok = 0, usage = 1, invalid = 2, malformed = 3, computation = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void usage_fail(const std::string& msg) { throw UsageError(msg); }

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            usage_fail("bad number '" + item + "' in " + what);
        }
        if (used != item.size() || !std::isfinite(v)) usage_fail("bad number '" + item + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) usage_fail(what + " is empty");
    return out;
}

std::vector<int> split_ints(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (double v : split_numbers(text, what)) {
        if (v != std::floor(v)) usage_fail(what + " expects integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

/// "x,y,angle[,sheet]"
SurfaceTangent parse_tangent(const std::string& text) {
    const auto v = split_numbers(text, "tangent");
    if (v.size() != 3 && v.size() != 4) usage_fail("tangent must be x,y,angle[,sheet]");
    const int sheet = v.size() == 4 ? static_cast<int>(v[3]) : 0;
    if (sheet != 0 && sheet != 1) usage_fail("sheet must be 0 or 1");
    return {{{v[0], v[1]}, sheet}, v[2]};
}

Sign parse_sign(const std::string& s) {
    if (s == "+" || s == "plus") return Sign::plus;
    if (s == "-" || s == "minus") return Sign::minus;
    usage_fail("sign must be + or -");
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else write_file(path, text);
}

LoomSurface open_surface(const std::string& path) { return LoomSurface(load_surface(path)); }

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& file, const std::string& out) {
    const LoomSurfaceSpec spec = load_surface(file);
    const ValidationReport rep = validate(spec);
    if (!out.empty()) write_file(out, dump(validation_to_json(rep)));
    std::printf("entries %zu\n", spec.entries.size());
    std::printf("monotone %s\n", rep.monotone ? "yes" : "no");
    std::printf("disjoint %s\n", rep.disjoint ? "yes" : "no");
    std::printf("min_boundary_distance %s\n", g9(rep.min_boundary_distance).c_str());
    std::printf("sup_h %s\n", g9(rep.sup_h).c_str());
    if (rep.offending_pair) std::printf("offending_pair %d %d\n", rep.offending_pair->first, rep.offending_pair->second);
    for (const auto& m : rep.messages) std::printf("note %s\n", m.c_str());
    std::printf("%s\n", rep.ok ? "valid" : "invalid");
    if (!rep.ok) {
        std::fprintf(stderr, "loomlab: error[validation]: %s\n",
                     rep.messages.empty() ? "surface fails the loom conditions" : rep.messages.front().c_str());
        return invalid;
    }
    return ok;
}

std::string trajectory_csv(const Trajectory& tr, double step) {
    std::ostringstream os;
    os << "time,sheet,band_x,band_y,tau,cum_length,crossing_index\n";
    auto row = [&](double t, const std::string& idx) {
        const SurfaceTangent y = tr.tangent(t);
        os << g9(t) << ',' << y.base.sheet << ',' << g9(y.base.z.x) << ',' << g9(y.base.z.y) << ',' << g9(tr.tau(t))
           << ',' << g9(t) << ',' << idx << '\n';
    };
    const long n = static_cast<long>(std::ceil(tr.total_time / step - 1e-9));
    std::size_t c = 0;
    for (long i = 0; i <= n; ++i) {
        const double t = std::min(tr.total_time, static_cast<double>(i) * step);
        for (; c < tr.crossings.size() && tr.crossings[c].time < t; ++c)
            row(tr.crossings[c].time, std::to_string(tr.crossings[c].index));
        row(t, "");
    }
    for (; c < tr.crossings.size(); ++c) row(tr.crossings[c].time, std::to_string(tr.crossings[c].index));
    return os.str();
}

Trajectory run_trace(const SurfaceTangent& y, double length, const LoomSurface& surf, const std::string& horo) {
    if (horo.empty()) return trace_geodesic(y, length, surf);
    if (horo == "stable") return trace_horocycle(y, length, surf, HoroDirection::stable);
    if (horo == "unstable") return trace_horocycle(y, length, surf, HoroDirection::unstable);
    usage_fail("horocycle must be stable or unstable");
}

int cmd_trace(const std::string& surface, const std::string& start, double length, const std::string& horo, double step,
              const std::string& out) {
    if (!(step > 0)) usage_fail("step must be positive");
    const LoomSurface surf = open_surface(surface);
    const Trajectory tr = run_trace(parse_tangent(start), length, surf, horo);
    write_file(out, trajectory_csv(tr, step));
    std::printf("kind %s\n", horo.empty() ? "geodesic" : "horocycle");
    std::printf("total_time %s\n", g9(tr.total_time).c_str());
    std::printf("crossings %zu\n", tr.crossings.size());
    std::printf("crossing_sequence %s\n", join(crossing_sequence(tr)).c_str());
    std::printf("end_sheet %d\n", tr.end_sheet());
    std::printf("slack %s\n", g9(slack(tr).value).c_str());
    std::printf("grazes %d\n", tr.grazes);
    return ok;
}

int cmd_slack(const std::string& surface, const std::string& start, double horizon, double recurrence, double tol,
              int max_length) {
    const LoomSurface surf = open_surface(surface);
    if (!std::isnan(recurrence)) {
        if (!(tol > 0)) usage_fail("tol must be positive");
        RecurrenceOptions opts;
        opts.max_length = max_length;
        const RecurrenceReport rep = recurrence_by_slack(recurrence, surf, tol, opts);
        std::printf("target %s\n", g9(rep.target).c_str());
        std::printf("tol %s\n", g9(rep.tol).c_str());
        std::printf("found %s\n", rep.found ? "yes" : "no");
        std::printf("patterns_examined %ld\n", rep.patterns_examined);
        if (rep.found) {
            std::printf("pattern %s\n", join(rep.witness.pattern).c_str());
            std::printf("predicted_slack %s\n", g9(rep.witness.predicted_slack).c_str());
            std::printf("traced_slack %s\n", g9(rep.witness.traced_slack).c_str());
            std::printf("base_distance %s\n", g9(rep.witness.base_distance).c_str());
            std::printf("min_gap %s\n", g9(rep.witness.min_gap).c_str());
        }
        return ok;
    }
    if (start.empty()) usage_fail("slack needs --start or --recurrence");
    const BusemannValue b = busemann(parse_tangent(start), horizon, surf);
    std::printf("horizon %s\n", g9(b.horizon).c_str());
    std::printf("slack %s\n", g9(b.slack).c_str());
    std::printf("busemann %s\n", b.minus_infinity ? "-inf" : g9(b.value).c_str());
    std::printf("diverges %s\n", b.minus_infinity ? "yes" : "no");
    return ok;
}

void print_additivity_header() { std::printf("%-12s %-14s %-14s %-14s %-14s %s\n", "gap", "traced", "predicted", "abs_error", "min_gap", "sequence"); }

int cmd_weave(const std::string& surface, const std::string& pattern, const std::string& sign, const std::string& gaps,
              double h, double rho, int samples, unsigned seed, const std::string& out) {
    Json j;
    j["version"] = kFormatVersion;
    if (!std::isnan(rho)) {
        if (surface.empty()) usage_fail("--lemma needs --surface");
        if (samples < 1) usage_fail("samples must be positive");
        const LoomSurface surf = open_surface(surface);
        const WeavingLemmaReport rep = verify_weaving_lemma(rho, surf, samples, seed);
        std::printf("rho %s\n", g9(rep.rho).c_str());
        std::printf("k0 %d\n", rep.k0);
        std::printf("S %s\n", g9(rep.sufficient_S).c_str());
        std::printf("empirical_S %s\n", g9(rep.empirical_S).c_str());
        std::printf("accepted %d of %d attempts\n", rep.accepted, rep.attempts);
        std::printf("weaving_beyond_S %d of %d\n", rep.weaving_beyond_S, rep.accepted_beyond_S);
        std::printf("all_weaving_beyond_S %s\n", rep.all_weaving_beyond_S ? "yes" : "no");
        std::printf("backtrack_demo %s slack %s sequence %s\n", rep.demo.demonstrates ? "yes" : "no",
                    g9(rep.demo.slack).c_str(), join(rep.demo.sequence).c_str());
        j["rho"] = num(rep.rho);
        j["k0"] = rep.k0;
        j["S"] = num(rep.sufficient_S);
        j["empirical_S"] = num(rep.empirical_S);
        j["accepted"] = rep.accepted;
        j["attempts"] = rep.attempts;
        j["accepted_beyond_S"] = rep.accepted_beyond_S;
        j["weaving_beyond_S"] = rep.weaving_beyond_S;
        j["all_weaving_beyond_S"] = rep.all_weaving_beyond_S;
        Json arr = Json::array();
        for (const auto& s : rep.samples)
            arr.push_back({{"source", s.source},
                           {"word", s.word},
                           {"start_tau", num(s.start_tau)},
                           {"slack", num(s.slack)},
                           {"sequence", s.sequence},
                           {"weaving", s.weaving}});
        j["samples"] = arr;
        if (!out.empty()) write_file(out, dump(j));
        return ok;
    }
    if (pattern.empty()) usage_fail("weave needs --pattern or --lemma");
    const WeavingPattern w{split_ints(pattern, "pattern"), parse_sign(sign)};
    if (!gaps.empty()) {
        if (!(h > 0 && h < kHalfPi)) usage_fail("h must lie in (0, pi/2)");
        const GapSweep sw = sweep_weaving_gaps(w, h, split_numbers(gaps, "sweep-gaps"));
        print_additivity_header();
        Json reps = Json::array();
        for (std::size_t i = 0; i < sw.gaps.size(); ++i) {
            const auto& r = sw.reports[i];
            std::printf("%-12s %-14s %-14s %-14s %-14s %s\n", g9(sw.gaps[i]).c_str(), g9(r.traced_slack).c_str(),
                        g9(r.predicted_slack).c_str(), g9(r.abs_error).c_str(), g9(r.min_gap).c_str(),
                        join(r.crossing_sequence).c_str());
            Json rj = additivity_to_json(r);
            rj["gap"] = num(sw.gaps[i]);
            reps.push_back(rj);
        }
        std::printf("error_non_increasing %s\n", sw.error_non_increasing ? "yes" : "no");
        j["h"] = num(h);
        j["reports"] = reps;
        j["error_non_increasing"] = sw.error_non_increasing;
    } else {
        if (surface.empty()) usage_fail("weave needs --surface or --sweep-gaps");
        const LoomSurface surf = open_surface(surface);
        const AdditivityReport r = verify_weaving_additivity(w, surf);
        std::printf("pattern %s\n", join(r.pattern).c_str());
        std::printf("traced_slack %s\n", g9(r.traced_slack).c_str());
        std::printf("predicted_slack %s\n", g9(r.predicted_slack).c_str());
        std::printf("abs_error %s\n", g9(r.abs_error).c_str());
        std::printf("min_gap %s\n", g9(r.min_gap).c_str());
        std::printf("horizon %s\n", g9(r.horizon).c_str());
        std::printf("crossing_sequence %s\n", join(r.crossing_sequence).c_str());
        j.update(additivity_to_json(r));
    }
    if (!out.empty()) write_file(out, dump(j));
    return ok;
}

/// Box sizes base^-j from the set diameter down to twice its resolution.
std::vector<double> auto_scales(const IntervalSet& s, double base) {
    const double diam = std::max(s.max() - s.min(), s.delta());
    const int lo = static_cast<int>(std::ceil(std::log(1 / diam) / std::log(base) - 1e-9)) + 1;
    const int hi = static_cast<int>(std::floor(std::log(1 / (2 * s.delta())) / std::log(base) + 1e-9));
    if (hi - lo < 2) fail(ErrorCode::precondition, "set resolution too coarse for a box-count fit");
    return geometric_scales(base, lo, hi);
}

int cmd_dim(const std::string& set, int level, int base, const std::string& digits, const std::string& input,
            double shift, const std::string& ms, double delta_T, const std::string& parity, const std::string& out) {
    IntervalSet e;
    double scale_base = base;
    if (set == "cantor") {
        if (level < 1 || level > 24) usage_fail("level must be in [1, 24]");
        e = cantor_cover(level);
        scale_base = 3;
    } else if (set == "digits") {
        if (level < 1 || base < 2) usage_fail("digits needs level >= 1 and base >= 2");
        e = digit_cantor_cover(base, split_ints(digits, "digits"), level);
    } else if (set == "file") {
        if (input.empty()) usage_fail("--set file needs --input");
        e = interval_set_from_text(read_file(input));
        scale_base = 2;
    } else {
        usage_fail("set must be cantor, digits or file");
    }
    if (shift != 0) e = e.shifted(shift);
    Json j;
    j["version"] = kFormatVersion;
    j["set"] = set;
    if (!std::isnan(delta_T)) {
        Parity p;
        if (parity == "even") p = Parity::even;
        else if (parity == "odd") p = Parity::odd;
        else usage_fail("parity must be even or odd");
        const IntervalSet d = delta_sets(e, delta_T, p);
        std::printf("intervals %zu\n", d.size());
        std::printf("measure %s\n", g9(d.measure()).c_str());
        if (!d.empty()) std::printf("range %s %s\n", g9(d.min()).c_str(), g9(d.max()).c_str());
        j["delta_set"] = interval_set_to_json(d);
        j["T"] = num(delta_T);
        j["parity"] = parity;
    } else {
        std::printf("%-4s %-12s %-12s %-12s %s\n", "m", "dimension", "raw_slope", "r2", "scales");
        Json rows = Json::array();
        for (int m : split_ints(ms, "m")) {
            if (m < 1) usage_fail("m must be positive");
            const IntervalSet sm = sumset(e, m);
            const DimensionEstimate est = box_dimension(sm, auto_scales(sm, scale_base));
            std::printf("%-4d %-12s %-12s %-12s %zu\n", m, g9(est.value).c_str(), g9(est.raw_slope).c_str(),
                        g9(est.r2).c_str(), est.scales.size());
            Json r = dimension_to_json(est);
            r["m"] = m;
            rows.push_back(r);
        }
        j["estimates"] = rows;
    }
    if (!out.empty()) write_file(out, dump(j));
    return ok;
}

int cmd_measure(const std::string& surface, double R, const std::string& Ts, const std::string& eps_list,
                const std::string& out) {
    const LoomSurface surf = open_surface(surface);
    const SectionChoice ch = choose_section(surf);
    const SectionSpec& sec = ch.sec;
    if (std::isnan(R)) R = sec.delta / 8;
    std::printf("delta %s\n", g9(sec.delta).c_str());
    std::printf("section c %s d %s eta %s\n", g9(sec.c).c_str(), g9(sec.d).c_str(), g9(sec.eta).c_str());
    std::printf("R %s\n", g9(R).c_str());
    const auto times = split_numbers(Ts, "T");
    const auto epss = eps_list.empty() ? std::vector<double>{} : split_numbers(eps_list, "eps");
    std::printf("%-10s %-14s %-8s %s\n", "T", "occupation", "visits", "tightness");
    Json last;
    for (double T : times) {
        const EmpiricalMeasure mu = estimate_nu(surf, sec, R, T);
        std::string tight;
        for (double e : epss) tight += g9(e) + ":" + g9(check_tightness(mu, e).mass) + " ";
        std::printf("%-10s %-14s %-8zu %s\n", g9(T).c_str(), g9(mu.orbit_time_in_window).c_str(), mu.visits.size(),
                    tight.c_str());
        last = measure_to_json(mu);
    }
    if (!out.empty()) write_file(out, dump(last));
    return ok;
}

int cmd_design(const std::string& rule, const std::string& E, int count, double growth, const std::string& out) {
    if (count < 1) usage_fail("count must be positive");
    if (!(growth >= 0)) usage_fail("growth must be non-negative");
    LoomSurfaceSpec spec;
    if (!rule.empty() == !E.empty()) usage_fail("design needs exactly one of --summable and --E");
    if (!rule.empty()) {
        const DesignResult d = design_summable(DecayRule::parse(rule), count, growth);
        spec = d.spec;
        std::printf("partial_sum %s\n", g9(d.partial_sums.back()).c_str());
        std::printf("summable_trend %s\n", d.summable_trend ? "yes" : "no");
        for (const auto& w : d.warnings) std::printf("warning %s\n", w.c_str());
    } else {
        const DistalDesign d = design_from_E(interval_set_from_text(E), count, growth);
        spec = d.spec;
        std::printf("dense_points %zu\n", d.dense_subset.size());
    }
    std::printf("entries %zu\n", spec.entries.size());
    std::printf("gap_floor %s\n", g9(spec.gap_floor).c_str());
    emit(out, dump(surface_to_json(spec)));
    return ok;
}

int cmd_render(const std::string& surface, const std::vector<std::string>& tangents,
               const std::vector<std::string>& crossings, const std::vector<std::string>& weaves, double length,
               const std::string& out) {
    std::optional<LoomSurface> surf;
    if (!surface.empty()) surf.emplace(open_surface(surface));
    if (!surf && !(tangents.empty() && crossings.empty() && weaves.empty()))
        fail(ErrorCode::precondition, "trajectories need a surface");
    std::vector<Trajectory> trajs;
    if (!surf) {
        write_file(out, render_svg(nullptr, trajs));
        std::printf("trajectories 0\n");
        return ok;
    }
    const LoomSurface& trace_surf = *surf;
    for (const auto& t : tangents) trajs.push_back(trace_geodesic(parse_tangent(t), length, trace_surf));
    for (const auto& c : crossings) {
        if (c.size() < 2) usage_fail("crossing must look like 3+ or 3-");
        trajs.push_back(trace_crossing(split_ints(c.substr(0, c.size() - 1), "crossing").front(),
                                       parse_sign(c.substr(c.size() - 1)), trace_surf)
                            .traj);
    }
    for (const auto& w : weaves) trajs.push_back(build_weaving({split_ints(w, "weave"), Sign::plus}, trace_surf).traj);
    RenderOptions opt;
    opt.x_lo = surf->entry(1).s - 8;
    opt.x_hi = surf->entry(surf->size()).s + 8;
    write_file(out, render_svg(&*surf, trajs, opt));
    std::printf("trajectories %zu\n", trajs.size());
    return ok;
}

int exit_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::validation: return invalid;
    case ErrorCode::parse:
    case ErrorCode::io: return malformed;
    default: return computation;
    }
}

void report(const std::string& code, const std::string& msg) {
    std::string line = msg;
    for (char& ch : line)
        if (ch == '\n' || ch == '\r') ch = ' ';
    std::fprintf(stderr, "loomlab: error[%s]: %s\n", code.c_str(), line.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesic and horocycle experiments on loom surfaces"};
    app.require_subcommand(1);

    std::string surface, out, start, horo, pattern, sign = "+", gaps, set = "cantor", digits = "0,1", input, ms = "1",
                                                     parity = "even", Ts = "1000", eps, rule, E, validate_file;
    double length = 10, step = 0.1, horizon = 200, recurrence = NAN, tol = 0.05, h = 0.7, rho = NAN, shift = 0,
           delta_T = NAN, R = NAN, growth = 1;
    int samples = 200, level = 12, base = 10, count = 10, max_length = 8;
    unsigned seed = 1;
    std::vector<std::string> tangents, crossings, weaves;

    auto* v = app.add_subcommand("validate", "check a surface file");
    v->add_option("file", validate_file, "surface JSON")->required();
    v->add_option("--out", out, "write the report as JSON");

    auto* t = app.add_subcommand("trace", "trace a geodesic or horocycle and dump CSV");
    t->add_option("--surface", surface)->required();
    t->add_option("--start", start, "x,y,angle[,sheet]")->required();
    t->add_option("--length", length);
    t->add_option("--horocycle", horo, "stable or unstable");
    t->add_option("--step", step, "CSV sample spacing");
    t->add_option("--out", out)->required();

    auto* s = app.add_subcommand("slack", "slack and Busemann value of a ray, or recurrence witnesses");
    s->add_option("--surface", surface)->required();
    s->add_option("--start", start, "x,y,angle[,sheet]");
    s->add_option("--horizon", horizon);
    s->add_option("--recurrence", recurrence, "target slack");
    s->add_option("--tol", tol);
    s->add_option("--max-length", max_length);

    auto* w = app.add_subcommand("weave", "slack additivity and weaving checks");
    w->add_option("--surface", surface);
    w->add_option("--pattern", pattern, "strictly increasing indices, e.g. 1,2,3");
    w->add_option("--sign", sign, "+ or -");
    w->add_option("--sweep-gaps", gaps, "equal spacings to test, e.g. 5,10,20,40");
    w->add_option("--height", h, "height used by --sweep-gaps");
    w->add_option("--lemma", rho, "sample low-slack rays with this slack bound");
    w->add_option("--samples", samples);
    w->add_option("--seed", seed);
    w->add_option("--out", out);

    auto* d = app.add_subcommand("dim", "sumsets, delta sets and box dimension");
    d->add_option("--set", set, "cantor, digits or file");
    d->add_option("--level", level);
    d->add_option("--base", base);
    d->add_option("--digits", digits);
    d->add_option("--input", input, "interval set JSON");
    d->add_option("--shift", shift, "translate the set before summing");
    d->add_option("--m", ms, "sumset orders, e.g. 1,2,3");
    d->add_option("--delta-sets", delta_T, "horizon T for the slack sets");
    d->add_option("--parity", parity, "even or odd");
    d->add_option("--out", out);

    auto* m = app.add_subcommand("measure", "empirical measures on a section window");
    m->add_option("--surface", surface)->required();
    m->add_option("--R", R, "window half-size (default delta/8)");
    m->add_option("--T", Ts, "orbit half-lengths, e.g. 100,1000");
    m->add_option("--eps", eps, "tightness levels to report");
    m->add_option("--out", out, "JSON dump for the last T");

    auto* g = app.add_subcommand("design", "build a surface file");
    g->add_option("--summable", rule, "decay rule, e.g. inverse:1 or geometric:1,0.5");
    g->add_option("--E", E, "slack set, e.g. [[0.69,0.7]]");
    g->add_option("--count", count);
    g->add_option("--growth", growth, "gap growth per entry");
    g->add_option("--out", out);

    auto* r = app.add_subcommand("render", "SVG of the band model");
    r->add_option("--surface", surface);
    r->add_option("--tangent", tangents, "x,y,angle[,sheet]; repeatable");
    r->add_option("--length", length);
    r->add_option("--crossing", crossings, "crossing geodesic such as 2+ or 1-; repeatable");
    r->add_option("--weave", weaves, "weaving pattern such as 1,2; repeatable");
    r->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report("usage", e.what());
        return usage;
    }

    try {
        if (*v) return cmd_validate(validate_file, out);
        if (*t) return cmd_trace(surface, start, length, horo, step, out);
        if (*s) return cmd_slack(surface, start, horizon, recurrence, tol, max_length);
        if (*w) return cmd_weave(surface, pattern, sign, gaps, h, rho, samples, seed, out);
        if (*d) return cmd_dim(set, level, base, digits, input, shift, ms, delta_T, parity, out);
        if (*m) return cmd_measure(surface, R, Ts, eps, out);
        if (*g) return cmd_design(rule, E, count, growth, out);
        if (*r) return cmd_render(surface, tangents, crossings, weaves, length, out);
    } catch (const UsageError& e) {
        report("usage", e.what());
        return usage;
    } catch (const Error& e) {
        report(code_name(e.code()), e.what());
        return exit_for(e.code());
    } catch (const std::exception& e) {
        report("internal", e.what());
        return computation;
    }
    return usage;
}
