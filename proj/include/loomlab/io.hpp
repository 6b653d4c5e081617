#pragma once

// JSON formats: surface specs, interval sets, reports and measure dumps.
// Every number written is rounded to 9 significant digits.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loomlab/error.hpp"
#include "loomlab/format.hpp"
#include "loomlab/interval_set.hpp"
#include "loomlab/measure.hpp"
#include "loomlab/surface.hpp"
#include "loomlab/weaving.hpp"

namespace loomlab {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// x rounded to 9 significant digits, so the JSON writer prints at most 9.
inline double r9(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(g9(x).c_str(), nullptr);
}

inline Json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return r9(x);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << text;
    if (!out) fail(ErrorCode::io, "write failed for " + path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        fail(ErrorCode::parse, std::string("invalid JSON: ") + e.what());
    }
}

inline double finite_number(const Json& j, const std::string& what) {
    if (!j.is_number()) fail(ErrorCode::parse, what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ErrorCode::parse, what + " must be finite");
    return v;
}

inline void check_version(const Json& j) {
    if (!j.is_object()) fail(ErrorCode::parse, "top level must be an object");
    if (!j.contains("version")) fail(ErrorCode::parse, "missing version field");
    if (!j["version"].is_number_integer() || j["version"].get<int>() != kFormatVersion)
        fail(ErrorCode::parse, "unsupported format version");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Surfaces

inline LoomSurfaceSpec surface_from_json(const std::string& text) {
    const Json j = detail::parse_json(text);
    detail::check_version(j);
    if (!j.contains("entries") || !j["entries"].is_array()) fail(ErrorCode::parse, "entries must be an array");
    LoomSurfaceSpec spec;
    for (std::size_t i = 0; i < j["entries"].size(); ++i) {
        const Json& e = j["entries"][i];
        const std::string where = "entry " + std::to_string(i + 1);
        if (!e.is_object() || !e.contains("s") || !e.contains("h")) fail(ErrorCode::parse, where + " needs s and h");
        const double s = detail::finite_number(e["s"], where + " s");
        const double h = detail::finite_number(e["h"], where + " h");
        if (!(h > 0 && h < kHalfPi)) fail(ErrorCode::parse, where + " h outside (0, pi/2)");
        spec.entries.push_back({s, h});
    }
    if (spec.entries.empty()) fail(ErrorCode::parse, "surface needs at least one entry");
    if (j.contains("tail_policy")) {
        if (!j["tail_policy"].is_string() || j["tail_policy"].get<std::string>() != "empty")
            fail(ErrorCode::parse, "tail_policy must be \"empty\"");
    }
    if (j.contains("gap_floor")) spec.gap_floor = detail::finite_number(j["gap_floor"], "gap_floor");
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) fail(ErrorCode::parse, "meta must be an object");
        spec.meta_json = j["meta"].dump();
    }
    return spec;
}

inline Json surface_to_json(const LoomSurfaceSpec& spec) {
    Json j;
    j["version"] = kFormatVersion;
    Json entries = Json::array();
    for (const auto& e : spec.entries) entries.push_back({{"s", num(e.s)}, {"h", num(e.h)}});
    j["entries"] = entries;
    j["tail_policy"] = "empty";
    j["meta"] = detail::parse_json(spec.meta_json.empty() ? "{}" : spec.meta_json);
    return j;
}

inline LoomSurfaceSpec load_surface(const std::string& path) { return surface_from_json(read_file(path)); }

inline Json validation_to_json(const ValidationReport& rep) {
    Json j;
    j["version"] = kFormatVersion;
    j["ok"] = rep.ok;
    j["heights_in_range"] = rep.heights_in_range;
    j["monotone"] = rep.monotone;
    j["disjoint"] = rep.disjoint;
    j["within_chart_range"] = rep.within_chart_range;
    j["offending_pair"] = rep.offending_pair ? Json::array({rep.offending_pair->first, rep.offending_pair->second})
                                             : Json(nullptr);
    j["min_boundary_distance"] = num(rep.min_boundary_distance);
    j["sup_h"] = num(rep.sup_h);
    Json gaps = Json::array();
    for (double g : rep.gaps) gaps.push_back(num(g));
    j["gaps"] = gaps;
    j["gaps_increasing"] = rep.gaps_increasing;
    j["messages"] = rep.messages;
    return j;
}

// ---------------------------------------------------------------------------
// Interval sets

inline IntervalSet interval_set_from_json(const Json& j) {
    if (j.contains("version")) detail::check_version(j);
    if (!j.is_object() || !j.contains("intervals") || !j["intervals"].is_array())
        fail(ErrorCode::parse, "interval set needs an intervals array");
    const double delta = j.contains("delta") ? detail::finite_number(j["delta"], "delta") : 1e-9;
    if (!(delta > 0)) fail(ErrorCode::parse, "delta must be positive");
    std::vector<Interval> ivs;
    for (const auto& iv : j["intervals"]) {
        if (!iv.is_array() || iv.size() != 2) fail(ErrorCode::parse, "each interval is [a, b]");
        const double a = detail::finite_number(iv[0], "interval endpoint");
        const double b = detail::finite_number(iv[1], "interval endpoint");
        if (a > b) fail(ErrorCode::parse, "interval with a > b");
        ivs.push_back({a, b});
    }
    if (ivs.empty()) fail(ErrorCode::parse, "interval set is empty");
    return IntervalSet(std::move(ivs), delta);
}

inline IntervalSet interval_set_from_text(const std::string& text) {
    const Json j = detail::parse_json(text);
    if (j.is_array()) return interval_set_from_json(Json{{"intervals", j}});
    return interval_set_from_json(j);
}

inline Json interval_set_to_json(const IntervalSet& s) {
    Json j;
    j["version"] = kFormatVersion;
    j["delta"] = num(s.delta());
    Json ivs = Json::array();
    for (const auto& iv : s.intervals()) ivs.push_back({num(iv.lo), num(iv.hi)});
    j["intervals"] = ivs;
    return j;
}

inline Json dimension_to_json(const DimensionEstimate& d) {
    Json j;
    j["value"] = num(d.value);
    j["raw_slope"] = num(d.raw_slope);
    j["r2"] = num(d.r2);
    Json scales = Json::array(), counts = Json::array();
    for (double r : d.scales) scales.push_back(num(r));
    for (double c : d.counts) counts.push_back(num(c));
    j["scales"] = scales;
    j["counts"] = counts;
    return j;
}

// ---------------------------------------------------------------------------
// Reports

inline Json additivity_to_json(const AdditivityReport& r) {
    return {{"pattern", r.pattern},
            {"traced_slack", num(r.traced_slack)},
            {"predicted_slack", num(r.predicted_slack)},
            {"abs_error", num(r.abs_error)},
            {"min_gap", num(r.min_gap)},
            {"horizon", num(r.horizon)},
            {"crossing_sequence", r.crossing_sequence}};
}

inline Json measure_to_json(const EmpiricalMeasure& mu) {
    Json j;
    j["version"] = kFormatVersion;
    j["R"] = num(mu.R);
    j["T"] = num(mu.T);
    j["grid"] = {{"shape", mu.shape},
                 {"origin", {num(mu.origin[0]), num(mu.origin[1]), num(mu.origin[2])}},
                 {"step", {num(mu.bin[0]), num(mu.bin[1]), num(mu.bin[2])}}};
    Json w = Json::array();
    for (double v : mu.weights) w.push_back(num(v));
    j["weights"] = w;
    j["occupation_time"] = num(mu.orbit_time_in_window);
    j["sample_step"] = num(mu.step);
    j["section"] = {{"delta", num(mu.sec.delta)}, {"c", num(mu.sec.c)}, {"d", num(mu.sec.d)}, {"eta", num(mu.sec.eta)}};
    Json visits = Json::array();
    for (const auto& v : mu.visits) visits.push_back({num(v.start), num(v.end)});
    j["visits"] = visits;
    return j;
}

} // namespace loomlab
