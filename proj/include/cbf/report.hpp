#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace cbf {

using json = nlohmann::ordered_json;

/// Outcome of one checked identity or inequality. `hard` distinguishes
/// assertions from empirical-constant reports that only warn; `skipped`
/// marks regime-gated checks that did not run.
struct EstimateReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;   // equality: |lhs-rhs| (relative); one-sided: lhs-rhs
    double tolerance = 0.0;
    bool pass = true;
    bool hard = true;
    bool skipped = false;
    std::string note;
    json meta;

    static EstimateReport equality(std::string name, double lhs, double rhs, double tol) {
        EstimateReport r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        r.residual = std::abs(lhs - rhs) / scale;
        r.tolerance = tol;
        r.pass = r.residual <= tol;
        return r;
    }

    /// For checks whose residual is already a (relative) magnitude.
    static EstimateReport residual_only(std::string name, double residual, double tol) {
        EstimateReport r;
        r.name = std::move(name);
        r.lhs = residual;
        r.residual = residual;
        r.tolerance = tol;
        r.pass = residual <= tol;
        return r;
    }

    /// One-sided check lhs <= rhs + slack; residual is the signed excess.
    static EstimateReport one_sided(std::string name, double lhs, double rhs, double slack) {
        EstimateReport r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.residual = lhs - rhs;
        r.tolerance = slack;
        r.pass = r.residual <= slack;
        return r;
    }

    /// Empirical constant: recorded, never failing.
    static EstimateReport empirical(std::string name, double value, std::string note = {}) {
        EstimateReport r;
        r.name = std::move(name);
        r.lhs = value;
        r.residual = value;
        r.tolerance = std::numeric_limits<double>::infinity();
        r.hard = false;
        r.pass = std::isfinite(value);
        r.note = std::move(note);
        return r;
    }

    static EstimateReport skip(std::string name, std::string why) {
        EstimateReport r;
        r.name = std::move(name);
        r.skipped = true;
        r.pass = true;
        r.note = std::move(why);
        return r;
    }

    json to_json() const {
        json j;
        j["name"] = name;
        j["lhs"] = lhs;
        j["rhs"] = rhs;
        j["residual"] = residual;
        j["tolerance"] = tolerance;
        j["pass"] = pass;
        j["hard"] = hard;
        j["skipped"] = skipped;
        if (!note.empty()) j["note"] = note;
        if (!meta.is_null()) j["meta"] = meta;
        return j;
    }
};

/// One JSON object per line; an optional header record goes first.
inline void write_reports_jsonl(std::ostream& os, const std::vector<EstimateReport>& reports,
                                const json& header = {}) {
    if (!header.is_null() && !header.empty()) {
        json h;
        h["type"] = "header";
        for (auto& [k, v] : header.items()) h[k] = v;
        os << h.dump() << "\n";
    }
    for (const EstimateReport& r : reports) os << r.to_json().dump() << "\n";
}

inline std::string format_report_line(const EstimateReport& r) {
    char buf[256];
    if (r.skipped) {
        std::snprintf(buf, sizeof(buf), "  SKIP %-34s %s", r.name.c_str(), r.note.c_str());
    } else {
        std::snprintf(buf, sizeof(buf), "  %s %-34s residual %.3e  tol %.3e%s",
                      r.pass ? "PASS" : "FAIL", r.name.c_str(), r.residual, r.tolerance,
                      r.hard ? "" : "  [empirical]");
    }
    return buf;
}

inline void print_report_table(std::ostream& os, const std::vector<EstimateReport>& reports) {
    for (const EstimateReport& r : reports) os << format_report_line(r) << "\n";
}

inline bool all_hard_pass(const std::vector<EstimateReport>& reports) {
    for (const EstimateReport& r : reports)
        if (r.hard && !r.skipped && !r.pass) return false;
    return true;
}

}  // namespace cbf
