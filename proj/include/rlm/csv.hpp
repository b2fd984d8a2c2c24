/**
 * @file csv.hpp
 * @brief CSV writers and the eigenvalue reader. Floats use 17 significant
 *        digits so values round-trip exactly.
 */
#pragma once

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rlm/errors.hpp"
#include "rlm/field.hpp"
#include "rlm/scattering.hpp"
#include "rlm/spectra.hpp"

namespace rlm::csv {

[[nodiscard]] inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline const char* eigenvalue_header = "re_k,im_k,re_lambda,im_lambda,residual,ess_distance,rho,classification";

inline void write_eigenvalues(std::ostream& os, const std::vector<SpectrumEntry>& entries) {
    os << eigenvalue_header << '\n';
    for (const auto& e : entries) {
        os << num(e.k.real()) << ',' << num(e.k.imag()) << ',' << num(e.lambda.real()) << ','
           << num(e.lambda.imag()) << ',' << num(e.residual) << ',' << num(e.ess_distance) << ','
           << (e.rho ? num(*e.rho) : std::string()) << ',' << to_string(e.classification) << '\n';
    }
}

inline void write_branches(std::ostream& os, const std::vector<BranchPoint>& points) {
    os << "branch_n,side,re_k,im_k\n";
    for (const auto& p : points) os << p.n << ',' << p.side << ',' << num(p.k.real()) << ',' << num(p.k.imag()) << '\n';
}

inline void write_sweep(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << "k,abs_R00,re_R00,im_R00,energy_defect\n";
    for (const auto& p : points) {
        if (p.skipped) continue;
        os << num(p.k) << ',' << num(std::abs(p.r00)) << ',' << num(p.r00.real()) << ',' << num(p.r00.imag()) << ','
           << num(p.energy_defect) << '\n';
    }
}

inline void write_field(std::ostream& os, const std::vector<FieldSample>& samples) {
    os << "x,y,re_u,im_u\n";
    for (const auto& s : samples) {
        os << num(s.x) << ',' << num(s.y) << ',' << num(s.u.real()) << ',' << num(s.u.imag()) << '\n';
    }
}

/// One row of eigenvalues.csv as read back.
struct EigenvalueRow {
    cplx k;
    cplx lambda;
    double residual = 0.0;
    double ess_distance = 0.0;
    std::optional<double> rho;
    std::string classification;
};

[[nodiscard]] inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Reads eigenvalues.csv. An empty stream (or a header only) gives no rows.
[[nodiscard]] inline std::vector<EigenvalueRow> read_eigenvalues(std::istream& is) {
    std::vector<EigenvalueRow> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line != eigenvalue_header) throw ConfigError("eigenvalue CSV: unexpected header '" + line + "'");
            continue;
        }
        const auto c = split(line);
        if (c.size() != 8) throw ConfigError("eigenvalue CSV line " + std::to_string(lineno) + ": expected 8 columns");
        try {
            EigenvalueRow r;
            r.k = {std::stod(c[0]), std::stod(c[1])};
            r.lambda = {std::stod(c[2]), std::stod(c[3])};
            r.residual = std::stod(c[4]);
            r.ess_distance = std::stod(c[5]);
            if (!c[6].empty()) r.rho = std::stod(c[6]);
            r.classification = c[7];
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw ConfigError("eigenvalue CSV line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace rlm::csv
