/**
 * @file config.hpp
 * @brief Flat key-value run configuration.
 *
 * One `key = value` pair per line, `#` starts a comment. Repeated keys:
 *
 *     gamma_block = x0 x1 y0 y1 value
 *     shift = re im            (complex wavenumber k; sigma = k^2)
 *     trapped = k              (sweep points closer than 1e-3 are skipped)
 */
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rlm/errors.hpp"
#include "rlm/mesh.hpp"
#include "rlm/model.hpp"
#include "rlm/spectra.hpp"

namespace rlm {

struct RunConfig {
    WaveguideProblem problem;
    MeshOptions mesh;

    OperatorKind operator_kind = OperatorKind::Reflectionless;
    std::vector<cplx> shifts;
    SpectrumOptions spectrum;

    double sweep_k_min = 0.1;
    double sweep_k_max = 3.1;
    double sweep_step = 0.01;
    std::vector<double> trapped;

    bool dump_modes = true;
    int field_nx = 161;
    int field_ny = 21;
    double field_x_min = -4.0;
    double field_x_max = 4.0;

    double branch_t_max = 40.0;
    int branch_samples = 81;
    int branch_n_max = 2;

    std::string text;  ///< raw file contents (hashed into the manifest)

    void validate() const {
        problem.validate();
        if (!(mesh.hx > 0.0) || !(mesh.hy > 0.0)) throw ConfigError("mesh sizes must be positive");
        if (spectrum.nev < 1) throw ConfigError("nev must be at least 1");
        if (spectrum.ncv != 0 && spectrum.ncv <= spectrum.nev) throw ConfigError("ncv must exceed nev");
        if (!(spectrum.tol > 0.0) || !(spectrum.real_tol > 0.0) || !(spectrum.rho_tol > 0.0) ||
            !(spectrum.artifact_factor > 0.0)) {
            throw ConfigError("tolerances must be positive");
        }
        if (spectrum.max_restarts < 0) throw ConfigError("max_restarts must be non-negative");
        if (field_nx < 1 || field_ny < 1) throw ConfigError("field sampling sizes must be positive");
        if (branch_samples < 2 || branch_n_max < 0 || !(branch_t_max > 0.0)) {
            throw ConfigError("invalid essential-branch sampling");
        }
    }

    void validate_sweep() const {
        if (!(sweep_k_min > 0.0) || !(sweep_step > 0.0) || !(sweep_k_max > sweep_k_min)) {
            throw ConfigError("sweep range must satisfy 0 < sweep_k_min < sweep_k_max and sweep_step > 0");
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_numbers(const std::string& value, std::size_t count, const std::string& where) {
    std::istringstream is(value);
    std::vector<T> out;
    T x{};
    while (is >> x) out.push_back(x);
    if (!is.eof() || out.size() != count) {
        throw ConfigError(where + ": expected " + std::to_string(count) + " numbers, got '" + value + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& value, const std::string& where) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(where + ": expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Parses configuration text. Throws ConfigError with the offending line number.
[[nodiscard]] inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.text = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string at = where + " (" + key + ")";

        auto real = [&] { return detail::parse_numbers<double>(value, 1, at)[0]; };
        auto integer = [&] { return detail::parse_numbers<int>(value, 1, at)[0]; };

        if (key == "theta") cfg.problem.theta = real();
        else if (key == "pml_start") cfg.problem.pml_start = real();
        else if (key == "truncation") cfg.problem.truncation = real();
        else if (key == "threshold_tol") cfg.problem.threshold_tol = real();
        else if (key == "h") cfg.mesh.hx = cfg.mesh.hy = real();
        else if (key == "hx") cfg.mesh.hx = real();
        else if (key == "hy") cfg.mesh.hy = real();
        else if (key == "gamma_block") {
            const auto v = detail::parse_numbers<double>(value, 5, at);
            cfg.problem.gamma_blocks.push_back({v[0], v[1], v[2], v[3], v[4]});
        } else if (key == "operator") {
            if (value == "reflectionless") cfg.operator_kind = OperatorKind::Reflectionless;
            else if (value == "resonance") cfg.operator_kind = OperatorKind::Resonance;
            else throw ConfigError(at + ": expected 'reflectionless' or 'resonance'");
        } else if (key == "shift") {
            const auto v = detail::parse_numbers<double>(value, 2, at);
            cfg.shifts.emplace_back(v[0], v[1]);
        } else if (key == "nev") cfg.spectrum.nev = integer();
        else if (key == "ncv") cfg.spectrum.ncv = integer();
        else if (key == "tol") cfg.spectrum.tol = real();
        else if (key == "max_restarts") cfg.spectrum.max_restarts = integer();
        else if (key == "real_tol") cfg.spectrum.real_tol = real();
        else if (key == "rho_tol") cfg.spectrum.rho_tol = real();
        else if (key == "artifact_factor") cfg.spectrum.artifact_factor = real();
        else if (key == "sweep_k_min") cfg.sweep_k_min = real();
        else if (key == "sweep_k_max") cfg.sweep_k_max = real();
        else if (key == "sweep_step") cfg.sweep_step = real();
        else if (key == "trapped") cfg.trapped.push_back(real());
        else if (key == "dump_modes") cfg.dump_modes = detail::parse_bool(value, at);
        else if (key == "field_nx") cfg.field_nx = integer();
        else if (key == "field_ny") cfg.field_ny = integer();
        else if (key == "field_x_min") cfg.field_x_min = real();
        else if (key == "field_x_max") cfg.field_x_max = real();
        else if (key == "branch_t_max") cfg.branch_t_max = real();
        else if (key == "branch_samples") cfg.branch_samples = integer();
        else if (key == "branch_n_max") cfg.branch_n_max = integer();
        else throw ConfigError(where + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// 64-bit FNV-1a hash, printed as 16 hex digits.
[[nodiscard]] inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xF];
    return out;
}

}  // namespace rlm
