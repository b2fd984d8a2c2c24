// Batch front-end: spectra, |R00| sweeps, post-classification and mesh dumps.
//
//   rlm spectrum  --config configs/fig4_symmetric_reflectionless.cfg --out out/fig4
//   rlm sweep     --config configs/fig6_sweep.cfg --out out/fig6 --threads 4
//   rlm classify  --config configs/fig4_symmetric_reflectionless.cfg --eigenvalues out/fig4/eigenvalues.csv --out out/fig4
//   rlm mesh-dump --config configs/fig4_symmetric_reflectionless.cfg --out out/mesh
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlm/rlm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct CommonArgs {
    std::string config;
    std::string out = "out";
    int threads = 1;
    bool allow_partial = false;
    std::string eigenvalues;
};

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

/// Collects run metadata; written on every exit path.
struct Manifest {
    json doc = json::object();
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;

    void write(const fs::path& dir) const {
        json j = doc;
        j["warnings"] = warnings;
        j["outputs"] = outputs;
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream os(dir / "manifest.json");
        os << j.dump(2) << '\n';
    }
};

void open_output(std::ofstream& os, const fs::path& path) {
    os.open(path, std::ios::binary);
    if (!os) throw rlm::ConfigError("cannot write '" + path.string() + "'");
}

void record_problem(Manifest& m, const rlm::RunConfig& cfg) {
    m.doc["config_hash"] = rlm::fnv1a_hex(cfg.text);
    m.doc["theta"] = cfg.problem.theta;
    m.doc["pml_start"] = cfg.problem.pml_start;
    m.doc["truncation"] = cfg.problem.truncation;
    m.doc["hx"] = cfg.mesh.hx;
    m.doc["hy"] = cfg.mesh.hy;
    m.doc["gamma_blocks"] = static_cast<int>(cfg.problem.gamma_blocks.size());
}

int run_spectrum(const CommonArgs& args, const rlm::RunConfig& cfg, Manifest& m) {
    if (cfg.shifts.empty()) throw rlm::ConfigError("spectrum needs at least one 'shift = re im' line");
    const fs::path out(args.out);
    fs::create_directories(out);
    Stopwatch sw;

    const auto disc = rlm::Discretization::build(cfg.problem, rlm::scaling_for(cfg.operator_kind), cfg.mesh);
    m.doc["operator"] = rlm::to_string(cfg.operator_kind);
    m.doc["num_dofs"] = disc.num_dofs();
    m.doc["timings"]["assembly_s"] = sw.lap();

    auto opts = cfg.spectrum;
    opts.threads = args.threads;
    const auto result = rlm::compute_spectrum(disc, cfg.operator_kind, cfg.shifts, opts);
    m.doc["timings"]["eigensolve_s"] = sw.lap();
    for (const auto& w : result.warnings) m.warnings.push_back(w);

    {
        std::ofstream os;
        open_output(os, out / "eigenvalues.csv");
        rlm::csv::write_eigenvalues(os, result.entries);
        m.outputs.push_back("eigenvalues.csv");
    }
    {
        std::ofstream os;
        open_output(os, out / "branches.csv");
        rlm::csv::write_branches(os, rlm::sample_branches(cfg.problem.theta, cfg.operator_kind, cfg.branch_n_max,
                                                          cfg.branch_t_max, cfg.branch_samples));
        m.outputs.push_back("branches.csv");
    }
    if (cfg.dump_modes) {
        fs::create_directories(out / "modes");
        const double x0 = std::max(cfg.field_x_min, -cfg.problem.truncation);
        const double x1 = std::min(cfg.field_x_max, cfg.problem.truncation);
        int index = 0;
        for (const auto& e : result.entries) {
            if (e.classification != rlm::Classification::Trapped &&
                e.classification != rlm::Classification::ReflectionlessMode) {
                continue;
            }
            const std::string name = "modes/mode_" + std::to_string(index++) + ".csv";
            std::ofstream os;
            open_output(os, out / name);
            rlm::csv::write_field(os, rlm::sample_field(disc.mesh, disc.nodal(e.vector), x0, x1, cfg.field_nx,
                                                        cfg.field_ny));
            m.outputs.push_back(name);
        }
    }
    m.doc["timings"]["output_s"] = sw.lap();
    m.doc["entries"] = static_cast<int>(result.entries.size());

    if (!result.warnings.empty() && !args.allow_partial) {
        m.doc["error"] = "unconverged shifts (rerun with --allow-partial to accept)";
        return exit_numerical;
    }
    return exit_ok;
}

int run_sweep(const CommonArgs& args, const rlm::RunConfig& cfg, Manifest& m) {
    cfg.validate_sweep();
    const fs::path out(args.out);
    fs::create_directories(out);
    Stopwatch sw;
    const auto disc = rlm::Discretization::build(cfg.problem, rlm::ScalingKind::OutgoingBoth, cfg.mesh);
    m.doc["num_dofs"] = disc.num_dofs();
    m.doc["timings"]["assembly_s"] = sw.lap();

    const auto points =
        rlm::sweep_r00(disc, cfg.sweep_k_min, cfg.sweep_k_max, cfg.sweep_step, cfg.trapped, args.threads);
    m.doc["timings"]["sweep_s"] = sw.lap();

    int skipped = 0;
    bool failed = false;
    for (const auto& p : points) {
        if (!p.skipped) continue;
        ++skipped;
        std::ostringstream w;
        w << "k=" << rlm::csv::num(p.k) << " skipped: " << p.note;
        m.warnings.push_back(w.str());
        if (p.note != "threshold" && p.note != "trapped") failed = true;
    }
    std::ofstream os;
    open_output(os, out / "sweep.csv");
    rlm::csv::write_sweep(os, points);
    m.outputs.push_back("sweep.csv");
    m.doc["points"] = static_cast<int>(points.size());
    m.doc["skipped"] = skipped;
    if (failed && !args.allow_partial) {
        m.doc["error"] = "singular scattering systems in the sweep (rerun with --allow-partial to accept)";
        return exit_numerical;
    }
    return exit_ok;
}

int run_classify(const CommonArgs& args, const rlm::RunConfig& cfg, Manifest& m) {
    if (args.eigenvalues.empty()) throw rlm::ConfigError("classify needs --eigenvalues PATH");
    std::ifstream in(args.eigenvalues, std::ios::binary);
    if (!in) throw rlm::ConfigError("cannot open '" + args.eigenvalues + "'");
    const auto rows = rlm::csv::read_eigenvalues(in);
    const fs::path out(args.out);
    fs::create_directories(out);
    std::ofstream os;
    open_output(os, out / "classified.csv");
    m.outputs.push_back("classified.csv");
    m.doc["rows"] = static_cast<int>(rows.size());
    if (rows.empty()) return exit_ok;

    Stopwatch sw;
    const auto kind = cfg.operator_kind;
    const auto disc = rlm::Discretization::build(cfg.problem, rlm::scaling_for(kind), cfg.mesh);
    std::optional<rlm::Discretization> outgoing;
    m.doc["num_dofs"] = disc.num_dofs();
    m.doc["timings"]["assembly_s"] = sw.lap();

    using rlm::csv::num;
    os << rlm::csv::eigenvalue_header << ",flux_defect,abs_b_minus\n";
    for (const auto& row : rows) {
        rlm::SpectrumEntry e;
        e.lambda = row.lambda;
        e.k = row.k;
        e.residual = row.residual;
        e.ess_distance = row.ess_distance;
        e.rho = row.rho;
        std::string flux;
        std::string bminus;
        bool recovered = false;
        if (row.residual <= cfg.spectrum.tol) {
            // Recover the eigenvector with a shift slightly off the stored eigenvalue.
            const rlm::cplx sigma = row.lambda + 1e-6 * (1.0 + std::abs(row.lambda)) * rlm::cplx(1.0, 1.0);
            rlm::ArnoldiOptions ao{1, 0, cfg.spectrum.tol, cfg.spectrum.max_restarts};
            try {
                auto r = rlm::shift_invert_arnoldi(disc.op.S, disc.op.M, sigma, ao, &disc.l2_mass);
                if (!r.pairs.empty() && std::abs(r.pairs[0].lambda - row.lambda) <= 1e-6 * (1.0 + std::abs(row.lambda))) {
                    e.lambda = r.pairs[0].lambda;
                    e.residual = r.pairs[0].residual;
                    e.vector = std::move(r.pairs[0].vector);
                    recovered = true;
                }
            } catch (const rlm::NumericalError& ex) {
                m.warnings.push_back("k=" + num(row.k.real()) + "+" + num(row.k.imag()) + "i: " + ex.what());
            }
        }
        if (recovered) {
            rlm::annotate_entry(e, disc, kind, cfg.spectrum);
            const bool real_mode = e.classification == rlm::Classification::Trapped ||
                                   e.classification == rlm::Classification::ReflectionlessMode;
            if (real_mode) {
                flux = num(rlm::flux_defect(disc, e.vector));
                if (kind == rlm::OperatorKind::Reflectionless) {
                    if (!outgoing) outgoing = rlm::Discretization::build(cfg.problem, rlm::ScalingKind::OutgoingBoth, cfg.mesh);
                    try {
                        const double k = e.k.real();
                        const auto b = rlm::reflected_moduli(*outgoing, rlm::mode_incident_amplitudes(disc, e.vector, k), k);
                        for (std::size_t p = 0; p < b.size(); ++p) bminus += (p ? ";" : "") + num(b[p]);
                    } catch (const rlm::NumericalError& ex) {
                        m.warnings.push_back("k=" + num(e.k.real()) + ": cross-check skipped: " + ex.what());
                    }
                }
            }
        } else {
            e.classification = rlm::Classification::Unreliable;
            if (row.residual <= cfg.spectrum.tol) {
                m.warnings.push_back("k=" + num(row.k.real()) + "+" + num(row.k.imag()) + "i: eigenpair not recovered");
            }
        }
        os << num(e.k.real()) << ',' << num(e.k.imag()) << ',' << num(e.lambda.real()) << ',' << num(e.lambda.imag())
           << ',' << num(e.residual) << ',' << num(e.ess_distance) << ',' << (e.rho ? num(*e.rho) : std::string())
           << ',' << rlm::to_string(e.classification) << ',' << flux << ',' << bminus << '\n';
    }
    m.doc["timings"]["classify_s"] = sw.lap();
    return exit_ok;
}

int run_mesh_dump(const CommonArgs& args, const rlm::RunConfig& cfg, Manifest& m) {
    const fs::path out(args.out);
    fs::create_directories(out);
    const auto mesh = rlm::build_structured_mesh(cfg.problem, cfg.mesh);
    const auto dofs = rlm::make_dof_map(mesh);
    m.doc["num_nodes"] = mesh.num_nodes();
    m.doc["num_elements"] = mesh.num_elements();
    m.doc["num_dofs"] = dofs.size();
    m.doc["mirror_symmetric"] = rlm::mirror_check(mesh);
    std::ofstream os;
    open_output(os, out / "mesh.txt");
    rlm::dump_mesh(mesh, os);
    m.outputs.push_back("mesh.txt");
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resonance and reflectionless spectra of a 2D acoustic waveguide"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "Configuration file")->required();
        sub->add_option("--out", args.out, "Output directory");
        sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--allow-partial", args.allow_partial, "Exit 0 even when some shifts did not converge");
    };
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of the scaled operator near the configured shifts");
    auto* sweep = app.add_subcommand("sweep", "|R00(k)| on a uniform grid of wavenumbers");
    auto* classify = app.add_subcommand("classify", "Recompute rho, classification and cross-checks for a CSV");
    auto* mesh_dump = app.add_subcommand("mesh-dump", "Write the mesh");
    for (auto* sub : {spectrum, sweep, classify, mesh_dump}) add_common(sub);
    classify->add_option("--eigenvalues", args.eigenvalues, "eigenvalues.csv to annotate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    Manifest manifest;
    const std::string command = app.get_subcommands().front()->get_name();
    manifest.doc["command"] = command;
    manifest.doc["config"] = args.config;
    manifest.doc["threads"] = args.threads;
    Stopwatch total;
    int code = exit_ok;
    try {
        const auto cfg = rlm::load_config(args.config);
        record_problem(manifest, cfg);
        if (command == "spectrum") code = run_spectrum(args, cfg, manifest);
        else if (command == "sweep") code = run_sweep(args, cfg, manifest);
        else if (command == "classify") code = run_classify(args, cfg, manifest);
        else code = run_mesh_dump(args, cfg, manifest);
    } catch (const rlm::ConfigError& e) {
        manifest.doc["error"] = e.what();
        code = exit_config;
    } catch (const rlm::MeshError& e) {
        manifest.doc["error"] = e.what();
        code = exit_config;
    } catch (const rlm::NumericalError& e) {
        manifest.doc["error"] = e.what();
        code = exit_numerical;
    } catch (const std::exception& e) {
        manifest.doc["error"] = e.what();
        code = exit_numerical;
    }
    manifest.doc["status"] = code == exit_ok ? "ok" : "error";
    manifest.doc["exit_code"] = code;
    manifest.doc["total_s"] = total.lap();
    manifest.write(args.out);
    if (manifest.doc.contains("error")) std::cerr << "rlm " << command << ": " << manifest.doc["error"].get<std::string>() << '\n';
    return code;
}
