#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bura/error.hpp"
#include "bura/experiments.hpp"
#include "bura/matrix.hpp"
#include "bura/spectral.hpp"

namespace bura {
namespace {

using nlohmann::json;

struct Options {
    double alpha = 0.5;
    int beta = 1;
    int m = -1;  // defaults to k
    int k = 5;
    int precision_bits = default_precision_bits();
    int n = 255;
    int mesh_exp = 0;
    std::string rhs = "f1";
    std::string matrix = "laplacian1d";
    std::string out;
    std::string solver = "thomas";
    double cg_tol = 1e-12;
    int cg_max_iter = 20000;
    bool parallel = false;
    std::string coefficients;
    int n_cap = kDoublyNonnegativeCap;
    std::string config;
    int workers = 0;
};

void add_bura_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--alpha", o.alpha, "fractional power, 0 < alpha < 1")->capture_default_str();
    cmd->add_option("--beta", o.beta, "integer shift")->capture_default_str();
    cmd->add_option("--m", o.m, "numerator degree (default: k)");
    cmd->add_option("--k", o.k, "denominator degree")->capture_default_str();
    cmd->add_option("--precision-bits", o.precision_bits, "Remez working precision")->capture_default_str();
}

void add_problem_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--matrix", o.matrix, "laplacian1d or mtx:<path>")->capture_default_str();
    cmd->add_option("--n", o.n, "dimension of laplacian1d")->capture_default_str();
    cmd->add_option("--mesh-exp", o.mesh_exp, "laplacian1d with h = 2^-e (overrides --n)");
    cmd->add_option("--solver", o.solver, "thomas or cg")->capture_default_str();
    cmd->add_option("--cg-tol", o.cg_tol, "CG relative residual")->capture_default_str();
    cmd->add_option("--cg-max-iter", o.cg_max_iter, "CG iteration limit")->capture_default_str();
    cmd->add_flag("--parallel", o.parallel, "run the shifted solves in parallel");
    cmd->add_option("--coefficients", o.coefficients, "reuse an exported coefficient file");
}

void add_experiment_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "experiment configuration (JSON)");
    cmd->add_option("--precision-bits", o.precision_bits, "Remez working precision");
    cmd->add_option("--workers", o.workers, "worker threads, 0 = all cores");
}

BuraParams params_of(const Options& o) {
    BuraParams p{o.alpha, o.beta, o.m < 0 ? o.k : o.m, o.k};
    p.validate();
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
}

std::ofstream open_in(const std::string& dir, const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (std::filesystem::path(dir) / name).string());
    return out;
}

struct Problem {
    NormalizedMatrix a;
    double h = 0.0;  // grid spacing, 0 for file input
};

Problem problem_of(const Options& o) {
    Problem p;
    if (o.matrix == "laplacian1d") {
        const int n = o.mesh_exp > 0 ? (1 << o.mesh_exp) - 1 : o.n;
        p.a = laplacian_1d(n);
        p.h = 1.0 / (n + 1);
    } else if (o.matrix.rfind("mtx:", 0) == 0) {
        p.a = normalize(read_matrix_market_file(o.matrix.substr(4)));
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown matrix '" + o.matrix + "'");
    }
    return p;
}

SolverConfig solver_of(const Options& o) {
    SolverConfig cfg;
    cfg.linear_solver = linear_solver_from_string(o.solver);
    cfg.cg_rel_tol = o.cg_tol;
    cfg.cg_max_iter = o.cg_max_iter;
    cfg.parallel_shifted_solves = o.parallel;
    cfg.validate();
    return cfg;
}

CoefficientSet coefficients_of(const Options& o) {
    if (!o.coefficients.empty()) return coefficients_from_json(read_file(o.coefficients));
    RemezOptions opts;
    opts.precision_bits = o.precision_bits;
    const RationalApprox r = bura_compute(params_of(o), opts);
    return make_coefficient_set(r, partial_fractions(r));
}

int cmd_approx(const Options& o, std::ostream& out) {
    RemezOptions opts;
    opts.precision_bits = o.precision_bits;
    const RationalApprox r = bura_compute(params_of(o), opts);
    const std::string doc = coefficients_to_json(make_coefficient_set(r, partial_fractions(r)));
    out << doc << '\n';
    if (!o.out.empty()) {
        prepare_dir(o.out);
        open_in(o.out, "coefficients.json") << doc << '\n';
    }
    return 0;
}

int cmd_solve(const Options& o, std::ostream& out) {
    const Problem prob = problem_of(o);
    const SolverConfig cfg = solver_of(o);
    const CoefficientSet coeffs = coefficients_of(o);
    const Eigen::VectorXd f = sample_rhs(rhs_from_string(o.rhs), prob.a.n());
    const SolveReport report = apply_bura_inverse(coeffs.pf, prob.a, f, cfg);

    json doc;
    doc["solve"] = json::parse(solve_report_to_json(report));
    doc["E"] = coeffs.minimax_error;
    if (prob.a.model == MatrixModel::laplacian_1d && prob.a.n() <= kDenseEigenCap) {
        const EigenDecomposition eig = eigen_decomposition(prob.a);
        doc["error_reports"] = json::array();
        for (double gamma : {0.0, 1.0}) {
            doc["error_reports"].push_back(json::parse(error_report_to_json(error_report(coeffs, eig, f, report.u_r, gamma))));
        }
    }
    out << doc.dump(2) << '\n';
    if (!o.out.empty()) {
        prepare_dir(o.out);
        auto csv = open_in(o.out, "solution.csv");
        // the solution of the unscaled problem scale * A u = f
        write_solution_csv(csv, report.u_r * std::pow(prob.a.scale, -coeffs.params.alpha), prob.h);
        open_in(o.out, "report.json") << doc.dump(2) << '\n';
    }
    return 0;
}

int cmd_certify(const Options& o, std::ostream& out) {
    const Problem prob = problem_of(o);
    const SolverConfig cfg = solver_of(o);
    const BuraParams params = params_of(o);
    RemezOptions opts;
    opts.precision_bits = o.precision_bits;
    const RationalApprox r = bura_compute(params, opts);

    json doc;
    doc["alpha"] = params.alpha;
    doc["beta"] = params.beta;
    doc["m"] = params.m;
    doc["k"] = params.k;
    doc["E"] = r.minimax_error();

    bool ok = true;
    try {
        const ExtremaReport ex = verify_equioscillation(r);
        doc["equioscillation"] = {{"count", ex.points.size()}, {"alternation_ok", ex.alternation_ok}, {"spread", ex.spread}};
        ok = ok && ex.alternation_ok;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::WrongExtremaCount) throw;
        doc["equioscillation"] = {{"error", e.what()}};
        ok = false;
    }

    PartialFractionForm pf;
    try {
        pf = partial_fractions(r);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ComplexPoles && e.kind() != ErrorKind::RepeatedPoles) throw;
        doc["partial_fractions"] = {{"error", e.what()}};
        doc["certified"] = false;
        out << doc.dump(2) << '\n';
        return 2;
    }
    const PositivityCertificate cert = check_positivity_conditions(pf, params);
    doc["certificate"] = {{"d_negative", cert.d_negative},
                          {"residues_positive", cert.residues_positive},
                          {"c0_positive", cert.c0_positive},
                          {"degree_ok", cert.degree_ok},
                          {"certified", cert.certified}};
    ok = ok && cert.certified;
    if (params.m == params.k) doc["interlacing"] = zeros_poles_interlace(pf);

    const bool m_matrix = is_m_matrix(prob.a.matrix);
    doc["matrix"] = {{"n", prob.a.n()}, {"scale", prob.a.scale}, {"m_matrix", m_matrix}};
    ok = ok && m_matrix;

    if (prob.a.n() <= o.n_cap) {
        try {
            const DoublyNonnegativeReport dnn = verify_doubly_nonnegative(pf, prob.a, o.n_cap, cfg);
            doc["doubly_nonnegative"] = {{"min_entry", dnn.min_entry},
                                         {"max_entry", dnn.max_entry},
                                         {"symmetry_defect", dnn.symmetry_defect},
                                         {"nonnegative", dnn.nonnegative},
                                         {"symmetric", dnn.symmetric}};
            ok = ok && dnn.nonnegative && dnn.symmetric;
        } catch (const Error& e) {
            // a pole inside or above the spectrum leaves A - d I indefinite
            if (e.kind() != ErrorKind::ShiftNotSpd) throw;
            doc["doubly_nonnegative"] = {{"failed", e.what()}};
            ok = false;
        }
    } else {
        doc["doubly_nonnegative"] = {{"skipped", "n exceeds --n-cap"}};
    }
    doc["certified"] = ok;
    out << doc.dump(2) << '\n';
    return ok ? 0 : 2;
}

ExperimentConfig experiment_of(const Options& o, const CLI::App* cmd) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : experiment_config_from_json(read_file(o.config));
    if (cmd->count("--out")) cfg.outputs = o.out;
    if (cmd->count("--precision-bits")) cfg.precision_bits = o.precision_bits;
    if (cmd->count("--workers")) cfg.workers = o.workers;
    cfg.validate();
    prepare_dir(cfg.outputs);
    return cfg;
}

int cmd_table1(const Options& o, const CLI::App* cmd, std::ostream& out) {
    const ExperimentConfig cfg = experiment_of(o, cmd);
    const auto cells = run_table1(cfg);
    write_table1_csv(out, cells);
    auto csv = open_in(cfg.outputs, "table1.csv");
    write_table1_csv(csv, cells);
    write_manifest(cfg.outputs, "table1", cfg, {"table1.csv"});
    return 0;
}

int cmd_table2(const Options& o, const CLI::App* cmd, std::ostream& out) {
    const ExperimentConfig cfg = experiment_of(o, cmd);
    const auto cells = run_table2(cfg);
    write_table2_csv(out, cells);
    auto csv = open_in(cfg.outputs, "table2.csv");
    write_table2_csv(csv, cells);
    write_manifest(cfg.outputs, "table2", cfg, {"table2.csv"});
    return 0;
}

int cmd_figures(const Options& o, const CLI::App* cmd, std::ostream& out) {
    const ExperimentConfig cfg = experiment_of(o, cmd);
    const FiguresData data = run_figures(cfg);
    const auto files = write_figures(cfg.outputs, cfg, data);
    write_manifest(cfg.outputs, "figures", cfg, files);
    out << "alpha,slope,expected\n";
    for (const auto& [alpha, slope] : data.slopes) out << alpha << ',' << slope << ',' << -2 * (1 - alpha) << '\n';
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional powers of SPD M-matrices by best uniform rational approximation", "bura"};
    app.require_subcommand(1);
    Options o;

    auto* approx = app.add_subcommand("approx", "compute and export BURA coefficients");
    add_bura_options(approx, o);
    approx->add_option("--out", o.out, "directory for coefficients.json");

    auto* solve = app.add_subcommand("solve", "apply A^(-beta) r(A) to a right-hand side");
    add_bura_options(solve, o);
    add_problem_options(solve, o);
    solve->add_option("--rhs", o.rhs, "f1, f2, unit:<i> or file:<path>")->capture_default_str();
    solve->add_option("--out", o.out, "directory for solution.csv and report.json");

    auto* certify = app.add_subcommand("certify", "positivity certificate and doubly nonnegative check");
    add_bura_options(certify, o);
    add_problem_options(certify, o);
    certify->add_option("--n-cap", o.n_cap, "largest n materialized")->capture_default_str();

    auto* table1 = app.add_subcommand("table1", "minimax errors over the (alpha, k) grid");
    auto* table2 = app.add_subcommand("table2", "l2 relative errors over the (h, alpha, k) grid");
    auto* figures = app.add_subcommand("figures", "plot-ready CSV data");
    for (auto* cmd : {table1, table2, figures}) {
        add_experiment_options(cmd, o);
        cmd->add_option("--out", o.out, "output directory");
    }

    std::vector<const char*> argv{"bura"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*approx) return cmd_approx(o, out);
        if (*solve) return cmd_solve(o, out);
        if (*certify) return cmd_certify(o, out);
        if (*table1) return cmd_table1(o, table1, out);
        if (*table2) return cmd_table2(o, table2, out);
        if (*figures) return cmd_figures(o, figures, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int cli_dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace bura
