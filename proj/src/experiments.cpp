#include "bura/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bura/error.hpp"
#include "bura/matrix.hpp"
#include "bura/spectral.hpp"
#include "parallel.hpp"

namespace bura {
namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int grid_size(int mesh_exponent) { return (1 << mesh_exponent) - 1; }

json rhs_to_json(const RhsSpec& rhs) {
    json j;
    j["kind"] = to_string(rhs);
    j["support"] = {rhs.support_lo, rhs.support_hi};
    j["amplitude"] = rhs.amplitude;
    return j;
}

RhsSpec rhs_from_json(const json& j) {
    if (j.is_string()) return rhs_from_string(j.get<std::string>());
    RhsSpec rhs = rhs_from_string(j.at("kind").get<std::string>());
    if (j.contains("support")) {
        const auto s = j.at("support").get<std::vector<double>>();
        if (s.size() != 2) throw Error(ErrorKind::InvalidArgument, "rhs support must have two entries");
        rhs.support_lo = s[0];
        rhs.support_hi = s[1];
    }
    rhs.amplitude = j.value("amplitude", 1.0);
    return rhs;
}

json config_to_json_value(const ExperimentConfig& cfg) {
    json j;
    j["alphas"] = cfg.alphas;
    j["ks"] = cfg.ks;
    j["beta"] = cfg.beta;
    j["mesh_exponents"] = cfg.mesh_exponents;
    j["rhs"] = rhs_to_json(cfg.rhs);
    j["outputs"] = cfg.outputs;
    j["precision_bits"] = cfg.precision_bits;
    j["workers"] = cfg.workers;
    j["solver"] = {{"linear_solver", to_string(cfg.solver.linear_solver)},
                   {"cg_rel_tol", cfg.solver.cg_rel_tol},
                   {"cg_max_iter", cfg.solver.cg_max_iter},
                   {"parallel_shifted_solves", cfg.solver.parallel_shifted_solves}};
    return j;
}

double pow_scale(double h, double alpha) { return std::pow(h / 2, 2 * alpha); }

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (std::filesystem::path(dir) / name).string());
    return out;
}

}  // namespace

RhsSpec rhs_from_string(const std::string& text) {
    RhsSpec rhs;
    if (text == "f1" || text == "f1_piecewise_constant") {
        rhs.kind = RhsKind::f1_piecewise_constant;
    } else if (text == "f2" || text == "f2_irwin_hall") {
        rhs.kind = RhsKind::f2_irwin_hall;
    } else if (text.rfind("unit:", 0) == 0) {
        rhs.kind = RhsKind::unit_vector;
        try {
            std::size_t used = 0;
            rhs.index = std::stoi(text.substr(5), &used);
            if (used != text.size() - 5) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad unit vector index in '" + text + "'");
        }
    } else if (text.rfind("file:", 0) == 0 && text.size() > 5) {
        rhs.kind = RhsKind::file;
        rhs.path = text.substr(5);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown right-hand side '" + text + "'");
    }
    return rhs;
}

std::string to_string(const RhsSpec& rhs) {
    switch (rhs.kind) {
        case RhsKind::f1_piecewise_constant: return "f1";
        case RhsKind::f2_irwin_hall: return "f2";
        case RhsKind::unit_vector: return "unit:" + std::to_string(rhs.index);
        case RhsKind::file: return "file:" + rhs.path;
    }
    return "?";
}

double irwin_hall4_density(double y) {
    if (y <= 0 || y >= 4) return 0.0;
    if (y > 2) y = 4 - y;
    if (y <= 1) return y * y * y / 6;
    return (-3 * y * y * y + 12 * y * y - 12 * y + 4) / 6;
}

Eigen::VectorXd sample_rhs(const RhsSpec& rhs, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive, got " + std::to_string(n));
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    const double h = 1.0 / (n + 1);
    const double width = rhs.support_hi - rhs.support_lo;
    if ((rhs.kind == RhsKind::f1_piecewise_constant || rhs.kind == RhsKind::f2_irwin_hall) && !(width > 0)) {
        throw Error(ErrorKind::InvalidArgument, "rhs support must be a proper interval");
    }
    switch (rhs.kind) {
        case RhsKind::f1_piecewise_constant:
            for (int i = 0; i < n; ++i) {
                const double x = (i + 1) * h;
                if (x >= rhs.support_lo && x <= rhs.support_hi) f[i] = rhs.amplitude;
            }
            break;
        case RhsKind::f2_irwin_hall:
            for (int i = 0; i < n; ++i) {
                const double x = (i + 1) * h;
                f[i] = rhs.amplitude * 1.5 * irwin_hall4_density(4 * (x - rhs.support_lo) / width);
            }
            break;
        case RhsKind::unit_vector:
            if (rhs.index < 0 || rhs.index >= n) {
                throw Error(ErrorKind::InvalidArgument, "unit vector index " + std::to_string(rhs.index) +
                                                            " outside [0, " + std::to_string(n) + ")");
            }
            f[rhs.index] = rhs.amplitude;
            break;
        case RhsKind::file: {
            std::ifstream in(rhs.path);
            if (!in) throw Error(ErrorKind::Io, "cannot open " + rhs.path);
            std::stringstream buf;
            buf << in.rdbuf();
            std::string text = buf.str();
            for (char& c : text)
                if (c == ',' || c == ';') c = ' ';
            std::istringstream values(text);
            std::vector<double> v;
            double x = 0;
            while (values >> x) v.push_back(x);
            if (!values.eof()) throw Error(ErrorKind::Io, rhs.path + ": non-numeric content");
            if (static_cast<int>(v.size()) != n) {
                throw Error(ErrorKind::InvalidArgument, rhs.path + " holds " + std::to_string(v.size()) +
                                                            " values, expected " + std::to_string(n));
            }
            for (int i = 0; i < n; ++i) f[i] = rhs.amplitude * v[i];
            break;
        }
    }
    return f;
}

void ExperimentConfig::validate() const {
    if (alphas.empty() || ks.empty() || mesh_exponents.empty()) {
        throw Error(ErrorKind::InvalidArgument, "alphas, ks and mesh_exponents must be non-empty");
    }
    for (double a : alphas)
        if (!(a > 0 && a < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    for (int k : ks)
        if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be non-negative");
    if (beta < 1) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    for (int m : mesh_exponents) {
        if (m < 1 || grid_size(m) > kDenseEigenCap) {
            throw Error(ErrorKind::InvalidArgument,
                        "mesh exponent " + std::to_string(m) + " outside [1, 12] (oracle cap)");
        }
    }
    if (precision_bits < 1 || precision_bits > 512) {
        throw Error(ErrorKind::InvalidArgument, "precision_bits must lie in [1, 512]");
    }
    if (workers < 0) throw Error(ErrorKind::InvalidArgument, "workers must be non-negative");
    solver.validate();
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    ExperimentConfig cfg;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error(ErrorKind::Io, "configuration must be a JSON object");
        if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
        if (j.contains("ks")) cfg.ks = j.at("ks").get<std::vector<int>>();
        cfg.beta = j.value("beta", cfg.beta);
        if (j.contains("mesh_exponents")) cfg.mesh_exponents = j.at("mesh_exponents").get<std::vector<int>>();
        if (j.contains("rhs")) cfg.rhs = rhs_from_json(j.at("rhs"));
        cfg.outputs = j.value("outputs", cfg.outputs);
        cfg.precision_bits = j.value("precision_bits", cfg.precision_bits);
        cfg.workers = j.value("workers", cfg.workers);
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            if (s.contains("linear_solver")) {
                cfg.solver.linear_solver = linear_solver_from_string(s.at("linear_solver").get<std::string>());
            }
            cfg.solver.cg_rel_tol = s.value("cg_rel_tol", cfg.solver.cg_rel_tol);
            cfg.solver.cg_max_iter = s.value("cg_max_iter", cfg.solver.cg_max_iter);
            cfg.solver.parallel_shifted_solves = s.value("parallel_shifted_solves", false);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("malformed configuration: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) { return config_to_json_value(cfg).dump(2); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string canonical = config_to_json_value(cfg).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<ApproxCell> compute_approximations(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ApproxCell> cells;
    for (double a : cfg.alphas)
        for (int k : cfg.ks) cells.push_back({a, k, {}, 0, 0.0});
    RemezOptions opts;
    opts.precision_bits = cfg.precision_bits;
    detail::parallel_for(static_cast<int>(cells.size()), detail::worker_count(cfg.workers, static_cast<int>(cells.size())),
                         [&](int i) {
                             ApproxCell& c = cells[i];
                             const RationalApprox r = bura_compute({c.alpha, cfg.beta, c.k, c.k}, opts);
                             c.coeffs = make_coefficient_set(r, partial_fractions(r));
                             c.iterations = r.iterations();
                             c.spread = r.deviation_spread();
                         });
    return cells;
}

std::vector<Table1Cell> run_table1(const std::vector<ApproxCell>& approx) {
    std::vector<Table1Cell> out;
    for (const auto& c : approx) {
        out.push_back({c.alpha, c.k, c.coeffs.minimax_error, c.k >= 1 ? stahl_bound(c.alpha, c.k) : 0.0,
                       c.iterations});
    }
    return out;
}

std::vector<Table1Cell> run_table1(const ExperimentConfig& cfg) { return run_table1(compute_approximations(cfg)); }

double mesh_error_bound(double h, double alpha, int k) {
    return std::pow(4 / h, 2 * (1 - alpha)) * std::abs(std::sin(std::numbers::pi * (1 - alpha))) *
           std::exp(-2 * std::numbers::pi * std::sqrt((1 - alpha) * k));
}

std::vector<Table2Cell> run_table2(const ExperimentConfig& cfg, const std::vector<ApproxCell>& approx) {
    cfg.validate();
    if (cfg.rhs.kind != RhsKind::f1_piecewise_constant && cfg.rhs.kind != RhsKind::f2_irwin_hall) {
        throw Error(ErrorKind::InvalidArgument, "the l2 error table needs rhs f1 or f2");
    }
    const int meshes = static_cast<int>(cfg.mesh_exponents.size());
    std::vector<std::vector<Table2Cell>> rows(meshes);
    detail::parallel_for(meshes, detail::worker_count(cfg.workers, meshes), [&](int mi) {
        const int me = cfg.mesh_exponents[mi];
        const int n = grid_size(me);
        const double h = 1.0 / (n + 1);
        const NormalizedMatrix a = laplacian_1d(n);
        const EigenDecomposition eig = analytic_laplacian_eigenpairs(n);
        const Eigen::VectorXd f = sample_rhs(cfg.rhs, n);
        for (double alpha : cfg.alphas) {
            const double s = pow_scale(h, alpha);
            const Eigen::VectorXd u = exact_frac_apply(eig, alpha, f);
            for (const auto& c : approx) {
                if (c.alpha != alpha) continue;
                const Eigen::VectorXd ur = apply_bura_inverse(c.coeffs.pf, a, f, cfg.solver).u_r;
                rows[mi].push_back({me, h, alpha, c.k, s * (ur - u).norm() / f.norm(), mesh_error_bound(h, alpha, c.k)});
            }
        }
    });
    std::vector<Table2Cell> out;
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<Table2Cell> run_table2(const ExperimentConfig& cfg) {
    return run_table2(cfg, compute_approximations(cfg));
}

double pooled_log2_slope(const std::vector<Fig3Row>& rows, double alpha) {
    std::map<int, std::vector<std::pair<double, double>>> groups;
    for (const auto& r : rows)
        if (r.alpha == alpha && r.ratio > 0) groups[r.k].emplace_back(std::log2(r.h), std::log2(r.ratio));
    double sxy = 0, sxx = 0;
    for (const auto& [k, pts] : groups) {
        double mx = 0, my = 0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= pts.size();
        my /= pts.size();
        for (const auto& [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    if (sxx == 0) throw Error(ErrorKind::InvalidArgument, "slope fit needs at least two mesh sizes");
    return sxy / sxx;
}

FiguresData run_figures(const ExperimentConfig& cfg, const std::vector<ApproxCell>& approx) {
    cfg.validate();
    RhsSpec f1_spec = cfg.rhs;
    f1_spec.kind = RhsKind::f1_piecewise_constant;
    RhsSpec f2_spec = cfg.rhs;
    f2_spec.kind = RhsKind::f2_irwin_hall;

    FiguresData data;
    int finest = 0;
    for (int me : cfg.mesh_exponents) finest = std::max(finest, me);
    data.mesh_exponent = finest;

    const int meshes = static_cast<int>(cfg.mesh_exponents.size());
    std::vector<std::vector<Fig3Row>> rows(meshes);
    std::vector<std::vector<Eigen::VectorXd>> finest_overlays;
    detail::parallel_for(meshes, detail::worker_count(cfg.workers, meshes), [&](int mi) {
        const int me = cfg.mesh_exponents[mi];
        const int n = grid_size(me);
        const double h = 1.0 / (n + 1);
        const NormalizedMatrix a = laplacian_1d(n);
        const EigenDecomposition eig = analytic_laplacian_eigenpairs(n);
        const Eigen::VectorXd f = sample_rhs(f1_spec, n);
        const double f_l2 = f.norm();
        std::vector<std::vector<Eigen::VectorXd>> overlays;
        for (double alpha : cfg.alphas) {
            const double s = pow_scale(h, alpha);
            const Eigen::VectorXd u = exact_frac_apply(eig, alpha, f);
            overlays.emplace_back();
            for (const auto& c : approx) {
                if (c.alpha != alpha) continue;
                const Eigen::VectorXd ur = apply_bura_inverse(c.coeffs.pf, a, f, cfg.solver).u_r;
                const Eigen::VectorXd e = ur - u;
                Fig3Row row{alpha, c.k, me, h, s * e.norm() / f_l2, energy_norm(eig, 2.0, e) / f_l2, 0.0};
                row.ratio = row.rel_a2 > 0 ? row.rel_l2 / row.rel_a2 : 0.0;
                rows[mi].push_back(row);
                if (me == finest) overlays.back().push_back(s * ur);
            }
        }
        if (me == finest) finest_overlays = std::move(overlays);
    });
    for (auto& r : rows) data.fig3.insert(data.fig3.end(), r.begin(), r.end());
    data.overlays = std::move(finest_overlays);
    for (double alpha : cfg.alphas) {
        if (meshes >= 2) data.slopes[alpha] = pooled_log2_slope(data.fig3, alpha);
    }

    const int n = grid_size(finest);
    const double h = 1.0 / (n + 1);
    const EigenDecomposition eig = analytic_laplacian_eigenpairs(n);
    data.x = Eigen::VectorXd::LinSpaced(n, h, n * h);
    data.f1 = sample_rhs(f1_spec, n);
    data.f2 = sample_rhs(f2_spec, n);
    for (double alpha : cfg.alphas) {
        const double s = pow_scale(h, alpha);
        data.u_f1.push_back(s * exact_frac_apply(eig, alpha, data.f1));
        data.u_f2.push_back(s * exact_frac_apply(eig, alpha, data.f2));
    }
    return data;
}

FiguresData run_figures(const ExperimentConfig& cfg) { return run_figures(cfg, compute_approximations(cfg)); }

void write_table1_csv(std::ostream& out, const std::vector<Table1Cell>& cells) {
    out << "alpha,k,E,stahl_bound,iterations\n";
    for (const auto& c : cells) {
        out << fmt("%g", c.alpha) << ',' << c.k << ',' << fmt("%.4e", c.E) << ',' << fmt("%.4e", c.stahl) << ','
            << c.iterations << '\n';
    }
}

void write_table2_csv(std::ostream& out, const std::vector<Table2Cell>& cells) {
    out << "mesh_exponent,h,alpha,k,rel_l2,bound\n";
    for (const auto& c : cells) {
        out << c.mesh_exponent << ',' << fmt("%.17g", c.h) << ',' << fmt("%g", c.alpha) << ',' << c.k << ','
            << fmt("%.6e", c.rel_l2) << ',' << fmt("%.6e", c.bound) << '\n';
    }
}

std::vector<std::string> write_figures(const std::string& dir, const ExperimentConfig& cfg, const FiguresData& data) {
    std::vector<std::string> files;
    {
        files.push_back("fig1.csv");
        auto out = open_output(dir, files.back());
        out << "x,f1,f2";
        for (double a : cfg.alphas) out << ",u_f1_alpha_" << fmt("%g", a);
        for (double a : cfg.alphas) out << ",u_f2_alpha_" << fmt("%g", a);
        out << '\n';
        for (Eigen::Index i = 0; i < data.x.size(); ++i) {
            out << fmt("%.17g", data.x[i]) << ',' << fmt("%.17g", data.f1[i]) << ',' << fmt("%.17g", data.f2[i]);
            for (const auto& u : data.u_f1) out << ',' << fmt("%.17g", u[i]);
            for (const auto& u : data.u_f2) out << ',' << fmt("%.17g", u[i]);
            out << '\n';
        }
    }
    for (std::size_t ai = 0; ai < cfg.alphas.size() && ai < data.overlays.size(); ++ai) {
        const double alpha = cfg.alphas[ai];
        files.push_back("fig2_alpha_" + fmt("%g", alpha) + ".csv");
        auto out = open_output(dir, files.back());
        out << "x,exact";
        for (int k : cfg.ks) out << ",k" << k;
        out << '\n';
        for (Eigen::Index i = 0; i < data.x.size(); ++i) {
            out << fmt("%.17g", data.x[i]) << ',' << fmt("%.17g", data.u_f1[ai][i]);
            for (const auto& u : data.overlays[ai]) out << ',' << fmt("%.17g", u[i]);
            out << '\n';
        }
    }
    {
        files.push_back("fig3.csv");
        auto out = open_output(dir, files.back());
        out << "alpha,k,mesh_exponent,h,rel_l2,rel_a2,ratio\n";
        for (const auto& r : data.fig3) {
            out << fmt("%g", r.alpha) << ',' << r.k << ',' << r.mesh_exponent << ',' << fmt("%.17g", r.h) << ','
                << fmt("%.17g", r.rel_l2) << ',' << fmt("%.17g", r.rel_a2) << ',' << fmt("%.17g", r.ratio) << '\n';
        }
    }
    {
        files.push_back("fig3_slopes.csv");
        auto out = open_output(dir, files.back());
        out << "alpha,slope,expected\n";
        for (const auto& [alpha, slope] : data.slopes) {
            out << fmt("%g", alpha) << ',' << fmt("%.6f", slope) << ',' << fmt("%.6f", -2 * (1 - alpha)) << '\n';
        }
    }
    return files;
}

void write_manifest(const std::string& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files) {
    json j;
    j["command"] = command;
    j["config"] = config_to_json_value(cfg);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    j["config_hash"] = hash;
    j["files"] = files;
    auto out = open_output(dir, "manifest.json");
    out << j.dump(2) << '\n';
}

}  // namespace bura
