#pragma once

// Experiment drivers for the model problem A_h = 4 h^-2 tridiag(-1/4, 1/2, -1/4)
// on the grid x_i = i h, h = 2^-m: minimax error table, l2 error table and the
// plot-ready figure data, plus the command line front end.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bura/rational.hpp"
#include "bura/solver.hpp"

namespace bura {

enum class RhsKind { f1_piecewise_constant, f2_irwin_hall, unit_vector, file };

struct RhsSpec {
    RhsKind kind = RhsKind::f2_irwin_hall;
    double support_lo = 0.5;
    double support_hi = 0.75;
    double amplitude = 1.0;
    int index = 0;     // unit_vector, zero based
    std::string path;  // file
};

/// "f1", "f2", "unit:<i>", "file:<path>". Throws Error(InvalidArgument).
RhsSpec rhs_from_string(const std::string& text);
std::string to_string(const RhsSpec& rhs);

/// Density of the sum of four independent U(0, 1) variates (cubic B-spline on [0, 4]).
double irwin_hall4_density(double y);

/// Nodal samples at x_i = (i + 1) / (n + 1), i = 0 .. n-1.
///   f1: amplitude on [lo, hi], 0 elsewhere.
///   f2: amplitude * (3/2) * density(4 (x - lo) / (hi - lo)), peak = amplitude.
/// A file holds n numbers separated by whitespace or commas.
Eigen::VectorXd sample_rhs(const RhsSpec& rhs, int n);

struct ExperimentConfig {
    std::vector<double> alphas{0.25, 0.5, 0.75};
    std::vector<int> ks{5, 6, 7};
    int beta = 1;
    std::vector<int> mesh_exponents{5, 6, 7, 8, 9, 10, 11};
    RhsSpec rhs;
    std::string outputs = "bura_out";
    int precision_bits = default_precision_bits();
    int workers = 0;  // 0: hardware concurrency
    SolverConfig solver;

    /// Throws Error(InvalidArgument) for out-of-range entries, including mesh
    /// exponents whose grid exceeds the dense oracle cap.
    void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
/// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// One (alpha, k) approximation with m = k and the configured beta.
struct ApproxCell {
    double alpha = 0.0;
    int k = 0;
    CoefficientSet coeffs;
    int iterations = 0;
    double spread = 0.0;
};

/// All (alpha, k) approximations, alpha-major, computed on the worker pool.
std::vector<ApproxCell> compute_approximations(const ExperimentConfig& cfg);

struct Table1Cell {
    double alpha = 0.0;
    int k = 0;
    double E = 0.0;
    double stahl = 0.0;
    int iterations = 0;
};

std::vector<Table1Cell> run_table1(const ExperimentConfig& cfg);
std::vector<Table1Cell> run_table1(const std::vector<ApproxCell>& approx);

/// (4/h)^(2(1-alpha)) |sin pi (1-alpha)| exp(-2 pi sqrt((1-alpha) k))
double mesh_error_bound(double h, double alpha, int k);

struct Table2Cell {
    int mesh_exponent = 0;
    double h = 0.0;
    double alpha = 0.0;
    int k = 0;
    double rel_l2 = 0.0;  // ||u_hr - u_h||_2 / ||f||_2
    double bound = 0.0;   // mesh_error_bound(h, alpha, k)
};

/// Cells ordered by mesh exponent, then alpha, then k.
std::vector<Table2Cell> run_table2(const ExperimentConfig& cfg);
std::vector<Table2Cell> run_table2(const ExperimentConfig& cfg, const std::vector<ApproxCell>& approx);

struct Fig3Row {
    double alpha = 0.0;
    int k = 0;
    int mesh_exponent = 0;
    double h = 0.0;
    double rel_l2 = 0.0;  // ||u_hr - u_h||_2 / ||f||_2
    double rel_a2 = 0.0;  // ||u_r - u||_{A^2} / ||f||_{A^0}
    double ratio = 0.0;   // rel_l2 / rel_a2
};

struct FiguresData {
    int mesh_exponent = 0;  // grid of the first two figures (finest configured)
    Eigen::VectorXd x;
    Eigen::VectorXd f1;
    Eigen::VectorXd f2;
    std::vector<Eigen::VectorXd> u_f1;  // oracle A_h^(-alpha) f1 per alpha
    std::vector<Eigen::VectorXd> u_f2;
    std::vector<std::vector<Eigen::VectorXd>> overlays;  // [alpha][k]: u_hr for f1
    std::vector<Fig3Row> fig3;
    std::map<double, double> slopes;  // alpha -> d log2(ratio) / d log2(h), pooled over k
};

FiguresData run_figures(const ExperimentConfig& cfg);
FiguresData run_figures(const ExperimentConfig& cfg, const std::vector<ApproxCell>& approx);

/// Least-squares slope of log2(ratio) against log2(h) with one intercept per k.
double pooled_log2_slope(const std::vector<Fig3Row>& rows, double alpha);

void write_table1_csv(std::ostream& out, const std::vector<Table1Cell>& cells);
void write_table2_csv(std::ostream& out, const std::vector<Table2Cell>& cells);

/// Writes the CSV bundle and returns the file names, relative to `dir`.
std::vector<std::string> write_figures(const std::string& dir, const ExperimentConfig& cfg,
                                       const FiguresData& data);

/// manifest.json: command, config, config hash and the emitted files.
void write_manifest(const std::string& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files);

/// Command line entry point. Returns 0 on success, 2 when a certificate
/// fails, 1 on any error (usage errors print the synopsis to `err`).
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace bura
