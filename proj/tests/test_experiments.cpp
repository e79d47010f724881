#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "bura/error.hpp"
#include "bura/experiments.hpp"
#include "bura/spectral.hpp"
#include "support.hpp"

using namespace bura;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("bura_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.alphas = {0.5};
    cfg.ks = {5, 6};
    cfg.mesh_exponents = {5, 6, 7};
    return cfg;
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    const int rc = cli_dispatch(args, out, err);
    if (out_text) *out_text = out.str();
    return rc;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("Irwin-Hall density") {
    CHECK(irwin_hall4_density(-0.1) == 0.0);
    CHECK(irwin_hall4_density(4.1) == 0.0);
    CHECK(irwin_hall4_density(0.0) == 0.0);
    CHECK(irwin_hall4_density(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(irwin_hall4_density(1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(irwin_hall4_density(1.5) == doctest::Approx(irwin_hall4_density(2.5)).epsilon(1e-15));
    // integrates to one
    double sum = 0;
    const int steps = 4000;
    for (int i = 0; i < steps; ++i) sum += irwin_hall4_density((i + 0.5) * 4.0 / steps) * 4.0 / steps;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("right-hand sides") {
    const int n = 255;  // h = 1/256, support nodes are exactly 127 .. 191
    RhsSpec f1;
    f1.kind = RhsKind::f1_piecewise_constant;
    const Eigen::VectorXd v1 = sample_rhs(f1, n);
    CHECK(v1[126] == 0.0);
    CHECK(v1[127] == 1.0);
    CHECK(v1[191] == 1.0);
    CHECK(v1[192] == 0.0);
    CHECK(v1.sum() == 65.0);

    const Eigen::VectorXd v2 = sample_rhs({}, n);
    CHECK(v2.minCoeff() >= 0.0);
    CHECK(v2[127] == 0.0);
    CHECK(v2[191] == 0.0);
    CHECK(v2[159] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v2.maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v2.head(127).cwiseAbs().maxCoeff() == 0.0);

    RhsSpec scaled;
    scaled.amplitude = 2.5;
    CHECK((sample_rhs(scaled, n) - 2.5 * v2).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::VectorXd e = sample_rhs(rhs_from_string("unit:3"), 8);
    CHECK(e.sum() == 1.0);
    CHECK(e[3] == 1.0);
    CHECK_THROWS_AS(sample_rhs(rhs_from_string("unit:8"), 8), Error);

    TempDir dir("rhs");
    const fs::path file = dir.path / "f.txt";
    std::ofstream(file) << "1, 2\n3 4.5\n";
    const Eigen::VectorXd vf = sample_rhs(rhs_from_string("file:" + file.string()), 4);
    CHECK(vf == Eigen::Vector4d(1, 2, 3, 4.5));
    CHECK_THROWS_AS(sample_rhs(rhs_from_string("file:" + file.string()), 5), Error);
    CHECK_THROWS_AS(sample_rhs(rhs_from_string("file:/nonexistent/f.txt"), 4), Error);

    CHECK_THROWS_AS(rhs_from_string("f3"), Error);
    CHECK_THROWS_AS(rhs_from_string("unit:x"), Error);
    CHECK_THROWS_AS(rhs_from_string("file:"), Error);
    for (const char* s : {"f1", "f2", "unit:7"}) CHECK(to_string(rhs_from_string(s)) == s);
}

TEST_CASE("configuration round trip and hash") {
    ExperimentConfig cfg = small_config();
    cfg.rhs.kind = RhsKind::f1_piecewise_constant;
    cfg.solver.linear_solver = LinearSolver::conjugate_gradient;
    cfg.workers = 3;
    const std::string text = experiment_config_to_json(cfg);
    const ExperimentConfig back = experiment_config_from_json(text);
    CHECK(experiment_config_to_json(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));

    ExperimentConfig other = cfg;
    other.ks = {5, 7};
    CHECK(config_hash(other) != config_hash(cfg));

    const ExperimentConfig defaults = experiment_config_from_json("{}");
    CHECK(defaults.alphas.size() == 3);
    CHECK(defaults.mesh_exponents.front() == 5);
    CHECK(defaults.mesh_exponents.back() == 11);
    CHECK(defaults.rhs.kind == RhsKind::f2_irwin_hall);
}

TEST_CASE("configuration validation") {
    const auto kind = [](const std::string& text) {
        try {
            experiment_config_from_json(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::NonConvergence;
    };
    CHECK(kind("{\"alphas\": [1.0]}") == ErrorKind::InvalidArgument);
    CHECK(kind("{\"ks\": [-1]}") == ErrorKind::InvalidArgument);
    CHECK(kind("{\"mesh_exponents\": [13]}") == ErrorKind::InvalidArgument);
    CHECK(kind("{\"mesh_exponents\": []}") == ErrorKind::InvalidArgument);
    CHECK(kind("{\"solver\": {\"cg_rel_tol\": 0.1}}") == ErrorKind::InvalidArgument);
    CHECK(kind("{\"rhs\": \"f9\"}") == ErrorKind::InvalidArgument);
    CHECK(kind("[1, 2]") == ErrorKind::Io);
    CHECK(kind("{\"alphas\": ") == ErrorKind::Io);
    CHECK(kind("{\"alphas\": \"x\"}") == ErrorKind::Io);
}

TEST_CASE("pooled slope recovers a known exponent") {
    std::vector<Fig3Row> rows;
    for (int k : {5, 6, 7}) {
        for (int m = 5; m <= 11; ++m) {
            Fig3Row r;
            r.alpha = 0.5;
            r.k = k;
            r.mesh_exponent = m;
            r.h = std::ldexp(1.0, -m);
            r.ratio = (1.0 + k) * std::pow(r.h, 0.75);
            rows.push_back(r);
        }
    }
    CHECK(pooled_log2_slope(rows, 0.5) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK_THROWS_AS(pooled_log2_slope(rows, 0.25), Error);
}

TEST_CASE("l2 error cells respect the mesh estimate") {
    const ExperimentConfig cfg = small_config();
    const std::vector<Table2Cell> cells = run_table2(cfg);
    REQUIRE(cells.size() == 6);
    CHECK(cells.front().mesh_exponent == 5);
    CHECK(cells.back().mesh_exponent == 7);
    for (const auto& c : cells) {
        CHECK(c.rel_l2 > 0.0);
        CHECK(c.rel_l2 <= c.bound);
        CHECK(c.h == std::ldexp(1.0, -c.mesh_exponent));
    }

    ExperimentConfig unit = cfg;
    unit.rhs = rhs_from_string("unit:0");
    CHECK_THROWS_AS(run_table2(unit), Error);
}

TEST_CASE("experiments are deterministic") {
    ExperimentConfig cfg = small_config();
    cfg.workers = 4;
    std::ostringstream a, b;
    write_table2_csv(a, run_table2(cfg));
    cfg.workers = 1;
    write_table2_csv(b, run_table2(cfg));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("mesh_exponent,h,alpha,k,rel_l2,bound\n", 0) == 0);

    std::ostringstream t1;
    write_table1_csv(t1, run_table1(cfg));
    CHECK(t1.str().rfind("alpha,k,E,stahl_bound,iterations\n", 0) == 0);
}

TEST_CASE("figure data") {
    ExperimentConfig cfg = small_config();
    const FiguresData d = run_figures(cfg);
    CHECK(d.mesh_exponent == 7);
    CHECK(d.x.size() == 127);
    CHECK(d.u_f1.size() == 1);
    CHECK(d.overlays.size() == 1);
    CHECK(d.overlays[0].size() == 2);
    CHECK(d.fig3.size() == 6);
    for (const auto& r : d.fig3) CHECK(r.ratio == doctest::Approx(r.rel_l2 / r.rel_a2).epsilon(1e-14));
    // the oracle solutions are positive for nonnegative data
    CHECK(d.u_f1[0].minCoeff() > 0.0);
    CHECK(d.u_f2[0].minCoeff() > 0.0);
    for (const auto& u : d.overlays[0]) CHECK(u.minCoeff() >= 0.0);

    TempDir dir("fig");
    const auto files = write_figures(dir.str(), cfg, d);
    for (const auto& f : files) CHECK(fs::exists(dir.path / f));
    CHECK(slurp(dir.path / "fig3_slopes.csv").find("0.5,") != std::string::npos);
}

TEST_CASE("positivity over the experiment grid") {
    for (double alpha : testing::kAlphas) {
        for (int k : testing::kKs) {
            const auto& b = testing::bura_of(alpha, k);
            CHECK(check_positivity_conditions(b.pf, b.r.params()).certified);
            for (int mexp : {5, 8}) {
                const int n = (1 << mexp) - 1;
                const NormalizedMatrix a = laplacian_1d(n);
                for (const char* rhs : {"f1", "f2"}) {
                    const Eigen::VectorXd u = apply_bura_inverse(b.pf, a, sample_rhs(rhs_from_string(rhs), n)).u_r;
                    CHECK(u.minCoeff() >= -1e-12 * u.maxCoeff());
                }
            }
        }
    }
}

TEST_CASE("command line") {
    TempDir dir("cli");
    std::string out;

    CHECK(run({"approx", "--alpha", "0.5", "--k", "5", "--out", dir.str()}, &out) == 0);
    const auto coeffs = nlohmann::json::parse(out);
    CHECK(coeffs["E"].get<double>() == doctest::Approx(2.68957e-4).epsilon(1e-5));
    CHECK(fs::exists(dir.path / "coefficients.json"));

    CHECK(run({"solve", "--alpha", "0.5", "--k", "5", "--n", "63", "--rhs", "f1", "--out", dir.str(),
               "--coefficients", (dir.path / "coefficients.json").string()},
              &out) == 0);
    CHECK(fs::exists(dir.path / "solution.csv"));
    CHECK(fs::exists(dir.path / "report.json"));

    CHECK(run({"certify", "--alpha", "0.5", "--k", "6", "--n", "64"}) == 0);
    CHECK(run({"certify", "--alpha", "0.5", "--k", "5", "--m", "5", "--beta", "2", "--n", "32"}) == 2);

    std::ostringstream mtx;
    write_matrix_market(mtx, laplacian_1d(20).matrix);
    std::ofstream(dir.path / "a.mtx") << mtx.str();
    CHECK(run({"solve", "--alpha", "0.25", "--k", "5", "--matrix", "mtx:" + (dir.path / "a.mtx").string(),
               "--rhs", "unit:2", "--out", dir.str()}) == 0);

    const fs::path cfg = dir.path / "cfg.json";
    ExperimentConfig small = small_config();
    small.outputs = (dir.path / "tables").string();
    std::ofstream(cfg) << experiment_config_to_json(small);
    CHECK(run({"table1", "--config", cfg.string()}) == 0);
    CHECK(run({"table2", "--config", cfg.string()}) == 0);
    CHECK(fs::exists(dir.path / "tables" / "table2.csv"));
    const auto manifest = nlohmann::json::parse(slurp(dir.path / "tables" / "manifest.json"));
    CHECK(manifest["command"] == "table2");

    CHECK(run({}) == 1);
    CHECK(run({"bogus"}) == 1);
    CHECK(run({"solve", "--n", "0"}) == 1);
    CHECK(run({"approx", "--alpha", "1.5"}) == 1);
    CHECK(run({"table1", "--config", "/nonexistent/cfg.json"}) == 1);
}

}
