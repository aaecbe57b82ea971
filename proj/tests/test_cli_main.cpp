#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("latthom_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LATTHOM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& body) {
    const fs::path p = dir.path / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("layered-verify reproduces the closed forms and is byte-deterministic") {
    TempDir dir;
    const fs::path cfg = write_config(dir, "lv.json", R"({
        "lattice": "zd-nn",
        "environment": {"distribution": {"kind": "two_point", "v1": 1, "v2": 4, "prob": 0.5},
                         "mode": "layered_e1", "seed": 7},
        "k_schedule": [2, 4], "samples": 3, "seed": 42,
        "out_dir": ")" + (dir.path / "a").string() + R"("})");
    REQUIRE(run_cli("layered-verify -c " + cfg.string()) == 0);
    const std::string first = slurp(dir.path / "a" / "layered_verify.csv");
    CHECK(first.find("1.6000000000000001,1.6000000000000001") != std::string::npos);
    CHECK(first.find("2.5,2.5") != std::string::npos);

    REQUIRE(run_cli("layered-verify -c " + cfg.string() + " --out-dir " + (dir.path / "b").string()) == 0);
    CHECK(first == slurp(dir.path / "b" / "layered_verify.csv"));
}

TEST_CASE("moments emits exact two-point values") {
    TempDir dir;
    const fs::path cfg = write_config(dir, "mo.json", R"({
        "lattice": "zd-nn",
        "environment": {"distribution": {"kind": "two_point", "v1": 1, "v2": 4, "prob": 0.5},
                         "mode": "iid", "seed": 7},
        "exponents": {"p": 2, "alpha": 1, "beta": 1},
        "samples": 100, "seed": 5, "out_dir": ")" + (dir.path / "out").string() + R"("})");
    REQUIRE(run_cli("moments -c " + cfg.string()) == 0);
    const std::string csv = slurp(dir.path / "out" / "moments.csv");
    CHECK(csv.find("0,2.5,0,0.625,0,0") != std::string::npos);
    CHECK(csv.find("# latthom-csv v1 schema=moments") != std::string::npos);
}

TEST_CASE("config validation names the violated assumption and exits 2") {
    TempDir dir;
    const fs::path cfg = write_config(dir, "bad.json", R"({
        "lattice": {"preset": "zd-diag"},
        "environment": {"distribution": {"kind": "two_point", "v1": 1, "v2": 4, "prob": 0.5},
                         "mode": "iid", "seed": 7},
        "potential": {"family": "quadratic"},
        "exponents": {"p": 2, "alpha": 8, "beta": 1},
        "k_schedule": [2], "samples": 1, "seed": 5,
        "out_dir": ")" + (dir.path / "out").string() + R"("})");
    // vectorial case: 1/8 + 1/1 > p/d = 1 violates assumption 2.3(A)
    CHECK(run_cli("homogenize -c " + cfg.string()) == 2);
    const fs::path missing = write_config(dir, "bad2.json", R"({"lattice": "zd-nn"})");
    CHECK(run_cli("homogenize -c " + missing.string()) == 2);
}

TEST_CASE("homogenize writes the record CSV and a summary with certificates") {
    TempDir dir;
    const fs::path cfg = write_config(dir, "ho.json", R"({
        "lattice": "zd-nn",
        "environment": {"distribution": {"kind": "two_point", "v1": 1, "v2": 4, "prob": 0.5},
                         "mode": "layered_e1", "seed": 7},
        "potential": {"family": "quadratic"},
        "F": [[1, 0]],
        "exponents": {"p": 2, "alpha": 1, "beta": 1},
        "k_schedule": [2, 4], "samples": 3, "seed": 11,
        "out_dir": ")" + (dir.path / "out").string() + R"("})");
    REQUIRE(run_cli("homogenize -c " + cfg.string() + " --threads 2") == 0);
    const std::string csv = slurp(dir.path / "out" / "homogenize.csv");
    CHECK(csv.find("F_flat,k,sample,value,m_F_value,sandwich_ok,iterations") != std::string::npos);
    const std::string summary = slurp(dir.path / "out" / "summary.json");
    CHECK(summary.find("\"estimate\"") != std::string::npos);
    CHECK(summary.find("\"sandwich_ok\": true") != std::string::npos);
    CHECK(summary.find("\"growth_upper_ok\": true") != std::string::npos);
}

TEST_CASE("tensor, mu, poincare, cell, glue-demo and dirichlet smoke runs") {
    TempDir dir;
    const std::string base = R"(
        "lattice": "zd-nn",
        "environment": {"distribution": {"kind": "two_point", "v1": 1, "v2": 4, "prob": 0.5},
                         "mode": "iid", "seed": 3},
        "potential": {"family": "quadratic"},
        "seed": 13,)";

    const fs::path tensor_cfg = write_config(dir, "t.json", "{" + base + R"(
        "k": 2, "samples": 2, "out_dir": ")" + (dir.path / "t").string() + "\"}");
    REQUIRE(run_cli("tensor -c " + tensor_cfg.string()) == 0);
    CHECK(slurp(dir.path / "t" / "summary.json").find("min_eigenvalue") != std::string::npos);

    const fs::path mu_cfg = write_config(dir, "m.json", "{" + base + R"(
        "exponents": {"p": 2, "beta": 1, "gamma": 1}, "samples": 500,
        "out_dir": ")" + (dir.path / "m").string() + "\"}");
    REQUIRE(run_cli("mu -c " + mu_cfg.string()) == 0);
    CHECK(slurp(dir.path / "m" / "mu_paths.json").find("families") != std::string::npos);

    const fs::path po_cfg = write_config(dir, "p.json", "{" + base + R"(
        "exponents": {"p": 2, "q": 2, "alpha": 2, "beta": 2}, "samples": 10,
        "eps_schedule": [4, 8], "out_dir": ")" + (dir.path / "p").string() + "\"}");
    REQUIRE(run_cli("poincare -c " + po_cfg.string()) == 0);
    CHECK(slurp(dir.path / "p" / "summary.json").find("max_implied_C") != std::string::npos);

    const fs::path cell_cfg = write_config(dir, "c.json", "{" + base + R"(
        "k": 4, "F": [[1, 0]], "samples": 2, "out_dir": ")" + (dir.path / "c").string() + "\"}");
    REQUIRE(run_cli("cell -c " + cell_cfg.string()) == 0);

    const fs::path glue_cfg = write_config(dir, "g.json", "{" + base + R"(
        "eps_den": 512, "glue": {"delta": 0.45, "m": 2, "s": 0.5},
        "out_dir": ")" + (dir.path / "g").string() + "\"}");
    REQUIRE(run_cli("glue-demo -c " + glue_cfg.string()) == 0);
    CHECK(slurp(dir.path / "g" / "glue.csv").find("clamp_active_fraction") != std::string::npos);

    const fs::path di_cfg = write_config(dir, "d.json", "{" + base + R"(
        "eps_schedule": [8, 16], "tensor_k": 4, "tensor_samples": 2,
        "force": {"kind": "constant", "value": [1]},
        "out_dir": ")" + (dir.path / "d").string() + "\"}");
    REQUIRE(run_cli("dirichlet -c " + di_cfg.string()) == 0);
    CHECK(slurp(dir.path / "d" / "dirichlet.csv").find("min_J_hom") != std::string::npos);
}

TEST_CASE("unknown distributions are config errors") {
    TempDir dir;
    const fs::path cfg = write_config(dir, "u.json", R"({
        "lattice": "zd-nn",
        "environment": {"distribution": {"kind": "cauchy"}, "mode": "iid", "seed": 1},
        "seed": 2, "out_dir": ")" + (dir.path / "out").string() + R"("})");
    CHECK(run_cli("moments -c " + cfg.string()) == 2);
}
