#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tube/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tube;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("tube_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    fs::path p = dir / "study.toml";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kSmallCircle = R"([geometry]
kind = "CircleInPlane"
params = [1.0]   # radius

[grid]
nx = 64
nfiber = 8
refine = false

[study]
epsilons = [0.2, 0.141, 0.1, 0.071, 0.05]
k = 4
seed = 11
)";

int call(std::vector<std::string> args, std::string* errText = nullptr)
{
    std::ostringstream out, err;
    int code = run(args, out, err);
    if (errText)
        *errText = err.str();
    return code;
}

} // namespace

TEST_CASE("toml subset")
{
    TomlTable t = parse_toml("# top\n[a]\nx = 3\ny = -2.5e-1 # trailing\ns = \"h#i\"\nb = true\n"
                             "arr = [1, 2.5, 3]\n\n[b]\nn = 1_000\n");
    CHECK(std::get<double>(t["a"]["x"].v) == 3.0);
    CHECK(t["a"]["x"].isInteger);
    CHECK(std::get<double>(t["a"]["y"].v) == -0.25);
    CHECK_FALSE(t["a"]["y"].isInteger);
    CHECK(std::get<std::string>(t["a"]["s"].v) == "h#i");
    CHECK(std::get<bool>(t["a"]["b"].v));
    CHECK(std::get<std::vector<TomlValue>>(t["a"]["arr"].v).size() == 3);
    CHECK(std::get<double>(t["b"]["n"].v) == 1000.0);

    CHECK_THROWS_AS(parse_toml("x = 1\n"), Error);
    CHECK_THROWS_AS(parse_toml("[a]\nx = 1\nx = 2\n"), Error);
    CHECK_THROWS_AS(parse_toml("[a]\nx = [1, 2\n"), Error);
    CHECK_THROWS_AS(parse_toml("[a]\nx = 1.2.3\n"), Error);
    CHECK_THROWS_AS(parse_toml("[a]\nnovalue\n"), Error);
}

TEST_CASE("schema mapping")
{
    CliConfig c = config_from_toml(parse_toml(kSmallCircle));
    CHECK(c.study.geom.kind == GeomKind::CircleInPlane);
    CHECK(c.study.nx == 64);
    CHECK_FALSE(c.study.refine);
    CHECK(c.study.seed == 11);
    CHECK(c.study.epsilons.size() == 5);
    CHECK_FALSE(c.study.alpha.has_value());

    CliConfig d = config_from_toml(parse_toml(std::string(kSmallCircle) + "alpha = 1.5\n[solver]\ntol = 1e-7\n"));
    REQUIRE(d.study.alpha.has_value());
    CHECK(*d.study.alpha == 1.5);
    CHECK(d.study.tol == 1e-7);

    auto kind_of = [](const std::string& text) {
        try {
            config_from_toml(parse_toml(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Contract; // stands for "accepted"
    };
    CHECK(kind_of(std::string(kSmallCircle) + "bogus = 1\n") == ErrorKind::Validation);
    CHECK(kind_of(std::string(kSmallCircle) + "[extra]\n") == ErrorKind::Validation);
    CHECK(kind_of(std::string(kSmallCircle) + "alpha = \"big\"\n") == ErrorKind::Validation);
    CHECK(kind_of(std::string(kSmallCircle) + "[solver]\nmax_iter = 2.5\n") == ErrorKind::Validation);
    CHECK(kind_of("[grid]\nnx = 8\n") == ErrorKind::Validation);
    CHECK(kind_of("[geometry]\nkind = \"Torus\"\nparams = [1]\n") == ErrorKind::Unsupported);
    CHECK(kind_of("[geometry]\nkind = \"CircleInPlane\"\nparams = [-1]\n") == ErrorKind::Validation);
}

TEST_CASE("exit codes for bad input")
{
    fs::path dir = scratch("codes");
    std::string err;
    CHECK(call({"converge", "--config", (dir / "missing.toml").string()}, &err) == 2);
    CHECK(err.find("\"error\"") != std::string::npos);
    fs::path bad = write_config(dir, std::string(kSmallCircle) + "typo_key = 3\n");
    CHECK(call({"converge", "--config", bad.string(), "--out", (dir / "o").string()}) == 2);
    CHECK(call({"converge"}) == 2);
    CHECK(call({"nonsense"}) == 2);
    CHECK(call({"check", "everything", "--config", bad.string()}) == 2);
    fs::path far = write_config(dir, std::string(kSmallCircle) + "epsilon = 0.9\n");
    CHECK(call({"spectrum", "--config", far.string(), "--out", (dir / "o").string()}) == 2);
    std::ostringstream out, e2;
    CHECK(run({"--help"}, out, e2) == 0);
    CHECK(out.str().find("converge") != std::string::npos);
}

TEST_CASE("solver failure maps to exit 3")
{
    fs::path dir = scratch("conv");
    fs::path cfg = write_config(dir, std::string(kSmallCircle) + "[solver]\nmax_iter = 1\ntol = 1e-10\n");
    std::string err;
    CHECK(call({"spectrum", "--config", cfg.string(), "--out", (dir / "o").string()}, &err) == 3);
    CHECK(err.find("convergence") != std::string::npos);
}

TEST_CASE("converge writes the table and is reproducible")
{
    fs::path dir = scratch("conv_table");
    fs::path cfg = write_config(dir, kSmallCircle);
    REQUIRE(call({"converge", "--config", cfg.string(), "--out", (dir / "a").string(), "--plot"}) == 0);
    REQUIRE(call({"converge", "--config", cfg.string(), "--out", (dir / "b").string()}) == 0);
    std::string a = slurp(dir / "a" / "table.csv"), b = slurp(dir / "b" / "table.csv");
    CHECK(a == b);
    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epsilon,k,lambda_eps,mu_limit,abs_err,grid_nx,grid_nfiber,lambda0_h");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 20);
    CHECK(a.find('\r') == std::string::npos);
    CHECK(fs::exists(dir / "a" / "errors.svg"));
    CHECK(fs::exists(dir / "a" / "report.json"));
    CHECK(slurp(dir / "a" / "report.json").find("lambda0_h") != std::string::npos);
}

TEST_CASE("other subcommands write their outputs")
{
    fs::path dir = scratch("subs");
    fs::path cfg = write_config(dir, std::string(kSmallCircle) + "epsilon = 0.1\n");
    CHECK(call({"geometry", "--config", cfg.string(), "--out", (dir / "g").string()}) == 0);
    CHECK(slurp(dir / "g" / "report.json").find("\"W_L\"") != std::string::npos);
    CHECK(call({"spectrum", "--config", cfg.string(), "--out", (dir / "s").string()}) == 0);
    CHECK(slurp(dir / "s" / "table.csv").find("0.10000000000000001,3,") != std::string::npos);
    CHECK(call({"check", "asymptotics", "--config", cfg.string(), "--out", (dir / "a").string(), "--plot"}) == 0);
    CHECK(fs::exists(dir / "a" / "asymptotics.svg"));
    CHECK(call({"check", "coercivity", "--config", cfg.string(), "--out", (dir / "c").string()}) == 0);
    CHECK(call({"semigroup", "--config", cfg.string(), "--out", (dir / "h").string(), "--threads", "2"}) == 0);
    CHECK(slurp(dir / "h" / "semigroup.csv").rfind("epsilon,t,datum,err,truncation\n", 0) == 0);
}

TEST_CASE("number formatting")
{
    CHECK(format_g17(0.1) == "0.10000000000000001");
    CHECK(format_g17(-0.25) == "-0.25");
    CHECK(format_g17(3.0) == "3");
}
