#include "tube/cli.hpp"

#include "tube/ball.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tube {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg)
{
    throw Error(ErrorKind::Validation, msg);
}

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// drop a trailing comment that is not inside a string
std::string strip_comment(const std::string& s)
{
    bool inStr = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"')
            inStr = !inStr;
        else if (s[i] == '#' && !inStr)
            return s.substr(0, i);
    }
    return s;
}

TomlValue parse_scalar(const std::string& raw, int line)
{
    std::string s = trim(raw);
    auto bad = [&] { invalid("config line " + std::to_string(line) + ": cannot parse value '" + s + "'"); };
    if (s.empty())
        bad();
    TomlValue v;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            bad();
        v.v = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.v = s == "true";
        return v;
    }
    std::string num;
    for (char c : s)
        if (c != '_')
            num += c;
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(num, &used);
    } catch (...) {
        bad();
    }
    if (used != num.size())
        bad();
    v.v = d;
    v.isInteger = num.find_first_of(".eEn") == std::string::npos;
    return v;
}

TomlValue parse_value(const std::string& raw, int line)
{
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            invalid("config line " + std::to_string(line) + ": unterminated array");
        std::vector<TomlValue> items;
        std::string body = s.substr(1, s.size() - 2);
        std::string cur;
        bool inStr = false;
        for (char c : body) {
            if (c == '"')
                inStr = !inStr;
            if (c == ',' && !inStr) {
                if (!trim(cur).empty())
                    items.push_back(parse_scalar(cur, line));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty())
            items.push_back(parse_scalar(cur, line));
        TomlValue v;
        v.v = std::move(items);
        return v;
    }
    return parse_scalar(s, line);
}

double as_number(const TomlValue& v, const std::string& key)
{
    if (auto d = std::get_if<double>(&v.v))
        return *d;
    invalid("'" + key + "' must be a number");
}

int as_int(const TomlValue& v, const std::string& key)
{
    double d = as_number(v, key);
    if (!v.isInteger || d != std::round(d))
        invalid("'" + key + "' must be an integer");
    return static_cast<int>(d);
}

bool as_bool(const TomlValue& v, const std::string& key)
{
    if (auto b = std::get_if<bool>(&v.v))
        return *b;
    invalid("'" + key + "' must be true or false");
}

std::string as_string(const TomlValue& v, const std::string& key)
{
    if (auto s = std::get_if<std::string>(&v.v))
        return *s;
    invalid("'" + key + "' must be a string");
}

std::vector<double> as_numbers(const TomlValue& v, const std::string& key)
{
    auto arr = std::get_if<std::vector<TomlValue>>(&v.v);
    if (!arr)
        invalid("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const TomlValue& x : *arr)
        out.push_back(as_number(x, key));
    return out;
}

json config_json(const StudyConfig& c)
{
    json j;
    j["geometry"] = {{"kind", to_string(c.geom.kind)}, {"params", c.geom.params}, {"normal_sign", c.geom.normalSign}};
    j["grid"] = {{"nx", c.nx}, {"nfiber", c.nfiber}, {"refine", c.refine}};
    j["study"] = {{"epsilons", c.epsilons}, {"k", c.k},         {"samples", c.samples},
                  {"times", c.times},       {"seed", c.seed},   {"dense_worst_case", c.denseWorstCase}};
    j["study"]["alpha"] = c.alpha ? json(*c.alpha) : json("auto");
    j["solver"] = {{"tol", c.tol}, {"max_iter", c.maxIter}, {"threads", c.threads}};
    return j;
}

std::string timestamp()
{
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        invalid("cannot write " + p.string());
    f << text;
}

json vec_json(const Vec& v)
{
    json j = json::array();
    for (int i = 0; i < v.size(); ++i)
        j.push_back(v(i));
    return j;
}

json mat_json(const Mat& m)
{
    json j = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int c = 0; c < m.cols(); ++c)
            r.push_back(m(i, c));
        j.push_back(r);
    }
    return j;
}

// ------------------------------------------------------------------ SVG

struct Series {
    std::string name;
    std::vector<double> x, y;
};

void write_loglog_svg(const std::filesystem::path& p, const std::string& title, const std::string& ylabel,
                      const std::vector<Series>& series)
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0) {
                x0 = std::min(x0, std::log10(s.x[i]));
                x1 = std::max(x1, std::log10(s.x[i]));
                y0 = std::min(y0, std::log10(s.y[i]));
                y1 = std::max(y1, std::log10(s.y[i]));
            }
    if (!(x1 > x0))
        x1 = x0 + 1;
    if (!(y1 > y0))
        y1 = y0 + 1;
    const double W = 560, H = 400, L = 70, R = 150, T = 40, B = 50;
    auto px = [&](double x) { return L + (std::log10(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (std::log10(y) - y0) / (y1 - y0) * (H - T - B); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream o;
    o << std::setprecision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">log10 epsilon ["
      << x0 << ", " << x1 << "]</text>\n";
    o << "<text x=\"8\" y=\"" << T - 8 << "\" font-size=\"12\">log10 " << ylabel << " [" << y0 << ", " << y1
      << "]</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % 6];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            if (series[s].x[i] > 0 && series[s].y[i] > 0)
                o << px(series[s].x[i]) << "," << py(series[s].y[i]) << " ";
        o << "\"/>\n";
        o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" font-size=\"12\" fill=\"" << c
          << "\">" << series[s].name << "</text>\n";
    }
    o << "</svg>\n";
    write_text(p, o.str());
}

// ------------------------------------------------------------------ reports

json eigen_json(const EigenStudy& st)
{
    json rows = json::array();
    for (const EigenRow& r : st.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"k", r.k},
                        {"lambda_eps", r.lambda_eps},
                        {"mu_limit", r.mu_limit},
                        {"abs_err", r.abs_err},
                        {"lambda_refined", r.lambda_refined},
                        {"grid_delta", r.grid_delta},
                        {"limit_same_grid", r.limit_same_grid},
                        {"exact_tube", r.exact_tube},
                        {"grid_nx", r.grid_nx},
                        {"grid_nfiber", r.grid_nfiber},
                        {"lambda0_h", r.lambda0_h},
                        {"residual", r.residual},
                        {"iterations", r.iterations},
                        {"gated", r.gated}});
    json j;
    j["rows"] = rows;
    j["mu_limit"] = st.muLimit;
    j["mu_source"] = st.muSource;
    j["slopes"] = st.slopes;
    j["lambda0"] = st.lambda0;
    j["lambda0_note"] = "forms are renormalized with the discrete lambda0_h of the fiber grid";
    j["alpha"] = st.alpha;
    j["limit_oracle_defect"] = st.limitOracleDefect;
    j["tube_oracle_defect"] = st.tubeOracleDefect;
    j["flags"] = st.flags;
    j["contract_ok"] = st.contractOk;
    return j;
}

json semigroup_json(const SemigroupStudy& st)
{
    json rows = json::array();
    for (const SemigroupRow& r : st.rows)
        rows.push_back({{"epsilon", r.epsilon}, {"t", r.t}, {"datum", r.datum}, {"err", r.err},
                        {"truncation", r.truncation}});
    return {{"rows", rows},         {"pairs", st.pairs},  {"perturbation_norm", st.perturbationNorm},
            {"alpha", st.alpha},    {"flags", st.flags},  {"contract_ok", st.contractOk}};
}

json kato_json(const KatoStudy& st)
{
    json rows = json::array();
    for (const KatoRow& r : st.rows)
        rows.push_back({{"epsilon", r.epsilon}, {"ratio", r.ratio}, {"ratio_e0", r.ratioE0},
                        {"worst_case", r.worstCase}, {"min_f0", r.minF0}, {"non_finite", r.nonFinite}});
    return {{"rows", rows}, {"slope", st.slope},  {"K", st.K},
            {"alpha", st.alpha}, {"flags", st.flags}, {"contract_ok", st.contractOk}};
}

json coercivity_json(const CoercivityStudy& st)
{
    json rows = json::array();
    for (const CoercivityRow& r : st.rows)
        rows.push_back({{"epsilon", r.epsilon}, {"margin_induced", r.marginInduced},
                        {"margin_reference", r.marginReference}, {"ground_margin", r.groundMargin},
                        {"violations", r.violations}, {"in_hypothesis", r.inHypothesis}});
    return {{"rows", rows}, {"alpha", st.alpha}, {"eps_star", st.epsStar}, {"K", st.K},
            {"contract_ok", st.contractOk}};
}

json asymptotics_json(const AsymptoticsStudy& st)
{
    json rows = json::array();
    for (const AsymptoticsRow& r : st.rows) {
        json row = {{"epsilon", r.epsilon}};
        for (int q = 0; q < 4; ++q)
            row[kAsymptoticNames[q]] = r.q[q];
        rows.push_back(row);
    }
    json slopes, vanish;
    for (int q = 0; q < 4; ++q) {
        slopes[kAsymptoticNames[q]] = std::isinf(st.slope[q]) ? json("vanishing") : json(st.slope[q]);
        vanish[kAsymptoticNames[q]] = st.vanishing[q];
    }
    return {{"rows", rows}, {"slopes", slopes}, {"vanishing", vanish}, {"contract_ok", st.contractOk}};
}

json geometry_json(const Geometry& geom)
{
    json j;
    j["kind"] = to_string(geom.spec().kind);
    j["params"] = geom.spec().params;
    j["l"] = geom.l();
    j["m"] = geom.m();
    j["codim"] = geom.codim();
    j["injectivity_bound"] = std::isinf(geom.injectivity_bound()) ? json("infinite") : json(geom.injectivity_bound());
    j["eps_max"] = geom.eps_max();
    j["closure_defect"] = geom.closure_defect();
    j["flat_ambient"] = geom.flat_ambient();
    BallSpectrum bs = ball_spectrum(geom.codim());
    j["fiber"] = {{"lambda0", bs.lambda[0]}, {"lambda1", bs.lambda[1]}, {"eps_star", bs.epsStar}};
    std::vector<Vec> xs = x_samples(geom, geom.l() == 2 ? 4 : 8);
    PotentialField pf(geom, x_samples(geom));
    j["alpha_floor"] = pf.alphaFloor();
    json pts = json::array();
    for (const Vec& x : xs) {
        CurvatureData cd = geom.curvature_at(x);
        json tr = json::array();
        for (const Mat& a : cd.weingarten)
            tr.push_back(a.trace());
        pts.push_back({{"x", vec_json(x)},
                       {"gL", mat_json(cd.gL)},
                       {"tr_A", tr},
                       {"scal_L", cd.scalL},
                       {"scal_M", cd.scalM},
                       {"ric_bar", cd.ricBar},
                       {"r_bar", cd.rBar},
                       {"tension_sq", cd.tensionNormSq},
                       {"W_L", effective_potential(cd)},
                       {"W_L_raw", effective_potential_raw(cd)}});
    }
    j["samples"] = pts;
    json jets = json::object();
    for (auto [name, q] : {std::pair{"metric", JetQuantity::Metric}, std::pair{"log_rho", JetQuantity::LogRho}}) {
        RemainderFit f = jet_remainder_slope(geom, xs[0], q);
        jets[name] = {{"radii", f.radii},
                      {"remainders", f.remainders},
                      {"slope", f.exactMatch ? json("exact") : json(f.slope)},
                      {"exact_match", f.exactMatch}};
    }
    j["jet_remainders"] = jets;
    return j;
}

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Convergence: return 3;
    case ErrorKind::Contract: return 4;
    case ErrorKind::Assembly: return 1;
    default: return 2;
    }
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& msg)
{
    err << json{{"error", kind}, {"message", msg}}.dump() << "\n";
}

} // namespace

TomlTable parse_toml(const std::string& text)
{
    TomlTable t;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string s = trim(strip_comment(line));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3)
                invalid("config line " + std::to_string(n) + ": bad section header");
            section = trim(s.substr(1, s.size() - 2));
            if (t.count(section))
                invalid("config: duplicate section [" + section + "]");
            t[section];
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            invalid("config line " + std::to_string(n) + ": expected key = value");
        if (section.empty())
            invalid("config line " + std::to_string(n) + ": key outside a section");
        std::string key = trim(s.substr(0, eq));
        if (key.empty())
            invalid("config line " + std::to_string(n) + ": empty key");
        if (t[section].count(key))
            invalid("config: duplicate key '" + key + "'");
        t[section][key] = parse_value(s.substr(eq + 1), n);
    }
    return t;
}

TomlTable load_toml(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        invalid("config file not found: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_toml(ss.str());
}

CliConfig config_from_toml(const TomlTable& t)
{
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"geometry", {"kind", "params", "normal_sign"}},
        {"grid", {"nx", "nfiber", "refine"}},
        {"study", {"epsilons", "epsilon", "k", "alpha", "samples", "times", "seed", "dense_worst_case"}},
        {"solver", {"tol", "max_iter"}},
    };
    for (const auto& [sec, keys] : t) {
        auto it = schema.find(sec);
        if (it == schema.end())
            invalid("config: unknown section [" + sec + "]");
        for (const auto& [key, val] : keys)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                invalid("config: unknown key '" + key + "' in [" + sec + "]");
    }
    auto get = [&](const std::string& sec, const std::string& key) -> const TomlValue* {
        auto s = t.find(sec);
        if (s == t.end())
            return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };
    CliConfig c;
    StudyConfig& s = c.study;
    const TomlValue* kind = get("geometry", "kind");
    const TomlValue* params = get("geometry", "params");
    if (!kind || !params)
        invalid("config: [geometry] needs 'kind' and 'params'");
    s.geom.kind = geom_kind_from_string(as_string(*kind, "kind"));
    s.geom.params = as_numbers(*params, "params");
    if (auto v = get("geometry", "normal_sign")) {
        int sign = as_int(*v, "normal_sign");
        if (sign != 1 && sign != -1)
            invalid("'normal_sign' must be 1 or -1");
        s.geom.normalSign = sign;
    }
    if (auto v = get("grid", "nx"))
        s.nx = as_int(*v, "nx");
    if (auto v = get("grid", "nfiber"))
        s.nfiber = as_int(*v, "nfiber");
    if (auto v = get("grid", "refine"))
        s.refine = as_bool(*v, "refine");
    if (auto v = get("study", "epsilons"))
        s.epsilons = as_numbers(*v, "epsilons");
    if (auto v = get("study", "epsilon"))
        c.epsilon = as_number(*v, "epsilon");
    if (auto v = get("study", "k"))
        s.k = as_int(*v, "k");
    if (auto v = get("study", "alpha")) {
        if (std::holds_alternative<std::string>(v->v)) {
            if (as_string(*v, "alpha") != "auto")
                invalid("'alpha' must be a number or \"auto\"");
        } else {
            s.alpha = as_number(*v, "alpha");
        }
    }
    if (auto v = get("study", "samples"))
        s.samples = as_int(*v, "samples");
    if (auto v = get("study", "times"))
        s.times = as_numbers(*v, "times");
    if (auto v = get("study", "seed")) {
        double d = as_number(*v, "seed");
        if (!v->isInteger || d < 0)
            invalid("'seed' must be a non-negative integer");
        s.seed = static_cast<std::uint64_t>(d);
    }
    if (auto v = get("study", "dense_worst_case"))
        s.denseWorstCase = as_bool(*v, "dense_worst_case");
    if (auto v = get("solver", "tol"))
        s.tol = as_number(*v, "tol");
    if (auto v = get("solver", "max_iter"))
        s.maxIter = as_int(*v, "max_iter");
    // geometry parameters are checked by constructing it
    Geometry g(s.geom);
    s.geom = g.spec();
    return c;
}

std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_eigen_csv(const EigenStudy& st, const std::string& path)
{
    std::string s = "epsilon,k,lambda_eps,mu_limit,abs_err,grid_nx,grid_nfiber,lambda0_h\n";
    for (const EigenRow& r : st.rows)
        s += format_g17(r.epsilon) + "," + std::to_string(r.k) + "," + format_g17(r.lambda_eps) + "," +
             format_g17(r.mu_limit) + "," + format_g17(r.abs_err) + "," + std::to_string(r.grid_nx) + "," +
             std::to_string(r.grid_nfiber) + "," + format_g17(r.lambda0_h) + "\n";
    write_text(path, s);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Thin-tube spectral homogenization studies"};
    std::string configPath, outDir = ".";
    bool plot = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string checkWhat;
    app.add_option("--config", configPath, "study configuration file");
    app.add_option("--out", outDir, "output directory");
    app.add_flag("--plot", plot, "write SVG plots");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads");
    app.require_subcommand(1);
    auto* geometry = app.add_subcommand("geometry", "curvature and potential report");
    auto* spectrum = app.add_subcommand("spectrum", "lowest eigenpairs for one epsilon");
    auto* converge = app.add_subcommand("converge", "eigenvalue convergence along the epsilon ladder");
    auto* check = app.add_subcommand("check", "kato | coercivity | asymptotics");
    check->add_option("what", checkWhat)->required()->check(CLI::IsMember({"kato", "coercivity", "asymptotics"}));
    auto* semigroup = app.add_subcommand("semigroup", "heat semigroup convergence");
    for (auto* s : {geometry, spectrum, converge, check, semigroup})
        s->fallthrough();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "validation", e.what());
        return 2;
    }

    try {
        if (configPath.empty())
            invalid("--config is required");
        CliConfig cfg = config_from_toml(load_toml(configPath));
        StudyConfig& sc = cfg.study;
        if (seed)
            sc.seed = *seed;
        sc.threads = threads ? *threads : default_threads();
        if (sc.threads < 1)
            invalid("--threads must be positive");
        std::filesystem::path dir(outDir);
        std::filesystem::create_directories(dir);

        json report;
        report["config"] = config_json(sc);
        report["metadata"] = {{"started", timestamp()}};
        auto t0 = std::chrono::steady_clock::now();
        int code = 0;
        auto finish = [&](const std::string& command) {
            report["command"] = command;
            report["metadata"]["seconds"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            write_text(dir / "report.json", report.dump(2) + "\n");
        };

        if (geometry->parsed()) {
            report["geometry"] = geometry_json(Geometry(sc.geom));
            finish("geometry");
        } else if (spectrum->parsed() || converge->parsed()) {
            if (spectrum->parsed())
                sc.epsilons = {cfg.epsilon ? *cfg.epsilon : sc.epsilons.front()};
            EigenStudy st = eigenvalue_convergence_study(sc);
            report["study"] = eigen_json(st);
            write_eigen_csv(st, (dir / "table.csv").string());
            if (plot && converge->parsed()) {
                std::vector<Series> ss;
                for (int k = 0; k < sc.k; ++k) {
                    Series s{"k=" + std::to_string(k), {}, {}};
                    for (const EigenRow& r : st.rows)
                        if (r.k == k) {
                            s.x.push_back(r.epsilon);
                            s.y.push_back(r.abs_err);
                        }
                    ss.push_back(s);
                }
                write_loglog_svg(dir / "errors.svg", "eigenvalue error against epsilon", "abs_err", ss);
            }
            finish(spectrum->parsed() ? "spectrum" : "converge");
            if (converge->parsed() && !st.contractOk)
                code = 4;
        } else if (check->parsed()) {
            if (checkWhat == "kato") {
                KatoStudy st = kato_check(sc);
                report["kato"] = kato_json(st);
                std::string csv = "epsilon,ratio,ratio_e0,worst_case,min_f0\n";
                for (const KatoRow& r : st.rows)
                    csv += format_g17(r.epsilon) + "," + format_g17(r.ratio) + "," + format_g17(r.ratioE0) + "," +
                           format_g17(r.worstCase) + "," + format_g17(r.minF0) + "\n";
                write_text(dir / "kato.csv", csv);
                if (plot) {
                    Series s{"ratio", {}, {}};
                    for (const KatoRow& r : st.rows) {
                        s.x.push_back(r.epsilon);
                        s.y.push_back(r.ratio);
                    }
                    write_loglog_svg(dir / "kato.svg", "Kato ratio against epsilon", "ratio", {s});
                }
                finish("check kato");
                code = st.contractOk ? 0 : 4;
            } else if (checkWhat == "coercivity") {
                CoercivityStudy st = coercivity_check(sc);
                report["coercivity"] = coercivity_json(st);
                for (const CoercivityRow& r : st.rows)
                    if (r.violations > 0) {
                        std::string s;
                        for (Eigen::Index i = 0; i < r.violating.size(); ++i)
                            s += format_g17(r.violating(i)) + "\n";
                        write_text(dir / ("violation_eps_" + format_g17(r.epsilon) + ".txt"), s);
                    }
                finish("check coercivity");
                code = st.contractOk ? 0 : 4;
            } else {
                validate(sc);
                AsymptoticsStudy st = asymptotics_check(Geometry(sc.geom), sc.epsilons);
                report["asymptotics"] = asymptotics_json(st);
                if (plot) {
                    std::vector<Series> ss;
                    for (int q = 0; q < 4; ++q) {
                        Series s{kAsymptoticNames[q], {}, {}};
                        for (const AsymptoticsRow& r : st.rows) {
                            s.x.push_back(r.epsilon);
                            s.y.push_back(r.q[q]);
                        }
                        ss.push_back(s);
                    }
                    write_loglog_svg(dir / "asymptotics.svg", "sup-norm quantities against epsilon", "sup", ss);
                }
                finish("check asymptotics");
                code = st.contractOk ? 0 : 4;
            }
        } else if (semigroup->parsed()) {
            SemigroupStudy st = semigroup_convergence_study(sc);
            report["semigroup"] = semigroup_json(st);
            std::string csv = "epsilon,t,datum,err,truncation\n";
            for (const SemigroupRow& r : st.rows)
                csv += format_g17(r.epsilon) + "," + format_g17(r.t) + "," + r.datum + "," + format_g17(r.err) + "," +
                       format_g17(r.truncation) + "\n";
            write_text(dir / "semigroup.csv", csv);
            finish("semigroup");
            code = st.contractOk ? 0 : 4;
        }
        if (code == 4)
            emit_error(err, "contract", "acceptance contract violated; see report.json");
        return code;
    } catch (const Error& e) {
        emit_error(err, to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return 1;
    }
}

} // namespace tube
