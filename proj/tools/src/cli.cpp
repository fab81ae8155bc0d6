#include "ultrav/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ultrav/io.hpp"
#include "ultrav/metrics.hpp"
#include "ultrav/rank.hpp"
#include "ultrav/tune.hpp"
#include "ultrav/unmixing.hpp"

namespace ultrav::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = ULTRAV_VERSION;

struct GenerateArgs {
    Index n1 = 50;
    Index n2 = 50;
    std::string em;
    Index bands = 224;
    Index members = 3;
    std::uint64_t library_seed = 11;
    std::string variability = "none";
    std::string snr = "30";
    std::uint64_t seed = 0;
    std::string abundance = "gaussian";
    double correlation_length = 0.0;
    std::string out;
};

struct SolverArgs {
    double lambda_a = 100.0;
    double lambda_m = 0.4;
    double epsilon = kDefaultRankEpsilon;
    Index rank_q = 0;
    Index rank_p = 0;
    int max_iters = 50;
    double tol = 1e-4;
    int als_sweeps = 100;
    double als_tol = 1e-8;
    int als_restarts = 1;
    int p_sweeps = 10;
    std::uint64_t seed = 0;
};

struct UnmixArgs {
    std::string cube;
    std::string em;
    std::string method = "ultra-v";
    std::string out;
    bool no_maps = false;
    SolverArgs solver;
};

struct MetricsArgs {
    std::string truth;
    std::vector<std::string> results;
    std::string csv;
};

struct TuneArgs {
    std::string truth;
    std::string em;
    std::vector<double> grid_a = kDefaultLambdaAGrid;
    std::vector<double> grid_m = kDefaultLambdaMGrid;
    std::string objective = "mse_a";
    std::string csv = "tune.csv";
    SolverArgs solver;
};

struct RankArgs {
    std::string input;
    double epsilon = kDefaultRankEpsilon;
};

double parse_snr(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return kNoiseless;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw SpecError("--snr must be a finite number of dB or 'inf'; got '" + text + "'");
    }
    return v;
}

std::string snr_text(double snr) { return std::isinf(snr) ? "inf" : io::format_exact(snr); }

void add_solver_options(CLI::App& app, SolverArgs& s) {
    app.add_option("--lambda-a", s.lambda_a, "Abundance low-rank weight")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--lambda-m", s.lambda_m, "Endmember low-rank weight")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--epsilon", s.epsilon, "Rank estimation threshold")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--rank-q", s.rank_q, "Abundance CPD rank (0 = estimate)")->check(CLI::NonNegativeNumber);
    app.add_option("--rank-p", s.rank_p, "Endmember CPD rank (0 = estimate)")->check(CLI::NonNegativeNumber);
    app.add_option("--max-iters", s.max_iters, "Outer iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--tol", s.tol, "Relative cost change to stop")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--als-sweeps", s.als_sweeps, "ALS sweep cap for the abundance CPD")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--p-sweeps", s.p_sweeps, "ALS sweep cap per iteration for the endmember CPD")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--als-tol", s.als_tol, "ALS fit-change tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--als-restarts", s.als_restarts, "ALS random restarts")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", s.seed, "Seed for CPD initializations")->capture_default_str();
}

UnmixConfig make_config(const SolverArgs& s) {
    UnmixConfig cfg;
    cfg.lambda_a = s.lambda_a;
    cfg.lambda_m = s.lambda_m;
    cfg.epsilon = s.epsilon;
    if (s.rank_q > 0) cfg.rank_q_override = s.rank_q;
    if (s.rank_p > 0) cfg.rank_p_override = s.rank_p;
    cfg.max_outer_iters = s.max_iters;
    cfg.outer_tol = s.tol;
    cfg.als.max_sweeps = s.als_sweeps;
    cfg.als.tol = s.als_tol;
    cfg.als.restarts = s.als_restarts;
    cfg.als_p.max_sweeps = s.p_sweeps;
    cfg.als_p.tol = s.als_tol;
    cfg.als_p.restarts = s.als_restarts;
    cfg.seed = s.seed;
    return cfg;
}

void append_solver_manifest(io::Manifest& m, const SolverArgs& s) {
    m.emplace_back("lambda_a", io::format_exact(s.lambda_a));
    m.emplace_back("lambda_m", io::format_exact(s.lambda_m));
    m.emplace_back("epsilon", io::format_exact(s.epsilon));
    m.emplace_back("rank_q_override", s.rank_q > 0 ? std::to_string(s.rank_q) : "auto");
    m.emplace_back("rank_p_override", s.rank_p > 0 ? std::to_string(s.rank_p) : "auto");
    m.emplace_back("max_iters", std::to_string(s.max_iters));
    m.emplace_back("tol", io::format_exact(s.tol));
    m.emplace_back("als_sweeps", std::to_string(s.als_sweeps));
    m.emplace_back("p_sweeps", std::to_string(s.p_sweeps));
    m.emplace_back("als_tol", io::format_exact(s.als_tol));
    m.emplace_back("als_restarts", std::to_string(s.als_restarts));
    m.emplace_back("seed", std::to_string(s.seed));
}

Eigen::MatrixXd member_map(const Tensor3& a, Index k) {
    Eigen::MatrixXd map(a.dim(0), a.dim(1));
    for (Index i = 0; i < a.dim(0); ++i) {
        for (Index j = 0; j < a.dim(1); ++j) map(i, j) = a(i, j, k);
    }
    return map;
}

int cmd_generate(const GenerateArgs& g, std::ostream& out) {
    SceneSpec spec;
    spec.n1 = g.n1;
    spec.n2 = g.n2;
    const bool synthetic = g.em.empty();
    spec.library = synthetic ? synthetic_library(g.bands, g.members, g.library_seed) : io::read_em_csv(g.em);
    spec.abundance_style = parse_abundance_style(g.abundance);
    spec.variability = parse_variability(g.variability);
    spec.snr_db = parse_snr(g.snr);
    spec.seed = g.seed;
    spec.correlation_length = g.correlation_length;
    const SceneTruth truth = generate_scene(spec);

    const fs::path dir(g.out);
    fs::create_directories(dir);
    io::write_cube(dir / "cube.hsi", truth.cube);
    io::write_cube(dir / "clean.hsi", truth.clean_cube);
    io::write_cube(dir / "abundances.hsi", truth.abundances);
    io::write_em_tensor(dir / "endmembers.emt", truth.endmembers);
    if (synthetic) io::write_em_csv(dir / "library.csv", spec.library);

    const double snr = empirical_snr_db(truth.clean_cube, truth.cube);
    io::Manifest m{{"version", kVersion}, {"command", "generate"},
                   {"n1", std::to_string(g.n1)}, {"n2", std::to_string(g.n2)}};
    if (synthetic) {
        m.emplace_back("em", "synthetic");
        m.emplace_back("bands", std::to_string(g.bands));
        m.emplace_back("members", std::to_string(g.members));
        m.emplace_back("library_seed", std::to_string(g.library_seed));
    } else {
        m.emplace_back("em", fs::absolute(g.em).string());
    }
    m.emplace_back("variability", to_string(spec.variability));
    m.emplace_back("snr_db", snr_text(spec.snr_db));
    m.emplace_back("seed", std::to_string(g.seed));
    m.emplace_back("abundance", to_string(spec.abundance_style));
    m.emplace_back("correlation_length", io::format_exact(g.correlation_length));
    m.emplace_back("noise_sigma", io::format_exact(truth.noise_sigma));
    m.emplace_back("empirical_snr_db", snr_text(snr));
    io::write_manifest(dir / "manifest.txt", m);

    out << "wrote " << g.n1 << "x" << g.n2 << "x" << spec.library.rows() << " scene to " << dir.string()
        << " (SNR " << io::format_sig(snr) << " dB)\n";
    return 0;
}

int cmd_unmix(const UnmixArgs& u, std::ostream& out) {
    const Tensor3 cube = io::read_cube(u.cube);
    const Eigen::MatrixXd m0 = io::read_em_csv(u.em);
    if (m0.rows() != cube.dim(2)) {
        throw DimensionError("endmember CSV has " + std::to_string(m0.rows()) + " bands, cube has " +
                             std::to_string(cube.dim(2)));
    }
    const fs::path dir(u.out);
    fs::create_directories(dir);
    io::Manifest m{{"version", kVersion}, {"command", "unmix"}, {"method", u.method},
                   {"cube", fs::absolute(u.cube).string()}, {"em", fs::absolute(u.em).string()}};

    Tensor3 abundances;
    const auto start = std::chrono::steady_clock::now();
    double time_s = 0.0;
    if (u.method == "fcls") {
        abundances = unmix_fcls(cube, m0);
        time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else if (u.method == "scls") {
        SclsMaps maps = unmix_scls(cube, m0);
        time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Tensor3 scale({cube.dim(0), cube.dim(1), 1}, std::vector<double>(maps.scale.data().begin(), maps.scale.data().end()));
        io::write_cube(dir / "scale.hsi", scale);
        abundances = std::move(maps.abundances);
    } else {
        const UnmixConfig cfg = make_config(u.solver);
        UnmixResult res = ultra_v(cube, m0, cfg);
        time_s = res.wall_time;
        io::write_em_tensor(dir / "endmembers.emt", res.endmembers);
        io::write_file_atomic(dir / "cost_trace.csv", cost_trace_csv(res.cost_trace));
        append_solver_manifest(m, u.solver);
        m.emplace_back("rank_q", std::to_string(res.rank_q));
        m.emplace_back("rank_p", std::to_string(res.rank_p));
        m.emplace_back("iters", std::to_string(res.iters));
        m.emplace_back("final_cost", io::format_exact(res.cost_trace.back()));
        out << "ultra-v: " << res.iters << " iterations, K_Q=" << res.rank_q << ", K_P=" << res.rank_p
            << ", cost " << io::format_sig(res.cost_trace.front()) << " -> "
            << io::format_sig(res.cost_trace.back()) << "\n";
        abundances = std::move(res.abundances);
    }
    io::write_cube(dir / "abundances.hsi", abundances);
    if (!u.no_maps) {
        for (Index k = 0; k < abundances.dim(2); ++k) {
            io::write_pgm(dir / ("abundance_" + std::to_string(k + 1) + ".pgm"), member_map(abundances, k));
        }
    }
    m.emplace_back("time_s", io::format_exact(time_s));
    io::write_manifest(dir / "manifest.txt", m);
    out << u.method << ": wrote " << dir.string() << " in " << io::format_sig(time_s) << " s\n";
    return 0;
}

struct ResultSet {
    std::string label;
    MetricsReport report;
};

ResultSet evaluate_dir(const SceneTruth& truth, const fs::path& dir) {
    const auto manifest = io::read_manifest(dir / "manifest.txt");
    auto get = [&](const std::string& key) -> std::string {
        const auto it = manifest.find(key);
        if (it == manifest.end()) throw IoError((dir / "manifest.txt").string() + ": missing key '" + key + "'");
        return it->second;
    };
    const Tensor3 a = io::read_cube(dir / "abundances.hsi");
    const std::string method = get("method");
    const double time_s = std::stod(get("time_s"));
    if (fs::exists(dir / "endmembers.emt")) {
        return {method, evaluate(truth, a, io::read_em_tensor(dir / "endmembers.emt"), time_s, true)};
    }
    const Eigen::MatrixXd m0 = io::read_em_csv(get("em"));
    Tensor4 m = replicate_endmembers(m0, a.dim(0), a.dim(1));
    if (fs::exists(dir / "scale.hsi")) {
        // SCLS reconstructs with the per-pixel scale folded into the endmembers.
        const Tensor3 scale = io::read_cube(dir / "scale.hsi");
        if (scale.dim(0) != a.dim(0) || scale.dim(1) != a.dim(1)) throw DimensionError("scale map dims differ");
        const Index block = m.dim(2) * m.dim(3);
        auto data = m.data();
        for (Index p = 0; p < a.dim(0) * a.dim(1); ++p) {
            const double s = scale.data()[static_cast<std::size_t>(p)];
            for (Index i = 0; i < block; ++i) data[static_cast<std::size_t>(p * block + i)] *= s;
        }
    }
    return {method, evaluate(truth, a, m, time_s, false)};
}

std::string opt_sig(const std::optional<double>& v) { return v ? io::format_sig(*v) : "-"; }

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
    const SceneTruth truth = read_truth(a.truth);
    std::vector<std::vector<std::string>> rows{{"Method", "MSE_A", "MSE_M", "SAM_M", "MSE_R", "SAM_R", "Time"}};
    std::string csv = "method,mse_a,mse_m,sam_m,mse_r,sam_r,time_s\n";
    for (const auto& r : a.results) {
        const ResultSet rs = evaluate_dir(truth, r);
        const auto& rep = rs.report;
        std::vector<std::string> row{rs.label,
                                     io::format_sig(rep.mse_a),
                                     opt_sig(rep.mse_m),
                                     opt_sig(rep.sam_m),
                                     io::format_sig(rep.mse_r),
                                     io::format_sig(rep.sam_r),
                                     io::format_sig(rep.time_s)};
        for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + (row[i] == "-" ? std::string() : row[i]);
        csv += '\n';
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string pad(width[i] - row[i].size(), ' ');
            if (i == 0) {
                line += row[i] + pad;
            } else {
                line += "  " + pad + row[i];
            }
        }
        out << line << '\n';
    }
    if (!a.csv.empty()) io::write_file_atomic(a.csv, csv);
    return 0;
}

int cmd_tune(const TuneArgs& t, std::ostream& out) {
    const SceneTruth truth = read_truth(t.truth);
    const Eigen::MatrixXd m0 = io::read_em_csv(t.em);
    const TuneObjective objective = parse_tune_objective(t.objective);
    const TuneResult res = grid_search(truth, m0, t.grid_a, t.grid_m, make_config(t.solver), objective);
    auto opt = [](const std::optional<double>& v) { return v ? io::format_exact(*v) : std::string(); };
    std::string csv = "lambda_a,lambda_m,mse_a,mse_m,sam_m,mse_r,sam_r,time_s,iters,score\n";
    for (const auto& g : res.grid) {
        csv += io::format_exact(g.lambda_a) + "," + io::format_exact(g.lambda_m) + "," +
               io::format_exact(g.metrics.mse_a) + "," + opt(g.metrics.mse_m) + "," + opt(g.metrics.sam_m) + "," +
               io::format_exact(g.metrics.mse_r) + "," + io::format_exact(g.metrics.sam_r) + "," +
               io::format_exact(g.metrics.time_s) + "," + std::to_string(g.iters) + "," +
               io::format_exact(g.score) + "\n";
    }
    io::write_file_atomic(t.csv, csv);
    out << "best lambda_a=" << io::format_exact(res.best.lambda_a)
        << " lambda_m=" << io::format_exact(res.best.lambda_m) << " " << to_string(objective) << "="
        << io::format_sig(res.best.score) << " (" << res.grid.size() << " grid points, " << t.csv << ")\n";
    return 0;
}

template <std::size_t Order>
void print_rank(const Tensor<Order>& t, double eps, std::ostream& out) {
    const RankEstimate est = estimate_rank(t, eps);
    for (std::size_t m = 0; m < est.per_mode.size(); ++m) {
        out << "mode " << m + 1 << ": " << est.per_mode[m] << (est.fallback[m] ? " (no gap below epsilon)" : "")
            << '\n';
    }
    out << "overall: " << est.overall << '\n';
}

int cmd_estimate_rank(const RankArgs& r, std::ostream& out) {
    const std::string magic = io::file_magic(r.input);
    if (magic == "HSICUBE") {
        print_rank(io::read_cube(r.input), r.epsilon, out);
    } else if (magic == "EMTENS") {
        print_rank(io::read_em_tensor(r.input), r.epsilon, out);
    } else {
        throw IoError(r.input + ": not a cube or endmember tensor file");
    }
    return 0;
}

// Appends "--key value" for every entry of the --config file whose flag is
// not already on the command line.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> argv) {
    if (argv.empty()) return argv;
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(argv.front());
    } catch (const CLI::OptionNotFound&) {
        return argv;
    }
    std::string path;
    for (std::size_t i = 1; i < argv.size(); ++i) {
        if (argv[i] == "--config" && i + 1 < argv.size()) path = argv[i + 1];
        if (argv[i].rfind("--config=", 0) == 0) path = argv[i].substr(9);
    }
    if (path.empty()) return argv;
    auto given = [&](const std::string& flag) {
        return std::any_of(argv.begin() + 1, argv.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    std::istringstream in(io::read_file(path));
    std::vector<std::string> extra;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#' || line[b] == ';' || line[b] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path + ":" + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string x) {
            const auto f = x.find_first_not_of(" \t\r\"");
            const auto l = x.find_last_not_of(" \t\r\"");
            return f == std::string::npos ? std::string() : x.substr(f, l - f + 1);
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        if (key == "config") continue;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr) throw IoError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (given(flag)) continue;
        if (opt->get_expected_max() == 0) {
            if (value == "true" || value == "1" || value == "yes" || value == "on") extra.push_back(flag);
        } else {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    argv.insert(argv.end(), extra.begin(), extra.end());
    return argv;
}

} // namespace

SceneTruth read_truth(const fs::path& dir) {
    SceneTruth t;
    t.cube = io::read_cube(dir / "cube.hsi");
    t.clean_cube = fs::exists(dir / "clean.hsi") ? io::read_cube(dir / "clean.hsi") : t.cube;
    t.abundances = io::read_cube(dir / "abundances.hsi");
    t.endmembers = io::read_em_tensor(dir / "endmembers.emt");
    return t;
}

std::string cost_trace_csv(const std::vector<double>& trace) {
    std::string out = "iter,cost\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i + 1) + "," + io::format_exact(trace[i]) + "\n";
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hyperspectral unmixing with low-rank tensor regularization", "ultrav"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a synthetic scene with ground truth");
    g->add_option("--n1", gen.n1, "Rows")->check(CLI::PositiveNumber)->capture_default_str();
    g->add_option("--n2", gen.n2, "Columns")->check(CLI::PositiveNumber)->capture_default_str();
    g->add_option("--em", gen.em, "Endmember library CSV (L rows, R columns); synthetic when omitted");
    g->add_option("--bands", gen.bands, "Bands of the synthetic library")->check(CLI::Range(Index{2}, Index{100000}))->capture_default_str();
    g->add_option("--members", gen.members, "Endmembers of the synthetic library")->check(CLI::Range(Index{1}, Index{64}))->capture_default_str();
    g->add_option("--library-seed", gen.library_seed, "Seed of the synthetic library")->capture_default_str();
    g->add_option("--variability", gen.variability, "none | mult:<sigma> | add:<sigma>")->capture_default_str();
    g->add_option("--snr", gen.snr, "Noise level in dB, or inf")->capture_default_str();
    g->add_option("--seed", gen.seed, "Scene seed")->capture_default_str();
    g->add_option("--abundance", gen.abundance, "gaussian | patches")->capture_default_str();
    g->add_option("--correlation-length", gen.correlation_length, "Spatial correlation in pixels (<= 0: auto)");
    g->add_option("--out", gen.out, "Output directory")->required();

    UnmixArgs un;
    auto* u = app.add_subcommand("unmix", "Unmix a cube");
    u->add_option("--cube", un.cube, "Input cube (.hsi)")->required()->check(CLI::ExistingFile);
    u->add_option("--em", un.em, "Initial endmember CSV (L rows, R columns)")->required()->check(CLI::ExistingFile);
    u->add_option("--method", un.method, "fcls | scls | ultra-v")
        ->check(CLI::IsMember({"fcls", "scls", "ultra-v"}))
        ->capture_default_str();
    u->add_option("--out", un.out, "Output directory")->required();
    u->add_flag("--no-maps", un.no_maps, "Skip the PGM abundance maps");
    add_solver_options(*u, un.solver);

    MetricsArgs met;
    auto* mt = app.add_subcommand("metrics", "Compare unmixing results with ground truth");
    mt->add_option("--truth", met.truth, "Directory written by generate")->required()->check(CLI::ExistingDirectory);
    mt->add_option("--result", met.results, "Directory written by unmix (repeatable)")->required()->check(CLI::ExistingDirectory);
    mt->add_option("--csv", met.csv, "Also write the table as CSV");

    TuneArgs tun;
    auto* t = app.add_subcommand("tune", "Grid search of lambda_A and lambda_M against ground truth");
    t->add_option("--truth", tun.truth, "Directory written by generate")->required()->check(CLI::ExistingDirectory);
    t->add_option("--em", tun.em, "Initial endmember CSV")->required()->check(CLI::ExistingFile);
    t->add_option("--grid-a", tun.grid_a, "lambda_A values")->delimiter(',')->check(CLI::NonNegativeNumber);
    t->add_option("--grid-m", tun.grid_m, "lambda_M values")->delimiter(',')->check(CLI::NonNegativeNumber);
    t->add_option("--objective", tun.objective, "mse_a | mse_r | sam_r")->capture_default_str();
    t->add_option("--csv", tun.csv, "Grid CSV output")->capture_default_str();
    add_solver_options(*t, tun.solver);

    RankArgs rk;
    auto* r = app.add_subcommand("estimate-rank", "Estimate the CPD rank of a cube or endmember tensor");
    r->add_option("input", rk.input, "Cube (.hsi) or endmember tensor (.emt)")->required()->check(CLI::ExistingFile);
    r->add_option("--epsilon", rk.epsilon, "Singular-value gap threshold")->check(CLI::PositiveNumber)->capture_default_str();

    std::string config_path;
    for (auto* sub : {g, u, t}) {
        sub->add_option("--config", config_path, "key=value file; command-line flags take precedence");
    }

    std::vector<std::string> argv(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    try {
        argv = apply_config(app, argv);
    } catch (const std::exception& e) {
        err << "ultrav: error: " << e.what() << "\n";
        return 2;
    }
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (g->parsed()) return cmd_generate(gen, out);
        if (u->parsed()) return cmd_unmix(un, out);
        if (mt->parsed()) return cmd_metrics(met, out);
        if (t->parsed()) return cmd_tune(tun, out);
        return cmd_estimate_rank(rk, out);
    } catch (const std::exception& e) {
        err << "ultrav: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ultrav::cli
