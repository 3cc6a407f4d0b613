// sqbill: command-line explorer for the dissipative square billiard.
// Subcommands compute orbits, attractor samples, invariant manifolds,
// bifurcation constants, basin maps, parameter scans and periodic-orbit
// tables, writing CSV or JSON with a fixed 17-significant-digit float
// format so that identical configs produce byte-identical files.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sqb/sqb.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitPartial = 4;

std::string fmt(double v) { return sqb::format_double(v); }

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    return os;
}

struct CommonOpts {
    double lambda = 0.6;
    std::string config_path;
    std::string out = "-";
    std::string format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = sqb::default_threads();
    std::vector<std::string> overrides;

    sqb::Config merged() const {
        sqb::Config cfg;
        if (!config_path.empty()) cfg = sqb::Config::load(config_path);
        for (const std::string& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set expects key=value, got " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

// stream sink: "-" means stdout
class OutFile {
public:
    explicit OutFile(const std::string& path) {
        if (path != "-") file_ = open_out(path);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--lambda", opts.lambda, "contraction factor in (0,1)");
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--out", opts.out, "output path ('-' = stdout)");
    cmd->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opts.seed, "RNG seed (SplitMix64)");
    cmd->add_option("--threads", opts.threads, "worker threads");
    cmd->add_option("--set", opts.overrides, "override a config key (key=value)")
        ->take_all();
}

sqb::BasinGrid grid_from(const sqb::Config& cfg, const char* skey,
                         const char* tkey, long fallback) {
    sqb::BasinGrid grid;
    grid.ns = static_cast<std::size_t>(cfg.get_long(skey, fallback));
    grid.ntheta = static_cast<std::size_t>(cfg.get_long(tkey, fallback));
    if (grid.ns < 2 || grid.ntheta < 2)
        throw std::runtime_error("basin grid must be at least 2x2");
    return grid;
}

// --- subcommand bodies ---------------------------------------------------------

int cmd_orbit(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::Lambda lam(opts.lambda);
    double s0 = cfg.get_double("orbit_s0", 0.3);
    double theta0 = cfg.get_double("orbit_theta0", 0.0);
    long steps = cfg.get_long("orbit_steps", 1000);
    std::string space = cfg.get("orbit_space", "reduced");

    sqb::OrbitTrace trace;
    if (space == "full")
        trace = sqb::run_full_orbit({s0, theta0}, lam, steps);
    else if (space == "reduced")
        trace = sqb::run_reduced_orbit({s0, theta0}, lam, steps);
    else
        throw std::runtime_error("orbit_space must be 'reduced' or 'full'");

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    os << "index,s,theta,branch\n";
    for (const auto& row : trace.rows)
        os << row.index << ',' << fmt(row.s) << ',' << fmt(row.theta) << ','
           << row.branch << '\n';
    if (trace.died) {
        os << "# status: singular death after index "
           << trace.rows.back().index << ": " << trace.death_reason << '\n';
        return kExitPartial;
    }
    os << "# status: ok\n";
    return kExitOk;
}

int cmd_attractor(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::Lambda lam(opts.lambda);
    int n_init = static_cast<int>(cfg.get_long("attractor_init", 500));
    long n_iter = cfg.get_long("attractor_iter", 10000);
    long transient = cfg.get_long("attractor_transient", 1000);

    sqb::AttractorSample sample =
        sqb::sample_attractor(lam, n_init, n_iter, transient, opts.seed, opts.threads);
    if (sample.points.empty())
        std::cerr << "warning: empty sample (every orbit captured or dead)\n";

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    if (opts.format == "json") {
        os << "{\"schema_version\":1,\"lambda\":" << fmt(sample.lambda)
           << ",\"seed\":" << sample.seed << ",\"n_init\":" << sample.n_init
           << ",\"n_iter\":" << sample.n_iter << ",\"transient\":" << sample.transient
           << ",\"orbits_kept\":" << sample.orbits_kept
           << ",\"orbits_captured\":" << sample.orbits_captured
           << ",\"orbits_died\":" << sample.orbits_died << ",\"points\":[";
        for (std::size_t i = 0; i < sample.points.size(); ++i) {
            if (i) os << ',';
            os << '[' << fmt(sample.points[i].s) << ',' << fmt(sample.points[i].theta)
               << ']';
        }
        os << "]}\n";
    } else {
        os << "s,theta\n";
        for (const auto& p : sample.points)
            os << fmt(p.s) << ',' << fmt(p.theta) << '\n';
        os << "# orbits kept=" << sample.orbits_kept
           << " captured=" << sample.orbits_captured << " died=" << sample.orbits_died
           << '\n';
    }
    return kExitOk;
}

void write_curve(std::ostream& os, const sqb::Curve& curve, int depth = 0) {
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << fmt(curve.theta[i]) << ',' << fmt(curve.s[i]) << ','
           << to_string(curve.kind) << ',' << depth << '\n';
}

int cmd_manifolds(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::Lambda lam(opts.lambda);
    std::size_t grid = static_cast<std::size_t>(cfg.get_long("manifold_grid", 2048));
    int depth = static_cast<int>(cfg.get_long("manifold_depth", 6));
    int singular_depth = static_cast<int>(cfg.get_long("manifold_singular_depth", 0));

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    os << "theta,s,kind,depth\n";

    sqb::StableLocalCurve stable = sqb::sample_stable_local(lam, grid);
    // emit only the part that represents the manifold (0 < h < 1)
    sqb::Curve valid;
    valid.kind = sqb::CurveKind::StableLocal;
    for (std::size_t i = 0; i < stable.curve.size(); ++i) {
        if (stable.curve.theta[i] < stable.theta_valid_lo) continue;
        if (stable.curve.theta[i] > stable.theta_valid_hi) break;
        valid.theta.push_back(stable.curve.theta[i]);
        valid.s.push_back(stable.curve.s[i]);
    }
    write_curve(os, valid);

    sqb::UnstableSegments unstable = sqb::unstable_segments(lam, depth);
    for (const auto& seg : unstable.segments) {
        os << fmt(seg.theta) << ',' << fmt(seg.s_lo) << ",unstable_local,"
           << seg.depth << '\n';
        os << fmt(seg.theta) << ',' << fmt(seg.s_hi) << ",unstable_local,"
           << seg.depth << '\n';
    }

    write_curve(os, sqb::sample_splus(grid / 4));
    write_curve(os, sqb::sample_sminus(lam, grid / 4));
    write_curve(os, sqb::sample_sinfinity(lam, grid / 4));
    if (singular_depth > 0) {
        int k = 1;
        for (const sqb::Curve& it : sqb::singular_preimages(lam, singular_depth))
            write_curve(os, it, k++);
    }
    if (unstable.dropped > 0)
        os << "# dropped " << unstable.dropped << " unstable pieces below resolution\n";
    return kExitOk;
}

int cmd_constants(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    int n_max = static_cast<int>(cfg.get_long("cn_max", 20));
    bool with_lambda0 = cfg.get_long("with_lambda0", 0) != 0;

    sqb::BifurcationConstants constants = sqb::compute_constants(n_max);
    if (with_lambda0) {
        sqb::BasinGrid grid = grid_from(cfg, "lambda0_grid_s", "lambda0_grid_theta",
                                        cfg.get_long("lambda0_grid", 400));
        sqb::Lambda0Estimate est = sqb::estimate_lambda0(
            cfg.get_double("lambda0_lo", 0.58), cfg.get_double("lambda0_hi", 0.62),
            grid, cfg.get_long("lambda0_iter", 10000),
            cfg.get_double("lambda0_threshold", 0.001),
            cfg.get_double("lambda0_width", 1e-3), opts.threads);
        constants.lambda0_bracket = {est.lo, est.hi};
    }

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    os << "{\"schema_version\":1,\"lambda1\":" << fmt(constants.lambda1)
       << ",\"lambda2\":" << fmt(constants.lambda2) << ",\"lambda0\":";
    if (constants.has_lambda0())
        os << "{\"low\":" << fmt(constants.lambda0_bracket.first)
           << ",\"high\":" << fmt(constants.lambda0_bracket.second) << '}';
    else
        os << "null";
    os << ",\"cn\":[";
    for (std::size_t i = 0; i < constants.cn_table.size(); ++i) {
        if (i) os << ',';
        os << '[' << constants.cn_table[i].first << ','
           << fmt(constants.cn_table[i].second) << ']';
    }
    os << "],\"meta\":{\"lambda1\":{\"iterations\":" << constants.lambda1_meta.iterations
       << ",\"residual\":" << fmt(constants.lambda1_meta.residual)
       << "},\"lambda2\":{\"iterations\":" << constants.lambda2_meta.iterations
       << ",\"residual\":" << fmt(constants.lambda2_meta.residual) << "},\"cn\":[";
    for (std::size_t i = 0; i < constants.cn_meta.size(); ++i) {
        if (i) os << ',';
        os << "{\"iterations\":" << constants.cn_meta[i].iterations
           << ",\"residual\":" << fmt(constants.cn_meta[i].residual) << '}';
    }
    os << "]}}\n";
    return kExitOk;
}

int cmd_basin(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::Lambda lam(opts.lambda);
    sqb::BasinGrid grid =
        grid_from(cfg, "basin_grid_s", "basin_grid_theta", cfg.get_long("basin_grid", 400));
    long n_iter = cfg.get_long("basin_iter", 10000);

    sqb::BasinReport report = sqb::basin_of_p(lam, grid, n_iter, opts.threads);

    std::string raster = cfg.get("basin_raster", "");
    if (!raster.empty()) {
        std::ofstream rs = open_out(raster);
        sqb::write_basin_raster(rs, report);
    }

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    if (opts.format == "json") {
        os << "{\"schema_version\":1,\"lambda\":" << fmt(report.lambda)
           << ",\"grid\":[" << report.grid.ntheta << ',' << report.grid.ns
           << "],\"n_iter\":" << report.n_iter
           << ",\"fraction_to_p\":" << fmt(report.fraction_to_p)
           << ",\"fraction_bounded\":" << fmt(report.fraction_bounded)
           << ",\"fraction_singular\":" << fmt(report.fraction_singular)
           << ",\"max_entry\":" << report.max_entry << ",\"entry_histogram\":[";
        // histogram is sparse; emit [iterate, count] pairs
        bool first = true;
        for (std::size_t k = 0; k < report.entry_histogram.size(); ++k) {
            if (report.entry_histogram[k] == 0) continue;
            if (!first) os << ',';
            first = false;
            os << '[' << k << ',' << report.entry_histogram[k] << ']';
        }
        os << "]}\n";
    } else {
        os << "s,theta,label\n";
        const char* names[3] = {"to_P", "bounded", "singular"};
        for (std::size_t j = 0; j < report.grid.ntheta; ++j)
            for (std::size_t i = 0; i < report.grid.ns; ++i)
                os << fmt(report.grid.s_at(i)) << ',' << fmt(report.grid.theta_at(j))
                   << ',' << names[report.labels[j * report.grid.ns + i]] << '\n';
    }
    return kExitOk;
}

int cmd_scan(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::ScanParams params;
    params.lambda_lo = cfg.get_double("scan_lo", 0.55);
    params.lambda_hi = cfg.get_double("scan_hi", 0.95);
    params.step = cfg.get_double("scan_step", 0.005);
    params.n_max = static_cast<int>(cfg.get_long("scan_nmax", 10));
    params.grid = grid_from(cfg, "scan_grid_s", "scan_grid_theta",
                            cfg.get_long("scan_grid", 100));
    params.n_iter = cfg.get_long("scan_iter", 2000);
    params.attractor_init = static_cast<int>(cfg.get_long("scan_attractor_init", 64));
    params.attractor_iter = cfg.get_long("scan_attractor_iter", 2000);
    params.attractor_transient = cfg.get_long("scan_attractor_transient", 500);
    params.seed = opts.seed;

    sqb::BifurcationConstants constants =
        sqb::compute_constants(static_cast<int>(cfg.get_long("cn_max", 20)));
    // default bracket: precomputed with the documented predicate; recompute
    // with `constants --set with_lambda0=1` when needed
    constants.lambda0_bracket = {cfg.get_double("lambda0_lo", 0.6104),
                                 cfg.get_double("lambda0_hi", 0.6114)};

    std::vector<sqb::ScanRow> rows = sqb::run_scan(params, constants, opts.threads);
    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    os << "lambda,regime,fraction_to_p,attractor_nonempty,homoclinic,q_count,p_count,error\n";
    for (const auto& row : rows)
        os << fmt(row.lambda) << ',' << to_string(row.regime) << ','
           << fmt(row.fraction_to_p) << ',' << (row.attractor_nonempty ? 1 : 0) << ','
           << (row.homoclinic ? 1 : 0) << ',' << row.q_count << ',' << row.p_count
           << ',' << row.error << '\n';
    for (const auto& row : rows)
        if (!row.error.empty()) return kExitSolver;
    return kExitOk;
}

void write_orbit_record(std::ostream& os, const sqb::PeriodicOrbitRecord& rec,
                        double lambda, int n) {
    os << "{\"family\":\"" << to_string(rec.family) << "\",\"n\":" << n
       << ",\"lambda\":" << fmt(lambda) << ",\"exists\":true,\"period\":" << rec.period
       << ",\"itinerary\":\"" << rec.itinerary << "\",\"points\":[";
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        if (i) os << ',';
        os << '[' << fmt(rec.points[i].s) << ',' << fmt(rec.points[i].theta) << ']';
    }
    os << "],\"residual\":" << fmt(rec.residual) << ",\"stability\":\""
       << (rec.stability.kind == sqb::StabilityClass::Hyperbolic ? "hyperbolic"
                                                                 : "parabolic")
       << "\",\"eigenmoduli\":[" << fmt(rec.stability.alpha_mod) << ','
       << fmt(rec.stability.beta_mod) << "]}";
}

int cmd_periodic(const CommonOpts& opts) {
    sqb::Config cfg = opts.merged();
    sqb::Lambda lam(opts.lambda);
    std::string family = cfg.get("periodic_family", "all");
    int n_max = static_cast<int>(cfg.get_long("periodic_nmax", 8));

    OutFile sink(opts.out);
    std::ostream& os = sink.stream();
    os << "{\"schema_version\":1,\"lambda\":" << fmt(opts.lambda) << ",\"records\":[";
    bool first = true;
    auto sep = [&] {
        if (!first) os << ',';
        first = false;
    };
    if (family == "fixed" || family == "all") {
        sep();
        write_orbit_record(os, sqb::fixed_point_p(lam), opts.lambda, 0);
    }
    for (int n = 1; n <= n_max; ++n) {
        if (family == "q" || family == "all") {
            sqb::OrbitSolveResult r = sqb::solve_qn(n, lam);
            sep();
            if (r.exists())
                write_orbit_record(os, *r.orbit, opts.lambda, n);
            else
                os << "{\"family\":\"q\",\"n\":" << n
                   << ",\"lambda\":" << fmt(opts.lambda)
                   << ",\"exists\":false,\"failed_step\":" << r.failed_step
                   << ",\"reason\":\"" << r.reason << "\"}";
        }
        if (family == "p" || family == "all") {
            sqb::OrbitSolveResult r = sqb::solve_pn(n, lam);
            sep();
            if (r.exists())
                write_orbit_record(os, *r.orbit, opts.lambda, n);
            else
                os << "{\"family\":\"p\",\"n\":" << n
                   << ",\"lambda\":" << fmt(opts.lambda)
                   << ",\"exists\":false,\"failed_step\":" << r.failed_step
                   << ",\"reason\":\"" << r.reason << "\"}";
        }
    }
    os << "]}\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explorer for the dissipative square billiard (theta' = lambda theta)"};
    app.require_subcommand(1);

    CommonOpts opts;
    CLI::App* orbit = app.add_subcommand("orbit", "iterate one orbit to CSV");
    CLI::App* attractor = app.add_subcommand("attractor", "ensemble attractor sample");
    CLI::App* manifolds = app.add_subcommand("manifolds", "invariant and singular curves");
    CLI::App* constants = app.add_subcommand("constants", "bifurcation constants report");
    CLI::App* basin = app.add_subcommand("basin", "basin-of-P grid classification");
    CLI::App* scan = app.add_subcommand("scan", "per-lambda summary sweep");
    CLI::App* periodic = app.add_subcommand("periodic", "periodic-orbit records");
    for (CLI::App* cmd : {orbit, attractor, manifolds, constants, basin, scan, periodic})
        add_common(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        auto timer_start = std::chrono::steady_clock::now();
        int rc;
        if (orbit->parsed()) rc = cmd_orbit(opts);
        else if (attractor->parsed()) rc = cmd_attractor(opts);
        else if (manifolds->parsed()) rc = cmd_manifolds(opts);
        else if (constants->parsed()) rc = cmd_constants(opts);
        else if (basin->parsed()) rc = cmd_basin(opts);
        else if (scan->parsed()) rc = cmd_scan(opts);
        else rc = cmd_periodic(opts);
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - timer_start)
                           .count();
        std::cerr << "done in " << elapsed << " ms\n";
        return rc;
    } catch (const sqb::BracketError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const sqb::ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
