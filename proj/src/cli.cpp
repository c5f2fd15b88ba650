#include "topotraj/cli.hpp"

#include "topotraj/export.hpp"
#include "topotraj/gradcheck.hpp"
#include "topotraj/metrics.hpp"
#include "topotraj/scenario.hpp"
#include "topotraj/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace topotraj::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SampledState lerp(const SampledState& a, const SampledState& b, double u) {
    SampledState s;
    s.t = a.t + u * (b.t - a.t);
    s.position = a.position + u * (b.position - a.position);
    s.velocity = a.velocity + u * (b.velocity - a.velocity);
    s.acceleration = a.acceleration + u * (b.acceleration - a.acceleration);
    return s;
}

const SampledState& held(const std::vector<SampledState>& s, std::size_t j) {
    return s[std::min(j, s.size() - 1)];
}

json costsJson(const CostBreakdown& c) {
    return {{"effort", c.effort},       {"time", c.time},         {"kinodynamic", c.kinodynamic},
            {"collision", c.collision}, {"topology", c.topology}, {"total", c.total()}};
}

json stageJson(const StageReport& s) {
    return {{"ran", s.ran},
            {"iterations", s.iterations},
            {"evaluations", s.evaluations},
            {"status", s.status},
            {"topology_satisfied", s.topology_satisfied}};
}

double finiteOr(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

json reportJson(const Scenario& sc, const OptimizationReport& r, const Metrics& m, const SolverOptions& opts) {
    json pairs = json::array();
    int constrained = 0;
    int satisfied = 0;
    for (const auto& p : r.pairs) {
        pairs.push_back({{"a", p.a},
                         {"b", p.b},
                         {"eta", label(p.requested)},
                         {"requested", interactionName(p.requested)},
                         {"observed", interactionName(p.observed)},
                         {"metric", p.metric},
                         {"t_star", p.t_star},
                         {"satisfied", p.satisfied}});
        if (p.requested != Interaction::None) {
            ++constrained;
            satisfied += p.satisfied ? 1 : 0;
        }
    }
    json audit = {{"checked", r.audit_checked},
                  {"max_speed", r.audit.max_speed},
                  {"max_acceleration", r.audit.max_acceleration},
                  {"min_vehicle_distance", finiteOr(r.audit.min_vehicle_distance, -1.0)},
                  {"min_obstacle_margin", finiteOr(r.audit.min_obstacle_margin, -1.0)},
                  {"speed_ok", r.audit.speed_ok},
                  {"acceleration_ok", r.audit.acceleration_ok},
                  {"distance_ok", r.audit.distance_ok}};
    return {{"scenario", sc.name},
            {"success", r.success},
            {"convergence", r.convergence},
            {"wall_ms", r.wall_ms},
            {"stage1", stageJson(r.stage1)},
            {"stage2", stageJson(r.stage2)},
            {"topology_margin", opts.topology_margin},
            {"costs", costsJson(r.costs)},
            {"pairs", pairs},
            {"constrained_pairs", constrained},
            {"satisfied_pairs", satisfied},
            {"all_satisfied", r.all_satisfied},
            {"min_pairwise_distance", finiteOr(m.min_pairwise_distance, -1.0)},
            {"audit", audit},
            {"metrics",
             {{"computation_ms", m.computation_ms},
              {"total_travel_distance", m.total_travel_distance},
              {"total_travel_duration", m.total_travel_duration},
              {"max_duration", m.max_duration}}}};
}

std::vector<std::string> vehicleIds(const Scenario& sc) {
    std::vector<std::string> ids;
    for (const auto& v : sc.vehicles) {
        ids.push_back(v.id);
    }
    return ids;
}

struct OptimizeArgs {
    std::string scenario;
    std::string out_dir;
    bool stage_one_only = false;
    bool single_stage = false;
    std::uint64_t seed = 0;
    double jitter = 0.0;
};

int optimizeCommand(const OptimizeArgs& args, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = loadScenario(args.scenario);
    } catch (const ScenarioError& e) {
        err << "error: " << args.scenario << ": " << e.what() << '\n';
        return kUsage;
    }
    SolverOptions opts;
    opts.stage_one_only = args.stage_one_only;
    opts.single_stage = args.single_stage;
    const Eigen::VectorXd x0 = initialize(sc, InitOptions{args.jitter, args.seed});
    const OptimizationResult res = twoStageOptimize(sc, opts, &x0);
    const Metrics metrics = computeMetrics(res.trajectories, res.report.wall_ms);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    exportTrajectories((dir / "trajectories.csv").string(), vehicleIds(sc), res.trajectories);
    writeSvg((dir / "trajectories.svg").string(), renderSvg(sc, res.trajectories));
    const json report = reportJson(sc, res.report, metrics, opts);
    std::ofstream((dir / "report.json").string()) << report.dump(2) << '\n';

    out << "scenario " << sc.name << ": " << (res.report.success ? "success" : "FAILED") << " in "
        << std::fixed << std::setprecision(1) << res.report.wall_ms << " ms\n";
    out << "  pairs satisfied " << report["satisfied_pairs"].get<int>() << "/"
        << report["constrained_pairs"].get<int>() << ", stage1 " << res.report.stage1.status << " ("
        << res.report.stage1.iterations << " it), stage2 " << res.report.stage2.status << " ("
        << res.report.stage2.iterations << " it)\n";
    out << std::setprecision(3) << "  distance " << metrics.total_travel_distance << " m, duration "
        << metrics.total_travel_duration << " s, min separation " << metrics.min_pairwise_distance << " m\n";
    out << "  wrote " << (dir / "trajectories.csv").string() << ", trajectories.svg, report.json\n";
    out.unsetf(std::ios::floatfield);
    return res.report.success ? kOk : kOptimizationFailed;
}

struct BenchmarkArgs {
    std::string suite;
    int repeats = 1;
    std::string out_csv;
    std::uint64_t seed = 0;
};

int benchmarkCommand(const BenchmarkArgs& args, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(args.suite, ec)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) {
            files.push_back(entry.path());
        }
    }
    if (ec) {
        err << "error: cannot read suite directory '" << args.suite << "'\n";
        return kUsage;
    }
    if (files.empty()) {
        err << "error: no scenario files (*.yaml) in '" << args.suite << "'\n";
        return kUsage;
    }
    if (args.repeats < 1) {
        err << "error: --repeats must be at least 1\n";
        return kUsage;
    }
    std::sort(files.begin(), files.end());

    std::ofstream csv(args.out_csv);
    if (!csv) {
        err << "error: cannot write '" << args.out_csv << "'\n";
        return kUsage;
    }
    csv << "scenario,vehicles,success,repeats,computation_ms,travel_distance,travel_duration,max_duration,"
           "min_pairwise_distance\n";
    csv << std::setprecision(10);
    int succeeded = 0;
    for (const auto& file : files) {
        Scenario sc;
        try {
            sc = loadScenario(file.string());
        } catch (const ScenarioError& e) {
            err << "warning: skipping " << file.string() << ": " << e.what() << '\n';
            csv << file.stem().string() << ",0,0,0,,,,,\n";
            continue;
        }
        const Eigen::VectorXd x0 = initialize(sc, InitOptions{0.0, args.seed});
        Metrics mean;
        bool all_ok = true;
        for (int r = 0; r < args.repeats; ++r) {
            const OptimizationResult res = twoStageOptimize(sc, SolverOptions{}, &x0);
            const Metrics m = computeMetrics(res.trajectories, res.report.wall_ms);
            all_ok = all_ok && res.report.success;
            mean.computation_ms += m.computation_ms / args.repeats;
            mean.total_travel_distance += m.total_travel_distance / args.repeats;
            mean.total_travel_duration += m.total_travel_duration / args.repeats;
            mean.max_duration += m.max_duration / args.repeats;
            mean.min_pairwise_distance += finiteOr(m.min_pairwise_distance, 0.0) / args.repeats;
        }
        succeeded += all_ok ? 1 : 0;
        csv << file.stem().string() << ',' << sc.vehicles.size() << ',' << (all_ok ? 1 : 0) << ',' << args.repeats
            << ',' << mean.computation_ms << ',' << mean.total_travel_distance << ','
            << mean.total_travel_duration << ',' << mean.max_duration << ',' << mean.min_pairwise_distance << '\n';
        out << file.stem().string() << ": " << (all_ok ? "ok" : "FAILED") << ", " << std::fixed
            << std::setprecision(1) << mean.computation_ms << " ms, " << std::setprecision(2)
            << mean.total_travel_distance << " m, " << mean.total_travel_duration << " s\n";
        out.unsetf(std::ios::floatfield);
    }
    return succeeded > 0 ? kOk : kOptimizationFailed;
}

struct ClassifyArgs {
    std::string traj_csv;
    std::string pair;
    double threshold = kClassificationThreshold;
};

int classifyCommand(const ClassifyArgs& args, std::ostream& out, std::ostream& err) {
    std::map<std::string, std::vector<SampledState>> samples;
    try {
        samples = loadTrajectoriesCsv(args.traj_csv);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    const auto comma = args.pair.find(',');
    if (comma == std::string::npos) {
        err << "error: --pair expects two ids separated by a comma\n";
        return kUsage;
    }
    const std::string a = args.pair.substr(0, comma);
    const std::string b = args.pair.substr(comma + 1);
    if (!samples.count(a) || !samples.count(b) || a == b) {
        err << "error: unknown or repeated vehicle id in pair '" << args.pair << "'\n";
        return kUsage;
    }
    const DiscreteClassification c = classifySampled(samples[a], samples[b], args.threshold);
    out << interactionName(c.label) << ' ' << std::setprecision(10) << c.metric << '\n';
    return kOk;
}

struct GradcheckArgs {
    std::string scenario;
    int samples = 20;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
};

int gradcheckCommand(const GradcheckArgs& args, std::ostream& out, std::ostream& err) {
    if (args.samples < 1) {
        err << "error: --samples must be at least 1\n";
        return kUsage;
    }
    Scenario sc;
    try {
        sc = loadScenario(args.scenario);
    } catch (const ScenarioError& e) {
        err << "error: " << args.scenario << ": " << e.what() << '\n';
        return kUsage;
    }
    GradcheckOptions opts;
    opts.samples = args.samples;
    opts.seed = args.seed;
    const GradcheckReport rep = gradcheck(sc, opts);
    out << std::scientific << std::setprecision(3);
    for (const auto& f : rep.families) {
        out << std::left << std::setw(12) << f.family << " worst relative error " << f.worst_relative_error
            << (f.worst_relative_error < args.tolerance ? "" : "  > tol") << '\n';
    }
    out << "samples " << rep.samples << ", resampled " << rep.resampled << " (kink inside stencil)\n";
    out.unsetf(std::ios::floatfield);
    return rep.passed(args.tolerance) ? kOk : kFailed;
}

struct RenderArgs {
    std::string scenario;
    std::string out_svg;
    std::string traj_csv;
};

int renderCommand(const RenderArgs& args, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = loadScenario(args.scenario);
    } catch (const ScenarioError& e) {
        err << "error: " << args.scenario << ": " << e.what() << '\n';
        return kUsage;
    }
    std::string svg;
    if (args.traj_csv.empty()) {
        const auto trajs = decodeTrajectories(sc, DecisionLayout::forScenario(sc), initialize(sc));
        svg = renderSvg(sc, trajs);
    } else {
        std::map<std::string, std::vector<SampledState>> samples;
        try {
            samples = loadTrajectoriesCsv(args.traj_csv);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kUsage;
        }
        std::vector<std::vector<Vec2>> lines;
        for (const auto& v : sc.vehicles) {
            const auto it = samples.find(v.id);
            if (it == samples.end()) {
                err << "error: vehicle '" << v.id << "' missing from " << args.traj_csv << '\n';
                return kUsage;
            }
            std::vector<Vec2> pts;
            const auto& s = it->second;
            for (int k = 0; k < kRenderSamples; ++k) {
                const double pos = (s.size() - 1) * static_cast<double>(k) / (kRenderSamples - 1);
                const auto j = static_cast<std::size_t>(std::floor(pos));
                pts.push_back(lerp(held(s, j), held(s, j + 1), pos - j).position);
            }
            lines.push_back(std::move(pts));
        }
        svg = renderSvg(sc, lines);
    }
    try {
        writeSvg(args.out_svg, svg);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailed;
    }
    out << "wrote " << args.out_svg << '\n';
    return kOk;
}

}  // namespace

DiscreteClassification classifySampled(const std::vector<SampledState>& a, const std::vector<SampledState>& b,
                                       double threshold) {
    DiscreteClassification c;
    const std::size_t n = std::max(a.size(), b.size());
    if (a.empty() || b.empty()) {
        return c;
    }
    auto dist2 = [&](std::size_t j) { return (held(a, j).position - held(b, j).position).squaredNorm(); };
    std::size_t best = 0;
    double best_f = dist2(0);
    for (std::size_t j = 1; j < n; ++j) {
        const double f = dist2(j);
        if (f < best_f) {
            best_f = f;
            best = j;
        }
    }
    double offset = 0.0;
    if (best > 0 && best + 1 < n) {
        const double fm = dist2(best - 1);
        const double fp = dist2(best + 1);
        const double curvature = fm - 2.0 * best_f + fp;
        if (curvature > 0.0) {
            offset = std::clamp(0.5 * (fm - fp) / curvature, -0.5, 0.5);
        }
    }
    const std::size_t lo = offset < 0.0 ? best - 1 : best;
    const double u = offset < 0.0 ? 1.0 + offset : offset;
    const SampledState sa = lerp(held(a, lo), held(a, lo + 1), u);
    const SampledState sb = lerp(held(b, lo), held(b, lo + 1), u);
    c.t_star = sa.t;
    c.metric = homotopyMetric(sa.position - sb.position, sa.velocity - sb.velocity);
    c.label = interactionFromMetric(c.metric, threshold);
    return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-vehicle trajectory optimization with prescribed pairwise passing directions"};
    app.require_subcommand(1);

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand("optimize", "Optimize a scenario; writes CSV, SVG and report.json");
    optimize->add_option("--scenario", opt.scenario, "Scenario file (YAML)")->required();
    optimize->add_option("--out", opt.out_dir, "Output directory")->required();
    optimize->add_flag("--stage-one-only", opt.stage_one_only, "Stop after the topology stage; skips the collision audit");
    optimize->add_flag("--single-stage", opt.single_stage, "Optimize all penalties at once (no stage schedule)");
    optimize->add_option("--seed", opt.seed, "Seed for the initial waypoint jitter");
    optimize->add_option("--jitter", opt.jitter, "Initial waypoint jitter in meters (default 0)");

    BenchmarkArgs bench;
    auto* benchmark = app.add_subcommand("benchmark", "Run every *.yaml scenario in a directory and tabulate metrics");
    benchmark->add_option("--suite", bench.suite, "Directory of scenario files")->required();
    benchmark->add_option("--repeats", bench.repeats, "Runs per scenario (metrics are averaged)");
    benchmark->add_option("--out", bench.out_csv, "Output CSV")->required();
    benchmark->add_option("--seed", bench.seed, "Seed shared by every run");

    ClassifyArgs cls;
    auto* classify = app.add_subcommand(
        "classify",
        "Classify the passing direction of two vehicles from an exported CSV. Uses the sampled states "
        "directly (nearest sample pair refined by a parabola), so precision follows the 100 Hz sampling");
    classify->add_option("--traj", cls.traj_csv, "Trajectory CSV written by optimize")->required();
    classify->add_option("--pair", cls.pair, "Two vehicle ids, comma separated")->required();
    classify->add_option("--threshold", cls.threshold, "|M| below this reads as none");

    GradcheckArgs gc;
    auto* grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients per cost family");
    grad->add_option("--scenario", gc.scenario, "Scenario file (YAML)")->required();
    grad->add_option("--samples", gc.samples, "Number of random decision vectors");
    grad->add_option("--tol", gc.tolerance, "Pass threshold on the worst relative error");
    grad->add_option("--seed", gc.seed, "Seed for the random perturbations");

    RenderArgs rnd;
    auto* render = app.add_subcommand("render", "Draw a scenario with its initial guess or an exported CSV");
    render->add_option("--scenario", rnd.scenario, "Scenario file (YAML)")->required();
    render->add_option("--out", rnd.out_svg, "Output SVG")->required();
    render->add_option("--traj", rnd.traj_csv, "Trajectory CSV; defaults to the initial guess");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*optimize) {
            return optimizeCommand(opt, out, err);
        }
        if (*benchmark) {
            return benchmarkCommand(bench, out, err);
        }
        if (*classify) {
            return classifyCommand(cls, out, err);
        }
        if (*grad) {
            return gradcheckCommand(gc, out, err);
        }
        if (*render) {
            return renderCommand(rnd, out, err);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}

}  // namespace topotraj::cli
