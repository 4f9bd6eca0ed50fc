#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bench.hpp"
#include "flo/apoc.hpp"
#include "flo/baseline.hpp"
#include "flo/distances.hpp"
#include "flo/exact.hpp"
#include "flo/io.hpp"
#include "flo/ld.hpp"
#include "flo/metrics.hpp"
#include "flo/synthgen.hpp"

namespace flo::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ordered_json = nlohmann::ordered_json;

// Input data description shared by solve and eval.
struct InputOptions {
    std::string path;
    std::string format = "points";
    std::optional<std::string> distance;
    bool raw_coords = false;
};

struct GenOptions {
    std::string kind = "points";
    Index clusters = 10;
    Index points = 100;
    Index outliers = 100;
    Index dim = 2;
    std::uint64_t seed = 0;
    double box = 10.0;
    double cov_scale = 1.0;
    double expand = 1.5;
    Index min_length = 8;
    Index max_length = 16;
    std::string out;
};

struct SolveOptions {
    InputOptions input;
    std::string method;
    Index outliers = 0;
    double theta = 10.0;
    std::optional<double> cost;
    std::uint64_t seed = 0;
    std::optional<std::string> out;
    std::optional<Index> k;
    std::optional<double> damping;
    std::optional<std::size_t> window;
    std::optional<double> tolerance;
    std::optional<std::size_t> max_iter;
    std::string schedule = "geometric";
    double theta0 = 0.0;
    double alpha = 0.995;
    std::string init = "zero";
    std::size_t restarts = 5;
    std::optional<std::string> trace;
    std::vector<Index> trace_points;
    std::optional<std::string> log;
};

struct EvalOptions {
    std::string solution;
    std::string labels;
    InputOptions input;
    Index minpts = metrics::default_minpts;
    std::optional<std::string> out;
};

struct BenchOptions {
    std::string manifest;
    std::optional<std::string> out;
};

void add_input_options(CLI::App* cmd, InputOptions& in, bool required) {
    auto* opt = cmd->add_option("--input", in.path, "data file");
    if (required) opt->required();
    cmd->add_option("--format", in.format, "points | trajectories | histograms | matrix")
        ->check(CLI::IsMember({"points", "trajectories", "histograms", "matrix"}))
        ->capture_default_str();
    cmd->add_option("--distance", in.distance,
                    "euclidean | frechet | bhattacharyya | precomputed (default follows --format)")
        ->check(CLI::IsMember({"euclidean", "frechet", "bhattacharyya", "precomputed"}));
    cmd->add_flag("--raw-coords", in.raw_coords, "compare trajectories without moving them to a common start");
}

Metric resolve_metric(const InputOptions& in) {
    if (in.distance) return parse_metric(*in.distance);
    if (in.format == "trajectories") return Metric::Frechet;
    if (in.format == "histograms") return Metric::Bhattacharyya;
    if (in.format == "matrix") return Metric::Precomputed;
    return Metric::Euclidean;
}

struct Loaded {
    Dataset data;
    Metric metric;
    DistanceOracle oracle;
};

Loaded load_input(const InputOptions& in) {
    const Metric metric = resolve_metric(in);
    if ((in.format == "trajectories") != (metric == Metric::Frechet))
        throw UsageError("the frechet distance goes with --format trajectories and only with it");
    if ((in.format == "matrix") != (metric == Metric::Precomputed))
        throw UsageError("the precomputed distance goes with --format matrix and only with it");

    Dataset data;
    if (in.format == "trajectories") data = io::read_trajectories_csv(in.path);
    else if (in.format == "matrix") data = io::read_matrix_csv(in.path);
    else data = io::read_columns_csv(in.path);
    DistanceOracle oracle = make_oracle(metric, data, !in.raw_coords);
    return {std::move(data), metric, std::move(oracle)};
}

void write_or_print(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (path) io::write_text(*path, text);
    else out << text;
}

std::ofstream open_csv(const std::string& path, const char* header) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(p);
    if (!f) throw io::IoError("cannot open '" + path + "' for writing");
    f << header << '\n';
    return f;
}

int cmd_gen(const GenOptions& o, std::ostream& err) {
    err << "seed: " << o.seed << '\n';
    const std::filesystem::path dir(o.out);
    if (o.kind == "trajectories") {
        synth::TrajectoryParams p;
        p.clusters = o.clusters;
        p.per_cluster = o.points;
        p.outliers = o.outliers;
        p.min_length = o.min_length;
        p.max_length = o.max_length;
        p.seed = o.seed;
        const auto data = synth::generate_trajectories(p);
        io::write_trajectories_csv(dir / "trajectories.csv", data.trajectories);
        io::write_labels_csv(dir / "labels.csv", data.labels);
        err << "wrote " << data.trajectories.size() << " trajectories to " << (dir / "trajectories.csv").string()
            << '\n';
        return Ok;
    }
    synth::SynthParams p;
    p.clusters = o.clusters;
    p.points = o.points;
    p.outliers = o.outliers;
    p.dim = o.dim;
    p.seed = o.seed;
    p.box = o.box;
    p.cov_scale = o.cov_scale;
    p.outlier_expand = o.expand;
    const auto data = synth::generate(p);
    io::write_columns_csv(dir / "points.csv", data.points);
    io::write_labels_csv(dir / "labels.csv", data.labels);
    err << "wrote " << data.points.cols() << " points to " << (dir / "points.csv").string() << '\n';
    return Ok;
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
    err << "seed: " << o.seed << '\n';
    if (o.outliers < 0) throw UsageError("--outliers must be non-negative");
    if (!(o.theta > 0)) throw UsageError("--theta must be positive");
    if (o.cost && !(*o.cost >= 0)) throw UsageError("--cost must be non-negative");
    if (o.method == "kmm" && !o.k) throw UsageError("kmm needs --k");
    if (o.trace && o.method != "ld") throw UsageError("--trace is only available for --method ld");
    if (o.log && o.method == "exact") throw UsageError("--log is not available for --method exact");

    const Loaded in = load_input(o.input);
    const Index n = in.oracle.size();
    if (o.outliers >= n)
        throw UsageError("--outliers " + std::to_string(o.outliers) + " must be below the number of points (" +
                         std::to_string(n) + ")");
    if (n < 2) throw UsageError("need at least two points");
    if (o.method == "exact" && n > exact::Limits{}.max_n)
        throw exact::SizeError("exact solver handles at most " + std::to_string(exact::Limits{}.max_n) +
                               " points, input has " + std::to_string(n));

    const Scalar cost = o.cost ? *o.cost : cluster_cost_from_median(in.oracle, o.theta, default_sample_budget, o.seed);
    if (!o.cost && !(cost > 0))
        throw UsageError("median distance is zero (duplicate points); pass an explicit --cost");
    const FloProblem problem(in.oracle, cost, o.outliers);

    io::SolutionRecord rec;
    rec.method = o.method;
    auto& params = rec.params;
    params["input"] = o.input.path;
    params["format"] = o.input.format;
    params["distance"] = std::string(metric_name(in.metric));
    if (in.metric == Metric::Frechet) params["align_start"] = !o.input.raw_coords;
    params["outliers"] = o.outliers;
    if (o.cost) params["cost"] = cost;
    else {
        params["theta"] = o.theta;
        params["cost"] = cost;
    }
    params["seed"] = o.seed;

    std::ofstream log;
    if (o.method == "apoc") {
        apoc::Params p;
        if (o.damping) p.damping = *o.damping;
        if (o.window) p.window = *o.window;
        if (o.tolerance) p.tolerance = *o.tolerance;
        if (o.max_iter) p.max_iterations = *o.max_iter;
        if (o.log) {
            log = open_csv(*o.log, "iteration,energy");
            p.on_iteration = [&log](std::size_t it, Scalar e) { log << it << ',' << io::format_real(e) << '\n'; };
        }
        params["damping"] = p.damping;
        params["window"] = p.window;
        params["tolerance"] = p.tolerance;
        params["max_iterations"] = p.max_iterations;
        rec.solution = apoc::solve(problem, p);
    } else if (o.method == "ld") {
        ld::Params p;
        if (o.schedule == "harmonic") p.schedule.kind = ld::ScheduleKind::Harmonic;
        p.schedule.theta0 = o.theta0 > 0 ? o.theta0 : (cost > 0 ? cost / 10.0 : 1.0);
        p.schedule.alpha = o.alpha;
        p.init = o.init == "nearest" ? ld::LambdaInit::NearestNeighbor : ld::LambdaInit::Zero;
        if (o.window) p.window = *o.window;
        if (o.tolerance) p.tolerance = *o.tolerance;
        if (o.max_iter) p.max_iterations = *o.max_iter;
        if (o.damping) throw UsageError("--damping applies to apoc only");

        std::ofstream trace;
        if (o.trace) {
            trace = open_csv(*o.trace, "iteration,point_id,lambda");
            p.trace_points = o.trace_points;
            if (p.trace_points.empty())
                for (Index i = 0; i < n; ++i) p.trace_points.push_back(i);
            for (Index i : p.trace_points)
                if (i < 0 || i >= n) throw UsageError("--trace-points entry " + std::to_string(i) + " out of range");
            p.on_trace = [&trace](std::size_t it, Index i, Scalar l) {
                trace << it << ',' << i << ',' << io::format_real(l) << '\n';
            };
        }
        if (o.log) {
            log = open_csv(*o.log, "iteration,dual,primal");
            p.on_iteration = [&log](std::size_t it, Scalar dual, Scalar primal) {
                log << it << ',' << io::format_real(dual) << ',' << io::format_real(primal) << '\n';
            };
        }
        params["schedule"] = o.schedule;
        params["theta0"] = p.schedule.theta0;
        if (o.schedule == "geometric") params["alpha"] = p.schedule.alpha;
        params["init"] = o.init;
        params["tolerance"] = p.tolerance;
        params["window"] = p.window;
        params["max_iterations"] = p.max_iterations;
        auto r = ld::solve(problem, p);
        rec.solution = std::move(r.solution);
        rec.dual_bound = r.best_dual;
        if (trace && !trace.flush()) throw io::IoError("write failed: " + *o.trace);
    } else if (o.method == "kmm") {
        if (in.metric != Metric::Euclidean) throw UsageError("kmm needs Euclidean point data");
        const Matrix& points = std::get<Matrix>(in.data);
        baseline::KmmParams p;
        p.k = *o.k;
        p.ell = o.outliers;
        p.seed = o.seed;
        p.restarts = o.restarts;
        if (o.max_iter) p.max_iterations = *o.max_iter;
        if (o.log) {
            log = open_csv(*o.log, "restart,iteration,objective");
            p.on_iteration = [&log](std::size_t r, std::size_t it, Scalar obj) {
                log << r << ',' << it << ',' << io::format_real(obj) << '\n';
            };
        }
        params["k"] = p.k;
        params["restarts"] = p.restarts;
        params["max_iterations"] = p.max_iterations;
        rec.solution = baseline::solve(points, p, problem);
    } else {
        rec.solution = exact::solve(problem);
    }
    if (o.log && !log.flush()) throw io::IoError("write failed: " + *o.log);

    const auto report = check_feasible(problem, rec.solution);
    if (!report.ok()) throw FeasibilityError(report);

    write_or_print(o.out, io::dump_solution(rec), out);
    err << o.method << ": energy " << io::format_real(rec.solution.energy) << ", "
        << rec.solution.exemplars.size() << " exemplars, " << rec.solution.outlier_count() << " outliers, "
        << rec.solution.iterations << " iterations" << (rec.solution.converged ? "" : " (not converged)");
    if (rec.dual_bound) err << ", dual bound " << io::format_real(*rec.dual_bound);
    err << '\n';
    return Ok;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_text(o.solution));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(o.solution + ": " + e.what());
    }
    const auto rec = io::solution_from_json(doc);
    const auto truth = io::read_labels_csv(o.labels);
    const auto& predicted = rec.solution.assignment;
    if (truth.size() != predicted.size())
        throw FormatError("labels have " + std::to_string(truth.size()) + " entries, solution has " +
                          std::to_string(predicted.size()));

    std::vector<Index> planted;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!truth[i]) planted.push_back(static_cast<Index>(i));
    const auto selected = rec.solution.outliers();

    ordered_json report;
    report["normalized_jaccard"] = nullptr;
    if (!selected.empty() && !planted.empty())
        report["normalized_jaccard"] = metrics::normalized_jaccard(selected, planted);
    report["lof_ratio"] = nullptr;
    if (!o.input.path.empty() && !selected.empty() && !planted.empty()) {
        const Loaded in = load_input(o.input);
        if (in.oracle.size() != static_cast<Index>(truth.size()))
            throw FormatError("input has " + std::to_string(in.oracle.size()) + " items, labels have " +
                              std::to_string(truth.size()));
        if (o.minpts >= in.oracle.size()) {
            err << "warning: --minpts " << o.minpts << " is not below n; lof_ratio omitted\n";
        } else {
            report["lof_ratio"] = metrics::lof_ratio(metrics::lof(in.oracle, o.minpts), selected, planted);
        }
    }
    const auto vm = metrics::v_measure(truth, predicted);
    report["v_measure"] = vm.v;
    report["homogeneity"] = vm.homogeneity;
    report["completeness"] = vm.completeness;
    report["n_clusters"] = metrics::cluster_count(predicted);
    write_or_print(o.out, report.dump(2) + "\n", out);
    return Ok;
}

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_text(o.manifest));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(o.manifest + ": " + e.what());
    }
    const auto manifest = bench::parse_manifest(doc);
    const unsigned workers = workers_from_env();
    err << "seeds: " << manifest.seeds.size() << ", workers: " << workers << '\n';
    const auto rows = bench::run(manifest, workers);
    std::ostringstream csv;
    bench::write_csv(csv, rows);
    write_or_print(o.out, csv.str(), out);
    err << "rows: " << rows.size() << '\n';
    return Ok;
}

// Moves `--config FILE` out of the argument list and splices the file's
// key=value pairs in right after the subcommand name, so that flags given on
// the command line take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
    const auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::find(commands.begin(), commands.end(), a) != commands.end();
    });
    if (sub == args.end()) return args;
    const auto at = static_cast<std::size_t>(sub - args.begin()) + 1;

    std::vector<std::string> inserted;
    for (std::size_t i = at; i < args.size();) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
            continue;
        }
        const auto tokens = config_tokens(io::read_text(path), path);
        inserted.insert(inserted.end(), tokens.begin(), tokens.end());
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), inserted.begin(), inserted.end());
    return args;
}

}  // namespace

std::vector<std::string> config_tokens(const std::string& text, const std::string& source) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (key.empty() || key == "config")
            throw FormatError(source + ":" + std::to_string(lineno) + ": invalid key");
        std::replace(key.begin(), key.end(), '_', '-');
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

unsigned workers_from_env() {
    const char* raw = std::getenv("FLO_WORKERS");
    if (!raw || !*raw) return 1;
    const std::string_view s(raw);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || value == 0)
        throw UsageError("FLO_WORKERS must be a positive integer, got '" + std::string(s) + "'");
    return value;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Facility location with outlier selection: clustering and outlier detection in one "
                 "optimisation problem.",
                 "flo"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string unused_config;

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "generate a synthetic dataset with planted outliers");
    g->add_option("--kind", gen.kind, "points | trajectories")
        ->check(CLI::IsMember({"points", "trajectories"}))
        ->capture_default_str();
    g->add_option("--clusters", gen.clusters, "number of clusters")->capture_default_str();
    g->add_option("--points", gen.points, "points (or trajectories) per cluster")->capture_default_str();
    g->add_option("--outliers", gen.outliers, "number of planted outliers")->capture_default_str();
    g->add_option("--dim", gen.dim, "dimension (points only)")->capture_default_str();
    g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    g->add_option("--box", gen.box, "cluster means uniform in [-box, box]^d")->capture_default_str();
    g->add_option("--cov-scale", gen.cov_scale, "covariance eigenvalue scale")->capture_default_str();
    g->add_option("--expand", gen.expand, "outlier box relative to the data bounding box")->capture_default_str();
    g->add_option("--min-length", gen.min_length, "shortest trajectory")->capture_default_str();
    g->add_option("--max-length", gen.max_length, "longest trajectory")->capture_default_str();
    g->add_option("--out", gen.out, "output directory")->required();
    g->add_option("--config", unused_config, "key=value file with defaults for this command");

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "solve an FLO instance");
    s->add_option("--method", solve.method, "apoc | ld | exact | kmm")
        ->required()
        ->check(CLI::IsMember({"apoc", "ld", "exact", "kmm"}));
    add_input_options(s, solve.input, true);
    s->add_option("--outliers", solve.outliers, "number of outliers to select")->required();
    s->add_option("--theta", solve.theta, "cluster cost = theta * median distance")->capture_default_str();
    s->add_option("--cost", solve.cost, "explicit cluster cost (overrides --theta)");
    s->add_option("--seed", solve.seed, "seed for median sampling and k-means++")->capture_default_str();
    s->add_option("--out", solve.out, "solution JSON path (default: stdout)");
    s->add_option("--k", solve.k, "number of clusters (kmm)");
    s->add_option("--damping", solve.damping, "message damping (apoc, default 0.9)");
    s->add_option("--window", solve.window, "convergence window (default 10)");
    s->add_option("--tolerance", solve.tolerance, "convergence tolerance (apoc 1e-6 relative, ld 1e-5)");
    s->add_option("--max-iter", solve.max_iter, "iteration cap (apoc 1000, ld 3000, kmm 100)");
    s->add_option("--schedule", solve.schedule, "ld step schedule: geometric | harmonic")
        ->check(CLI::IsMember({"geometric", "harmonic"}))
        ->capture_default_str();
    s->add_option("--theta0", solve.theta0, "ld initial step (0: cost / 10)")->capture_default_str();
    s->add_option("--alpha", solve.alpha, "ld geometric ratio")->capture_default_str();
    s->add_option("--init", solve.init, "ld multiplier start: zero | nearest")
        ->check(CLI::IsMember({"zero", "nearest"}))
        ->capture_default_str();
    s->add_option("--restarts", solve.restarts, "kmm restarts")->capture_default_str();
    s->add_option("--trace", solve.trace, "ld: write iteration,point_id,lambda CSV");
    s->add_option("--trace-points", solve.trace_points, "ld: points to trace (default: all)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',');
    s->add_option("--log", solve.log, "write a per-iteration convergence CSV");
    s->add_option("--config", unused_config, "key=value file with defaults for this command");

    EvalOptions eval;
    auto* e = app.add_subcommand("eval", "score a solution against ground-truth labels");
    e->add_option("--solution", eval.solution, "solution JSON")->required();
    e->add_option("--labels", eval.labels, "truth labels CSV (-1 = outlier)")->required();
    add_input_options(e, eval.input, false);
    e->add_option("--minpts", eval.minpts, "LOF neighbourhood size")->capture_default_str();
    e->add_option("--out", eval.out, "report JSON path (default: stdout)");
    e->add_option("--config", unused_config, "key=value file with defaults for this command");

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "run a benchmark manifest and write per-run CSV rows");
    b->add_option("--manifest", bench.manifest, "benchmark manifest (JSON)")->required();
    b->add_option("--out", bench.out, "CSV path (default: stdout)");
    b->add_option("--config", unused_config, "key=value file with defaults for this command");

    try {
        auto args = expand_config(raw_args, {"gen", "solve", "eval", "bench"});
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& ex) {
            const int code = app.exit(ex, out, err);
            return code == 0 ? Ok : Usage;
        }

#ifdef _OPENMP
        omp_set_num_threads(static_cast<int>(workers_from_env()));
#endif
        if (*g) return cmd_gen(gen, err);
        if (*s) return cmd_solve(solve, out, err);
        if (*e) return cmd_eval(eval, out, err);
        return cmd_bench(bench, out, err);
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return Usage;
    } catch (const ArgumentError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return Usage;
    } catch (const exact::SizeError& ex) {
        err << "size error: " << ex.what() << '\n';
        return TooLarge;
    } catch (const io::IoError& ex) {
        err << "I/O error: " << ex.what() << '\n';
        return BadInput;
    } catch (const FormatError& ex) {
        err << "format error: " << ex.what() << '\n';
        return BadInput;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return Failure;
    }
}

}  // namespace flo::cli
