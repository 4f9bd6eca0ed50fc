#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "flo/distances.hpp"
#include "flo/exact.hpp"
#include "flo/io.hpp"
#include "flo/metrics.hpp"
#include "flo/random.hpp"

namespace flo::bench {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw FormatError("manifest: " + what); }

Range read_range(const json& v, const std::string& key) {
    Range r;
    if (v.is_number_integer()) {
        r.lo = r.hi = v.get<Index>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
        r.lo = v[0].get<Index>();
        r.hi = v[1].get<Index>();
    } else {
        bad(key + " must be an integer or an [lo, hi] pair");
    }
    if (r.lo < 0 || r.hi < r.lo) bad(key + " range is empty or negative");
    return r;
}

template <class T>
void read_number(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) bad(std::string(key) + " must be a number");
    out = v.get<T>();
}

Index draw(Rng& rng, const Range& r) {
    return r.lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(r.hi - r.lo + 1)));
}

struct Prepared {
    Instance instance;
    DistanceOracle oracle;
    std::vector<Scalar> lof_scores;
    Scalar cost = 0;
};

Row run_method(const Manifest& m, const Prepared& p, std::uint64_t seed, const std::string& method,
               Index ell_given, const std::optional<Scalar>& oracle_energy) {
    const auto& data = p.instance.data;
    const FloProblem problem(p.oracle, p.cost, ell_given);
    const auto planted = data.planted_outliers();

    Row row;
    row.seed = seed;
    row.method = method;
    row.n = problem.size();
    row.d = data.points.rows();
    row.ell_true = p.instance.outliers;
    row.ell_given = ell_given;

    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    if (method == "apoc") {
        sol = apoc::solve(problem, m.apoc);
    } else if (method == "ld") {
        ld::Params params = m.ld;
        if (oracle_energy) params.on_iteration = [&row](std::size_t, Scalar dual, Scalar) {
            row.dual_values.push_back(dual);
        };
        auto r = ld::solve(problem, params);
        row.dual_bound = r.best_dual;
        sol = std::move(r.solution);
    } else if (method == "kmm") {
        baseline::KmmParams params;
        params.k = p.instance.clusters;
        params.ell = ell_given;
        params.seed = seed;
        params.restarts = m.kmm_restarts;
        params.max_iterations = m.kmm_max_iterations;
        sol = baseline::solve(data.points, params, problem);
    } else {
        sol = exact::solve(problem, exact::Limits{m.exact_max_n});
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    row.energy = sol.energy;
    row.iterations = sol.iterations;
    row.oracle_energy = oracle_energy;
    if (oracle_energy) row.ratio = sol.energy > 0 ? *oracle_energy / sol.energy : Scalar(1);
    const auto selected = sol.outliers();
    if (!selected.empty() && !planted.empty()) row.jaccard = metrics::normalized_jaccard(selected, planted);
    if (!p.lof_scores.empty() && !selected.empty() && !planted.empty())
        row.lof_ratio = metrics::lof_ratio(p.lof_scores, selected, planted);
    row.v = metrics::v_measure(data.labels, sol.assignment).v;
    return row;
}

std::vector<Row> run_seed(const Manifest& m, std::uint64_t seed) {
    Prepared p;
    p.instance = make_instance(m.instance, seed);
    p.oracle = euclidean_oracle(p.instance.data.points);
    const Index n = p.oracle.size();
    p.cost = m.cost ? *m.cost : cluster_cost_from_median(p.oracle, m.theta, default_sample_budget, seed);
    if (n >= 2) p.lof_scores = metrics::lof(p.oracle, std::min(m.minpts, n - 1));

    std::vector<Index> ells = m.outliers_given;
    if (ells.empty()) ells.push_back(p.instance.outliers);

    std::vector<Row> rows;
    for (Index ell : ells) {
        std::optional<Scalar> oracle_energy;
        if (n <= m.exact_max_n)
            oracle_energy = exact::solve(FloProblem(p.oracle, p.cost, ell), exact::Limits{m.exact_max_n}).energy;
        for (const auto& method : m.methods) {
            if (method == "exact" && !oracle_energy) continue;
            rows.push_back(run_method(m, p, seed, method, ell, oracle_energy));
        }
    }
    return rows;
}

std::string opt(const std::optional<Scalar>& v) { return v ? io::format_real(*v) : std::string(); }

}  // namespace

Manifest parse_manifest(const json& doc) {
    if (!doc.is_object()) bad("top level must be an object");
    Manifest m;

    if (!doc.contains("seeds")) bad("missing \"seeds\"");
    const auto& seeds = doc.at("seeds");
    if (seeds.is_array()) {
        for (const auto& s : seeds) {
            if (!s.is_number_unsigned()) bad("seeds must be non-negative integers");
            m.seeds.push_back(s.get<std::uint64_t>());
        }
    } else if (seeds.is_object()) {
        std::uint64_t start = 0, count = 0;
        read_number(seeds, "start", start);
        read_number(seeds, "count", count);
        for (std::uint64_t s = 0; s < count; ++s) m.seeds.push_back(start + s);
    } else {
        bad("seeds must be a list or {start, count}");
    }
    if (m.seeds.empty()) bad("no seeds");

    if (doc.contains("methods")) {
        m.methods.clear();
        for (const auto& v : doc.at("methods")) {
            if (!v.is_string()) bad("methods must be strings");
            const auto name = v.get<std::string>();
            if (name != "apoc" && name != "ld" && name != "kmm" && name != "exact") bad("unknown method " + name);
            m.methods.push_back(name);
        }
    }
    read_number(doc, "theta", m.theta);
    if (doc.contains("cost")) {
        double c = 0;
        read_number(doc, "cost", c);
        m.cost = c;
    }
    if (!(m.theta > 0)) bad("theta must be positive");

    if (doc.contains("instance")) {
        const auto& in = doc.at("instance");
        if (!in.is_object()) bad("instance must be an object");
        auto& s = m.instance;
        if (in.contains("clusters")) s.clusters = read_range(in.at("clusters"), "clusters");
        if (in.contains("points")) s.points = read_range(in.at("points"), "points");
        if (in.contains("total")) s.total = read_range(in.at("total"), "total");
        if (in.contains("outliers")) s.outliers = read_range(in.at("outliers"), "outliers");
        if (in.contains("dim")) s.dim = read_range(in.at("dim"), "dim");
        read_number(in, "box", s.box);
        read_number(in, "cov_scale", s.cov_scale);
        if (s.total && s.clusters.lo < 1) bad("total requires at least one cluster");
    }
    if (doc.contains("outliers_given"))
        for (const auto& v : doc.at("outliers_given")) {
            if (!v.is_number_integer() || v.get<Index>() < 0) bad("outliers_given must be non-negative integers");
            m.outliers_given.push_back(v.get<Index>());
        }
    read_number(doc, "minpts", m.minpts);
    read_number(doc, "exact_max_n", m.exact_max_n);
    if (m.minpts < 1) bad("minpts must be positive");

    if (doc.contains("apoc")) {
        const auto& a = doc.at("apoc");
        read_number(a, "damping", m.apoc.damping);
        read_number(a, "window", m.apoc.window);
        read_number(a, "tolerance", m.apoc.tolerance);
        read_number(a, "max_iterations", m.apoc.max_iterations);
    }
    if (doc.contains("ld")) {
        const auto& l = doc.at("ld");
        if (l.contains("schedule")) {
            const auto kind = l.at("schedule").get<std::string>();
            if (kind == "geometric") m.ld.schedule.kind = ld::ScheduleKind::Geometric;
            else if (kind == "harmonic") m.ld.schedule.kind = ld::ScheduleKind::Harmonic;
            else bad("unknown ld schedule " + kind);
        }
        read_number(l, "theta0", m.ld.schedule.theta0);
        read_number(l, "alpha", m.ld.schedule.alpha);
        read_number(l, "tolerance", m.ld.tolerance);
        read_number(l, "window", m.ld.window);
        read_number(l, "max_iterations", m.ld.max_iterations);
    }
    if (doc.contains("kmm")) {
        const auto& k = doc.at("kmm");
        read_number(k, "restarts", m.kmm_restarts);
        read_number(k, "max_iterations", m.kmm_max_iterations);
    }
    return m;
}

Instance make_instance(const InstanceSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    Instance inst;
    inst.clusters = draw(rng, spec.clusters);
    inst.outliers = draw(rng, spec.outliers);
    const Index dim = draw(rng, spec.dim);
    Index points = draw(rng, spec.points);
    if (spec.total) {
        const Index target = draw(rng, *spec.total);
        points = std::max<Index>(1, (target - inst.outliers) / inst.clusters);
        while (inst.clusters * points + inst.outliers < spec.total->lo) ++points;
    }

    synth::SynthParams p;
    p.clusters = inst.clusters;
    p.points = points;
    p.outliers = inst.outliers;
    p.dim = dim;
    p.seed = seed;
    p.box = spec.box;
    p.cov_scale = spec.cov_scale;
    inst.data = synth::generate(p);
    return inst;
}

std::vector<Row> run(const Manifest& manifest, unsigned workers, const std::function<void(const Row&)>& progress) {
    const std::size_t jobs = manifest.seeds.size();
    std::vector<std::vector<Row>> slots(jobs);
    std::atomic<std::size_t> next{0};
    std::mutex lock;
    std::exception_ptr failure;

    auto worker = [&] {
        for (std::size_t j; (j = next++) < jobs;) {
            try {
                slots[j] = run_seed(manifest, manifest.seeds[j]);
                if (progress) {
                    std::lock_guard guard(lock);
                    for (const auto& r : slots[j]) progress(r);
                }
            } catch (...) {
                std::lock_guard guard(lock);
                if (!failure) failure = std::current_exception();
                next = jobs;
            }
        }
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<Row> rows;
    for (auto& s : slots)
        for (auto& r : s) rows.push_back(std::move(r));
    return rows;
}

void write_csv(std::ostream& out, const std::vector<Row>& rows) {
    out << "seed,method,n,d,ell_true,ell_given,energy,oracle_energy,ratio,jaccard,lof_ratio,v,wall_time,iterations\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << r.method << ',' << r.n << ',' << r.d << ',' << r.ell_true << ',' << r.ell_given << ','
            << io::format_real(r.energy) << ',' << opt(r.oracle_energy) << ',' << opt(r.ratio) << ','
            << opt(r.jaccard) << ',' << opt(r.lof_ratio) << ',' << io::format_real(r.v) << ','
            << io::format_real(r.wall_time) << ',' << r.iterations << '\n';
    }
}

}  // namespace flo::bench
