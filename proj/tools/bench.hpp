#pragma once

// Benchmark manifests: seeded synthetic instances, a list of methods, and
// one CSV row per (seed, ell_given, method) run.
//
// Manifest (JSON), every field optional except "seeds":
//
//   {
//     "seeds": [0, 1, 2] | {"start": 0, "count": 50},
//     "methods": ["apoc", "ld", "kmm", "exact"],
//     "theta": 10,                 // cost = theta * median distance
//     "cost": 2.5,                 // explicit uniform cost, overrides theta
//     "instance": {
//       "clusters": 3 | [2, 3],    // integers or inclusive [lo, hi] ranges
//       "points": 100 | [lo, hi],  // per cluster; ignored when "total" is set
//       "total": [8, 12],          // target n; points = (total - ell) / clusters
//       "outliers": 2 | [1, 2],
//       "dim": 2,
//       "box": 10, "cov_scale": 1
//     },
//     "outliers_given": [100, 300],  // default: the planted count
//     "minpts": 10,
//     "exact_max_n": 14,
//     "apoc": {"damping": 0.9, "window": 10, "tolerance": 1e-6, "max_iterations": 1000},
//     "ld": {"schedule": "geometric", "theta0": 0, "alpha": 0.995, "tolerance": 1e-5,
//            "window": 10, "max_iterations": 3000},
//     "kmm": {"restarts": 5, "max_iterations": 100}
//   }

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flo/apoc.hpp"
#include "flo/baseline.hpp"
#include "flo/ld.hpp"
#include "flo/synthgen.hpp"

namespace flo::bench {

struct Range {
    Index lo = 0;
    Index hi = 0;
};

struct InstanceSpec {
    Range clusters{3, 3};
    Range points{10, 10};
    std::optional<Range> total;
    Range outliers{2, 2};
    Range dim{2, 2};
    double box = 10.0;
    double cov_scale = 1.0;
};

struct Manifest {
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> methods{"apoc", "ld", "kmm"};
    double theta = 10.0;
    std::optional<double> cost;
    InstanceSpec instance;
    std::vector<Index> outliers_given;
    Index minpts = 10;
    Index exact_max_n = 14;
    apoc::Params apoc;
    ld::Params ld;
    std::size_t kmm_restarts = 5;
    std::size_t kmm_max_iterations = 100;
};

/// Throws FormatError on malformed or out-of-range fields.
Manifest parse_manifest(const nlohmann::json& doc);

struct Instance {
    synth::SynthData data;
    Index clusters = 0;
    Index outliers = 0;
};

/// Draws the instance shape from Rng(seed) and generates the data with the
/// same seed.
Instance make_instance(const InstanceSpec& spec, std::uint64_t seed);

struct Row {
    std::uint64_t seed = 0;
    std::string method;
    Index n = 0;
    Index d = 0;
    Index ell_true = 0;
    Index ell_given = 0;
    Scalar energy = 0;
    std::optional<Scalar> oracle_energy;
    std::optional<Scalar> ratio;
    std::optional<Scalar> jaccard;  // empty when either outlier set is empty
    std::optional<Scalar> lof_ratio;
    Scalar v = 0;
    double wall_time = 0;
    std::size_t iterations = 0;
    /// Not written to the CSV: LD dual values and the best bound, kept for
    /// in-process checks.
    std::vector<Scalar> dual_values;
    std::optional<Scalar> dual_bound;
};

/// Runs every seed, using up to `workers` threads across seeds. Rows come
/// back ordered by seed position, then ell_given, then method.
std::vector<Row> run(const Manifest& manifest, unsigned workers = 1,
                     const std::function<void(const Row&)>& progress = {});

void write_csv(std::ostream& out, const std::vector<Row>& rows);

}  // namespace flo::bench
