#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unionlap/continuum.hpp"
#include "unionlap/graph.hpp"
#include "unionlap/manifolds.hpp"
#include "unionlap/spectra.hpp"

namespace unionlap {

/// Bandwidth choice: a constant epsilon or the rule eps_n = c * ell_n^gamma.
struct BandwidthRule {
    bool constant = true;
    double epsilon = 0.0;
    double c = 2.0;
    double gamma = 0.9;

    double resolve(long long n, int d_max) const;
};

struct ExperimentConfig {
    std::string preset;  // optional; resolved into the fields below
    std::string model_name = "paper-rect-segment";
    std::optional<nlohmann::ordered_json> inline_model;
    std::vector<long long> count_list;            // one entry = single run
    std::optional<std::vector<long long>> fixed_counts;  // per-component counts
    BandwidthRule bandwidth;
    std::string kernel = "indicator";
    LaplacianKind kind = LaplacianKind::normalized_sym();
    int k = 6;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir;
    double tol = 1e-8;

    static ExperimentConfig from_json(const nlohmann::ordered_json& j);
    static ExperimentConfig preset_config(const std::string& name);
    nlohmann::ordered_json to_json() const;

    MixtureModel build_model() const;
};

std::vector<std::string> experiment_preset_names();

/// One experiment: sample -> graph -> eigenpairs -> alignment + diagnostics.
/// The JSON bundle is deterministic for fixed config bytes except for the
/// top-level "timings" object.
struct ResultBundle {
    nlohmann::ordered_json json;
    std::vector<std::string> files;  // paths written (vector CSVs, bundle)
};

ResultBundle run_experiment(const ExperimentConfig& config);

/// Convergence sweep over the count list (>= 3 entries, non-constant
/// bandwidth rule): per (n, seed) eigenvalue relative errors, KDE sup errors
/// and the TL2 proxy for the designated eigenvector.
struct SweepRow {
    long long n = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::vector<double> eigenvalue_rel_errors;
    std::vector<double> kde_sup_errors;
    double tl2_proxy = 0.0;
    double deg_near_min = 0.0, deg_near_max = 0.0;
    double deg_far_min = 0.0, deg_far_max = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::string to_csv() const;
    /// Median over seeds of the rel error of eigenvalue `index` (0-based),
    /// one value per n in the count list.
    std::vector<double> median_rel_error(int index) const;
    std::vector<double> median_kde_error(int component) const;
};

SweepTable convergence_sweep(const ExperimentConfig& config);

/// Structural check of an emitted bundle: required keys present and every
/// referenced file exists.
bool validate_bundle(const ResultBundle& bundle, std::string* why = nullptr);

std::string version_string();

}  // namespace unionlap
