#include "unionlap/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "unionlap/errors.hpp"
#include "unionlap/transport.hpp"

namespace unionlap {

using nlohmann::ordered_json;

std::string version_string() { return "unionlap 0.1.0"; }

double BandwidthRule::resolve(long long n, int d_max) const {
    if (constant) return epsilon;
    return c * std::pow(ell_n(n, d_max), gamma);
}

namespace {

Patch patch_from_json(const ordered_json& j) {
    std::string kind = j.at("kind").get<std::string>();
    auto vec = [](const ordered_json& a) {
        Eigen::VectorXd v(a.size());
        for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
        return v;
    };
    Eigen::VectorXd origin = vec(j.at("origin"));
    const auto& fr = j.at("frame");
    Eigen::MatrixXd frame(origin.size(), fr.size());
    for (size_t c = 0; c < fr.size(); ++c) frame.col(static_cast<int>(c)) = vec(fr[c]);
    if (kind == "flat") return Patch::flat_piece(origin, frame, vec(j.at("lengths")));
    if (kind == "circle") return Patch::circle(origin, frame, j.at("radius").get<double>());
    throw ValidationError("model json: unknown patch kind " + kind);
}

DensitySpec density_from_json(const ordered_json& j) {
    if (j.is_null()) return DensitySpec::uniform();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return DensitySpec::uniform();
    if (kind == "cosine") {
        const auto& fr = j.at("frequency");
        Eigen::VectorXd f(fr.size());
        for (size_t i = 0; i < fr.size(); ++i) f(static_cast<int>(i)) = fr[i].get<double>();
        return DensitySpec::cosine_bump(j.at("amplitude").get<double>(), f);
    }
    throw ValidationError("model json: unknown density kind " + kind);
}

MixtureModel model_from_json(const ordered_json& j) {
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
        MixtureComponent mc;
        mc.patch = patch_from_json(c);
        mc.density = c.contains("density") ? density_from_json(c.at("density"))
                                           : DensitySpec::uniform();
        mc.alpha = c.at("alpha").get<double>();
        comps.push_back(std::move(mc));
    }
    return MixtureModel::validated(std::move(comps));
}

}  // namespace

MixtureModel ExperimentConfig::build_model() const {
    if (inline_model) return model_from_json(*inline_model);
    return model_preset(model_name);
}

ExperimentConfig ExperimentConfig::preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "paper-fig1") {
        c.model_name = "paper-rect-segment";
        c.fixed_counts = std::vector<long long>{2600, 2800};
        c.count_list = {5400};
        c.bandwidth = {true, 0.13, 2.0, 0.9};
        c.kind = LaplacianKind::normalized_sym();
        c.k = 6;
        c.seeds = {1, 2, 3};
        return c;
    }
    if (name == "paper-fig2") {
        c.model_name = "paper-rect-segment";
        c.fixed_counts = std::vector<long long>{2600, 2800};
        c.count_list = {5400};
        c.bandwidth = {true, 0.13, 2.0, 0.9};
        c.kind = LaplacianKind::unnormalized_scaled(2);
        c.k = 8;
        c.seeds = {1};
        return c;
    }
    if (name == "paper-sweep") {
        c.model_name = "paper-rect-segment";
        c.count_list = {2000, 8000, 32000};
        c.bandwidth = {false, 0.0, 2.0, 0.9};
        c.kind = LaplacianKind::normalized_sym();
        c.k = 4;
        c.seeds = {1, 2, 3};
        return c;
    }
    if (name == "circle-sweep") {
        c.model_name = "circle-uniform";
        c.count_list = {2000, 8000, 32000};
        c.bandwidth = {false, 0.0, 2.0, 0.9};
        c.kind = LaplacianKind::normalized_sym();
        c.k = 3;
        c.seeds = {1, 2, 3};
        return c;
    }
    throw ValidationError("unknown experiment preset: " + name +
                          " (try `preset list`)");
}

std::vector<std::string> experiment_preset_names() {
    return {"paper-fig1", "paper-fig2", "paper-sweep", "circle-sweep"};
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
    ExperimentConfig c;
    if (j.contains("preset") && !j.at("preset").is_null())
        c = preset_config(j.at("preset").get<std::string>());

    if (j.contains("model")) {
        if (j.at("model").is_string())
            c.model_name = j.at("model").get<std::string>();
        else
            c.inline_model = j.at("model");
    }
    if (j.contains("counts")) {
        c.fixed_counts = std::vector<long long>{};
        for (const auto& v : j.at("counts")) c.fixed_counts->push_back(v.get<long long>());
        long long total = 0;
        for (long long v : *c.fixed_counts) total += v;
        c.count_list = {total};
    }
    if (j.contains("n")) {
        c.count_list = {j.at("n").get<long long>()};
        if (!j.contains("counts")) c.fixed_counts.reset();
    }
    if (j.contains("count_list")) {
        c.count_list.clear();
        for (const auto& v : j.at("count_list")) c.count_list.push_back(v.get<long long>());
        c.fixed_counts.reset();
    }
    if (j.contains("epsilon")) c.bandwidth = {true, j.at("epsilon").get<double>(), 2.0, 0.9};
    if (j.contains("bandwidth_rule")) {
        const auto& r = j.at("bandwidth_rule");
        c.bandwidth.constant = false;
        c.bandwidth.c = r.value("c", 2.0);
        c.bandwidth.gamma = r.value("gamma", 0.9);
    }
    if (j.contains("kernel")) c.kernel = j.at("kernel").get<std::string>();
    if (j.contains("kind"))
        c.kind = LaplacianKind::from_key(j.at("kind").get<std::string>(), j.value("d2", 2));
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("seed")) c.seeds = {j.at("seed").get<std::uint64_t>()};
    if (j.contains("seeds")) {
        c.seeds.clear();
        for (const auto& v : j.at("seeds")) c.seeds.push_back(v.get<std::uint64_t>());
    }
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (c.count_list.empty()) throw ValidationError("config: missing n / counts / count_list");
    if (c.seeds.empty()) throw ValidationError("config: needs at least one seed");
    if (c.k < 1) throw ValidationError("config: k must be >= 1");
    return c;
}

ordered_json ExperimentConfig::to_json() const {
    ordered_json j;
    if (!preset.empty()) j["preset"] = preset;
    if (inline_model)
        j["model"] = *inline_model;
    else
        j["model"] = model_name;
    j["count_list"] = count_list;
    if (fixed_counts) j["counts"] = *fixed_counts;
    if (bandwidth.constant) {
        j["epsilon"] = bandwidth.epsilon;
    } else {
        j["bandwidth_rule"] = {{"c", bandwidth.c}, {"gamma", bandwidth.gamma}};
    }
    j["kernel"] = kernel;
    j["kind"] = kind.key();
    if (kind.type == LaplacianKind::Type::UnnormalizedScaled) j["d2"] = kind.d2;
    j["k"] = k;
    j["seeds"] = seeds;
    if (!out_dir.empty()) j["out"] = out_dir;
    j["tol"] = tol;
    return j;
}

namespace {

int max_patch_dim(const MixtureModel& model) {
    int d = 1;
    for (const auto& c : model.components) d = std::max(d, c.patch.dim);
    return d;
}

/// Reference spectrum matching the configured Laplacian kind; falls back to
/// the metric-graph solver for codimension-one 1d models. Returns nullopt
/// when no reference is available.
std::optional<ReferenceSpectrum> make_reference(const MixtureModel& model,
                                                const KernelProfile& profile,
                                                const LaplacianKind& kind, int k) {
    auto ref_kind = kind.type == LaplacianKind::Type::NormalizedSym
                        ? ReferenceSpectrum::Kind::NormalizedLimit
                        : ReferenceSpectrum::Kind::UnnormalizedLimit;
    if (kind.type == LaplacianKind::Type::Unnormalized) return std::nullopt;  // unscaled: no limit
    try {
        return merged_union_spectrum(model, profile, ref_kind, k);
    } catch (const ValidationError&) {
    }
    if (ref_kind == ReferenceSpectrum::Kind::NormalizedLimit) {
        bool all_1d = true;
        for (const auto& c : model.components)
            if (c.patch.dim != 1 || c.patch.kind != Patch::Kind::FlatPiece) all_1d = false;
        if (all_1d) {
            double min_len = std::numeric_limits<double>::infinity();
            for (const auto& c : model.components) min_len = std::min(min_len, c.patch.lengths(0));
            try {
                return metric_graph_spectrum_fd(model, profile, min_len / 2000.0, k);
            } catch (const ValidationError&) {
            }
        }
    }
    return std::nullopt;
}

/// First nonconstant eigenfunction of the component with the largest patch
/// dimension, extended by zero and scaled by 1/sqrt(alpha) so it is
/// L2_rho-normalized on the union. Returns the component index used.
std::pair<SmoothFunctionSpec, int> designated_eigenfunction(const MixtureModel& model,
                                                            bool second_mode = false) {
    int hi = 0;
    for (int i = 1; i < model.component_count(); ++i)
        if (model.component(i).patch.dim > model.component(hi).patch.dim) hi = i;
    const auto& comp = model.component(hi);
    SmoothFunctionSpec spec = SmoothFunctionSpec::constant(model.component_count(), 0.0);
    double scale = 1.0 / std::sqrt(comp.alpha);
    if (comp.patch.kind == Patch::Kind::Circle) {
        double r = comp.patch.radius;
        SmoothFunctionSpec::ComponentFn fn;
        if (!second_mode) {
            fn.value = [r, scale](const Eigen::VectorXd& l) {
                return scale * std::sqrt(2.0) * std::cos(l(0) / r);
            };
            fn.gradient = [r, scale](const Eigen::VectorXd& l) {
                Eigen::VectorXd g(1);
                g(0) = -scale * std::sqrt(2.0) / r * std::sin(l(0) / r);
                return g;
            };
        } else {
            fn.value = [r, scale](const Eigen::VectorXd& l) {
                return scale * std::sqrt(2.0) * std::sin(l(0) / r);
            };
            fn.gradient = [r, scale](const Eigen::VectorXd& l) {
                Eigen::VectorXd g(1);
                g(0) = scale * std::sqrt(2.0) / r * std::cos(l(0) / r);
                return g;
            };
        }
        spec.components[static_cast<size_t>(hi)] = fn;
        return {spec, hi};
    }
    // longest axis first
    std::vector<int> modes(static_cast<size_t>(comp.patch.dim), 0);
    int axis = 0;
    for (int j = 1; j < comp.patch.dim; ++j)
        if (comp.patch.lengths(j) > comp.patch.lengths(axis)) axis = j;
    modes[static_cast<size_t>(axis)] = 1;
    SmoothFunctionSpec::ComponentFn fn = flat_neumann_eigenfunction(comp.patch, modes);
    auto val = fn.value;
    auto grad = fn.gradient;
    fn.value = [val, scale](const Eigen::VectorXd& l) { return scale * val(l); };
    fn.gradient = [grad, scale](const Eigen::VectorXd& l) {
        return (scale * grad(l)).eval();
    };
    spec.components[static_cast<size_t>(hi)] = fn;
    return {spec, hi};
}

/// First nonconstant eigenfunction of the lowest-dimension component, for the
/// cross-dimension correlation diagnostic.
SmoothFunctionSpec low_dim_eigenfunction(const MixtureModel& model, int* index = nullptr) {
    int lo = 0;
    for (int i = 1; i < model.component_count(); ++i)
        if (model.component(i).patch.dim < model.component(lo).patch.dim) lo = i;
    const auto& comp = model.component(lo);
    SmoothFunctionSpec spec = SmoothFunctionSpec::constant(model.component_count(), 0.0);
    double scale = 1.0 / std::sqrt(comp.alpha);
    std::vector<int> modes(static_cast<size_t>(comp.patch.dim), 0);
    modes[0] = 1;
    SmoothFunctionSpec::ComponentFn fn = flat_neumann_eigenfunction(comp.patch, modes);
    auto val = fn.value;
    auto grad = fn.gradient;
    fn.value = [val, scale](const Eigen::VectorXd& l) { return scale * val(l); };
    fn.gradient = [grad, scale](const Eigen::VectorXd& l) { return (scale * grad(l)).eval(); };
    spec.components[static_cast<size_t>(lo)] = fn;
    if (index) *index = lo;
    return spec;
}

struct RunOutput {
    ordered_json json;
    SampleCloud cloud;
    Graph graph;
    SpectralResult spectrum;
    std::optional<ReferenceSpectrum> reference;
    double epsilon = 0.0;
};

RunOutput single_run(const ExperimentConfig& config, const MixtureModel& model, long long n,
                     std::uint64_t seed) {
    RunOutput out;
    KernelProfile profile = KernelProfile::from_key(config.kernel);
    const int d_max = max_patch_dim(model);
    out.epsilon = config.bandwidth.resolve(n, d_max);
    BandwidthReport bw = bandwidth_ok(n, d_max, out.epsilon);

    out.cloud = config.fixed_counts ? sample_mixture_counts(model, *config.fixed_counts, seed)
                                    : sample_mixture(model, n, seed);
    out.graph = build_graph(out.cloud, out.epsilon, profile);
    out.spectrum = smallest_eigenpairs(out.graph, config.kind, config.k, config.tol);
    out.reference = make_reference(model, profile, config.kind, config.k);

    ordered_json j;
    j["seed"] = seed;
    j["n"] = n;
    j["counts"] = out.cloud.counts;
    j["epsilon"] = out.epsilon;
    j["bandwidth"] = {{"ok", bw.ok}, {"ell_n", bw.ell}, {"ratio", bw.ratio}};
    j["spectrum"] = {{"kind", config.kind.key()},
                     {"eigenvalues", std::vector<double>(out.spectrum.eigenvalues.begin(),
                                                         out.spectrum.eigenvalues.end())},
                     {"residuals", std::vector<double>(out.spectrum.residuals.begin(),
                                                       out.spectrum.residuals.end())},
                     {"vectors_file", nullptr}};

    if (out.reference) {
        ordered_json ref;
        std::vector<double> ev;
        std::vector<int> mult;
        std::vector<std::string> src;
        for (const auto& e : out.reference->entries) {
            ev.push_back(e.lambda);
            mult.push_back(e.multiplicity);
            src.push_back(e.source);
        }
        ref["kind"] = out.reference->kind == ReferenceSpectrum::Kind::NormalizedLimit
                          ? "normalized_limit"
                          : "unnormalized_limit";
        ref["eigenvalues"] = ev;
        ref["multiplicities"] = mult;
        ref["sources"] = src;
        j["reference"] = ref;

        if (out.reference->total_multiplicity() >= config.k) {
            AlignmentReport align = align_spectra(out.spectrum, *out.reference, out.cloud);
            ordered_json pairs = ordered_json::array();
            for (const auto& p : align.pairs)
                pairs.push_back({{"computed", p.computed},
                                 {"reference", p.reference},
                                 {"rel_error", p.rel_error},
                                 {"source", p.source}});
            j["alignment"] = {{"pairs", pairs},
                              {"separation_scores", align.separation_scores}};
        }
    }

    // diagnostics
    ordered_json diag;
    diag["kde_sup_error"] = kde_sup_error(out.graph, out.cloud, model, profile);
    if (model.component_count() == 2) {
        int d0 = model.component(0).patch.dim, d1 = model.component(1).patch.dim;
        if (d0 != d1) {
            DegreeScalingReport dr = degree_scaling_report(out.graph, out.cloud, model);
            diag["degree_near_range"] = {dr.near_min, dr.near_max};
            diag["degree_far_range"] = {dr.far_min, dr.far_max};
            diag["degree_counts"] = {dr.near_count, dr.far_count};

            int lo_comp = d0 < d1 ? 0 : 1;
            std::vector<double> var_frac;
            for (int c = 0; c < config.k; ++c)
                var_frac.push_back(component_variance_fraction(out.spectrum.vectors.col(c),
                                                               out.cloud.labels, lo_comp));
            diag["low_dim_variance_fraction"] = var_frac;

            // correlation of each eigenvector with the first nonconstant
            // eigenfunction of the low-dimensional component
            try {
                SmoothFunctionSpec low_mode = low_dim_eigenfunction(model);
                Eigen::VectorXd ref_vec =
                    degree_corrected_samples(model, out.cloud, out.graph, profile, low_mode);
                std::vector<double> corr;
                for (int c = 0; c < config.k; ++c)
                    corr.push_back(l2_mu_n_correlation(out.spectrum.vectors.col(c), ref_vec));
                diag["low_dim_mode_correlation"] = corr;
            } catch (const ValidationError&) {
                // no analytic mode for this patch kind
            }
        }
    }
    j["diagnostics"] = diag;
    j["metadata"] = {{"version", version_string()},
                     {"fixed_counts", config.fixed_counts.has_value()},
                     {"connected", out.spectrum.connected},
                     {"kernel", config.kernel}};
    out.json = std::move(j);
    return out;
}

void write_vectors_csv(const std::string& path, const SampleCloud& cloud,
                       const SpectralResult& spectrum) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    f.precision(17);
    const int nd = cloud.ambient_dim();
    for (int d = 0; d < nd; ++d) f << "x" << (d + 1) << ",";
    f << "label";
    for (int c = 0; c < spectrum.k(); ++c) f << ",u" << (c + 1);
    f << "\n";
    for (long long i = 0; i < cloud.size(); ++i) {
        for (int d = 0; d < nd; ++d) f << cloud.points(i, d) << ",";
        f << cloud.labels[static_cast<size_t>(i)];
        for (int c = 0; c < spectrum.k(); ++c) f << "," << spectrum.vectors(i, c);
        f << "\n";
    }
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig& config) {
    if (config.count_list.size() != 1)
        throw ValidationError("run_experiment: one count expected (use convergence_sweep)");
    MixtureModel model = config.build_model();
    const long long n = config.count_list.front();

    ResultBundle bundle;
    bundle.json["config"] = config.to_json();
    bundle.json["runs"] = ordered_json::array();
    ordered_json timings = ordered_json::object();

    for (std::uint64_t seed : config.seeds) {
        auto t0 = std::chrono::steady_clock::now();
        RunOutput run = single_run(config, model, n, seed);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        timings["seed_" + std::to_string(seed)] = secs;

        if (!config.out_dir.empty()) {
            std::filesystem::create_directories(config.out_dir);
            std::string fname = "vectors_seed" + std::to_string(seed) + ".csv";
            std::string path = (std::filesystem::path(config.out_dir) / fname).string();
            write_vectors_csv(path, run.cloud, run.spectrum);
            run.json["spectrum"]["vectors_file"] = fname;
            bundle.files.push_back(path);
        }
        bundle.json["runs"].push_back(std::move(run.json));
    }
    bundle.json["timings"] = std::move(timings);

    if (!config.out_dir.empty()) {
        std::string path = (std::filesystem::path(config.out_dir) / "bundle.json").string();
        std::ofstream f(path);
        f << bundle.json.dump(2) << "\n";
        bundle.files.push_back(path);
    }
    return bundle;
}

SweepTable convergence_sweep(const ExperimentConfig& config) {
    if (config.count_list.size() < 3)
        throw ValidationError("convergence_sweep: need at least 3 counts");
    if (config.bandwidth.constant)
        throw ValidationError("convergence_sweep: needs a bandwidth rule, not a constant epsilon");
    MixtureModel model = config.build_model();
    KernelProfile profile = KernelProfile::from_key(config.kernel);

    SweepTable table;
    for (long long n : config.count_list) {
        for (std::uint64_t seed : config.seeds) {
            ExperimentConfig one = config;
            one.count_list = {n};
            RunOutput run = single_run(one, model, n, seed);

            SweepRow row;
            row.n = n;
            row.seed = seed;
            row.epsilon = run.epsilon;
            if (run.reference) {
                AlignmentReport align = align_spectra(run.spectrum, *run.reference, run.cloud);
                for (const auto& p : align.pairs) row.eigenvalue_rel_errors.push_back(p.rel_error);
            }
            row.kde_sup_errors = kde_sup_error(run.graph, run.cloud, model, profile);
            if (model.component_count() == 2 &&
                model.component(0).patch.dim != model.component(1).patch.dim) {
                DegreeScalingReport dr = degree_scaling_report(run.graph, run.cloud, model);
                row.deg_near_min = dr.near_min;
                row.deg_near_max = dr.near_max;
                row.deg_far_min = dr.far_min;
                row.deg_far_max = dr.far_max;
            }

            // TL2 proxy for the designated eigenvector: u3 for two-component
            // models (first high-dimensional mode), u2 on a single manifold
            auto [ref_fn, hi_comp] = designated_eigenfunction(model);
            int designated = model.component_count() == 2 ? 2 : 1;
            if (designated < config.k) {
                Eigen::VectorXd ref_vec =
                    degree_corrected_samples(model, run.cloud, run.graph, profile, ref_fn);
                // multiplicity handling: rotate the computed cluster onto the
                // reference pair before comparing (circle modes come in pairs)
                Eigen::VectorXd u = run.spectrum.vectors.col(designated);
                bool cluster_pair =
                    designated + 1 < config.k &&
                    std::abs(run.spectrum.eigenvalues(designated + 1) -
                             run.spectrum.eigenvalues(designated)) <
                        0.2 * std::abs(run.spectrum.eigenvalues(designated)) &&
                    model.component_count() == 1;
                if (cluster_pair) {
                    auto [ref_fn2, hc2] = designated_eigenfunction(model, true);
                    Eigen::VectorXd ref_vec2 =
                        degree_corrected_samples(model, run.cloud, run.graph, profile, ref_fn2);
                    Eigen::MatrixXd cl(run.cloud.size(), 2), rf(run.cloud.size(), 2);
                    cl.col(0) = run.spectrum.vectors.col(designated);
                    cl.col(1) = run.spectrum.vectors.col(designated + 1);
                    rf.col(0) = ref_vec;
                    rf.col(1) = ref_vec2;
                    u = procrustes_align(cl, rf).col(0);
                } else {
                    u = align_sign(u, ref_vec);
                }
                row.tl2_proxy =
                    std::sqrt((u - ref_vec).squaredNorm() / static_cast<double>(run.cloud.size()));
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::string SweepTable::to_csv() const {
    std::string out = "n,seed,epsilon,lambda_rel_errors,kde_sup_errors,tl2_proxy,deg_near_min,"
                      "deg_near_max,deg_far_min,deg_far_max\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.seed) + "," + num(r.epsilon) + ",";
        for (size_t i = 0; i < r.eigenvalue_rel_errors.size(); ++i)
            out += (i ? ";" : "") + num(r.eigenvalue_rel_errors[i]);
        out += ",";
        for (size_t i = 0; i < r.kde_sup_errors.size(); ++i)
            out += (i ? ";" : "") + num(r.kde_sup_errors[i]);
        out += "," + num(r.tl2_proxy) + "," + num(r.deg_near_min) + "," + num(r.deg_near_max) +
               "," + num(r.deg_far_min) + "," + num(r.deg_far_max) + "\n";
    }
    return out;
}

namespace {
double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}
}  // namespace

std::vector<double> SweepTable::median_rel_error(int index) const {
    std::vector<long long> ns;
    for (const auto& r : rows)
        if (ns.empty() || ns.back() != r.n) ns.push_back(r.n);
    std::vector<double> out;
    for (long long n : ns) {
        std::vector<double> vals;
        for (const auto& r : rows)
            if (r.n == n && index < static_cast<int>(r.eigenvalue_rel_errors.size()))
                vals.push_back(r.eigenvalue_rel_errors[static_cast<size_t>(index)]);
        out.push_back(median_of(vals));
    }
    return out;
}

std::vector<double> SweepTable::median_kde_error(int component) const {
    std::vector<long long> ns;
    for (const auto& r : rows)
        if (ns.empty() || ns.back() != r.n) ns.push_back(r.n);
    std::vector<double> out;
    for (long long n : ns) {
        std::vector<double> vals;
        for (const auto& r : rows)
            if (r.n == n && component < static_cast<int>(r.kde_sup_errors.size()))
                vals.push_back(r.kde_sup_errors[static_cast<size_t>(component)]);
        out.push_back(median_of(vals));
    }
    return out;
}

bool validate_bundle(const ResultBundle& bundle, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!bundle.json.contains("config")) return fail("missing config");
    if (!bundle.json.contains("runs") || !bundle.json.at("runs").is_array() ||
        bundle.json.at("runs").empty())
        return fail("missing runs");
    for (const auto& run : bundle.json.at("runs")) {
        if (!run.contains("spectrum")) return fail("run missing spectrum");
        const auto& sp = run.at("spectrum");
        if (!sp.contains("eigenvalues") || sp.at("eigenvalues").empty())
            return fail("spectrum missing eigenvalues");
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& v : sp.at("eigenvalues")) {
            if (v.get<double>() < prev - 1e-9) return fail("eigenvalues not ascending");
            prev = v.get<double>();
        }
        if (sp.contains("vectors_file") && !sp.at("vectors_file").is_null()) {
            std::string dir = bundle.json.at("config").value("out", "");
            auto path = std::filesystem::path(dir) / sp.at("vectors_file").get<std::string>();
            if (!std::filesystem::exists(path))
                return fail("referenced vectors file missing: " + path.string());
        }
    }
    return true;
}

}  // namespace unionlap
