#include "unionlap/capi.h"

#include <cstring>
#include <fstream>
#include <string>

#include "unionlap/errors.hpp"
#include "unionlap/graph.hpp"
#include "unionlap/harness.hpp"
#include "unionlap/manifolds.hpp"
#include "unionlap/spectra.hpp"
#include "unionlap/transport.hpp"

using namespace unionlap;

struct ul_model {
    MixtureModel model;
};
struct ul_cloud {
    SampleCloud cloud;
};
struct ul_graph {
    Graph graph;
};
struct ul_spectrum {
    SpectralResult result;
};

namespace {

thread_local std::string g_last_error;

ul_status fail(ul_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

/// Run `fn`, translating exceptions into status codes.
template <class Fn>
ul_status guarded(Fn&& fn) {
    try {
        fn();
        return UL_OK;
    } catch (const ValidationError& e) {
        return fail(UL_EINVAL, e.what());
    } catch (const SolverError& e) {
        return fail(UL_ESOLVER, e.what());
    } catch (const std::exception& e) {
        return fail(UL_ERROR, e.what());
    } catch (...) {
        return fail(UL_ERROR, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* ul_version(void) {
    static std::string v = version_string();
    return v.c_str();
}

const char* ul_last_error(void) { return g_last_error.c_str(); }

void ul_string_free(char* s) { std::free(s); }

ul_status ul_model_preset(const char* name, ul_model** out) {
    if (!name || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] { *out = new ul_model{unionlap::model_preset(name)}; });
}

ul_status ul_model_from_json(const char* json, ul_model** out) {
    if (!json || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        auto j = nlohmann::ordered_json::parse(json);
        nlohmann::ordered_json wrapper;
        wrapper["model"] = j;
        wrapper["n"] = 2;  // placeholder; only the model part is used
        ExperimentConfig cfg = ExperimentConfig::from_json(wrapper);
        *out = new ul_model{cfg.build_model()};
    });
}

void ul_model_free(ul_model* model) { delete model; }

int ul_model_component_count(const ul_model* model) {
    return model ? model->model.component_count() : 0;
}

int ul_model_ambient_dim(const ul_model* model) { return model ? model->model.ambient_dim : 0; }

ul_status ul_sample(const ul_model* model, long long n, uint64_t seed, ul_cloud** out) {
    if (!model || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] { *out = new ul_cloud{sample_mixture(model->model, n, seed)}; });
}

ul_status ul_sample_counts(const ul_model* model, const long long* counts, int ncomp,
                           uint64_t seed, ul_cloud** out) {
    if (!model || !counts || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        std::vector<long long> c(counts, counts + ncomp);
        *out = new ul_cloud{sample_mixture_counts(model->model, c, seed)};
    });
}

void ul_cloud_free(ul_cloud* cloud) { delete cloud; }

long long ul_cloud_size(const ul_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

int ul_cloud_ambient_dim(const ul_cloud* cloud) { return cloud ? cloud->cloud.ambient_dim() : 0; }

ul_status ul_cloud_points(const ul_cloud* cloud, double* buf, long long len) {
    if (!cloud || !buf) return fail(UL_EINVAL, "null argument");
    long long need = cloud->cloud.size() * cloud->cloud.ambient_dim();
    if (len < need) return fail(UL_EINVAL, "buffer too small");
    for (long long i = 0; i < cloud->cloud.size(); ++i)
        for (int d = 0; d < cloud->cloud.ambient_dim(); ++d)
            buf[i * cloud->cloud.ambient_dim() + d] = cloud->cloud.points(i, d);
    return UL_OK;
}

ul_status ul_cloud_labels(const ul_cloud* cloud, int* buf, long long len) {
    if (!cloud || !buf) return fail(UL_EINVAL, "null argument");
    if (len < cloud->cloud.size()) return fail(UL_EINVAL, "buffer too small");
    for (long long i = 0; i < cloud->cloud.size(); ++i)
        buf[i] = cloud->cloud.labels[static_cast<size_t>(i)];
    return UL_OK;
}

ul_status ul_cloud_write_csv(const ul_cloud* cloud, const char* path) {
    if (!cloud || !path) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        std::ofstream f(path);
        if (!f) throw ValidationError(std::string("cannot open ") + path);
        f.precision(17);
        for (int d = 0; d < cloud->cloud.ambient_dim(); ++d) f << "x" << (d + 1) << ",";
        f << "label\n";
        for (long long i = 0; i < cloud->cloud.size(); ++i) {
            for (int d = 0; d < cloud->cloud.ambient_dim(); ++d) f << cloud->cloud.points(i, d) << ",";
            f << cloud->cloud.labels[static_cast<size_t>(i)] << "\n";
        }
    });
}

ul_status ul_graph_build(const ul_cloud* cloud, double epsilon, const char* kernel,
                         ul_graph** out) {
    if (!cloud || !kernel || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        KernelProfile profile = KernelProfile::from_key(kernel);
        *out = new ul_graph{build_graph(cloud->cloud, epsilon, profile)};
    });
}

void ul_graph_free(ul_graph* graph) { delete graph; }

long long ul_graph_nnz(const ul_graph* graph) { return graph ? graph->graph.nnz() : 0; }

ul_status ul_graph_degrees(const ul_graph* graph, double* buf, long long len) {
    if (!graph || !buf) return fail(UL_EINVAL, "null argument");
    if (len < graph->graph.n) return fail(UL_EINVAL, "buffer too small");
    for (long long i = 0; i < graph->graph.n; ++i) buf[i] = graph->graph.deg(i);
    return UL_OK;
}

ul_status ul_graph_write_edges(const ul_graph* graph, const char* edges_path,
                               const char* degrees_path) {
    if (!graph || !edges_path || !degrees_path) return fail(UL_EINVAL, "null argument");
    return guarded([&] { write_edge_list(graph->graph, edges_path, degrees_path); });
}

ul_status ul_spectrum_compute(const ul_graph* graph, const char* kind, int d2, int k, double tol,
                              ul_spectrum** out) {
    if (!graph || !kind || !out) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        LaplacianKind lk = LaplacianKind::from_key(kind, d2);
        *out = new ul_spectrum{smallest_eigenpairs(graph->graph, lk, k, tol)};
    });
}

void ul_spectrum_free(ul_spectrum* spectrum) { delete spectrum; }

int ul_spectrum_k(const ul_spectrum* spectrum) { return spectrum ? spectrum->result.k() : 0; }

ul_status ul_spectrum_eigenvalues(const ul_spectrum* spectrum, double* buf, int len) {
    if (!spectrum || !buf) return fail(UL_EINVAL, "null argument");
    if (len < spectrum->result.k()) return fail(UL_EINVAL, "buffer too small");
    for (int i = 0; i < spectrum->result.k(); ++i) buf[i] = spectrum->result.eigenvalues(i);
    return UL_OK;
}

ul_status ul_spectrum_residuals(const ul_spectrum* spectrum, double* buf, int len) {
    if (!spectrum || !buf) return fail(UL_EINVAL, "null argument");
    if (len < spectrum->result.k()) return fail(UL_EINVAL, "buffer too small");
    for (int i = 0; i < spectrum->result.k(); ++i) buf[i] = spectrum->result.residuals(i);
    return UL_OK;
}

ul_status ul_spectrum_vector(const ul_spectrum* spectrum, int j, double* buf, long long len) {
    if (!spectrum || !buf) return fail(UL_EINVAL, "null argument");
    if (j < 0 || j >= spectrum->result.k()) return fail(UL_EINVAL, "vector index out of range");
    if (len < spectrum->result.n()) return fail(UL_EINVAL, "buffer too small");
    for (long long i = 0; i < spectrum->result.n(); ++i) buf[i] = spectrum->result.vectors(i, j);
    return UL_OK;
}

ul_status ul_run_experiment(const char* config_json, char** result_json) {
    if (!config_json || !result_json) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        auto cfg = ExperimentConfig::from_json(nlohmann::ordered_json::parse(config_json));
        ResultBundle bundle = run_experiment(cfg);
        *result_json = dup_string(bundle.json.dump(2));
    });
}

ul_status ul_run_sweep(const char* config_json, char** csv) {
    if (!config_json || !csv) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        auto cfg = ExperimentConfig::from_json(nlohmann::ordered_json::parse(config_json));
        SweepTable table = convergence_sweep(cfg);
        *csv = dup_string(table.to_csv());
    });
}

ul_status ul_reference_spectrum(const char* config_json, char** result_json) {
    if (!config_json || !result_json) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        auto j = nlohmann::ordered_json::parse(config_json);
        nlohmann::ordered_json wrapper;
        wrapper["model"] = j.value("model", nlohmann::ordered_json("paper-rect-segment"));
        wrapper["n"] = 2;
        ExperimentConfig cfg = ExperimentConfig::from_json(wrapper);
        MixtureModel model = cfg.build_model();
        KernelProfile profile = KernelProfile::from_key(j.value("kernel", "indicator"));
        int k = j.value("k", 6);
        std::string kind = j.value("kind", "normalized");
        ReferenceSpectrum ref;
        if (kind == "metric_graph") {
            double min_len = std::numeric_limits<double>::infinity();
            for (const auto& c : model.components) min_len = std::min(c.patch.lengths(0), min_len);
            ref = metric_graph_spectrum_fd(model, profile, j.value("h", min_len / 2000.0), k);
        } else {
            ref = merged_union_spectrum(model, profile,
                                        kind == "normalized"
                                            ? ReferenceSpectrum::Kind::NormalizedLimit
                                            : ReferenceSpectrum::Kind::UnnormalizedLimit,
                                        k);
        }
        nlohmann::ordered_json out;
        std::vector<double> ev;
        std::vector<int> mult;
        std::vector<std::string> src;
        for (const auto& e : ref.entries) {
            ev.push_back(e.lambda);
            mult.push_back(e.multiplicity);
            src.push_back(e.source);
        }
        out["kind"] = kind;
        out["eigenvalues"] = ev;
        out["multiplicities"] = mult;
        out["sources"] = src;
        *result_json = dup_string(out.dump(2));
    });
}

ul_status ul_nonlocal_energy(const char* config_json, char** result_json) {
    if (!config_json || !result_json) return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        auto j = nlohmann::ordered_json::parse(config_json);
        nlohmann::ordered_json wrapper;
        wrapper["model"] = j.value("model", nlohmann::ordered_json("circle-uniform"));
        wrapper["n"] = 2;
        ExperimentConfig cfg = ExperimentConfig::from_json(wrapper);
        MixtureModel model = cfg.build_model();
        KernelProfile profile = KernelProfile::from_key(j.value("kernel", "indicator"));
        long long budget = j.value("budget", 2000000LL);
        std::string function = j.value("function", "circle-cos");

        std::vector<double> epsilons;
        if (j.contains("epsilons"))
            for (const auto& e : j.at("epsilons")) epsilons.push_back(e.get<double>());
        else
            epsilons.push_back(j.value("epsilon", 0.1));

        nlohmann::ordered_json out;
        out["function"] = function;
        out["values"] = nlohmann::ordered_json::array();
        for (double eps : epsilons) {
            NonlocalResult r;
            if (function == "recovery-01") {
                SmoothFunctionSpec ones = SmoothFunctionSpec::constant(model.component_count(), 1.0);
                SmoothFunctionSpec zeros = SmoothFunctionSpec::constant(model.component_count(), 0.0);
                RecoveryFunction rec = build_recovery(model, ones, zeros, eps, profile);
                r = nonlocal_energy(model, rec.evaluator(), eps, profile, budget);
            } else {
                SmoothFunctionSpec u;
                if (function == "circle-cos") {
                    if (model.component(0).patch.kind != Patch::Kind::Circle)
                        throw ValidationError("circle-cos needs a circle component");
                    double r0 = model.component(0).patch.radius;
                    SmoothFunctionSpec::ComponentFn fn;
                    fn.value = [r0](const Eigen::VectorXd& l) { return std::cos(l(0) / r0); };
                    fn.gradient = [r0](const Eigen::VectorXd& l) {
                        Eigen::VectorXd g(1);
                        g(0) = -std::sin(l(0) / r0) / r0;
                        return g;
                    };
                    u.components.push_back(fn);
                } else if (function == "piecewise-01") {
                    std::vector<double> vals(static_cast<size_t>(model.component_count()), 0.0);
                    vals[0] = 1.0;
                    u = SmoothFunctionSpec::piecewise_constant(vals);
                } else {
                    throw ValidationError("unknown function: " + function);
                }
                r = nonlocal_energy(model, u, eps, profile, budget);
            }
            out["values"].push_back({{"epsilon", eps},
                                     {"value", r.value},
                                     {"estimated_error", r.estimated_error},
                                     {"budget_warning", r.budget_warning}});
        }
        *result_json = dup_string(out.dump(2));
    });
}

ul_status ul_preset_list(char** json) {
    if (!json) return fail(UL_EINVAL, "null argument");
    nlohmann::ordered_json out;
    out["experiments"] = experiment_preset_names();
    out["models"] = model_preset_names();
    *json = dup_string(out.dump(2));
    return UL_OK;
}

ul_status ul_tl2_exact(const double* points_a, const double* values_a, const double* points_b,
                       const double* values_b, long long m, int dim, double* distance) {
    if (!points_a || !values_a || !points_b || !values_b || !distance)
        return fail(UL_EINVAL, "null argument");
    return guarded([&] {
        Eigen::MatrixXd pa(m, dim), pb(m, dim);
        Eigen::VectorXd ua(m), ub(m);
        for (long long i = 0; i < m; ++i) {
            for (int d = 0; d < dim; ++d) {
                pa(i, d) = points_a[i * dim + d];
                pb(i, d) = points_b[i * dim + d];
            }
            ua(i) = values_a[i];
            ub(i) = values_b[i];
        }
        TL2Result r = tl2_exact(pa, ua, pb, ub);
        *distance = r.distance;
    });
}

}  // extern "C"
