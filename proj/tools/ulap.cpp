// ulap: sampling, spectra and limit checks for graph Laplacians on unions of
// manifolds. Talks to the unionlap shared library through its C API only.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unionlap/capi.h"

using nlohmann::ordered_json;

namespace {

int status_to_exit(ul_status s) {
    switch (s) {
        case UL_OK: return 0;
        case UL_EINVAL: return 2;
        case UL_ESOLVER: return 3;
        default: return 1;
    }
}

int report_failure(ul_status s) {
    std::cerr << "ulap: error: " << ul_last_error() << "\n";
    return status_to_exit(s);
}

struct CommonFlags {
    std::string config_file;
    std::string model;
    std::string kernel;
    std::string kind;
    std::string out;
    long long n = -1;
    double eps = -1.0;
    int k = -1;
    int d2 = -1;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "JSON config file");
    cmd->add_option("--model", f.model, "model preset name");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--n", f.n, "sample count");
    cmd->add_option("--eps", f.eps, "graph bandwidth");
    cmd->add_option("--kernel", f.kernel, "kernel key (indicator|triangular|gauss:<r>)");
    cmd->add_option("--kind", f.kind, "laplacian kind (normalized|unnormalized|unnormalized_scaled)");
    cmd->add_option("--d2", f.d2, "scaling dimension for unnormalized_scaled");
    cmd->add_option("--k", f.k, "number of eigenpairs");
    cmd->add_option("--out", f.out, "output directory / file");
}

ordered_json build_config(const CommonFlags& f, const std::string& default_preset = "") {
    ordered_json cfg = ordered_json::object();
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) {
            std::cerr << "ulap: error: cannot read " << f.config_file << "\n";
            std::exit(2);
        }
        in >> cfg;
    } else if (!default_preset.empty() && f.model.empty()) {
        cfg["preset"] = default_preset;
    }
    if (!f.model.empty()) cfg["model"] = f.model;
    if (f.n >= 0) cfg["n"] = f.n;
    if (f.eps > 0) cfg["epsilon"] = f.eps;
    if (!f.kernel.empty()) cfg["kernel"] = f.kernel;
    if (!f.kind.empty()) cfg["kind"] = f.kind;
    if (f.d2 > 0) cfg["d2"] = f.d2;
    if (f.k > 0) cfg["k"] = f.k;
    if (f.seed >= 0) cfg["seed"] = f.seed;
    if (!f.out.empty()) cfg["out"] = f.out;
    return cfg;
}

int run_experiment_command(const CommonFlags& flags, bool print_table) {
    ordered_json cfg = build_config(flags, "paper-fig1");
    char* result = nullptr;
    ul_status s = ul_run_experiment(cfg.dump().c_str(), &result);
    if (s != UL_OK) return report_failure(s);
    ordered_json j = ordered_json::parse(result);
    ul_string_free(result);

    if (print_table) {
        for (const auto& run : j.at("runs")) {
            std::cout << "seed " << run.at("seed") << "  n=" << run.at("n")
                      << "  eps=" << run.at("epsilon") << "\n";
            if (run.contains("alignment")) {
                std::printf("%4s %16s %16s %12s  %s\n", "i", "computed", "reference",
                            "rel_error", "source");
                int i = 1;
                for (const auto& p : run.at("alignment").at("pairs")) {
                    std::printf("%4d %16.8f %16.8f %12.4g  %s\n", i++,
                                p.at("computed").get<double>(), p.at("reference").get<double>(),
                                p.at("rel_error").get<double>(),
                                p.at("source").get<std::string>().c_str());
                }
                if (run.at("alignment").contains("separation_scores")) {
                    std::cout << "separation scores:";
                    for (const auto& v : run.at("alignment").at("separation_scores"))
                        std::printf(" %.3g", v.get<double>());
                    std::cout << "\n";
                }
            } else {
                std::cout << "eigenvalues:";
                for (const auto& v : run.at("spectrum").at("eigenvalues"))
                    std::printf(" %.8f", v.get<double>());
                std::cout << "\n";
            }
        }
    } else {
        std::cout << j.dump(2) << "\n";
    }
    return 0;
}

std::vector<std::vector<double>> read_atom_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "ulap: error: cannot read " << path << "\n";
        std::exit(2);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == 'x' || line[0] == '#') continue;  // header
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph Laplacian spectra on unions of manifolds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ul_version());

    CommonFlags sample_f, spectrum_f, compare_f, nonlocal_f, sweep_f;
    std::string tl2_a, tl2_b;
    std::string nonlocal_function = "circle-cos";
    std::string nonlocal_eps = "0.1";
    std::string preset_action = "list";

    auto* sample = app.add_subcommand("sample", "draw a labeled sample cloud, write CSV");
    add_common(sample, sample_f);

    auto* spectrum = app.add_subcommand("spectrum", "sample, build the graph, solve eigenpairs");
    add_common(spectrum, spectrum_f);

    auto* compare = app.add_subcommand("compare", "spectrum + table against the continuum limit");
    add_common(compare, compare_f);

    auto* nonlocal = app.add_subcommand("nonlocal", "nonlocal Dirichlet energy of a test function");
    add_common(nonlocal, nonlocal_f);
    nonlocal->add_option("--function", nonlocal_function,
                         "circle-cos | piecewise-01 | recovery-01");
    nonlocal->add_option("--epsilons", nonlocal_eps, "comma-separated bandwidth list");

    auto* tl2 = app.add_subcommand("tl2", "exact TL2 distance between two atom CSV files");
    tl2->add_option("--a", tl2_a, "first CSV (columns x...,u)")->required();
    tl2->add_option("--b", tl2_b, "second CSV")->required();

    auto* sweep = app.add_subcommand("sweep", "convergence sweep over a count list");
    add_common(sweep, sweep_f);

    auto* preset = app.add_subcommand("preset", "preset utilities");
    preset->add_option("action", preset_action, "list");

    CLI11_PARSE(app, argc, argv);

    if (sample->parsed()) {
        std::string name = sample_f.model.empty() ? "paper-rect-segment" : sample_f.model;
        ul_model* model = nullptr;
        ul_status s = ul_model_preset(name.c_str(), &model);
        if (s != UL_OK) return report_failure(s);
        ul_cloud* cloud = nullptr;
        long long n = sample_f.n > 0 ? sample_f.n : 5400;
        uint64_t seed = sample_f.seed >= 0 ? static_cast<uint64_t>(sample_f.seed) : 1;
        s = ul_sample(model, n, seed, &cloud);
        if (s != UL_OK) {
            ul_model_free(model);
            return report_failure(s);
        }
        std::string out = sample_f.out.empty() ? "cloud.csv" : sample_f.out;
        s = ul_cloud_write_csv(cloud, out.c_str());
        ul_cloud_free(cloud);
        ul_model_free(model);
        if (s != UL_OK) return report_failure(s);
        std::cout << "wrote " << n << " points to " << out << "\n";
        return 0;
    }

    if (spectrum->parsed()) return run_experiment_command(spectrum_f, false);
    if (compare->parsed()) return run_experiment_command(compare_f, true);

    if (nonlocal->parsed()) {
        ordered_json cfg = ordered_json::object();
        cfg["model"] = nonlocal_f.model.empty() ? "circle-uniform" : nonlocal_f.model;
        if (!nonlocal_f.kernel.empty()) cfg["kernel"] = nonlocal_f.kernel;
        cfg["function"] = nonlocal_function;
        std::vector<double> eps;
        std::stringstream ss(nonlocal_eps);
        std::string cell;
        while (std::getline(ss, cell, ',')) eps.push_back(std::stod(cell));
        cfg["epsilons"] = eps;
        char* result = nullptr;
        ul_status s = ul_nonlocal_energy(cfg.dump().c_str(), &result);
        if (s != UL_OK) return report_failure(s);
        std::cout << result << "\n";
        ul_string_free(result);
        return 0;
    }

    if (tl2->parsed()) {
        auto a = read_atom_csv(tl2_a), b = read_atom_csv(tl2_b);
        if (a.empty() || b.empty() || a.size() != b.size() || a[0].size() != b[0].size() ||
            a[0].size() < 2) {
            std::cerr << "ulap: error: atom files must have equal shapes (x...,u per row)\n";
            return 2;
        }
        long long m = static_cast<long long>(a.size());
        int dim = static_cast<int>(a[0].size()) - 1;
        std::vector<double> pa(m * dim), pb(m * dim), ua(m), ub(m);
        for (long long i = 0; i < m; ++i) {
            for (int d = 0; d < dim; ++d) {
                pa[i * dim + d] = a[static_cast<size_t>(i)][static_cast<size_t>(d)];
                pb[i * dim + d] = b[static_cast<size_t>(i)][static_cast<size_t>(d)];
            }
            ua[i] = a[static_cast<size_t>(i)].back();
            ub[i] = b[static_cast<size_t>(i)].back();
        }
        double dist = 0.0;
        ul_status s = ul_tl2_exact(pa.data(), ua.data(), pb.data(), ub.data(), m, dim, &dist);
        if (s != UL_OK) return report_failure(s);
        std::printf("tl2 = %.12g\n", dist);
        return 0;
    }

    if (sweep->parsed()) {
        ordered_json cfg = build_config(sweep_f, "paper-sweep");
        char* csv = nullptr;
        ul_status s = ul_run_sweep(cfg.dump().c_str(), &csv);
        if (s != UL_OK) return report_failure(s);
        if (!sweep_f.out.empty()) {
            std::ofstream f(sweep_f.out);
            f << csv;
            std::cout << "wrote sweep table to " << sweep_f.out << "\n";
        } else {
            std::cout << csv;
        }
        ul_string_free(csv);
        return 0;
    }

    if (preset->parsed()) {
        if (preset_action != "list") {
            std::cerr << "ulap: error: unknown preset action " << preset_action << "\n";
            return 2;
        }
        char* json = nullptr;
        ul_status s = ul_preset_list(&json);
        if (s != UL_OK) return report_failure(s);
        std::cout << json << "\n";
        ul_string_free(json);
        return 0;
    }
    return 0;
}
