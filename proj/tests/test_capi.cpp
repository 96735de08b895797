#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "unionlap/capi.h"

TEST_CASE("version and preset listing") {
    CHECK(std::string(ul_version()).find("unionlap") == 0);
    char* json = nullptr;
    REQUIRE(ul_preset_list(&json) == UL_OK);
    auto j = nlohmann::json::parse(json);
    ul_string_free(json);
    bool found = false;
    for (const auto& p : j.at("experiments"))
        if (p.get<std::string>() == "paper-fig1") found = true;
    CHECK(found);
}

TEST_CASE("model, cloud and graph handles") {
    ul_model* model = nullptr;
    REQUIRE(ul_model_preset("paper-rect-segment", &model) == UL_OK);
    CHECK(ul_model_component_count(model) == 2);
    CHECK(ul_model_ambient_dim(model) == 3);

    ul_cloud* cloud = nullptr;
    REQUIRE(ul_sample(model, 300, 7, &cloud) == UL_OK);
    CHECK(ul_cloud_size(cloud) == 300);
    CHECK(ul_cloud_ambient_dim(cloud) == 3);
    std::vector<double> pts(300 * 3);
    std::vector<int> labels(300);
    REQUIRE(ul_cloud_points(cloud, pts.data(), 300 * 3) == UL_OK);
    REQUIRE(ul_cloud_labels(cloud, labels.data(), 300) == UL_OK);
    CHECK(ul_cloud_points(cloud, pts.data(), 10) == UL_EINVAL);

    ul_graph* graph = nullptr;
    REQUIRE(ul_graph_build(cloud, 0.3, "indicator", &graph) == UL_OK);
    CHECK(ul_graph_nnz(graph) > 300);
    std::vector<double> deg(300);
    REQUIRE(ul_graph_degrees(graph, deg.data(), 300) == UL_OK);
    for (double d : deg) CHECK(d > 0.0);

    ul_spectrum* spec = nullptr;
    REQUIRE(ul_spectrum_compute(graph, "normalized", 0, 3, 1e-8, &spec) == UL_OK);
    CHECK(ul_spectrum_k(spec) == 3);
    double ev[3], res[3];
    REQUIRE(ul_spectrum_eigenvalues(spec, ev, 3) == UL_OK);
    REQUIRE(ul_spectrum_residuals(spec, res, 3) == UL_OK);
    CHECK(std::abs(ev[0]) < 1e-6);
    CHECK(ev[1] <= ev[2]);
    std::vector<double> vec(300);
    REQUIRE(ul_spectrum_vector(spec, 1, vec.data(), 300) == UL_OK);
    CHECK(ul_spectrum_vector(spec, 5, vec.data(), 300) == UL_EINVAL);

    ul_spectrum_free(spec);
    ul_graph_free(graph);
    ul_cloud_free(cloud);
    ul_model_free(model);
}

TEST_CASE("fixed-count sampling and csv dump") {
    ul_model* model = nullptr;
    REQUIRE(ul_model_preset("paper-rect-segment", &model) == UL_OK);
    long long counts[2] = {60, 80};
    ul_cloud* cloud = nullptr;
    REQUIRE(ul_sample_counts(model, counts, 2, 3, &cloud) == UL_OK);
    CHECK(ul_cloud_size(cloud) == 140);
    std::string path = "capi_cloud.csv";
    REQUIRE(ul_cloud_write_csv(cloud, path.c_str()) == UL_OK);
    std::remove(path.c_str());
    ul_cloud_free(cloud);
    ul_model_free(model);
}

TEST_CASE("error reporting uses status codes and messages") {
    ul_model* model = nullptr;
    CHECK(ul_model_preset("no-such-preset", &model) == UL_EINVAL);
    CHECK(std::string(ul_last_error()).find("preset") != std::string::npos);
    CHECK(ul_model_preset(nullptr, &model) == UL_EINVAL);

    REQUIRE(ul_model_preset("circle-uniform", &model) == UL_OK);
    ul_cloud* cloud = nullptr;
    REQUIRE(ul_sample(model, 50, 1, &cloud) == UL_OK);
    ul_graph* graph = nullptr;
    CHECK(ul_graph_build(cloud, -1.0, "indicator", &graph) == UL_EINVAL);
    CHECK(ul_graph_build(cloud, 0.3, "bogus", &graph) == UL_EINVAL);
    REQUIRE(ul_graph_build(cloud, 0.3, "indicator", &graph) == UL_OK);
    ul_spectrum* spec = nullptr;
    CHECK(ul_spectrum_compute(graph, "normalized", 0, 50, 1e-8, &spec) == UL_EINVAL);
    ul_graph_free(graph);
    ul_cloud_free(cloud);
    ul_model_free(model);
}

TEST_CASE("json experiment entry point") {
    nlohmann::json cfg;
    cfg["model"] = "circle-uniform";
    cfg["n"] = 300;
    cfg["epsilon"] = 0.3;
    cfg["k"] = 3;
    cfg["seed"] = 2;
    char* out = nullptr;
    REQUIRE(ul_run_experiment(cfg.dump().c_str(), &out) == UL_OK);
    auto j = nlohmann::json::parse(out);
    ul_string_free(out);
    CHECK(j.at("runs").size() == 1);
    CHECK(j.at("runs").at(0).at("spectrum").at("eigenvalues").size() == 3);

    CHECK(ul_run_experiment("{ not json", &out) != UL_OK);
    CHECK(ul_run_experiment("{}", &out) == UL_EINVAL);
}

TEST_CASE("reference spectrum entry point") {
    nlohmann::json cfg;
    cfg["model"] = "paper-rect-segment";
    cfg["kind"] = "normalized";
    cfg["k"] = 6;
    char* out = nullptr;
    REQUIRE(ul_reference_spectrum(cfg.dump().c_str(), &out) == UL_OK);
    auto j = nlohmann::json::parse(out);
    ul_string_free(out);
    std::vector<double> vals;
    for (size_t i = 0; i < j.at("eigenvalues").size(); ++i) {
        for (int m = 0; m < j.at("multiplicities").at(i).get<int>(); ++m)
            vals.push_back(j.at("eigenvalues").at(i).get<double>());
    }
    REQUIRE(vals.size() >= 4);
    CHECK(vals[0] == 0.0);
    CHECK(vals[1] == 0.0);
    CHECK(vals[2] == doctest::Approx(1.2588781).epsilon(1e-6));
    CHECK(vals[3] == doctest::Approx(1.9466676).epsilon(1e-6));
}

TEST_CASE("nonlocal energy entry point") {
    nlohmann::json cfg;
    cfg["model"] = "circle-uniform";
    cfg["function"] = "circle-cos";
    cfg["epsilons"] = {0.2};
    char* out = nullptr;
    REQUIRE(ul_nonlocal_energy(cfg.dump().c_str(), &out) == UL_OK);
    auto j = nlohmann::json::parse(out);
    ul_string_free(out);
    CHECK(j.at("values").at(0).at("value").get<double>() ==
          doctest::Approx(1.0 / 6.0).epsilon(0.05));
}

TEST_CASE("tl2 entry point") {
    std::vector<double> p = {0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
    std::vector<double> u = {0.3, 0.7, 0.1};
    double dist = -1.0;
    REQUIRE(ul_tl2_exact(p.data(), u.data(), p.data(), u.data(), 3, 2, &dist) == UL_OK);
    CHECK(dist == doctest::Approx(0.0).epsilon(1e-14));
}
