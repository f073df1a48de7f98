#include <doctest.h>

#include "netmirror/io.hpp"
#include "netmirror/parallel.hpp"
#include "netmirror/pipeline.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>

using namespace netmirror;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("netmirror_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_text_file(e.path().string());
    return out;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); }

PipelineConfig small_simulation(const fs::path& out, std::size_t n = 200, int m = 12) {
    nlohmann::json j;
    j["input"]["simulate"] = {{"process", "bm_drift"}, {"n", n}, {"times", {{"start", 1}, {"stop", m}, {"count", m}}}};
    j["seed"] = 17;
    j["outputDir"] = out.string();
    return parse_config(j.dump());
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("NETMIRROR_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "NETMIRROR_CLI is not set");
    const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config: defaults, echo and round trip") {
    const auto cfg = parse_config(R"({"input": {"load": "graphs"}})");
    CHECK(cfg.input == InputKind::Load);
    CHECK(cfg.d == 2);
    CHECK_FALSE(cfg.c.has_value());
    CHECK(cfg.cThreshold == 0.95);
    CHECK(cfg.scaled);
    CHECK_FALSE(cfg.refine);
    CHECK(cfg.isomapK == 5);
    CHECK(cfg.changepoint.window == 5);

    const auto echo = nlohmann::json::parse(config_to_json(cfg));
    for (const char* key : {"input", "d", "c", "cThreshold", "scaled", "refine", "isomapK", "changepoint", "seed",
                            "outputDir", "partition"})
        CHECK(echo.contains(key));
    CHECK(echo["c"] == "auto");
    CHECK(config_to_json(parse_config(config_to_json(cfg))) == config_to_json(cfg));

    const auto sim = small_simulation(scratch("cfg"));
    CHECK(sim.process.grid.size() == 12);
    CHECK(sim.process.drift.c1 == 1.0 / 50);
    CHECK(config_to_json(parse_config(config_to_json(sim))) == config_to_json(sim));

    const auto sbm = parse_config(
        R"({"input": {"simulate": {"process": "sbm", "n": 11, "times": {"start": 0, "stop": 3, "count": 30}}}, "seed": 1, "c": 2})");
    CHECK(sbm.process.blockSizes == std::vector<int>{5, 6});
    CHECK(sbm.c == 2);
}

TEST_CASE("config: errors") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"load": "x"}, "d": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"load": "x"}, "c": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"load": "x"}, "c": "many"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"load": "x", "distances": "y"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"simulate": {"process": "bm_drift", "n": 5, "times": [1, 2]}}})"),
                    ConfigError);  // no seed
    CHECK_THROWS_AS(
        parse_config(R"({"input": {"simulate": {"process": "bm_drift", "n": 5, "times": [2, 1]}}, "seed": 1})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"input": {"simulate": {"process": "sbm", "n": 5, "times": [1, 4]}}, "seed": 1})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"input": {"simulate": {"process": "walk", "n": 5, "times": [1, 2]}}, "seed": 1})"),
        ConfigError);

    const auto err = nlohmann::json::parse(error_json("embed", ErrorKind::Numerical, "boom"));
    CHECK(err["error"]["stage"] == "embed");
    CHECK(err["error"]["kind"] == "numerical");
    CHECK(err["error"]["exitCode"] == 4);
    CHECK(err["error"]["message"] == "boom");
}

TEST_CASE("run_graphs: identical snapshots give a zero distance") {
    const auto dir = scratch("identical");
    LatentMatrix X{0.0, Matrix::Constant(150, 2, 0.45)};
    X.rows.col(1).setLinSpaced(150, 0.1, 0.6);
    auto g = sample_rdpg(X, 4);
    auto h = g;
    h.time = 1.0;
    write_graph_directory((dir / "graphs").string(), {g, h});
    auto cfg = parse_config(R"({"input": {"load": ")" + (dir / "graphs").string() + R"("}, "c": 1})");
    const auto result = run_graphs(load_graph_directory(cfg.loadDir), cfg);
    CHECK(result.distances.values.rows() == 2);
    CHECK(result.distances.values(0, 1) <= 1e-12);
    CHECK(result.distances.values(1, 0) == result.distances.values(0, 1));
    CHECK_FALSE(result.sigmage.has_value());  // too short to scan
}

TEST_CASE("run_pipeline: c = auto on an exact rank-2 distance matrix") {
    const auto dir = scratch("rank2");
    Rng rng(12);
    std::normal_distribution<double> z;
    const int m = 12;
    DistanceMatrix D{{}, Matrix::Zero(m, m)};
    Matrix P(m, 2);
    for (int i = 0; i < m; ++i) {
        D.times.push_back(i + 1.0);
        P(i, 0) = z(rng);
        P(i, 1) = z(rng);
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) D.values(i, j) = (P.row(i) - P.row(j)).norm();
    write_distance_matrix((dir / "d.csv").string(), D);

    nlohmann::json j;
    j["input"]["distances"] = (dir / "d.csv").string();
    j["c"] = "auto";
    j["cThreshold"] = 0.999999;
    j["outputDir"] = (dir / "out").string();
    run_pipeline(parse_config(j.dump()));
    const auto manifest = read_json(dir / "out" / "manifest.json");
    CHECK(manifest["c"] == 2);
    CHECK(fs::exists(dir / "out" / "mirror.csv"));
    CHECK(manifest["stress"].get<double>() <= 1e-9);
}

TEST_CASE("run_pipeline: simulated linear drift writes every artifact") {
    const auto dir = scratch("full");
    auto cfg = small_simulation(dir / "out", 2000, 30);
    cfg.c = 1;
    run_pipeline(cfg);
    const auto out = dir / "out";
    for (const char* f : {"distances.csv", "scree.csv", "mirror.csv", "isomap.csv", "sigmage.json", "regression.json",
                          "manifest.json", "latent/manifest.json", "graphs/graph_000.tsv", "graphs/graph_029.tsv",
                          "embeddings/embedding_000.csv", "embeddings/embedding_029.json"})
        CHECK_MESSAGE(fs::exists(out / f), f);
    const auto mirror = read_mirror((out / "mirror.csv").string());
    CHECK(mirror.coords.rows() == 30);
    CHECK(mirror.coords.cols() == 1);

    // Manifest lists every file with its content hash.
    const auto manifest = read_json(out / "manifest.json");
    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) {
        const std::string rel = f["path"];
        listed.insert(rel);
        CHECK(f["sha256"] == sha256_hex(read_text_file((out / rel).string())));
    }
    for (const auto& [rel, body] : tree_contents(out))
        if (rel != "manifest.json") CHECK_MESSAGE(listed.count(rel) == 1, rel);
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["configHash"] == sha256_hex(config_to_json(cfg)));
}

TEST_CASE("run_pipeline: byte-identical across runs and thread counts") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto cfg = small_simulation(a, 300, 10);
    cfg.refine = true;
    set_thread_count(1);
    run_pipeline(cfg);
    cfg.outputDir = b.string();
    set_thread_count(4);
    run_pipeline(cfg);
    set_thread_count(1);
    auto ta = tree_contents(a), tb = tree_contents(b);
    // The manifest echoes outputDir; compare it with that field removed.
    auto ma = nlohmann::json::parse(ta["manifest.json"]), mb = nlohmann::json::parse(tb["manifest.json"]);
    ma["config"].erase("outputDir");
    mb["config"].erase("outputDir");
    ma.erase("configHash");
    mb.erase("configHash");
    CHECK(ma == mb);
    ta.erase("manifest.json");
    tb.erase("manifest.json");
    CHECK(ta == tb);
}

TEST_CASE("run_pipeline: per-community runs") {
    const auto dir = scratch("communities");
    auto cfg = small_simulation(dir / "out", 240, 8);
    std::string part = "node,community\n";
    for (int i = 0; i < 240; ++i) part += std::to_string(i) + "," + (i % 3 == 0 ? "7" : "2") + "\n";
    write_text_file((dir / "part.csv").string(), part);
    cfg.partition = (dir / "part.csv").string();
    run_pipeline(cfg);
    for (const char* c : {"community_2", "community_7"}) {
        CHECK(fs::exists(dir / "out" / "communities" / c / "isomap.csv"));
        CHECK(fs::exists(dir / "out" / "communities" / c / "distances.csv"));
    }
    const auto manifest = read_json(dir / "out" / "manifest.json");
    CHECK(manifest["communities"].size() == 2);
    const auto emb = read_embedding((dir / "out/communities/community_7/embeddings/embedding_000.csv").string(),
                                    (dir / "out/communities/community_7/embeddings/embedding_000.json").string());
    CHECK(emb.rows.rows() == 80);
}

TEST_CASE("run_pipeline: stage errors") {
    const auto dir = scratch("errors");
    auto cfg = parse_config(R"({"input": {"load": ")" + (dir / "missing").string() + R"("}, "outputDir": ")" +
                            (dir / "out").string() + R"("})");
    try {
        run_pipeline(cfg);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(e.kind() == ErrorKind::Data);
    }

    // Snapshots on different node counts.
    write_graph_directory((dir / "mixed").string(), {make_graph(0.0, 4, {{0, 1}}), make_graph(1.0, 5, {{0, 1}})});
    cfg.loadDir = (dir / "mixed").string();
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
}

TEST_CASE("run_bootstrap: identity hook reproduces the source trace") {
    const auto dir = scratch("boot_identity");
    const auto cfg = small_simulation(dir, 200, 10);
    BootstrapOptions opts;
    opts.sampleSizes = {200};
    opts.replicates = 1;
    opts.identityResample = true;
    const auto result = run_bootstrap(cfg, opts);
    REQUIRE(result.replicates.size() == 1);
    CHECK((result.replicates[0].trace.values - result.source.values).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(result.replicates[0].error <= 1e-9);
    CHECK(fs::exists(dir / "bootstrap" / "summary.csv"));
    CHECK(fs::exists(dir / "bootstrap" / "ns_200" / "replicate_000_isomap.csv"));

    opts.sampleSizes = {100};
    CHECK_THROWS_AS(run_bootstrap(cfg, opts, false), StageError);
}

TEST_CASE("run_bootstrap: replicate sigmage scans find an injected change") {
    // Static latent positions that shift once, at the sixth of ten months.
    const auto dir = scratch("boot_change");
    const std::size_t n = 200;
    const int m = 10;
    Rng rng(3);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    Matrix base(n, 1);
    for (std::size_t i = 0; i < n; ++i) base(i, 0) = 0.45 + u(rng);
    LatentTrajectorySet set;
    set.grid = TimeGrid::linspace(1, m, m);
    for (int t = 0; t < m; ++t) {
        Matrix X = base;
        if (t >= 5) X.array() += 0.2;
        set.positions.push_back(X);
    }
    write_trajectory_archive((dir / "archive").string(), set, 0, "{}");

    nlohmann::json j;
    j["input"]["simulate"] = {{"process", "archive"}, {"path", (dir / "archive").string()}};
    j["seed"] = 5;
    j["d"] = 1;
    j["c"] = 1;
    j["outputDir"] = (dir / "out").string();
    BootstrapOptions opts;
    opts.sampleSizes = {n};
    opts.replicates = 100;
    const auto result = run_bootstrap(parse_config(j.dump()), opts, false);
    int hits = 0;
    for (const auto& r : result.replicates)
        if (std::find(r.sigmageFlags.begin(), r.sigmageFlags.end(), 6.0) != r.sigmageFlags.end()) ++hits;
    CHECK(hits >= 90);
}

TEST_CASE("aligned_trace_error") {
    Vector a(4), b(4);
    a << 0, 1, 2, 3;
    b << 10, 9, 8, 7;  // reversed and shifted copy
    CHECK(aligned_trace_error(a, b) <= 1e-12);
    b << 0, 1, 2, 4;
    CHECK(aligned_trace_error(a, b) > 0.0);
}

TEST_CASE("cli: exit codes and error documents") {
    const auto dir = scratch("cli");
    CHECK(run_cli("pipeline --load " + (dir / "nothing").string() + " --out " + dir.string()) == 3);
    const auto err = read_json(dir / "error.json");
    CHECK(err["error"]["exitCode"] == 3);
    CHECK(err["error"]["stage"] == "load");

    CHECK(run_cli("pipeline --load x --d 0 --out " + dir.string()) == 2);
    CHECK(run_cli("pipeline --no-such-flag") == 2);
    CHECK(run_cli("pipeline --process bm_drift --n 50 --t-count 8 --t-stop 8 --seed 3 --c 1 --out " +
                  (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "isomap.csv"));

    // Stage-by-stage commands reproduce the pipeline's distance matrix.
    const auto stages = dir / "stages";
    CHECK(run_cli("embed --load " + (dir / "ok" / "graphs").string() + " --out " + stages.string()) == 0);
    CHECK(run_cli("distances --embeddings " + (stages / "embeddings").string() + " --out " + stages.string()) == 0);
    CHECK(read_text_file((stages / "distances.csv").string()) == read_text_file((dir / "ok" / "distances.csv").string()));
    CHECK(run_cli("mirror --distances " + (stages / "distances.csv").string() + " --c 1 --out " + stages.string()) == 0);
    CHECK(run_cli("isomap --mirror " + (stages / "mirror.csv").string() + " --out " + stages.string()) == 0);
    CHECK(read_text_file((stages / "isomap.csv").string()) == read_text_file((dir / "ok" / "isomap.csv").string()));
    CHECK(run_cli("changepoint --isomap " + (stages / "isomap.csv").string() + " --out " + stages.string()) == 0);
    CHECK(fs::exists(stages / "sigmage.json"));

    const std::string cfgPath = (dir / "cfg.json").string();
    write_text_file(cfgPath, R"({"input": {"load": "x"}, "d": -1})");
    CHECK(run_cli("pipeline --config " + cfgPath) == 2);
}
