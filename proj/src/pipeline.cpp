#include "netmirror/pipeline.hpp"

#include "netmirror/embed.hpp"
#include "netmirror/io.hpp"
#include "netmirror/metric.hpp"
#include "netmirror/parallel.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

namespace netmirror {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config ---

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
}

TimeGrid parse_grid(const nlohmann::json& j) {
    TimeGrid grid;
    const auto& times = j.at("times");
    if (times.is_array()) {
        grid.times = times.get<std::vector<double>>();
        grid.horizon = grid.times.empty() ? 0.0 : grid.times.back();
    } else {
        reject_unknown(times, {"start", "stop", "count"}, "times");
        grid = TimeGrid::linspace(times.at("start").get<double>(), times.at("stop").get<double>(),
                                  times.at("count").get<std::size_t>());
    }
    if (j.contains("horizon")) grid.horizon = j.at("horizon").get<double>();
    return grid;
}

Vector parse_vector(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.empty()) throw ConfigError("direction vector must be non-empty");
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ProcessSpec parse_process(const nlohmann::json& j) {
    ProcessSpec p;
    p.kind = j.at("process").get<std::string>();
    if (p.kind == "bm_drift") {
        reject_unknown(j, {"process", "drift", "c1", "c2", "v", "sigma", "n", "times", "horizon"}, "bm_drift process");
        const std::string drift = j.value("drift", std::string("linear"));
        if (drift == "linear") p.drift = DriftSpec::linear_default();
        else if (drift == "quadratic") p.drift = DriftSpec::quadratic_default();
        else throw ConfigError("drift must be 'linear' or 'quadratic'");
        if (j.contains("c1")) p.drift.c1 = j.at("c1").get<double>();
        if (j.contains("c2")) p.drift.c2 = j.at("c2").get<double>();
        if (j.contains("v")) p.drift.v = parse_vector(j.at("v"));
        if (j.contains("sigma")) p.drift.sigma = j.at("sigma").get<double>();
    } else if (p.kind == "integrated_bm") {
        reject_unknown(j, {"process", "a", "b", "v", "sigma", "n", "times", "horizon"}, "integrated_bm process");
        p.ibmSlope = j.value("a", p.ibmSlope);
        p.ibmOffset = j.value("b", p.ibmOffset);
        if (j.contains("v")) p.ibmDirection = parse_vector(j.at("v"));
        p.ibmSigma = j.value("sigma", p.ibmSigma);
    } else if (p.kind == "sbm") {
        reject_unknown(j, {"process", "n", "times", "horizon", "blockSizes"}, "sbm process");
        if (j.contains("blockSizes")) p.blockSizes = j.at("blockSizes").get<std::vector<int>>();
    } else if (p.kind == "archive") {
        reject_unknown(j, {"process", "path"}, "archive process");
        p.archivePath = j.at("path").get<std::string>();
        return p;
    } else {
        throw ConfigError("unknown process '" + p.kind + "'");
    }
    p.n = j.at("n").get<std::size_t>();
    p.grid = parse_grid(j);
    if (p.kind == "sbm" && p.blockSizes.empty()) {
        const int half = static_cast<int>(p.n / 2);
        p.blockSizes = {half, static_cast<int>(p.n) - half};
    }
    return p;
}

Json grid_json(const TimeGrid& g) {
    Json j;
    j["times"] = g.times;
    j["horizon"] = g.horizon;
    return j;
}

Json process_json(const ProcessSpec& p) {
    Json j;
    j["process"] = p.kind;
    if (p.kind == "archive") {
        j["path"] = p.archivePath;
        return j;
    }
    j["n"] = p.n;
    if (p.kind == "bm_drift") {
        j["drift"] = p.drift.kind == DriftKind::Linear ? "linear" : "quadratic";
        j["c1"] = p.drift.c1;
        j["c2"] = p.drift.c2;
        j["v"] = std::vector<double>(p.drift.v.data(), p.drift.v.data() + p.drift.v.size());
        j["sigma"] = p.drift.sigma;
    } else if (p.kind == "integrated_bm") {
        j["a"] = p.ibmSlope;
        j["b"] = p.ibmOffset;
        j["v"] = std::vector<double>(p.ibmDirection.data(), p.ibmDirection.data() + p.ibmDirection.size());
        j["sigma"] = p.ibmSigma;
    } else if (p.kind == "sbm") {
        j["blockSizes"] = p.blockSizes;
    }
    const Json g = grid_json(p.grid);
    j["times"] = g["times"];
    j["horizon"] = g["horizon"];
    return j;
}

}  // namespace

void PipelineConfig::validate() const {
    if (d < 1) throw ConfigError("d must be at least 1");
    if (c && *c < 1) throw ConfigError("c must be at least 1 or \"auto\"");
    if (!(cThreshold > 0.0 && cThreshold <= 1.0)) throw ConfigError("cThreshold must lie in (0, 1]");
    if (isomapK < 1) throw ConfigError("isomapK must be at least 1");
    if (changepoint.window < 3) throw ConfigError("changepoint window must be at least 3");
    if (outputDir.empty()) throw ConfigError("outputDir must be set");
    switch (input) {
        case InputKind::Simulate:
            if (!seed) throw ConfigError("a seed is required when simulating");
            if (process.kind != "archive") {
                process.grid.validate();
                if (process.n < 1) throw ConfigError("process node count must be positive");
                if (process.kind == "sbm") {
                    int total = 0;
                    for (int s : process.blockSizes) total += s;
                    if (process.blockSizes.size() != 2 || static_cast<std::size_t>(total) != process.n)
                        throw ConfigError("sbm blockSizes must be two positive sizes summing to n");
                    if (process.grid.times.front() < 0.0 || process.grid.times.back() > 3.0)
                        throw ConfigError("sbm times must lie in [0, 3]");
                }
            } else if (process.archivePath.empty()) {
                throw ConfigError("archive process needs a path");
            }
            break;
        case InputKind::Load:
            if (loadDir.empty()) throw ConfigError("input.load must name a directory");
            break;
        case InputKind::Distances:
            if (distancesPath.empty()) throw ConfigError("input.distances must name a file");
            if (!partition.empty()) throw ConfigError("partition requires graph input");
            break;
    }
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
        reject_unknown(j, {"input", "d", "c", "cThreshold", "scaled", "refine", "isomapK", "changepoint", "seed",
                           "outputDir", "partition"},
                       "configuration");
        if (j.contains("input")) {
            const auto& in = j.at("input");
            reject_unknown(in, {"simulate", "load", "distances"}, "input");
            if (in.size() != 1) throw ConfigError("input must have exactly one of simulate, load, distances");
            if (in.contains("simulate")) {
                cfg.input = InputKind::Simulate;
                cfg.process = parse_process(in.at("simulate"));
            } else if (in.contains("load")) {
                cfg.input = InputKind::Load;
                cfg.loadDir = in.at("load").get<std::string>();
            } else {
                cfg.input = InputKind::Distances;
                cfg.distancesPath = in.at("distances").get<std::string>();
            }
        }
        cfg.d = j.value("d", cfg.d);
        if (j.contains("c")) {
            const auto& c = j.at("c");
            if (c.is_string()) {
                if (c.get<std::string>() != "auto") throw ConfigError("c must be an integer or \"auto\"");
                cfg.c.reset();
            } else {
                cfg.c = c.get<int>();
            }
        }
        cfg.cThreshold = j.value("cThreshold", cfg.cThreshold);
        cfg.scaled = j.value("scaled", cfg.scaled);
        cfg.refine = j.value("refine", cfg.refine);
        cfg.isomapK = j.value("isomapK", cfg.isomapK);
        if (j.contains("changepoint")) {
            const auto& cp = j.at("changepoint");
            reject_unknown(cp, {"window", "threshold", "multiplier"}, "changepoint");
            cfg.changepoint.window = cp.value("window", cfg.changepoint.window);
            cfg.changepoint.threshold = cp.value("threshold", cfg.changepoint.threshold);
            cfg.changepoint.multiplier = cp.value("multiplier", cfg.changepoint.multiplier);
        }
        if (j.contains("seed") && !j.at("seed").is_null()) cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.outputDir = j.value("outputDir", cfg.outputDir);
        cfg.partition = j.value("partition", cfg.partition);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
    Json j;
    Json in;
    switch (cfg.input) {
        case InputKind::Simulate: in["simulate"] = process_json(cfg.process); break;
        case InputKind::Load: in["load"] = cfg.loadDir; break;
        case InputKind::Distances: in["distances"] = cfg.distancesPath; break;
    }
    j["input"] = in;
    j["d"] = cfg.d;
    if (cfg.c) j["c"] = *cfg.c;
    else j["c"] = "auto";
    j["cThreshold"] = cfg.cThreshold;
    j["scaled"] = cfg.scaled;
    j["refine"] = cfg.refine;
    j["isomapK"] = cfg.isomapK;
    j["changepoint"] = {{"window", cfg.changepoint.window},
                        {"threshold", cfg.changepoint.threshold},
                        {"multiplier", cfg.changepoint.multiplier}};
    if (cfg.seed) j["seed"] = *cfg.seed;
    else j["seed"] = nullptr;
    j["outputDir"] = cfg.outputDir;
    j["partition"] = cfg.partition;
    return j.dump(2);
}

std::string error_json(const std::string& stage, ErrorKind kind, const std::string& message) {
    const char* name = kind == ErrorKind::Config ? "config" : kind == ErrorKind::Data ? "data" : "numerical";
    Json j;
    j["error"] = {{"stage", stage}, {"kind", name}, {"exitCode", static_cast<int>(kind)}, {"message", message}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- stages ---

namespace {

// Fixed substream layout of the master seed.
constexpr std::uint64_t kLatentStream = 0;
constexpr std::uint64_t kGraphStream = 1;
constexpr std::uint64_t kBootstrapStream = 2;

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e.kind(), e.what());
    } catch (const std::domain_error& e) {
        throw StageError(stage, ErrorKind::Config, e.what());
    } catch (const fs::filesystem_error& e) {
        throw StageError(stage, ErrorKind::Data, e.what());
    }
}

std::string indexed(const std::string& prefix, std::size_t i, const std::string& ext) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return prefix + buf + ext;
}

}  // namespace

LatentTrajectorySet simulate_latents(const ProcessSpec& spec, std::uint64_t seed) {
    const std::uint64_t s = substream_seed(seed, kLatentStream);
    if (spec.kind == "bm_drift") return simulate_bm_drift(spec.drift, spec.grid, spec.n, s);
    if (spec.kind == "integrated_bm")
        return simulate_integrated_bm(spec.ibmSlope, spec.ibmOffset, spec.ibmDirection, spec.ibmSigma, spec.grid,
                                      spec.n, s);
    if (spec.kind == "sbm") {
        spec.grid.validate();
        LatentTrajectorySet set{spec.grid, {}};
        for (double t : spec.grid.times)
            set.positions.push_back(sbm_latents(SbmSpec{sbm_block_matrix_at(t), spec.blockSizes}, 2, t).rows);
        return set;
    }
    if (spec.kind == "archive") return read_trajectory_archive(spec.archivePath);
    throw ConfigError("unknown process '" + spec.kind + "'");
}

std::uint64_t graph_seed(std::uint64_t base, std::size_t i) { return substream_seed(base, i); }

std::vector<GraphSnapshot> sample_graphs(const LatentTrajectorySet& latents, std::uint64_t base,
                                         std::size_t* clamped) {
    std::vector<GraphSnapshot> graphs;
    std::size_t total = 0;
    for (std::size_t i = 0; i < latents.positions.size(); ++i) {
        ClampStats stats;
        graphs.push_back(sample_rdpg(latents.slice(i), graph_seed(base, i), &stats));
        total += stats.clamped;
    }
    if (clamped != nullptr) *clamped = total;
    return graphs;
}

Simulation simulate(const ProcessSpec& spec, std::uint64_t seed) {
    Simulation sim;
    sim.latents = simulate_latents(spec, seed);
    sim.graphs = sample_graphs(sim.latents, substream_seed(seed, kGraphStream), &sim.clamped);
    return sim;
}

std::vector<GraphSnapshot> load_graph_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .tsv edge lists in " + dir);
    std::vector<GraphSnapshot> graphs;
    for (const auto& f : files) graphs.push_back(read_edge_list(f));
    std::stable_sort(graphs.begin(), graphs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (graphs[i].n != graphs[0].n)
            throw DataError("snapshot at t=" + format_number(graphs[i].time) + " has " + std::to_string(graphs[i].n) +
                            " nodes, expected " + std::to_string(graphs[0].n));
        if (i > 0 && graphs[i].time == graphs[i - 1].time)
            throw DataError("two snapshots share time " + format_number(graphs[i].time));
    }
    return graphs;
}

void write_graph_directory(const std::string& dir, const std::vector<GraphSnapshot>& graphs) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < graphs.size(); ++i)
        write_edge_list((fs::path(dir) / indexed("graph_", i, ".tsv")).string(), graphs[i]);
}

std::vector<EmbeddingMatrix> embed_all(const std::vector<GraphSnapshot>& graphs, int d, bool scaled,
                                       std::vector<std::string>* warnings) {
    AseOptions opts;
    opts.onRankDeficient = RankDeficiencyPolicy::ZeroPad;
    std::vector<EmbeddingMatrix> out(graphs.size());
    std::vector<std::vector<std::string>> notes(graphs.size());
    parallel_for(graphs.size(), [&](std::size_t i) { out[i] = ase(graphs[i], d, scaled, opts, &notes[i]); });
    if (warnings != nullptr)
        for (auto& n : notes) warnings->insert(warnings->end(), n.begin(), n.end());
    return out;
}

void write_embedding_directory(const std::string& dir, const std::vector<EmbeddingMatrix>& embeddings) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        write_embedding((fs::path(dir) / indexed("embedding_", i, ".csv")).string(),
                        (fs::path(dir) / indexed("embedding_", i, ".json")).string(), embeddings[i]);
}

std::vector<EmbeddingMatrix> load_embedding_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no embedding CSV files in " + dir);
    std::vector<EmbeddingMatrix> out;
    for (const auto& f : files) {
        fs::path side = f;
        side.replace_extension(".json");
        out.push_back(read_embedding(f.string(), side.string()));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    return out;
}

MirrorStage build_mirror(const DistanceMatrix& D, std::optional<int> c, double threshold,
                         std::vector<std::string>* warnings) {
    const int m = static_cast<int>(D.values.rows());
    if (m < 2) throw DataError("need at least two time points");
    MirrorStage stage;
    int chosen = 1;
    if (c) {
        chosen = *c;
        if (chosen > m - 1) {
            if (warnings) warnings->push_back("mirror dimension " + std::to_string(chosen) + " reduced to " + std::to_string(m - 1));
            chosen = m - 1;
        }
    } else {
        const MirrorCurve probe = cmds(D, 1);
        try {
            stage.choice = select_dimension(probe.scree, threshold);
            chosen = std::min(stage.choice.c, m - 1);
        } catch (const NumericalError&) {
            if (warnings) warnings->push_back("scree has no positive eigenvalue; using c = 1");
            chosen = 1;
        }
    }
    stage.choice.c = chosen;
    stage.mirror = cmds(D, chosen);
    if (warnings) warnings->insert(warnings->end(), stage.mirror.warnings.begin(), stage.mirror.warnings.end());
    return stage;
}

PipelineResult run_distances(const DistanceMatrix& D, const PipelineConfig& config) {
    PipelineResult r;
    r.distances = D;
    r.mirror = in_stage("mirror", [&] { return build_mirror(D, config.c, config.cThreshold, &r.warnings); });
    r.stressValue = stress(D, r.mirror.mirror.coords);
    r.trace = in_stage("isomap", [&] { return isomap_1d(r.mirror.mirror, config.isomapK); });
    const auto& cp = config.changepoint;
    if (r.trace.values.size() > cp.window) {
        r.sigmage = in_stage("changepoint", [&] { return sigmage_scan(r.trace, cp.window, cp.threshold); });
        r.regression = in_stage("changepoint", [&] { return regression_band_scan(r.trace, cp.window, cp.multiplier); });
    } else {
        r.warnings.push_back("trace of length " + std::to_string(r.trace.values.size()) +
                             " is too short for change-point window " + std::to_string(cp.window) + "; scans skipped");
    }
    return r;
}

PipelineResult run_graphs(const std::vector<GraphSnapshot>& graphs, const PipelineConfig& config) {
    std::vector<std::string> warnings;
    auto embeddings = in_stage("embed", [&] {
        if (graphs.size() < 2) throw DataError("need at least two snapshots");
        for (const auto& g : graphs)
            if (g.n != graphs.front().n)
                throw DataError("snapshot at t=" + format_number(g.time) + " has " + std::to_string(g.n) +
                                " nodes, expected " + std::to_string(graphs.front().n));
        return embed_all(graphs, config.d, config.scaled, &warnings);
    });
    const DistanceMatrix D = in_stage("distances", [&] { return distance_matrix(embeddings, config.refine); });
    PipelineResult r = run_distances(D, config);
    r.embeddings = std::move(embeddings);
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    r.warnings = std::move(warnings);
    return r;
}

// -------------------------------------------------------------- artifacts ---

namespace {

struct ArtifactWriter {
    fs::path root;
    std::vector<std::string> files;  // relative paths

    std::string path(const std::string& rel) {
        const fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        files.push_back(rel);
        return p.string();
    }
};

Json stage_outputs(ArtifactWriter& out, const std::string& prefix, const PipelineResult& r, bool writeEmbeddings) {
    if (writeEmbeddings) {
        for (std::size_t i = 0; i < r.embeddings.size(); ++i)
            write_embedding(out.path(prefix + "embeddings/" + indexed("embedding_", i, ".csv")),
                            out.path(prefix + "embeddings/" + indexed("embedding_", i, ".json")), r.embeddings[i]);
    }
    write_distance_matrix(out.path(prefix + "distances.csv"), r.distances);
    write_scree(out.path(prefix + "scree.csv"), r.mirror.mirror.scree);
    write_mirror(out.path(prefix + "mirror.csv"), r.mirror.mirror);
    write_isomap(out.path(prefix + "isomap.csv"), r.trace);
    Json flags = Json::object();
    if (r.sigmage) {
        write_text_file(out.path(prefix + "sigmage.json"), sigmage_report_json(*r.sigmage));
        std::vector<double> t;
        for (const auto& e : r.sigmage->perTime)
            if (e.flag) t.push_back(e.time);
        flags["sigmage"] = t;
    }
    if (r.regression) {
        write_text_file(out.path(prefix + "regression.json"), regression_report_json(*r.regression));
        std::vector<double> t;
        for (const auto& e : r.regression->perTime)
            if (e.flag) t.push_back(e.time);
        flags["regression"] = t;
    }
    Json summary;
    summary["c"] = r.mirror.choice.c;
    if (!r.mirror.choice.massProfile.empty()) summary["screeMassProfile"] = r.mirror.choice.massProfile;
    summary["stress"] = r.stressValue;
    summary["flaggedTimes"] = flags;
    summary["warnings"] = r.warnings;
    return summary;
}

void write_manifest(ArtifactWriter& out, const PipelineConfig& config, Json results) {
    std::sort(out.files.begin(), out.files.end());
    Json manifest;
    manifest["tool"] = "netmirror";
    manifest["version"] = kVersion;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    const std::string echo = config_to_json(config);
    manifest["config"] = Json::parse(echo);
    manifest["configHash"] = sha256_hex(echo);
    for (auto it = results.begin(); it != results.end(); ++it) manifest[it.key()] = it.value();
    Json files = Json::array();
    for (const auto& rel : out.files)
        files.push_back({{"path", rel}, {"sha256", sha256_hex(read_text_file((out.root / rel).string()))}});
    manifest["files"] = files;
    write_text_file((out.root / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::map<int, std::vector<int>> read_partition(const std::string& path, int n) {
    const auto table = read_csv(path);
    if (table.header.size() != 2) throw DataError(path + ": expected columns node,community");
    std::map<int, std::vector<int>> groups;
    std::set<int> seen;
    for (const auto& row : table.rows) {
        const int node = static_cast<int>(row[0]);
        const int community = static_cast<int>(row[1]);
        if (row[0] != node || row[1] != community) throw DataError(path + ": node and community must be integers");
        if (node < 0 || node >= n) throw DataError(path + ": node " + std::to_string(node) + " out of range");
        if (!seen.insert(node).second) throw DataError(path + ": node " + std::to_string(node) + " listed twice");
        groups[community].push_back(node);
    }
    for (auto& [id, nodes] : groups) std::sort(nodes.begin(), nodes.end());
    return groups;
}

}  // namespace

void run_pipeline(const PipelineConfig& config) {
    in_stage("config", [&] { config.validate(); });
    ArtifactWriter out{fs::path(config.outputDir), {}};
    in_stage("output", [&] { fs::create_directories(out.root); });

    Json results;
    PipelineResult r;
    std::vector<GraphSnapshot> graphs;
    if (config.input == InputKind::Distances) {
        const DistanceMatrix D = in_stage("load", [&] { return read_distance_matrix(config.distancesPath); });
        r = run_distances(D, config);
    } else {
        if (config.input == InputKind::Simulate) {
            Simulation sim = in_stage("simulate", [&] { return simulate(config.process, *config.seed); });
            in_stage("simulate", [&] {
                const std::string specEcho = Json(process_json(config.process)).dump();
                write_trajectory_archive((out.root / "latent").string(), sim.latents, *config.seed, specEcho);
                for (std::size_t i = 0; i < sim.latents.positions.size(); ++i)
                    out.files.push_back("latent/latent_" + std::to_string(i) + ".csv");
                out.files.push_back("latent/manifest.json");
                for (std::size_t i = 0; i < sim.graphs.size(); ++i)
                    write_edge_list(out.path("graphs/" + indexed("graph_", i, ".tsv")), sim.graphs[i]);
            });
            results["clampedInnerProducts"] = sim.clamped;
            graphs = std::move(sim.graphs);
        } else {
            graphs = in_stage("load", [&] { return load_graph_directory(config.loadDir); });
        }
        r = run_graphs(graphs, config);
    }

    Json summary = in_stage("write", [&] { return stage_outputs(out, "", r, config.input != InputKind::Distances); });
    for (auto it = summary.begin(); it != summary.end(); ++it) results[it.key()] = it.value();

    if (!config.partition.empty()) {
        Json communities = Json::object();
        const auto groups = in_stage("partition", [&] { return read_partition(config.partition, graphs.front().n); });
        for (const auto& [id, nodes] : groups) {
            const std::string stage = "community " + std::to_string(id);
            std::vector<GraphSnapshot> sub;
            for (const auto& g : graphs) sub.push_back(induced_subgraph(g, nodes));
            if (static_cast<int>(nodes.size()) < config.d)
                throw StageError(stage, ErrorKind::Data,
                                 "community " + std::to_string(id) + " has fewer nodes than d = " + std::to_string(config.d));
            PipelineResult cr = in_stage(stage, [&] { return run_graphs(sub, config); });
            const std::string prefix = "communities/community_" + std::to_string(id) + "/";
            Json cs = in_stage("write", [&] { return stage_outputs(out, prefix, cr, true); });
            cs["nodes"] = nodes.size();
            communities[std::to_string(id)] = cs;
        }
        results["communities"] = communities;
    }
    in_stage("write", [&] { write_manifest(out, config, results); });
}

// -------------------------------------------------------------- bootstrap ---

double aligned_trace_error(const Vector& reference, const Vector& candidate) {
    if (reference.size() != candidate.size()) throw DataError("trace lengths differ");
    const Vector a = reference.array() - reference.mean();
    const Vector b = candidate.array() - candidate.mean();
    const double n = static_cast<double>(a.size());
    return std::min((b - a).norm(), (b + a).norm()) / std::sqrt(n);
}

BootstrapResult run_bootstrap(const PipelineConfig& config, const BootstrapOptions& options, bool write) {
    in_stage("config", [&] {
        config.validate();
        if (config.input != InputKind::Simulate) throw ConfigError("bootstrap needs a simulated or archived source");
        if (options.replicates < 1) throw ConfigError("replicates must be at least 1");
        if (options.sampleSizes.empty()) throw ConfigError("bootstrap needs at least one sample size");
    });
    const std::uint64_t seed = *config.seed;
    const LatentTrajectorySet source = in_stage("simulate", [&] { return simulate_latents(config.process, seed); });
    const std::uint64_t sourceGraphBase = substream_seed(seed, kGraphStream);
    const auto sourceGraphs = in_stage("simulate", [&] { return sample_graphs(source, sourceGraphBase); });
    const PipelineResult sourceRun = run_graphs(sourceGraphs, config);

    BootstrapResult result;
    result.source = sourceRun.trace;
    const std::uint64_t bootBase = substream_seed(seed, kBootstrapStream);
    for (std::size_t si = 0; si < options.sampleSizes.size(); ++si) {
        const std::size_t ns = options.sampleSizes[si];
        std::vector<double> errors;
        for (int rep = 0; rep < options.replicates; ++rep) {
            const std::uint64_t repBase = substream_seed(bootBase, si * 1000003ULL + static_cast<std::uint64_t>(rep));
            LatentTrajectorySet sample;
            std::uint64_t graphBase = substream_seed(repBase, 1);
            if (options.identityResample) {
                if (ns != source.nodes())
                    throw StageError("bootstrap", ErrorKind::Config, "identity resampling needs n_s equal to the source size");
                std::vector<std::size_t> rows(ns);
                for (std::size_t k = 0; k < ns; ++k) rows[k] = k;
                sample = select_rows(source, rows);
                graphBase = sourceGraphBase;
            } else {
                sample = in_stage("bootstrap", [&] { return bootstrap_resample(source, ns, substream_seed(repBase, 0)); });
            }
            const auto graphs = in_stage("bootstrap", [&] { return sample_graphs(sample, graphBase); });
            const PipelineResult run = run_graphs(graphs, config);
            BootstrapReplicate br;
            br.sampleSize = ns;
            br.replicate = rep;
            br.trace = run.trace;
            br.error = aligned_trace_error(result.source.values, run.trace.values);
            if (run.sigmage)
                for (const auto& e : run.sigmage->perTime)
                    if (e.flag) br.sigmageFlags.push_back(e.time);
            errors.push_back(br.error);
            result.replicates.push_back(std::move(br));
        }
        std::sort(errors.begin(), errors.end());
        const std::size_t h = errors.size() / 2;
        const double median = errors.size() % 2 ? errors[h] : 0.5 * (errors[h - 1] + errors[h]);
        result.medianError.emplace_back(ns, median);
    }

    if (write) {
        in_stage("write", [&] {
            ArtifactWriter out{fs::path(config.outputDir), {}};
            fs::create_directories(out.root);
            write_isomap(out.path("bootstrap/source_isomap.csv"), result.source);
            std::string summary = "n_s,replicate,error\n";
            Json reps = Json::array();
            for (const auto& br : result.replicates) {
                write_isomap(out.path("bootstrap/ns_" + std::to_string(br.sampleSize) + "/" +
                                      indexed("replicate_", static_cast<std::size_t>(br.replicate), "_isomap.csv")),
                             br.trace);
                summary += std::to_string(br.sampleSize) + "," + std::to_string(br.replicate) + "," +
                           format_number(br.error) + "\n";
                reps.push_back({{"n_s", br.sampleSize},
                                {"replicate", br.replicate},
                                {"error", br.error},
                                {"sigmageFlags", br.sigmageFlags}});
            }
            write_text_file(out.path("bootstrap/summary.csv"), summary);
            Json conv;
            Json med = Json::array();
            for (const auto& [ns, m] : result.medianError) med.push_back({{"n_s", ns}, {"medianError", m}});
            conv["medianError"] = med;
            conv["replicates"] = reps;
            write_text_file(out.path("bootstrap/convergence.json"), conv.dump(2) + "\n");
            Json results;
            results["bootstrap"] = {{"sampleSizes", options.sampleSizes},
                                    {"replicates", options.replicates},
                                    {"identityResample", options.identityResample}};
            write_manifest(out, config, results);
        });
    }
    return result;
}

}  // namespace netmirror
