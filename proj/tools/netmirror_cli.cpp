// netmirror command-line tool.
//
//   netmirror simulate    --config cfg.json            latent archive + edge lists
//   netmirror embed       --load graphs/ --out dir     spectral embeddings
//   netmirror distances   --embeddings dir --out dir   pairwise distance matrix
//   netmirror mirror      --distances f.csv --out dir  CMDS mirror + scree
//   netmirror isomap      --mirror f.csv --out dir     1-D ISOMAP trace
//   netmirror changepoint --isomap f.csv --out dir     sigmage / regression reports
//   netmirror pipeline    --config cfg.json            everything, with manifest
//   netmirror bootstrap   --config cfg.json --ns 250,500 --replicates 10

#include "netmirror/embed.hpp"
#include "netmirror/io.hpp"
#include "netmirror/parallel.hpp"
#include "netmirror/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace netmirror;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> d;
    std::string c;
    std::optional<double> cThreshold;
    bool unscaled = false;
    bool refine = false;
    std::optional<int> isomapK;
    std::optional<int> window;
    std::optional<double> threshold;
    std::optional<double> multiplier;
    std::string process;
    std::string drift;
    std::optional<double> sigma;
    std::optional<std::size_t> n;
    std::optional<double> tStart, tStop;
    std::optional<std::size_t> tCount;
    std::string load;
    std::string distances;
    std::string partition;
    unsigned threads = 1;

    // stage inputs
    std::string embeddings;
    std::string mirror;
    std::string isomap;
    std::vector<std::size_t> ns;
    int replicates = 10;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON configuration file (overrides flags)");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--seed", f.seed, "Master random seed");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores); never changes results");
}

void add_model(CLI::App* cmd, Flags& f) {
    cmd->add_option("--d", f.d, "Embedding dimension");
    cmd->add_option("--c", f.c, "Mirror dimension or 'auto'");
    cmd->add_option("--c-threshold", f.cThreshold, "Scree mass threshold for --c auto");
    cmd->add_flag("--unscaled", f.unscaled, "Use unit eigenvectors instead of scaled ones");
    cmd->add_flag("--refine", f.refine, "Refine alignment by local spectral-norm search");
    cmd->add_option("--isomap-k", f.isomapK, "ISOMAP neighbourhood size");
    cmd->add_option("--window", f.window, "Change-point trailing window");
    cmd->add_option("--threshold", f.threshold, "Sigmage flag threshold");
    cmd->add_option("--multiplier", f.multiplier, "Regression band width in residual SEs");
}

void add_input(CLI::App* cmd, Flags& f) {
    cmd->add_option("--process", f.process, "Simulated process: bm_drift, integrated_bm, sbm");
    cmd->add_option("--drift", f.drift, "linear or quadratic (bm_drift)");
    cmd->add_option("--sigma", f.sigma, "Brownian scale");
    cmd->add_option("--n", f.n, "Node count");
    cmd->add_option("--t-start", f.tStart, "First grid time");
    cmd->add_option("--t-stop", f.tStop, "Last grid time");
    cmd->add_option("--t-count", f.tCount, "Number of grid times");
    cmd->add_option("--load", f.load, "Directory of .tsv edge lists");
    cmd->add_option("--distances", f.distances, "Precomputed distance matrix CSV");
    cmd->add_option("--partition", f.partition, "node,community CSV for per-community runs");
}

PipelineConfig build_config(const Flags& f) {
    if (!f.config.empty()) {
        PipelineConfig cfg = parse_config(read_text_file(f.config));
        return cfg;
    }
    nlohmann::json j = nlohmann::json::object();
    if (!f.load.empty()) {
        j["input"] = {{"load", f.load}};
    } else if (!f.distances.empty()) {
        j["input"] = {{"distances", f.distances}};
    } else if (!f.process.empty()) {
        nlohmann::json p = {{"process", f.process}};
        if (!f.drift.empty()) p["drift"] = f.drift;
        if (f.sigma) p["sigma"] = *f.sigma;
        p["n"] = f.n.value_or(2000);
        p["times"] = {{"start", f.tStart.value_or(1.0)}, {"stop", f.tStop.value_or(30.0)}, {"count", f.tCount.value_or(30)}};
        j["input"] = {{"simulate", p}};
    }
    if (f.d) j["d"] = *f.d;
    if (!f.c.empty()) {
        if (f.c == "auto") j["c"] = "auto";
        else {
            try {
                j["c"] = std::stoi(f.c);
            } catch (const std::exception&) {
                throw ConfigError("--c must be an integer or 'auto'");
            }
        }
    }
    if (f.cThreshold) j["cThreshold"] = *f.cThreshold;
    if (f.unscaled) j["scaled"] = false;
    if (f.refine) j["refine"] = true;
    if (f.isomapK) j["isomapK"] = *f.isomapK;
    nlohmann::json cp = nlohmann::json::object();
    if (f.window) cp["window"] = *f.window;
    if (f.threshold) cp["threshold"] = *f.threshold;
    if (f.multiplier) cp["multiplier"] = *f.multiplier;
    if (!cp.empty()) j["changepoint"] = cp;
    if (f.seed) j["seed"] = *f.seed;
    if (!f.out.empty()) j["outputDir"] = f.out;
    if (!f.partition.empty()) j["partition"] = f.partition;
    return parse_config(j.dump());
}

std::string out_dir(const Flags& f) { return f.out.empty() ? std::string("netmirror_out") : f.out; }

void print_flags(const std::string& name, const std::vector<double>& times) {
    std::cout << name << " flags:";
    if (times.empty()) std::cout << " none";
    for (double t : times) std::cout << ' ' << format_number(t);
    std::cout << '\n';
}

int report_failure(const std::string& stage, ErrorKind kind, const std::string& message, const std::string& dir) {
    const std::string doc = error_json(stage, kind, message);
    std::cerr << doc;
    std::error_code ec;
    if (!dir.empty() && fs::is_directory(dir, ec)) {
        try {
            write_text_file((fs::path(dir) / "error.json").string(), doc);
        } catch (const Error&) {
        }
    }
    return static_cast<int>(kind);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Euclidean mirrors of network time series"};
    app.require_subcommand(1);
    Flags f;

    auto* simulateCmd = app.add_subcommand("simulate", "Simulate latent trajectories and RDPG snapshots");
    auto* embedCmd = app.add_subcommand("embed", "Adjacency spectral embedding of every snapshot");
    auto* distancesCmd = app.add_subcommand("distances", "Pairwise distance matrix from embeddings");
    auto* mirrorCmd = app.add_subcommand("mirror", "CMDS mirror from a distance matrix");
    auto* isomapCmd = app.add_subcommand("isomap", "1-D ISOMAP trace from a mirror");
    auto* changepointCmd = app.add_subcommand("changepoint", "Sigmage and regression-band scans");
    auto* pipelineCmd = app.add_subcommand("pipeline", "Run the whole pipeline");
    auto* bootstrapCmd = app.add_subcommand("bootstrap", "Bootstrap convergence study");

    for (auto* cmd : {simulateCmd, embedCmd, distancesCmd, mirrorCmd, isomapCmd, changepointCmd, pipelineCmd, bootstrapCmd})
        add_common(cmd, f);
    for (auto* cmd : {simulateCmd, embedCmd, distancesCmd, mirrorCmd, isomapCmd, changepointCmd, pipelineCmd, bootstrapCmd})
        add_model(cmd, f);
    for (auto* cmd : {simulateCmd, embedCmd, pipelineCmd, bootstrapCmd}) add_input(cmd, f);
    distancesCmd->add_option("--embeddings", f.embeddings, "Directory of embedding CSV + JSON files")->required();
    mirrorCmd->add_option("--distances", f.distances, "Distance matrix CSV")->required();
    isomapCmd->add_option("--mirror", f.mirror, "Mirror CSV")->required();
    changepointCmd->add_option("--isomap", f.isomap, "ISOMAP trace CSV")->required();
    bootstrapCmd->add_option("--ns", f.ns, "Bootstrap sample sizes")->delimiter(',');
    bootstrapCmd->add_option("--replicates", f.replicates, "Replicates per sample size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_failure("arguments", ErrorKind::Config, e.what(), "");
    }

    set_thread_count(f.threads);
    std::string stage = "config";
    std::string dir = out_dir(f);
    try {
        if (*simulateCmd) {
            PipelineConfig cfg = build_config(f);
            dir = cfg.outputDir;
            if (cfg.input != InputKind::Simulate) throw ConfigError("simulate needs a process specification");
            stage = "simulate";
            fs::create_directories(dir);
            Simulation sim = simulate(cfg.process, *cfg.seed);
            write_trajectory_archive((fs::path(dir) / "latent").string(), sim.latents, *cfg.seed, "");
            write_graph_directory((fs::path(dir) / "graphs").string(), sim.graphs);
            std::cout << "simulated " << sim.graphs.size() << " snapshots on " << sim.latents.nodes()
                      << " nodes; clamped inner products: " << sim.clamped << '\n';
        } else if (*embedCmd) {
            PipelineConfig cfg = build_config(f);
            dir = cfg.outputDir;
            if (cfg.input != InputKind::Load) throw ConfigError("embed needs --load DIR");
            stage = "embed";
            std::vector<std::string> warnings;
            const auto embeddings = embed_all(load_graph_directory(cfg.loadDir), cfg.d, cfg.scaled, &warnings);
            write_embedding_directory((fs::path(dir) / "embeddings").string(), embeddings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
        } else if (*distancesCmd) {
            stage = "distances";
            fs::create_directories(dir);
            const auto embeddings = load_embedding_directory(f.embeddings);
            write_distance_matrix((fs::path(dir) / "distances.csv").string(), distance_matrix(embeddings, f.refine));
        } else if (*mirrorCmd) {
            stage = "mirror";
            fs::create_directories(dir);
            std::optional<int> c;
            if (!f.c.empty() && f.c != "auto") c = std::stoi(f.c);
            std::vector<std::string> warnings;
            const auto ms = build_mirror(read_distance_matrix(f.distances), c, f.cThreshold.value_or(0.95), &warnings);
            write_mirror((fs::path(dir) / "mirror.csv").string(), ms.mirror);
            write_scree((fs::path(dir) / "scree.csv").string(), ms.mirror.scree);
            std::cout << "mirror dimension c=" << ms.choice.c << '\n';
            for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
        } else if (*isomapCmd) {
            stage = "isomap";
            fs::create_directories(dir);
            write_isomap((fs::path(dir) / "isomap.csv").string(), isomap_1d(read_mirror(f.mirror), f.isomapK.value_or(5)));
        } else if (*changepointCmd) {
            stage = "changepoint";
            fs::create_directories(dir);
            const auto trace = read_isomap(f.isomap);
            const auto sig = sigmage_scan(trace, f.window.value_or(5), f.threshold.value_or(5.0));
            const auto reg = regression_band_scan(trace, f.window.value_or(5), f.multiplier.value_or(5.0));
            write_text_file((fs::path(dir) / "sigmage.json").string(), sigmage_report_json(sig));
            write_text_file((fs::path(dir) / "regression.json").string(), regression_report_json(reg));
            std::vector<double> a, b;
            for (const auto& e : sig.perTime)
                if (e.flag) a.push_back(e.time);
            for (const auto& e : reg.perTime)
                if (e.flag) b.push_back(e.time);
            print_flags("sigmage", a);
            print_flags("regression", b);
        } else if (*pipelineCmd) {
            PipelineConfig cfg = build_config(f);
            dir = cfg.outputDir;
            stage = "pipeline";
            run_pipeline(cfg);
            const auto manifest = nlohmann::json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));
            std::cout << "mirror dimension c=" << manifest.at("c").get<int>() << '\n';
            if (manifest.at("flaggedTimes").contains("sigmage"))
                print_flags("sigmage", manifest.at("flaggedTimes").at("sigmage").get<std::vector<double>>());
            if (manifest.at("flaggedTimes").contains("regression"))
                print_flags("regression", manifest.at("flaggedTimes").at("regression").get<std::vector<double>>());
        } else if (*bootstrapCmd) {
            PipelineConfig cfg = build_config(f);
            dir = cfg.outputDir;
            stage = "bootstrap";
            BootstrapOptions opts;
            if (!f.ns.empty()) opts.sampleSizes = f.ns;
            opts.replicates = f.replicates;
            const auto result = run_bootstrap(cfg, opts);
            for (const auto& [ns, err] : result.medianError)
                std::cout << "n_s=" << ns << " median aligned error " << format_number(err) << '\n';
        }
    } catch (const StageError& e) {
        return report_failure(e.stage(), e.kind(), e.what(), dir);
    } catch (const Error& e) {
        return report_failure(stage, e.kind(), e.what(), dir);
    } catch (const std::invalid_argument& e) {
        return report_failure(stage, ErrorKind::Config, e.what(), dir);
    } catch (const std::domain_error& e) {
        return report_failure(stage, ErrorKind::Config, e.what(), dir);
    } catch (const fs::filesystem_error& e) {
        return report_failure(stage, ErrorKind::Data, e.what(), dir);
    }
    return 0;
}
