#pragma once

#include "netmirror/changepoint.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/graphgen.hpp"
#include "netmirror/lpp.hpp"
#include "netmirror/mirror.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace netmirror {

inline constexpr const char* kVersion = "0.3.0";

/// Latent process to simulate. `kind` is one of bm_drift, integrated_bm,
/// sbm or archive (a trajectory archive on disk).
struct ProcessSpec {
    std::string kind = "bm_drift";
    TimeGrid grid;
    std::size_t n = 0;
    DriftSpec drift;                 // bm_drift
    double ibmSlope = 1.0;           // integrated_bm: gamma(t) = (slope t + offset) v
    double ibmOffset = 0.0;
    Vector ibmDirection = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    double ibmSigma = 0.001;
    std::vector<int> blockSizes;     // sbm; default two equal blocks
    std::string archivePath;         // archive
};

struct ChangepointConfig {
    int window = 5;
    double threshold = 5.0;
    double multiplier = 5.0;
};

enum class InputKind { Simulate, Load, Distances };

struct PipelineConfig {
    InputKind input = InputKind::Simulate;
    ProcessSpec process;
    std::string loadDir;        // edge-list directory
    std::string distancesPath;  // precomputed distance matrix CSV
    int d = 2;
    std::optional<int> c;       // empty: choose from the scree
    double cThreshold = 0.95;
    bool scaled = true;
    bool refine = false;
    int isomapK = 5;
    ChangepointConfig changepoint;
    std::optional<std::uint64_t> seed;
    std::string outputDir = "netmirror_out";
    std::string partition;      // optional node,community CSV

    void validate() const;
};

/// Parses a JSON configuration document. Missing fields take the defaults
/// above; unknown fields are rejected.
PipelineConfig parse_config(const std::string& json);

/// Canonical JSON echo of a configuration with every default made explicit.
std::string config_to_json(const PipelineConfig& config);

/// Error annotated with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, ErrorKind kind, const std::string& what)
        : Error(kind, what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// JSON document {"error": {"stage", "kind", "exitCode", "message"}}.
std::string error_json(const std::string& stage, ErrorKind kind, const std::string& message);

// ---- stages ----

struct Simulation {
    LatentTrajectorySet latents;
    std::vector<GraphSnapshot> graphs;
    std::size_t clamped = 0;
};

/// Latent trajectories for a process spec (seeded), without graphs.
LatentTrajectorySet simulate_latents(const ProcessSpec& spec, std::uint64_t seed);

/// Seed of the graph sampled at grid index i for a given graph seed base.
std::uint64_t graph_seed(std::uint64_t base, std::size_t i);

/// Samples one RDPG per grid time.
std::vector<GraphSnapshot> sample_graphs(const LatentTrajectorySet& latents, std::uint64_t base,
                                         std::size_t* clamped = nullptr);

Simulation simulate(const ProcessSpec& spec, std::uint64_t seed);

/// Reads every *.tsv edge list of a directory, ordered by time.
std::vector<GraphSnapshot> load_graph_directory(const std::string& dir);
void write_graph_directory(const std::string& dir, const std::vector<GraphSnapshot>& graphs);

std::vector<EmbeddingMatrix> embed_all(const std::vector<GraphSnapshot>& graphs, int d, bool scaled,
                                       std::vector<std::string>* warnings);
void write_embedding_directory(const std::string& dir, const std::vector<EmbeddingMatrix>& embeddings);
std::vector<EmbeddingMatrix> load_embedding_directory(const std::string& dir);

struct MirrorStage {
    MirrorCurve mirror;
    DimensionChoice choice;  // massProfile empty when c was explicit
};

/// CMDS with explicit or scree-selected dimension, clamped to m - 1.
MirrorStage build_mirror(const DistanceMatrix& D, std::optional<int> c, double threshold,
                         std::vector<std::string>* warnings);

struct PipelineResult {
    std::vector<EmbeddingMatrix> embeddings;
    DistanceMatrix distances;
    MirrorStage mirror;
    IsomapTrace trace;
    std::optional<SigmageReport> sigmage;
    std::optional<RegressionBandReport> regression;
    double stressValue = 0.0;
    std::vector<std::string> warnings;
};

/// Embedding -> distances -> CMDS -> ISOMAP -> change-point scans, in memory.
PipelineResult run_graphs(const std::vector<GraphSnapshot>& graphs, const PipelineConfig& config);

/// Distances -> CMDS -> ISOMAP -> change-point scans.
PipelineResult run_distances(const DistanceMatrix& D, const PipelineConfig& config);

/// Full run writing every artifact and manifest.json into config.outputDir.
/// Stage failures surface as StageError.
void run_pipeline(const PipelineConfig& config);

struct BootstrapOptions {
    std::vector<std::size_t> sampleSizes{250, 500, 1000, 2000};
    int replicates = 10;
    /// Test hook: keep every source row once, in order, and reuse the source
    /// graph seeds, so each replicate reproduces the source run exactly.
    bool identityResample = false;
};

struct BootstrapReplicate {
    std::size_t sampleSize = 0;
    int replicate = 0;
    IsomapTrace trace;
    double error = 0.0;  // RMS distance to the source trace after sign/shift alignment
    std::vector<double> sigmageFlags;
};

struct BootstrapResult {
    IsomapTrace source;
    std::vector<BootstrapReplicate> replicates;
    std::vector<std::pair<std::size_t, double>> medianError;  // per sample size
};

/// Trace alignment error: min over sign of the RMS of the centred difference.
double aligned_trace_error(const Vector& reference, const Vector& candidate);

/// Resamples latent rows of the configured process, samples graphs and runs
/// the pipeline per replicate. Writes artifacts when `write` is set.
BootstrapResult run_bootstrap(const PipelineConfig& config, const BootstrapOptions& options, bool write = true);

}  // namespace netmirror
