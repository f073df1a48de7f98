#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netmirror {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using Edge = std::pair<int, int>;

/// Undirected simple graph at one time point. Edges are stored with i < j,
/// sorted lexicographically.
struct GraphSnapshot {
    double time = 0.0;
    int n = 0;
    std::vector<Edge> edges;

    /// Throws DataError on self-loops, duplicates, out-of-range or unsorted edges.
    void validate() const;
};

/// Builds a snapshot from an arbitrary list of undirected pairs; normalizes
/// orientation and order. Self-loops and duplicates are rejected.
GraphSnapshot make_graph(double time, int n, std::vector<Edge> edges);

/// Latent positions of all nodes at one time; row i belongs to node i.
struct LatentMatrix {
    double time = 0.0;
    Matrix rows;
};

struct SbmSpec {
    Matrix blockMatrix;
    std::vector<int> blockSizes;
};

/// Inner products further than this outside [0, 1] are rejected; closer ones
/// are clamped.
inline constexpr double kClampTolerance = 0.05;

struct ClampStats {
    std::size_t clamped = 0;
    double worstViolation = 0.0;
};

/// Samples an RDPG: pair i<j is an edge with probability <X_i, X_j>.
/// Row i draws from its own substream so the result is independent of the
/// thread count.
GraphSnapshot sample_rdpg(const LatentMatrix& X, std::uint64_t seed, ClampStats* stats = nullptr);

/// Time-varying 2-block connectivity matrix: piecewise-linear path
/// B1 -> B2 -> B3 -> B1 over t in [0, 3]. B2 (t = 1) has rank one.
Matrix sbm_block_matrix_at(double t);

/// Factorizes B = V diag(lambda) V^T (eigenvalues descending, each
/// eigenvector's largest-magnitude entry positive) and assigns every node of
/// block k the latent vector row k of V diag(sqrt(lambda)). The latent
/// dimension is `dim` (default: number of blocks); columns for zero
/// eigenvalues, and any padding, are zero.
LatentMatrix sbm_latents(const SbmSpec& spec, int dim = -1, double time = 0.0);

/// Induced subgraph on `nodes`, relabelled 0..|nodes|-1 in the given order.
GraphSnapshot induced_subgraph(const GraphSnapshot& g, const std::vector<int>& nodes);

/// Edge-list text format: "# t=<time> n=<count>" header, one "i\tj" line
/// per edge.
std::string format_edge_list(const GraphSnapshot& g);
GraphSnapshot parse_edge_list(const std::string& text);

void write_edge_list(const std::string& path, const GraphSnapshot& g);
GraphSnapshot read_edge_list(const std::string& path);

}  // namespace netmirror
