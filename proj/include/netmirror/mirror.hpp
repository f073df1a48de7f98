#pragma once

#include "netmirror/embed.hpp"
#include "netmirror/lpp.hpp"

#include <string>
#include <vector>

namespace netmirror {

/// Symmetric pairwise-distance matrix over a time grid, zero diagonal.
struct DistanceMatrix {
    std::vector<double> times;
    Matrix values;
};

/// Classical MDS output: row i is the mirror point at times[i].
struct MirrorCurve {
    std::vector<double> times;
    Matrix coords;   // m x c
    Vector scree;    // all m eigenvalues of the double-centred matrix, descending
    int c = 0;
    std::vector<std::string> warnings;
};

struct IsomapTrace {
    std::vector<double> times;
    Vector values;
};

/// Pairwise dmv_hat distances; each unordered pair is evaluated once.
DistanceMatrix distance_matrix(const std::vector<EmbeddingMatrix>& embeddings, bool refine);

/// Same, from raw n x d matrices (latent positions or embeddings).
DistanceMatrix distance_matrix(const std::vector<Matrix>& matrices, const std::vector<double>& times, bool refine);

/// CMDS: B = -1/2 P D^(2) P, coords = top-c eigenvectors scaled by
/// sqrt(eigenvalue). Columns whose eigenvalue is not positive are zeroed.
MirrorCurve cmds(const DistanceMatrix& D, int c);

/// 1-D ISOMAP: symmetric k-NN graph on the mirror points (MST edges added
/// when disconnected), all-pairs geodesics, then 1-D CMDS. The trace is
/// flipped so it does not decrease between its first two points.
IsomapTrace isomap_1d(const MirrorCurve& M, int k = 5);

/// Sum_{i,j} |D_ij^2 - |v_i - v_j|^2|^2 dt_i dt_j with backward differences
/// dt_i = t_i - t_{i-1} and dt_1 = t_2 - t_1.
double stress(const DistanceMatrix& D, const Matrix& coords);

struct DimensionChoice {
    int c = 0;
    std::vector<double> massProfile;  // cumulative positive-eigenvalue mass
};

/// Smallest c whose cumulative positive-eigenvalue mass reaches `threshold`.
DimensionChoice select_dimension(const Vector& scree, double threshold = 0.95);

// File formats.
void write_distance_matrix(const std::string& path, const DistanceMatrix& D);
DistanceMatrix read_distance_matrix(const std::string& path);
void write_mirror(const std::string& path, const MirrorCurve& M);
MirrorCurve read_mirror(const std::string& path);
void write_scree(const std::string& path, const Vector& scree);
void write_isomap(const std::string& path, const IsomapTrace& trace);
IsomapTrace read_isomap(const std::string& path);

}  // namespace netmirror
