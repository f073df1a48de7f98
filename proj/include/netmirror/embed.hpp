#pragma once

#include "netmirror/graphgen.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace netmirror {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// n x d spectral embedding of one snapshot.
///   scaled:   rows = U S^{1/2}  (column j has squared norm eigenvalue j)
///   unscaled: rows = U          (orthonormal columns)
struct EmbeddingMatrix {
    double time = 0.0;
    Matrix rows;
    Vector eigenvalues;
    bool scaled = true;
};

enum class RankDeficiencyPolicy { Throw, ZeroPad };

struct AseOptions {
    /// Dense symmetric solver up to this size, Lanczos above it.
    int denseThreshold = 1024;
    double lanczosTolerance = 1e-10;
    RankDeficiencyPolicy onRankDeficient = RankDeficiencyPolicy::Throw;
};

struct Eigenpairs {
    Vector values;   // descending (algebraic)
    Matrix vectors;  // n x d, sign-fixed
};

SparseMatrix adjacency_matrix(const GraphSnapshot& g);

/// Top-d algebraic eigenpairs of a symmetric matrix given as a mat-vec.
/// Lanczos with full reorthogonalization from a fixed start vector.
Eigenpairs lanczos_top_eigenpairs(const std::function<void(const Vector&, Vector&)>& matvec, Eigen::Index n,
                                  int d, double tol = 1e-10);

/// Top-d eigenpairs; dense solve for n <= denseThreshold.
Eigenpairs top_eigenpairs(const SparseMatrix& A, int d, const AseOptions& opts = {});
Eigenpairs top_eigenpairs(const Matrix& A, int d, const AseOptions& opts = {});

/// Flips each column so its largest-magnitude entry (lowest index on ties)
/// is positive.
void fix_column_signs(Matrix& vectors);

/// Adjacency spectral embedding with dimension d. Throws RankDeficiencyError
/// if any of the top d eigenvalues is <= 0, unless the policy is ZeroPad, in
/// which case those columns are zeroed and `warnings` receives a note.
EmbeddingMatrix ase(const GraphSnapshot& g, int d, bool scaled, const AseOptions& opts = {},
                    std::vector<std::string>* warnings = nullptr);

/// Same embedding applied to an explicit symmetric matrix.
EmbeddingMatrix ase_from_matrix(const Matrix& A, int d, bool scaled, double time = 0.0,
                                const AseOptions& opts = {}, std::vector<std::string>* warnings = nullptr);

/// Embedding CSV (node,x1..xd) and JSON sidecar (time, eigenvalues, scaled).
void write_embedding(const std::string& csvPath, const std::string& sidecarPath, const EmbeddingMatrix& e);
EmbeddingMatrix read_embedding(const std::string& csvPath, const std::string& sidecarPath);

}  // namespace netmirror
