#pragma once

#include "netmirror/embed.hpp"

namespace netmirror {

/// Largest singular value.
double spectral_norm(const Matrix& M);

struct ProcrustesResult {
    Matrix rotation;
    bool degenerate = false;  // zero cross-product; rotation is the identity
};

/// Frobenius-optimal orthogonal W minimizing |Xt - Xs W|_F: W = U V^T for
/// the SVD Xs^T Xt = U S V^T.
ProcrustesResult procrustes_rotation(const Matrix& Xt, const Matrix& Xs);

struct AlignmentResult {
    Matrix rotation;
    double distance = 0.0;           // (1/sqrt n) |Xt - Xs W|_2
    double frobeniusDistance = 0.0;  // (1/sqrt n) |Xt - Xs W|_F
};

struct RefineOptions {
    int maxSweeps = 200;
    double tolerance = 1e-10;
};

/// Estimated maximum-directional-variation distance between two embeddings.
/// W starts at the Procrustes rotation; with `refine` a greedy Givens-plane
/// search lowers the spectral norm further. Refinement runs from both
/// argument orders and keeps the smaller value, so the result is symmetric.
AlignmentResult dmv_hat(const Matrix& Xt, const Matrix& Xs, bool refine, const RefineOptions& opts = {});
AlignmentResult dmv_hat(const EmbeddingMatrix& Xt, const EmbeddingMatrix& Xs, bool refine,
                        const RefineOptions& opts = {});

/// Spectral norm of sin(Theta) between the column spaces of two n x c
/// matrices with orthonormal columns (checked to 1e-8).
double sin_theta_norm(const Matrix& U, const Matrix& V);

}  // namespace netmirror
