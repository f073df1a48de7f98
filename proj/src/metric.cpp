#include "netmirror/metric.hpp"

#include "netmirror/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace netmirror {

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    if (!M.allFinite()) throw DataError("spectral_norm: non-finite entries");
    const Matrix gram = M.rows() >= M.cols() ? Matrix(M.transpose() * M) : Matrix(M * M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

ProcrustesResult procrustes_rotation(const Matrix& Xt, const Matrix& Xs) {
    if (Xt.rows() != Xs.rows() || Xt.cols() != Xs.cols())
        throw DataError("procrustes_rotation: shape mismatch");
    const Eigen::Index d = Xt.cols();
    const Matrix cross = Xs.transpose() * Xt;
    if (cross.cwiseAbs().maxCoeff() == 0.0) return {Matrix::Identity(d, d), true};
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU() * svd.matrixV().transpose(), false};
}

namespace {

// Spectral norm of Xt - Xs W through the d x d Gram blocks.
struct GramObjective {
    Matrix tt, ts, ss;  // Xt^T Xt, Xt^T Xs, Xs^T Xs

    double operator()(const Matrix& W) const {
        const Matrix tsw = ts * W;
        Matrix g = tt - tsw - tsw.transpose() + W.transpose() * ss * W;
        g = 0.5 * (g + g.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
        return std::max(0.0, es.eigenvalues().maxCoeff());
    }
};

// Right singular vectors of X, descending, signs fixed on X V. Searching in
// this frame makes the Givens planes independent of the input basis.
Matrix canonical_frame(const Matrix& X) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(X.transpose() * X);
    Matrix V = es.eigenvectors().rowwise().reverse();
    const Matrix C = X * V;
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        Eigen::Index arg = 0;
        C.col(j).cwiseAbs().maxCoeff(&arg);
        if (C(arg, j) < 0) V.col(j) *= -1.0;
    }
    return V;
}

Matrix givens_refine(const Matrix& Xt, const Matrix& Xs, const Matrix& start, const RefineOptions& opts) {
    const Eigen::Index d = start.cols();
    if (d < 2) return start;
    const Matrix Vt = canonical_frame(Xt), Vs = canonical_frame(Xs);
    const Matrix Ct = Xt * Vt, Cs = Xs * Vs;
    Matrix W = Vs.transpose() * start * Vt;
    GramObjective f{Ct.transpose() * Ct, Ct.transpose() * Cs, Cs.transpose() * Cs};
    double best = f(W);
    double step = 0.1;
    for (int sweep = 0; sweep < opts.maxSweeps && step >= opts.tolerance; ++sweep) {
        bool improved = false;
        for (Eigen::Index p = 0; p < d; ++p) {
            for (Eigen::Index q = p + 1; q < d; ++q) {
                for (double angle : {step, -step}) {
                    Matrix trial = W;
                    const double c = std::cos(angle), s = std::sin(angle);
                    trial.col(p) = c * W.col(p) + s * W.col(q);
                    trial.col(q) = -s * W.col(p) + c * W.col(q);
                    const double value = f(trial);
                    if (value < best) {
                        best = value;
                        W = std::move(trial);
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return Vs * W * Vt.transpose();
}

AlignmentResult evaluate(const Matrix& Xt, const Matrix& Xs, const Matrix& W) {
    const Matrix residual = Xt - Xs * W;
    const double scale = 1.0 / std::sqrt(static_cast<double>(Xt.rows()));
    return {W, scale * spectral_norm(residual), scale * residual.norm()};
}

}  // namespace

AlignmentResult dmv_hat(const Matrix& Xt, const Matrix& Xs, bool refine, const RefineOptions& opts) {
    if (Xt.rows() != Xs.rows() || Xt.cols() != Xs.cols())
        throw DataError("dmv_hat: embeddings have different shapes (" + std::to_string(Xt.rows()) + "x" +
                        std::to_string(Xt.cols()) + " vs " + std::to_string(Xs.rows()) + "x" +
                        std::to_string(Xs.cols()) + ")");
    if (Xt.rows() == 0) throw DataError("dmv_hat: empty embeddings");
    const AlignmentResult plain = evaluate(Xt, Xs, procrustes_rotation(Xt, Xs).rotation);
    if (!refine || Xt.cols() < 2) return plain;

    AlignmentResult forward = evaluate(Xt, Xs, givens_refine(Xt, Xs, plain.rotation, opts));
    // Reverse orientation: |Xs - Xt V|_2 = |Xt - Xs V^T|_2.
    const Matrix reverseStart = procrustes_rotation(Xs, Xt).rotation;
    const AlignmentResult reverse = evaluate(Xs, Xt, givens_refine(Xs, Xt, reverseStart, opts));

    AlignmentResult best = plain;
    if (forward.distance < best.distance) best = forward;
    if (reverse.distance < best.distance) {
        best.distance = reverse.distance;
        best.rotation = reverse.rotation.transpose();
        best.frobeniusDistance = reverse.frobeniusDistance;
    }
    return best;
}

AlignmentResult dmv_hat(const EmbeddingMatrix& Xt, const EmbeddingMatrix& Xs, bool refine, const RefineOptions& opts) {
    return dmv_hat(Xt.rows, Xs.rows, refine, opts);
}

double sin_theta_norm(const Matrix& U, const Matrix& V) {
    if (U.rows() != V.rows() || U.cols() != V.cols()) throw DataError("sin_theta_norm: shape mismatch");
    const Eigen::Index c = U.cols();
    const Matrix I = Matrix::Identity(c, c);
    if ((U.transpose() * U - I).cwiseAbs().maxCoeff() > 1e-8 ||
        (V.transpose() * V - I).cwiseAbs().maxCoeff() > 1e-8)
        throw DataError("sin_theta_norm: columns are not orthonormal");
    // |(I - U U^T) V|_2 avoids the cancellation in sqrt(1 - cos^2).
    return std::min(1.0, spectral_norm(V - U * (U.transpose() * V)));
}

}  // namespace netmirror
