#include "netmirror/embed.hpp"

#include "netmirror/errors.hpp"
#include "netmirror/io.hpp"
#include "netmirror/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netmirror {

SparseMatrix adjacency_matrix(const GraphSnapshot& g) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * g.edges.size());
    for (const auto& [i, j] : g.edges) {
        triplets.emplace_back(i, j, 1.0);
        triplets.emplace_back(j, i, 1.0);
    }
    SparseMatrix A(g.n, g.n);
    A.setFromTriplets(triplets.begin(), triplets.end());
    return A;
}

void fix_column_signs(Matrix& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, k));
            if (a > best) {
                best = a;
                arg = r;
            }
        }
        if (vectors.rows() > 0 && vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
    }
}

namespace {

constexpr std::uint64_t kLanczosSeed = 0x6c616e637a6f73ULL;

Eigenpairs from_dense_solver(const Matrix& A, int d) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    const Eigen::Index n = A.rows();
    Eigenpairs out;
    out.values = es.eigenvalues().tail(d).reverse();
    out.vectors = es.eigenvectors().rightCols(d).rowwise().reverse();
    (void)n;
    fix_column_signs(out.vectors);
    return out;
}

void check_dimension(Eigen::Index n, int d) {
    if (d < 1 || d > n)
        throw ConfigError("embedding dimension " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
}

}  // namespace

Eigenpairs lanczos_top_eigenpairs(const std::function<void(const Vector&, Vector&)>& matvec, Eigen::Index n,
                                  int d, double tol) {
    check_dimension(n, d);
    Rng rng(kLanczosSeed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_unit = [&](const Matrix& Q, Eigen::Index k) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Vector q(n);
            for (Eigen::Index i = 0; i < n; ++i) q(i) = gauss(rng);
            for (int pass = 0; pass < 2 && k > 0; ++pass) q -= Q.leftCols(k) * (Q.leftCols(k).transpose() * q);
            const double nq = q.norm();
            if (nq > 1e-8) return Vector(q / nq);
        }
        throw NumericalError("Lanczos could not extend the Krylov basis");
    };

    Matrix Q(n, std::min<Eigen::Index>(n, 64));
    std::vector<double> alpha, beta;  // beta[k] couples q_k and q_{k+1}
    Q.col(0) = random_unit(Q, 0);
    Vector w(n);
    Eigen::Index k = 0;  // number of basis vectors in use
    Vector ritzValues;
    Matrix ritzCoeffs;

    for (;;) {
        matvec(Q.col(k), w);
        const double a = Q.col(k).dot(w);
        alpha.push_back(a);
        w -= a * Q.col(k);
        if (k > 0) w -= beta[static_cast<std::size_t>(k - 1)] * Q.col(k - 1);
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
        double b = w.norm();
        ++k;

        const bool full = (k == n);
        const bool check = full || (k >= d && (k % 5 == 0 || k == d));
        if (check) {
            Vector diag = Eigen::Map<Vector>(alpha.data(), k);
            Vector sub = k > 1 ? Vector(Eigen::Map<Vector>(beta.data(), k - 1)) : Vector();
            Eigen::SelfAdjointEigenSolver<Matrix> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (tri.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
            ritzValues = tri.eigenvalues().tail(d).reverse();
            ritzCoeffs = tri.eigenvectors().rightCols(d).rowwise().reverse();
            const double scale = std::max(1.0, tri.eigenvalues().cwiseAbs().maxCoeff());
            bool converged = true;
            for (int i = 0; i < d && !full; ++i)
                if (std::abs(b * ritzCoeffs(k - 1, i)) > tol * scale) converged = false;
            if (converged || full) break;
        }

        if (k >= Q.cols()) Q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * Q.cols()));
        if (b <= 1e-10 * std::max(1.0, std::abs(a))) {
            // Invariant subspace reached: continue from a fresh orthogonal direction.
            Q.col(k) = random_unit(Q, k);
            b = 0.0;
        } else {
            Q.col(k) = w / b;
        }
        beta.push_back(b);
    }

    Eigenpairs out;
    out.values = ritzValues;
    out.vectors = Q.leftCols(k) * ritzCoeffs;
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) out.vectors.col(c).normalize();
    fix_column_signs(out.vectors);
    return out;
}

Eigenpairs top_eigenpairs(const SparseMatrix& A, int d, const AseOptions& opts) {
    check_dimension(A.rows(), d);
    if (A.rows() <= opts.denseThreshold) return from_dense_solver(Matrix(A), d);
    return lanczos_top_eigenpairs([&A](const Vector& x, Vector& y) { y.noalias() = A * x; }, A.rows(), d,
                                  opts.lanczosTolerance);
}

Eigenpairs top_eigenpairs(const Matrix& A, int d, const AseOptions& opts) {
    check_dimension(A.rows(), d);
    if (A.rows() != A.cols()) throw DataError("eigensolver input must be square");
    if (A.rows() <= opts.denseThreshold) return from_dense_solver(A, d);
    return lanczos_top_eigenpairs([&A](const Vector& x, Vector& y) { y.noalias() = A.selfadjointView<Eigen::Lower>() * x; },
                                  A.rows(), d, opts.lanczosTolerance);
}

namespace {

EmbeddingMatrix finish_embedding(Eigenpairs pairs, int d, bool scaled, double time, const AseOptions& opts,
                                 std::vector<std::string>* warnings) {
    std::vector<int> deficient;
    for (int j = 0; j < d; ++j)
        if (!(pairs.values(j) > 0.0)) deficient.push_back(j);
    if (!deficient.empty()) {
        std::ostringstream msg;
        msg << "adjacency matrix at t=" << format_number(time) << " has " << deficient.size()
            << " non-positive eigenvalue(s) among the top " << d << ":";
        for (int j = 0; j < d; ++j) msg << ' ' << format_number(pairs.values(j));
        if (opts.onRankDeficient == RankDeficiencyPolicy::Throw) {
            throw RankDeficiencyError(msg.str(), std::vector<double>(pairs.values.data(), pairs.values.data() + d));
        }
        if (warnings != nullptr) warnings->push_back(msg.str() + "; zero-padding deficient columns");
    }

    EmbeddingMatrix e;
    e.time = time;
    e.scaled = scaled;
    e.eigenvalues = pairs.values;
    e.rows = std::move(pairs.vectors);
    for (int j : deficient) e.rows.col(j).setZero();
    if (scaled) {
        for (int j = 0; j < d; ++j)
            if (pairs.values(j) > 0.0) e.rows.col(j) *= std::sqrt(pairs.values(j));
    }
    return e;
}

}  // namespace

EmbeddingMatrix ase(const GraphSnapshot& g, int d, bool scaled, const AseOptions& opts,
                    std::vector<std::string>* warnings) {
    const SparseMatrix A = adjacency_matrix(g);
    return finish_embedding(top_eigenpairs(A, d, opts), d, scaled, g.time, opts, warnings);
}

EmbeddingMatrix ase_from_matrix(const Matrix& A, int d, bool scaled, double time, const AseOptions& opts,
                                std::vector<std::string>* warnings) {
    return finish_embedding(top_eigenpairs(A, d, opts), d, scaled, time, opts, warnings);
}

void write_embedding(const std::string& csvPath, const std::string& sidecarPath, const EmbeddingMatrix& e) {
    std::string body = "node";
    for (Eigen::Index k = 1; k <= e.rows.cols(); ++k) body += ",x" + std::to_string(k);
    body += "\n";
    for (Eigen::Index r = 0; r < e.rows.rows(); ++r) {
        body += std::to_string(r);
        for (Eigen::Index k = 0; k < e.rows.cols(); ++k) body += "," + format_number(e.rows(r, k));
        body += "\n";
    }
    write_text_file(csvPath, body);

    nlohmann::ordered_json side;
    side["time"] = e.time;
    side["eigenvalues"] = std::vector<double>(e.eigenvalues.data(), e.eigenvalues.data() + e.eigenvalues.size());
    side["scaled"] = e.scaled;
    write_text_file(sidecarPath, side.dump(2) + "\n");
}

EmbeddingMatrix read_embedding(const std::string& csvPath, const std::string& sidecarPath) {
    EmbeddingMatrix e;
    try {
        const auto side = nlohmann::json::parse(read_text_file(sidecarPath));
        e.time = side.at("time").get<double>();
        e.scaled = side.at("scaled").get<bool>();
        const auto ev = side.at("eigenvalues").get<std::vector<double>>();
        e.eigenvalues = Eigen::Map<const Vector>(ev.data(), static_cast<Eigen::Index>(ev.size()));
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(sidecarPath + ": " + ex.what());
    }
    const auto table = read_csv(csvPath);
    const auto d = static_cast<Eigen::Index>(table.header.size()) - 1;
    if (d != e.eigenvalues.size()) throw DataError(csvPath + ": column count does not match sidecar eigenvalues");
    e.rows.resize(static_cast<Eigen::Index>(table.rows.size()), d);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (Eigen::Index k = 0; k < d; ++k) e.rows(static_cast<Eigen::Index>(r), k) = table.rows[r][static_cast<std::size_t>(k) + 1];
    return e;
}

}  // namespace netmirror
