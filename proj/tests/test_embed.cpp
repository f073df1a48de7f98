#include <doctest.h>

#include "netmirror/embed.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/metric.hpp"
#include "netmirror/parallel.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace netmirror;

namespace {

GraphSnapshot complete_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return make_graph(0.0, n, edges);
}

LatentMatrix random_latents(int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix X(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) X(i, k) = u(rng);
    // Row norms <= 0.95 keep every inner product inside [0, 1].
    for (int i = 0; i < n; ++i) X.row(i) *= 0.95 / std::max(1.0, X.row(i).norm()) / std::sqrt(2.0);
    return {0.0, X};
}

}  // namespace

TEST_CASE("ase: complete graph K4") {
    const auto e = ase(complete_graph(4), 1, true);
    CHECK(e.eigenvalues(0) == doctest::Approx(3.0).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(e.rows(i, 0) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
}

TEST_CASE("ase: noiseless probability matrix recovers latents up to rotation") {
    const auto X = random_latents(300, 3, 7);
    const Matrix P = X.rows * X.rows.transpose();
    for (int threshold : {1024, 10}) {  // dense and Lanczos paths
        AseOptions opts;
        opts.denseThreshold = threshold;
        const auto e = ase_from_matrix(P, 3, true, 0.0, opts);
        const Matrix W = procrustes_rotation(X.rows, e.rows).rotation;
        CHECK((e.rows * W - X.rows).norm() <= 1e-8);
    }
}

TEST_CASE("ase: RDPG with constant rows concentrates at sqrt(1/2)") {
    LatentMatrix X{0.0, Matrix(2000, 2)};
    X.rows.col(0).setConstant(std::sqrt(0.5));
    X.rows.col(1).setZero();
    const auto e = ase(sample_rdpg(X, 31), 1, true);
    CHECK(std::abs(e.rows.col(0).mean() - std::sqrt(0.5)) <= 0.02);
}

TEST_CASE("ase: dense and Lanczos solvers agree on a sampled graph") {
    const auto g = sample_rdpg(random_latents(600, 2, 3), 8);
    AseOptions dense, lanczos;
    lanczos.denseThreshold = 0;
    const auto a = ase(g, 3, true, dense);
    const auto b = ase(g, 3, true, lanczos);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.rows - b.rows).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ase: column invariants for scaled and unscaled variants") {
    const auto g = sample_rdpg(random_latents(400, 2, 11), 5);
    const auto scaled = ase(g, 2, true);
    const auto unit = ase(g, 2, false);
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(scaled.rows.col(j).squaredNorm() / scaled.eigenvalues(j) - 1.0) <= 1e-9);
    CHECK((unit.rows.transpose() * unit.rows - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(scaled.eigenvalues(0) >= scaled.eigenvalues(1));
    CHECK(scaled.scaled);
    CHECK_FALSE(unit.scaled);
}

TEST_CASE("ase: truncation error bounded by the next eigenvalue") {
    const auto g = sample_rdpg(random_latents(300, 2, 19), 2);
    const Matrix A = Matrix(adjacency_matrix(g));
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    const Vector all = es.eigenvalues().reverse();
    const auto e = ase(g, 2, true);
    const Matrix approx = e.rows * e.rows.transpose();
    // Spectral norm of the remainder is max |lambda_j| over j > d; at most |lambda_{d+1}|
    // when the negative tail is no larger, otherwise the remainder's own bound.
    const double tail = std::max(std::abs(all(2)), std::abs(all(all.size() - 1)));
    CHECK(spectral_norm(approx - A) <= tail + 1e-6);
    CHECK(spectral_norm(approx - A) >= std::abs(all(2)) - 1e-6);
}

TEST_CASE("ase: deterministic") {
    const auto g = sample_rdpg(random_latents(1500, 2, 5), 4);
    const auto a = ase(g, 2, true);
    const auto b = ase(g, 2, true);
    CHECK(a.rows == b.rows);
    CHECK(a.eigenvalues == b.eigenvalues);
}

TEST_CASE("ase: sign convention") {
    const auto e = ase(sample_rdpg(random_latents(200, 2, 9), 1), 2, false);
    for (int j = 0; j < 2; ++j) {
        Eigen::Index arg = 0;
        e.rows.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(e.rows(arg, j) > 0.0);
    }
}

TEST_CASE("ase: rank deficiency") {
    // K4 has eigenvalues 3, -1, -1, -1.
    try {
        ase(complete_graph(4), 2, true);
        FAIL("expected RankDeficiencyError");
    } catch (const RankDeficiencyError& e) {
        REQUIRE(e.eigenvalues().size() == 2);
        CHECK(e.eigenvalues()[0] == doctest::Approx(3.0));
        CHECK(e.eigenvalues()[1] == doctest::Approx(-1.0));
    }
    AseOptions pad;
    pad.onRankDeficient = RankDeficiencyPolicy::ZeroPad;
    std::vector<std::string> warnings;
    const auto e = ase(complete_graph(4), 2, true, pad, &warnings);
    CHECK(e.rows.col(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(warnings.size() == 1);

    // Empty graph: every eigenvalue is zero.
    CHECK_THROWS_AS(ase(make_graph(0.0, 5, {}), 1, true), RankDeficiencyError);
    CHECK_THROWS_AS(ase(complete_graph(4), 5, true), ConfigError);
    CHECK_THROWS_AS(ase(complete_graph(4), 0, true), ConfigError);
}

TEST_CASE("lanczos: repeated eigenvalues via restarts") {
    // Complete graph on 50 nodes through the iterative path: eigenvalues 49, -1 (x49).
    AseOptions opts;
    opts.denseThreshold = 0;
    const auto pairs = top_eigenpairs(adjacency_matrix(complete_graph(50)), 3, opts);
    CHECK(pairs.values(0) == doctest::Approx(49.0).epsilon(1e-10));
    CHECK(pairs.values(1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(pairs.values(2) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK((pairs.vectors.transpose() * pairs.vectors - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("embedding files round trip") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto e = ase(sample_rdpg(random_latents(50, 2, 2), 3), 2, true);
    const auto csv = (dir / "netmirror_embed_test.csv").string();
    const auto side = (dir / "netmirror_embed_test.json").string();
    write_embedding(csv, side, e);
    const auto back = read_embedding(csv, side);
    CHECK(back.rows == e.rows);
    CHECK(back.eigenvalues == e.eigenvalues);
    CHECK(back.scaled == e.scaled);
    std::filesystem::remove(csv);
    std::filesystem::remove(side);
}
