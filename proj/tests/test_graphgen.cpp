#include <doctest.h>

#include "netmirror/errors.hpp"
#include "netmirror/graphgen.hpp"
#include "netmirror/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>

using namespace netmirror;

namespace {

LatentMatrix constant_rows(int n, std::initializer_list<double> row) {
    LatentMatrix X{0.0, Matrix(n, static_cast<Eigen::Index>(row.size()))};
    Eigen::Index k = 0;
    for (double v : row) X.rows.col(k++).setConstant(v);
    return X;
}

GraphSnapshot complete_graph(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return make_graph(0.0, n, edges);
}

}  // namespace

TEST_CASE("sample_rdpg: single node has no edges") {
    const auto g = sample_rdpg(constant_rows(1, {0.3, 0.4}), 7);
    CHECK(g.n == 1);
    CHECK(g.edges.empty());
}

TEST_CASE("sample_rdpg: unit rows give the complete graph") {
    const auto g = sample_rdpg(constant_rows(5, {1.0, 0.0}), 11);
    CHECK(g.edges == complete_graph(5).edges);
}

TEST_CASE("sample_rdpg: edge density of p = 1/2 within three binomial standard errors") {
    const int n = 2000;
    const auto g = sample_rdpg(constant_rows(n, {std::sqrt(0.5), 0.0}), 2024);
    const double pairs = n * (n - 1) / 2.0;
    const double density = static_cast<double>(g.edges.size()) / pairs;
    const double se = std::sqrt(0.25 / pairs);
    CHECK(std::abs(density - 0.5) <= 3.0 * se);
}

TEST_CASE("sample_rdpg: per-pair frequency converges to the inner product") {
    LatentMatrix X{0.0, Matrix(4, 2)};
    X.rows << 0.9, 0.1, 0.5, 0.5, 0.2, 0.7, 0.6, 0.0;
    const int R = 10000;
    Matrix counts = Matrix::Zero(4, 4);
    for (int r = 0; r < R; ++r)
        for (const auto& [i, j] : sample_rdpg(X, static_cast<std::uint64_t>(r)).edges) counts(i, j) += 1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double p = X.rows.row(i).dot(X.rows.row(j));
            CHECK(std::abs(counts(i, j) / R - p) <= 4.0 * std::sqrt(p * (1 - p) / R));
        }
}

TEST_CASE("sample_rdpg: identical across thread counts and runs") {
    LatentMatrix X{1.5, Matrix::Random(300, 3).cwiseAbs() * 0.5};
    set_thread_count(1);
    const auto a = sample_rdpg(X, 99);
    set_thread_count(4);
    const auto b = sample_rdpg(X, 99);
    const auto c = sample_rdpg(X, 99);
    set_thread_count(1);
    CHECK(a.edges == b.edges);
    CHECK(b.edges == c.edges);
    CHECK(a.time == 1.5);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("sample_rdpg: clamps small violations, rejects large ones") {
    ClampStats stats;
    const auto g = sample_rdpg(constant_rows(6, {std::sqrt(1.03), 0.0}), 3, &stats);
    CHECK(stats.clamped == 15);
    CHECK(stats.worstViolation == doctest::Approx(0.03).epsilon(1e-9));
    CHECK(g.edges.size() == 15);

    CHECK_THROWS_AS(sample_rdpg(constant_rows(4, {std::sqrt(1.2), 0.0}), 3), DataError);

    LatentMatrix neg{0.0, Matrix(2, 1)};
    neg.rows << 0.5, -0.5;
    CHECK_THROWS_AS(sample_rdpg(neg, 3), DataError);
}

TEST_CASE("sbm_block_matrix_at: corner and midpoint values") {
    Matrix b1(2, 2), b2(2, 2), b3(2, 2), mid(2, 2);
    b1 << 0.5, 1.0 / 3, 1.0 / 3, 0.5;
    b2 << 0.5, 0.5, 0.5, 0.5;
    b3 << 0.5, 1.0 / 3, 1.0 / 3, 1.0 / 3;
    mid << 0.5, 5.0 / 12, 5.0 / 12, 5.0 / 12;
    CHECK((sbm_block_matrix_at(0.0) - b1).norm() < 1e-15);
    CHECK((sbm_block_matrix_at(1.0) - b2).norm() < 1e-15);
    CHECK((sbm_block_matrix_at(2.0) - b3).norm() < 1e-15);
    CHECK((sbm_block_matrix_at(3.0) - b1).norm() < 1e-15);
    CHECK((sbm_block_matrix_at(1.5) - mid).norm() < 1e-15);
    CHECK_THROWS_AS(sbm_block_matrix_at(-0.01), std::domain_error);
    CHECK_THROWS_AS(sbm_block_matrix_at(3.01), std::domain_error);
}

TEST_CASE("sbm_block_matrix_at: rank one exactly at t = 1") {
    Eigen::JacobiSVD<Matrix> svd(sbm_block_matrix_at(1.0));
    CHECK(svd.singularValues()(1) == 0.0);
    for (double t : {0.0, 0.5, 0.9, 1.1, 2.0, 2.7}) {
        Eigen::JacobiSVD<Matrix> other(sbm_block_matrix_at(t));
        CHECK(other.singularValues()(1) > 1e-3);
    }
}

TEST_CASE("sbm_latents: rank-one block matrix") {
    const auto X = sbm_latents(SbmSpec{sbm_block_matrix_at(1.0), {2, 2}});
    REQUIRE(X.rows.rows() == 4);
    REQUIRE(X.rows.cols() == 2);
    for (int i = 0; i < 4; ++i) CHECK(X.rows.row(i).squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));
    const Matrix gram = X.rows * X.rows.transpose();
    CHECK((gram.array() - 0.5).abs().maxCoeff() < 1e-12);
    Eigen::JacobiSVD<Matrix> svd(X.rows);
    CHECK(svd.singularValues()(1) < 1e-10);
    CHECK(X.rows.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sbm_latents: Gram matrix reproduces the block matrix") {
    const Matrix b1 = sbm_block_matrix_at(0.0);
    const auto X = sbm_latents(SbmSpec{b1, {1, 1}});
    CHECK((X.rows * X.rows.transpose() - b1).cwiseAbs().maxCoeff() < 1e-12);

    const Matrix b3 = sbm_block_matrix_at(2.0);
    const auto big = sbm_latents(SbmSpec{b3, {1000, 1000}});
    CHECK(big.rows.rows() == 2000);
    CHECK(big.rows.row(0) == big.rows.row(999));
    CHECK(big.rows.row(1000) == big.rows.row(1999));
    CHECK(std::abs(big.rows.row(0).dot(big.rows.row(1)) - 0.5) < 1e-12);
    CHECK(std::abs(big.rows.row(0).dot(big.rows.row(1500)) - 1.0 / 3) < 1e-12);
    CHECK(std::abs(big.rows.row(1500).dot(big.rows.row(1999)) - 1.0 / 3) < 1e-12);
}

TEST_CASE("sbm_latents: deterministic signs and zero padding") {
    const auto X = sbm_latents(SbmSpec{sbm_block_matrix_at(0.4), {3, 2}}, 4);
    CHECK(X.rows.cols() == 4);
    CHECK(X.rows.rightCols(2).cwiseAbs().maxCoeff() == 0.0);
    // Block latent columns follow the eigenvector sign rule.
    for (int k = 0; k < 2; ++k) {
        const double a = X.rows(0, k), b = X.rows(3, k);
        CHECK((std::abs(a) >= std::abs(b) ? a : b) > 0.0);
    }
}

TEST_CASE("sbm_latents: rejects indefinite block matrices") {
    Matrix B(2, 2);
    B << 0.0, 0.5, 0.5, 0.0;
    CHECK_THROWS_AS(sbm_latents(SbmSpec{B, {1, 1}}), NotPsdError);
    CHECK_THROWS_AS(sbm_latents(SbmSpec{sbm_block_matrix_at(0.0), {1}}), DataError);
}

TEST_CASE("induced_subgraph") {
    const auto tri = make_graph(0.0, 3, {{0, 1}, {1, 2}, {0, 2}});
    const auto sub = induced_subgraph(tri, {0, 2});
    CHECK(sub.n == 2);
    CHECK(sub.edges == std::vector<Edge>{{0, 1}});

    const auto k5 = complete_graph(5);
    CHECK(induced_subgraph(k5, {1, 3, 4}).edges == complete_graph(3).edges);
    CHECK(induced_subgraph(k5, {0, 1, 2, 3, 4}).edges == k5.edges);

    const auto g = sample_rdpg(constant_rows(40, {0.6, 0.1}), 5);
    std::vector<int> all(40);
    for (int i = 0; i < 40; ++i) all[static_cast<std::size_t>(i)] = i;
    CHECK(induced_subgraph(g, all).edges == g.edges);

    // Order of the node list defines the relabelling.
    const auto path = make_graph(0.0, 3, {{0, 1}, {1, 2}});
    CHECK(induced_subgraph(path, {2, 1}).edges == std::vector<Edge>{{0, 1}});

    CHECK_THROWS_AS(induced_subgraph(tri, {0, 0}), DataError);
    CHECK_THROWS_AS(induced_subgraph(tri, {3}), DataError);
}

TEST_CASE("edge list: exact text format") {
    const auto g = make_graph(0.25, 4, {{2, 3}, {1, 0}, {0, 2}});
    CHECK(format_edge_list(g) == "# t=0.25 n=4\n0\t1\n0\t2\n2\t3\n");
}

TEST_CASE("edge list: parse inverts format on random graphs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        LatentMatrix X{0.1 * static_cast<double>(seed) + 1.0 / 3.0, Matrix::Random(60, 2).cwiseAbs() * 0.6};
        const auto g = sample_rdpg(X, seed);
        const auto back = parse_edge_list(format_edge_list(g));
        CHECK(back.time == g.time);
        CHECK(back.n == g.n);
        CHECK(back.edges == g.edges);
    }
}

TEST_CASE("edge list: malformed input is rejected") {
    CHECK_THROWS_AS(parse_edge_list(""), DataError);
    CHECK_THROWS_AS(parse_edge_list("t=1 n=3\n"), DataError);
    CHECK_THROWS_AS(parse_edge_list("# t=1 n=3\n0\t0\n"), DataError);
    CHECK_THROWS_AS(parse_edge_list("# t=1 n=3\n0\t5\n"), DataError);
    CHECK_THROWS_AS(parse_edge_list("# t=1 n=3\n1\t2\n0\t1\n"), DataError);
    CHECK_THROWS_AS(parse_edge_list("# t=1 n=3\n0 1\n"), DataError);
    CHECK_THROWS_AS(make_graph(0.0, 3, {{0, 1}, {1, 0}}), DataError);
}
