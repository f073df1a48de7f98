#include "netmirror/mirror.hpp"

#include "netmirror/errors.hpp"
#include "netmirror/io.hpp"
#include "netmirror/metric.hpp"
#include "netmirror/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace netmirror {

DistanceMatrix distance_matrix(const std::vector<Matrix>& matrices, const std::vector<double>& times, bool refine) {
    const std::size_t m = matrices.size();
    if (times.size() != m) throw DataError("distance_matrix: times and matrices differ in length");
    for (std::size_t i = 1; i < m; ++i) {
        if (matrices[i].rows() != matrices[0].rows() || matrices[i].cols() != matrices[0].cols())
            throw DataError("distance_matrix: embedding at t=" + format_number(times[i]) + " has shape " +
                            std::to_string(matrices[i].rows()) + "x" + std::to_string(matrices[i].cols()) +
                            ", expected " + std::to_string(matrices[0].rows()) + "x" +
                            std::to_string(matrices[0].cols()));
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);

    DistanceMatrix D{times, Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))};
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        values[k] = dmv_hat(matrices[pairs[k].first], matrices[pairs[k].second], refine).distance;
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(pairs[k].first);
        const auto j = static_cast<Eigen::Index>(pairs[k].second);
        D.values(i, j) = values[k];
        D.values(j, i) = values[k];
    }
    return D;
}

DistanceMatrix distance_matrix(const std::vector<EmbeddingMatrix>& embeddings, bool refine) {
    std::vector<Matrix> rows;
    std::vector<double> times;
    rows.reserve(embeddings.size());
    for (const auto& e : embeddings) {
        rows.push_back(e.rows);
        times.push_back(e.time);
    }
    return distance_matrix(rows, times, refine);
}

MirrorCurve cmds(const DistanceMatrix& D, int c) {
    const Eigen::Index m = D.values.rows();
    if (D.values.cols() != m) throw DataError("cmds: distance matrix not square");
    if (c < 1 || c >= m)
        throw ConfigError("cmds: mirror dimension " + std::to_string(c) + " outside [1, " + std::to_string(m - 1) + "]");

    const Matrix sq = D.values.cwiseProduct(D.values);
    const Matrix P = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
    Matrix B = -0.5 * P * sq * P;
    B = 0.5 * (B + B.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    if (es.info() != Eigen::Success) throw NumericalError("cmds: eigensolver failed");
    MirrorCurve out;
    out.times = D.times;
    out.c = c;
    out.scree = es.eigenvalues().reverse();
    Matrix vecs = es.eigenvectors().rowwise().reverse().leftCols(c);
    fix_column_signs(vecs);

    const double floor = 1e-12 * std::max(1e-300, out.scree.cwiseAbs().maxCoeff());
    out.coords = Matrix::Zero(m, c);
    for (int j = 0; j < c; ++j) {
        const double lambda = out.scree(j);
        if (lambda > floor) {
            out.coords.col(j) = std::sqrt(lambda) * vecs.col(j);
        } else {
            out.warnings.push_back("cmds: eigenvalue " + std::to_string(j + 1) + " (" + format_number(lambda) +
                                   ") is not positive; coordinate zeroed");
        }
    }
    return out;
}

namespace {

Matrix pairwise_euclidean(const Matrix& X) {
    const Eigen::Index m = X.rows();
    Matrix E(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) E(i, j) = (X.row(i) - X.row(j)).norm();
    return E;
}

bool connected(const std::vector<std::vector<Eigen::Index>>& adj) {
    const std::size_t m = adj.size();
    std::vector<char> seen(m, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto u : adj[static_cast<std::size_t>(v)])
            if (!seen[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                ++count;
                stack.push_back(u);
            }
    }
    return count == m;
}

}  // namespace

IsomapTrace isomap_1d(const MirrorCurve& M, int k) {
    const Eigen::Index m = M.coords.rows();
    if (m < 2) throw DataError("isomap_1d: need at least two points");
    if (k < 1) throw ConfigError("isomap_1d: k must be at least 1");

    const Matrix E = pairwise_euclidean(M.coords);
    const double inf = std::numeric_limits<double>::infinity();
    Matrix G = Matrix::Constant(m, m, inf);
    G.diagonal().setZero();
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(m));
    auto link = [&](Eigen::Index i, Eigen::Index j) {
        if (G(i, j) == inf) {
            adj[static_cast<std::size_t>(i)].push_back(j);
            adj[static_cast<std::size_t>(j)].push_back(i);
        }
        G(i, j) = G(j, i) = E(i, j);
    };

    for (Eigen::Index i = 0; i < m; ++i) {
        std::vector<Eigen::Index> order;
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return E(i, a) < E(i, b); });
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
        for (std::size_t r = 0; r < take; ++r) link(i, order[r]);
    }

    if (!connected(adj)) {
        // Prim's MST over the complete Euclidean graph.
        std::vector<char> inTree(static_cast<std::size_t>(m), 0);
        std::vector<double> best(static_cast<std::size_t>(m), inf);
        std::vector<Eigen::Index> parent(static_cast<std::size_t>(m), -1);
        best[0] = 0.0;
        for (Eigen::Index it = 0; it < m; ++it) {
            Eigen::Index v = -1;
            for (Eigen::Index u = 0; u < m; ++u)
                if (!inTree[static_cast<std::size_t>(u)] && (v < 0 || best[static_cast<std::size_t>(u)] < best[static_cast<std::size_t>(v)]))
                    v = u;
            inTree[static_cast<std::size_t>(v)] = 1;
            if (parent[static_cast<std::size_t>(v)] >= 0) link(v, parent[static_cast<std::size_t>(v)]);
            for (Eigen::Index u = 0; u < m; ++u)
                if (!inTree[static_cast<std::size_t>(u)] && E(v, u) < best[static_cast<std::size_t>(u)]) {
                    best[static_cast<std::size_t>(u)] = E(v, u);
                    parent[static_cast<std::size_t>(u)] = v;
                }
        }
    }

    // Floyd-Warshall; m is the number of time points.
    for (Eigen::Index via = 0; via < m; ++via)
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                if (G(i, via) + G(via, j) < G(i, j)) G(i, j) = G(i, via) + G(via, j);

    const MirrorCurve line = cmds(DistanceMatrix{M.times, G}, 1);
    IsomapTrace trace{M.times, line.coords.col(0)};
    if (trace.values(1) < trace.values(0)) trace.values *= -1.0;
    return trace;
}

double stress(const DistanceMatrix& D, const Matrix& coords) {
    const Eigen::Index m = D.values.rows();
    if (coords.rows() != m || static_cast<Eigen::Index>(D.times.size()) != m)
        throw DataError("stress: coordinate rows do not match the grid");
    if (m < 2) return 0.0;
    std::vector<double> dt(static_cast<std::size_t>(m));
    dt[0] = D.times[1] - D.times[0];
    for (Eigen::Index i = 1; i < m; ++i) dt[static_cast<std::size_t>(i)] = D.times[static_cast<std::size_t>(i)] - D.times[static_cast<std::size_t>(i - 1)];
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double target = D.values(i, j) * D.values(i, j);
            const double gap = target - (coords.row(i) - coords.row(j)).squaredNorm();
            total += gap * gap * dt[static_cast<std::size_t>(i)] * dt[static_cast<std::size_t>(j)];
        }
    return total;
}

DimensionChoice select_dimension(const Vector& scree, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("select_dimension: threshold must lie in (0, 1]");
    for (Eigen::Index i = 1; i < scree.size(); ++i)
        if (scree(i) > scree(i - 1)) throw DataError("select_dimension: scree is not nonincreasing");
    double total = 0.0;
    for (Eigen::Index i = 0; i < scree.size(); ++i) total += std::max(0.0, scree(i));
    if (!(total > 0.0)) throw NumericalError("select_dimension: no positive eigenvalues");

    DimensionChoice choice;
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < scree.size(); ++i) {
        cumulative += std::max(0.0, scree(i));
        choice.massProfile.push_back(cumulative / total);
        if (choice.c == 0 && cumulative / total >= threshold) choice.c = static_cast<int>(i) + 1;
    }
    if (choice.c == 0) choice.c = static_cast<int>(scree.size());
    return choice;
}

// ---- file formats ----

void write_distance_matrix(const std::string& path, const DistanceMatrix& D) {
    std::string body;
    for (std::size_t i = 0; i < D.times.size(); ++i) body += (i ? "," : "") + format_number(D.times[i]);
    body += "\n";
    for (Eigen::Index i = 0; i < D.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < D.values.cols(); ++j) body += (j ? "," : "") + format_number(D.values(i, j));
        body += "\n";
    }
    write_text_file(path, body);
}

DistanceMatrix read_distance_matrix(const std::string& path) {
    const auto table = read_csv(path);
    DistanceMatrix D;
    for (const auto& h : table.header) {
        try {
            std::size_t used = 0;
            D.times.push_back(std::stod(h, &used));
            if (used != h.size()) throw std::invalid_argument(h);
        } catch (const std::exception&) {
            throw DataError(path + ": header cell '" + h + "' is not a time");
        }
    }
    const auto m = static_cast<Eigen::Index>(D.times.size());
    if (static_cast<Eigen::Index>(table.rows.size()) != m) throw DataError(path + ": distance matrix is not square");
    D.values.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) D.values(i, j) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < m; ++i) {
        if (D.values(i, i) != 0.0) throw DataError(path + ": nonzero diagonal");
        for (Eigen::Index j = 0; j < i; ++j)
            if (D.values(i, j) != D.values(j, i) || D.values(i, j) < 0.0)
                throw DataError(path + ": distance matrix not symmetric and nonnegative");
    }
    return D;
}

void write_mirror(const std::string& path, const MirrorCurve& M) {
    std::string body = "t";
    for (Eigen::Index k = 1; k <= M.coords.cols(); ++k) body += ",psi" + std::to_string(k);
    body += "\n";
    for (Eigen::Index i = 0; i < M.coords.rows(); ++i) {
        body += format_number(M.times[static_cast<std::size_t>(i)]);
        for (Eigen::Index k = 0; k < M.coords.cols(); ++k) body += "," + format_number(M.coords(i, k));
        body += "\n";
    }
    write_text_file(path, body);
}

MirrorCurve read_mirror(const std::string& path) {
    const auto table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "t") throw DataError(path + ": expected columns t,psi1..psic");
    MirrorCurve M;
    M.c = static_cast<int>(table.header.size()) - 1;
    M.coords.resize(static_cast<Eigen::Index>(table.rows.size()), M.c);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        M.times.push_back(table.rows[i][0]);
        for (int k = 0; k < M.c; ++k) M.coords(static_cast<Eigen::Index>(i), k) = table.rows[i][static_cast<std::size_t>(k) + 1];
    }
    return M;
}

void write_scree(const std::string& path, const Vector& scree) {
    std::string body = "rank,eigenvalue\n";
    for (Eigen::Index i = 0; i < scree.size(); ++i) body += std::to_string(i + 1) + "," + format_number(scree(i)) + "\n";
    write_text_file(path, body);
}

void write_isomap(const std::string& path, const IsomapTrace& trace) {
    std::string body = "t,iota\n";
    for (Eigen::Index i = 0; i < trace.values.size(); ++i)
        body += format_number(trace.times[static_cast<std::size_t>(i)]) + "," + format_number(trace.values(i)) + "\n";
    write_text_file(path, body);
}

IsomapTrace read_isomap(const std::string& path) {
    const auto table = read_csv(path);
    if (table.header.size() != 2 || table.header[0] != "t" || table.header[1] != "iota")
        throw DataError(path + ": expected columns t,iota");
    IsomapTrace trace;
    trace.values.resize(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        trace.times.push_back(table.rows[i][0]);
        trace.values(static_cast<Eigen::Index>(i)) = table.rows[i][1];
    }
    return trace;
}

}  // namespace netmirror
