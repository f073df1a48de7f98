#include "netmirror/graphgen.hpp"

#include "netmirror/errors.hpp"
#include "netmirror/io.hpp"
#include "netmirror/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netmirror {

void GraphSnapshot::validate() const {
    if (n < 0) throw DataError("graph has negative node count");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto [i, j] = edges[k];
        if (i == j) throw DataError("self-loop at node " + std::to_string(i));
        if (i > j) throw DataError("edge not oriented i<j");
        if (i < 0 || j >= n) throw DataError("edge node index out of range");
        if (k > 0 && !(edges[k - 1] < edges[k])) throw DataError("edges unsorted or duplicated");
    }
}

GraphSnapshot make_graph(double time, int n, std::vector<Edge> edges) {
    for (auto& e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    GraphSnapshot g{time, n, std::move(edges)};
    g.validate();
    return g;
}

GraphSnapshot sample_rdpg(const LatentMatrix& X, std::uint64_t seed, ClampStats* stats) {
    const Eigen::Index n = X.rows.rows();
    // Probabilities row by row; P is never stored whole.
    std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(n));
    std::vector<ClampStats> rowStats(static_cast<std::size_t>(n));
    std::vector<double> rowViolation(static_cast<std::size_t>(n), 0.0);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const auto xi = X.rows.row(static_cast<Eigen::Index>(i));
        auto& nb = neighbours[i];
        auto& st = rowStats[i];
        for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < n; ++j) {
            double p = xi.dot(X.rows.row(j));
            const double violation = p < 0.0 ? -p : (p > 1.0 ? p - 1.0 : 0.0);
            if (violation > 0.0) {
                if (!(violation <= kClampTolerance)) {
                    rowViolation[i] = std::isnan(violation) ? INFINITY : violation;
                    return;
                }
                ++st.clamped;
                st.worstViolation = std::max(st.worstViolation, violation);
                p = std::clamp(p, 0.0, 1.0);
            }
            if (unif(rng) < p) nb.push_back(static_cast<int>(j));
        }
    });

    for (Eigen::Index i = 0; i < n; ++i) {
        if (rowViolation[static_cast<std::size_t>(i)] > 0.0) {
            std::ostringstream msg;
            msg << "inner product outside [0,1] beyond clamp tolerance at row " << i
                << " (violation " << rowViolation[static_cast<std::size_t>(i)] << ")";
            throw DataError(msg.str());
        }
    }

    GraphSnapshot g;
    g.time = X.time;
    g.n = static_cast<int>(n);
    ClampStats total;
    std::size_t count = 0;
    for (const auto& nb : neighbours) count += nb.size();
    g.edges.reserve(count);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j : neighbours[static_cast<std::size_t>(i)]) g.edges.emplace_back(static_cast<int>(i), j);
        total.clamped += rowStats[static_cast<std::size_t>(i)].clamped;
        total.worstViolation = std::max(total.worstViolation, rowStats[static_cast<std::size_t>(i)].worstViolation);
    }
    if (stats != nullptr) *stats = total;
    return g;
}

Matrix sbm_block_matrix_at(double t) {
    if (!(t >= 0.0 && t <= 3.0))
        throw std::domain_error("sbm_block_matrix_at: t must lie in [0, 3]");
    Matrix b1(2, 2), b2(2, 2), b3(2, 2);
    b1 << 1.0 / 2, 1.0 / 3, 1.0 / 3, 1.0 / 2;
    b2 << 1.0 / 2, 1.0 / 2, 1.0 / 2, 1.0 / 2;
    b3 << 1.0 / 2, 1.0 / 3, 1.0 / 3, 1.0 / 3;
    if (t <= 1.0) return (1.0 - t) * b1 + t * b2;
    if (t <= 2.0) return (2.0 - t) * b2 + (t - 1.0) * b3;
    return (3.0 - t) * b3 + (t - 2.0) * b1;
}

LatentMatrix sbm_latents(const SbmSpec& spec, int dim, double time) {
    const Matrix& B = spec.blockMatrix;
    const Eigen::Index K = B.rows();
    if (K == 0 || B.cols() != K) throw DataError("block matrix must be square and non-empty");
    if (static_cast<Eigen::Index>(spec.blockSizes.size()) != K)
        throw DataError("block sizes do not match block matrix");
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DataError("block matrix not symmetric");
    if (B.minCoeff() < 0.0 || B.maxCoeff() > 1.0) throw DataError("block probabilities outside [0,1]");
    if (dim < 0) dim = static_cast<int>(K);

    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    Vector evals = es.eigenvalues().reverse();
    Matrix evecs = es.eigenvectors().rowwise().reverse();
    if (evals.minCoeff() < -1e-10) throw NotPsdError("block matrix is not positive semidefinite");

    Matrix blockLatent = Matrix::Zero(K, dim);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double lambda = std::max(evals(k), 0.0);
        if (k >= dim) {
            if (lambda > 1e-10) throw DataError("latent dimension smaller than block matrix rank");
            continue;
        }
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < K; ++r)
            if (std::abs(evecs(r, k)) > std::abs(evecs(arg, k))) arg = r;
        const double sign = evecs(arg, k) < 0.0 ? -1.0 : 1.0;
        blockLatent.col(k) = sign * std::sqrt(lambda) * evecs.col(k);
    }

    int n = 0;
    for (int s : spec.blockSizes) {
        if (s <= 0) throw DataError("block sizes must be positive");
        n += s;
    }
    LatentMatrix X{time, Matrix(n, dim)};
    int row = 0;
    for (Eigen::Index k = 0; k < K; ++k)
        for (int r = 0; r < spec.blockSizes[static_cast<std::size_t>(k)]; ++r) X.rows.row(row++) = blockLatent.row(k);
    return X;
}

GraphSnapshot induced_subgraph(const GraphSnapshot& g, const std::vector<int>& nodes) {
    std::vector<int> relabel(static_cast<std::size_t>(g.n), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const int v = nodes[k];
        if (v < 0 || v >= g.n) throw DataError("induced_subgraph: node " + std::to_string(v) + " out of range");
        if (relabel[static_cast<std::size_t>(v)] != -1)
            throw DataError("induced_subgraph: duplicate node " + std::to_string(v));
        relabel[static_cast<std::size_t>(v)] = static_cast<int>(k);
    }
    std::vector<Edge> kept;
    for (const auto& [i, j] : g.edges) {
        const int a = relabel[static_cast<std::size_t>(i)];
        const int b = relabel[static_cast<std::size_t>(j)];
        if (a >= 0 && b >= 0) kept.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(kept.begin(), kept.end());
    return GraphSnapshot{g.time, static_cast<int>(nodes.size()), std::move(kept)};
}

std::string format_edge_list(const GraphSnapshot& g) {
    std::string out = "# t=" + format_number(g.time) + " n=" + std::to_string(g.n) + "\n";
    out.reserve(out.size() + g.edges.size() * 12);
    for (const auto& [i, j] : g.edges) {
        out += std::to_string(i);
        out += '\t';
        out += std::to_string(j);
        out += '\n';
    }
    return out;
}

GraphSnapshot parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("edge list: empty input");
    double time = 0.0;
    int n = -1;
    {
        std::istringstream hdr(line);
        std::string hash, tpart, npart;
        hdr >> hash >> tpart >> npart;
        if (hash != "#" || tpart.rfind("t=", 0) != 0 || npart.rfind("n=", 0) != 0)
            throw DataError("edge list: malformed header '" + line + "'");
        try {
            time = std::stod(tpart.substr(2));
            n = std::stoi(npart.substr(2));
        } catch (const std::exception&) {
            throw DataError("edge list: malformed header '" + line + "'");
        }
    }
    std::vector<Edge> edges;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("edge list line " + std::to_string(lineno) + ": missing tab");
        try {
            edges.emplace_back(std::stoi(line.substr(0, tab)), std::stoi(line.substr(tab + 1)));
        } catch (const std::exception&) {
            throw DataError("edge list line " + std::to_string(lineno) + ": bad node index");
        }
    }
    GraphSnapshot g{time, n, std::move(edges)};
    g.validate();
    return g;
}

void write_edge_list(const std::string& path, const GraphSnapshot& g) {
    write_text_file(path, format_edge_list(g));
}

GraphSnapshot read_edge_list(const std::string& path) {
    try {
        return parse_edge_list(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace netmirror
