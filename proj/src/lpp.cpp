#include "netmirror/lpp.hpp"

#include "netmirror/errors.hpp"
#include "netmirror/io.hpp"
#include "netmirror/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace netmirror {

namespace fs = std::filesystem;

void TimeGrid::validate() const {
    if (times.size() < 2) throw ConfigError("time grid needs at least two times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw ConfigError("time grid contains a non-finite time");
        if (times[i] < 0.0 || times[i] > horizon) throw ConfigError("time grid point outside [0, horizon]");
        if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("time grid not strictly increasing");
    }
}

TimeGrid TimeGrid::linspace(double start, double stop, std::size_t m) {
    if (m < 2) throw ConfigError("linspace needs at least two points");
    TimeGrid g;
    g.times.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        g.times[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(m - 1);
    g.times.back() = stop;
    g.horizon = stop;
    return g;
}

DriftSpec DriftSpec::linear_default() { return DriftSpec{}; }

DriftSpec DriftSpec::quadratic_default() {
    DriftSpec s;
    s.kind = DriftKind::Quadratic;
    s.c1 = 1.0 / 1000;
    s.c2 = 1.0 / 10;
    return s;
}

LatentTrajectorySet simulate_bm_drift(const DriftSpec& spec, const TimeGrid& grid, std::size_t n,
                                      std::uint64_t seed) {
    grid.validate();
    if (spec.sigma < 0.0) throw ConfigError("sigma must be nonnegative");
    const auto d = spec.v.size();
    const std::size_t m = grid.size();
    LatentTrajectorySet out{grid, std::vector<Matrix>(m, Matrix(static_cast<Eigen::Index>(n), d))};
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::RowVectorXd drift = spec.a(grid.times[i]) * spec.v.transpose();
        out.positions[i].rowwise() = drift;
    }
    if (spec.sigma == 0.0) return out;

    parallel_for(n, [&](std::size_t node) {
        Rng rng = make_rng(seed, node);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector w = Vector::Zero(d);
        double prev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double sd = spec.sigma * std::sqrt(grid.times[i] - prev);
            for (Eigen::Index k = 0; k < d; ++k) w(k) += sd * gauss(rng);
            prev = grid.times[i];
            out.positions[i].row(static_cast<Eigen::Index>(node)) += w.transpose();
        }
    });
    return out;
}

LatentTrajectorySet simulate_integrated_bm(double a, double b, const Vector& v, double sigma,
                                           const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
    grid.validate();
    if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
    const auto d = v.size();
    const std::size_t m = grid.size();
    LatentTrajectorySet out{grid, std::vector<Matrix>(m, Matrix(static_cast<Eigen::Index>(n), d))};
    for (std::size_t i = 0; i < m; ++i) out.positions[i].rowwise() = ((a * grid.times[i] + b) * v).transpose();
    if (sigma == 0.0) return out;

    parallel_for(n, [&](std::size_t node) {
        Rng rng = make_rng(seed, node);
        std::normal_distribution<double> gauss(0.0, 1.0);
        // Per coordinate over a step h, given (B_s, I_s):
        //   B_t = B_s + dB,  I_t = I_s + h B_s + J
        // with Var dB = s2 h, Var J = s2 h^3/3, Cov(dB, J) = s2 h^2/2.
        Vector bm = Vector::Zero(d);
        Vector integral = Vector::Zero(d);
        double prev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double h = grid.times[i] - prev;
            const double l11 = sigma * std::sqrt(h);
            const double l21 = sigma * h * std::sqrt(h) / 2.0;                 // Cov / l11
            const double l22 = sigma * h * std::sqrt(h) / std::sqrt(12.0);     // sqrt(h^3/3 - h^3/4)
            for (Eigen::Index k = 0; k < d; ++k) {
                const double z1 = gauss(rng);
                const double z2 = gauss(rng);
                const double dB = l11 * z1;
                const double J = l21 * z1 + l22 * z2;
                integral(k) += h * bm(k) + J;
                bm(k) += dB;
            }
            prev = grid.times[i];
            out.positions[i].row(static_cast<Eigen::Index>(node)) += integral.transpose();
        }
    });
    return out;
}

double dmv_oracle_bm(const DriftSpec& spec, double t, double s) {
    const double da = spec.a(t) - spec.a(s);
    return std::sqrt(da * da * spec.v.squaredNorm() + spec.sigma * spec.sigma * std::abs(t - s));
}

double dmv_oracle_ibm(double a, const Vector& v, double sigma, double t, double s) {
    if (s > t) std::swap(s, t);
    const double dt = t - s;
    return std::sqrt(a * a * dt * dt * v.squaredNorm() + sigma * sigma * dt * dt * (t + 2.0 * s) / 3.0);
}

LatentTrajectorySet select_rows(const LatentTrajectorySet& source, const std::vector<std::size_t>& rows) {
    if (source.positions.empty() || source.nodes() == 0) throw DataError("resampling from an empty trajectory set");
    LatentTrajectorySet out{source.grid, {}};
    out.positions.reserve(source.positions.size());
    const Eigen::Index d = source.dim();
    for (const auto& P : source.positions) {
        Matrix M(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r] >= source.nodes()) throw DataError("resampled row index out of range");
            M.row(static_cast<Eigen::Index>(r)) = P.row(static_cast<Eigen::Index>(rows[r]));
        }
        out.positions.push_back(std::move(M));
    }
    return out;
}

LatentTrajectorySet bootstrap_resample(const LatentTrajectorySet& empirical, std::size_t n_s,
                                       std::uint64_t seed) {
    if (n_s == 0) throw ConfigError("bootstrap sample size must be at least 1");
    if (empirical.nodes() == 0) throw DataError("resampling from an empty trajectory set");
    Rng rng = make_rng(seed, 0);
    std::uniform_int_distribution<std::size_t> pick(0, empirical.nodes() - 1);
    std::vector<std::size_t> rows(n_s);
    for (auto& r : rows) r = pick(rng);
    return select_rows(empirical, rows);
}

void write_trajectory_archive(const std::string& dir, const LatentTrajectorySet& set, std::uint64_t seed,
                              const std::string& specJson) {
    fs::create_directories(dir);
    const int d = set.dim();
    std::string header = "node";
    for (int k = 1; k <= d; ++k) header += ",x" + std::to_string(k);
    header += "\n";
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < set.positions.size(); ++i) {
        std::string body = header;
        const Matrix& P = set.positions[i];
        for (Eigen::Index r = 0; r < P.rows(); ++r) {
            body += std::to_string(r);
            for (Eigen::Index k = 0; k < P.cols(); ++k) body += "," + format_number(P(r, k));
            body += "\n";
        }
        const std::string name = "latent_" + std::to_string(i) + ".csv";
        write_text_file((fs::path(dir) / name).string(), body);
        files.push_back(name);
    }
    nlohmann::ordered_json manifest;
    manifest["times"] = set.grid.times;
    manifest["horizon"] = set.grid.horizon;
    manifest["d"] = d;
    manifest["n"] = set.nodes();
    manifest["seed"] = seed;
    manifest["spec"] = specJson.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(specJson);
    manifest["files"] = files;
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

LatentTrajectorySet read_trajectory_archive(const std::string& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(dir + "/manifest.json: " + e.what());
    }
    LatentTrajectorySet set;
    try {
        set.grid.times = manifest.at("times").get<std::vector<double>>();
        set.grid.horizon = manifest.value("horizon", set.grid.times.empty() ? 0.0 : set.grid.times.back());
        const int d = manifest.at("d").get<int>();
        const auto files = manifest.at("files").get<std::vector<std::string>>();
        if (files.size() != set.grid.times.size()) throw DataError(dir + ": manifest lists wrong number of files");
        for (const auto& f : files) {
            const auto table = read_csv((fs::path(dir) / f).string());
            if (static_cast<int>(table.header.size()) != d + 1) throw DataError(f + ": expected node + d columns");
            Matrix P(static_cast<Eigen::Index>(table.rows.size()), d);
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (table.rows[r][0] != static_cast<double>(r)) throw DataError(f + ": node column not 0..n-1");
                for (int k = 0; k < d; ++k) P(static_cast<Eigen::Index>(r), k) = table.rows[r][static_cast<std::size_t>(k) + 1];
            }
            if (!set.positions.empty() && P.rows() != set.positions.front().rows())
                throw DataError(f + ": node count differs across times");
            set.positions.push_back(std::move(P));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(dir + "/manifest.json: " + e.what());
    }
    set.grid.validate();
    return set;
}

}  // namespace netmirror
