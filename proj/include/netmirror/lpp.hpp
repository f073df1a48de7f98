#pragma once

#include "netmirror/graphgen.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace netmirror {

/// Strictly increasing sample times t_1 < ... < t_m inside [0, horizon].
struct TimeGrid {
    std::vector<double> times;
    double horizon = 0.0;

    std::size_t size() const { return times.size(); }
    void validate() const;

    /// m equally spaced points from `start` to `stop` inclusive.
    static TimeGrid linspace(double start, double stop, std::size_t m);
};

/// Latent paths of n nodes sampled on a grid. `positions[i]` is the n x d
/// latent matrix at grid time i; row j across all i is node j's path.
struct LatentTrajectorySet {
    TimeGrid grid;
    std::vector<Matrix> positions;

    std::size_t nodes() const { return positions.empty() ? 0 : static_cast<std::size_t>(positions.front().rows()); }
    int dim() const { return positions.empty() ? 0 : static_cast<int>(positions.front().cols()); }
    LatentMatrix slice(std::size_t i) const { return {grid.times.at(i), positions.at(i)}; }
};

enum class DriftKind { Linear, Quadratic };

/// Drift gamma(t) = a(t) v with a(t) = c1 t + c2 (linear) or c1 t^2 + c2
/// (quadratic), plus a Brownian term with per-coordinate variance sigma^2 t.
struct DriftSpec {
    DriftKind kind = DriftKind::Linear;
    double c1 = 1.0 / 50;
    double c2 = 1.0 / 10;
    Vector v = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    double sigma = 0.001;

    double a(double t) const { return kind == DriftKind::Linear ? c1 * t + c2 : c1 * t * t + c2; }
    double vnorm() const { return v.norm(); }

    static DriftSpec linear_default();
    static DriftSpec quadratic_default();
};

/// X(t) = a(t) v + W(t) with W a d-dimensional Brownian motion of scale sigma
/// started at 0 at time 0. Each node draws from its own substream.
LatentTrajectorySet simulate_bm_drift(const DriftSpec& spec, const TimeGrid& grid, std::size_t n,
                                      std::uint64_t seed);

/// X(t) = (a t + b) v + I(t), I(t) the time integral of a sigma-scaled
/// Brownian motion. (B, I) is advanced exactly between grid times.
LatentTrajectorySet simulate_integrated_bm(double a, double b, const Vector& v, double sigma,
                                           const TimeGrid& grid, std::size_t n, std::uint64_t seed);

/// Population d_MV for the Brownian-drift process:
/// sqrt((a(t) - a(s))^2 |v|^2 + sigma^2 |t - s|).
double dmv_oracle_bm(const DriftSpec& spec, double t, double s);

/// Population d_MV for the integrated-Brownian process with slope `a`:
/// sqrt(a^2 (t-s)^2 |v|^2 + sigma^2 (t-s)^2 (t + 2s) / 3), s = min argument.
double dmv_oracle_ibm(double a, const Vector& v, double sigma, double t, double s);

/// Draws n_s source rows with replacement once and reuses each drawn row
/// at every time, preserving the dependence of a node across time.
LatentTrajectorySet bootstrap_resample(const LatentTrajectorySet& empirical, std::size_t n_s,
                                       std::uint64_t seed);

/// Row selection shared by bootstrap_resample; exposed for deterministic hooks.
LatentTrajectorySet select_rows(const LatentTrajectorySet& source, const std::vector<std::size_t>& rows);

/// Trajectory archive: one `latent_<i>.csv` per time (columns node,x1..xd)
/// plus `manifest.json` holding times, d, n, seed and the process spec.
void write_trajectory_archive(const std::string& dir, const LatentTrajectorySet& set, std::uint64_t seed,
                              const std::string& specJson);
LatentTrajectorySet read_trajectory_archive(const std::string& dir);

}  // namespace netmirror
