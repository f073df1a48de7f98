#include "netmirror/changepoint.hpp"

#include "netmirror/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace netmirror {

namespace {

void check_length(const IsomapTrace& trace, int w, const char* who) {
    if (trace.values.size() <= w)
        throw DataError(std::string(who) + ": trace of length " + std::to_string(trace.values.size()) +
                        " is too short for window " + std::to_string(w));
    if (static_cast<Eigen::Index>(trace.times.size()) != trace.values.size())
        throw DataError(std::string(who) + ": times and values differ in length");
}

nlohmann::ordered_json number_or_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

SigmageReport sigmage_scan(const IsomapTrace& trace, int w, double threshold) {
    if (w < 2) throw ConfigError("sigmage_scan: window must be at least 2");
    check_length(trace, w, "sigmage_scan");
    SigmageReport report;
    report.window = w;
    report.threshold = threshold;
    const Eigen::Index m = trace.values.size();
    for (Eigen::Index t = w; t < m; ++t) {
        const auto window = trace.values.segment(t - w, w);
        const double mean = window.mean();
        const double sd = std::sqrt((window.array() - mean).square().sum() / (w - 1));
        const double deviation = std::abs(trace.values(t) - mean);
        SigmageEntry e{trace.times[static_cast<std::size_t>(t)], 0.0, mean, sd, false};
        if (sd < 1e-12) {
            e.sigmage = deviation > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
            e.flag = deviation > 1e-12;
        } else {
            e.sigmage = deviation / sd;
            e.flag = e.sigmage > threshold;
        }
        report.perTime.push_back(e);
    }
    return report;
}

RegressionBandReport regression_band_scan(const IsomapTrace& trace, int w, double multiplier) {
    if (w < 3) throw ConfigError("regression_band_scan: window must be at least 3");
    check_length(trace, w, "regression_band_scan");
    RegressionBandReport report;
    report.window = w;
    report.multiplier = multiplier;
    const Eigen::Index m = trace.values.size();
    for (Eigen::Index t = w; t < m; ++t) {
        double tm = 0.0, ym = 0.0;
        for (Eigen::Index i = t - w; i < t; ++i) {
            tm += trace.times[static_cast<std::size_t>(i)];
            ym += trace.values(i);
        }
        tm /= w;
        ym /= w;
        double sxx = 0.0, sxy = 0.0;
        for (Eigen::Index i = t - w; i < t; ++i) {
            const double dx = trace.times[static_cast<std::size_t>(i)] - tm;
            sxx += dx * dx;
            sxy += dx * (trace.values(i) - ym);
        }
        const double slope = sxy / sxx;
        const double intercept = ym - slope * tm;
        double rss = 0.0;
        for (Eigen::Index i = t - w; i < t; ++i) {
            const double r = trace.values(i) - (intercept + slope * trace.times[static_cast<std::size_t>(i)]);
            rss += r * r;
        }
        const double se = std::sqrt(rss / (w - 2));
        RegressionBandEntry e;
        e.time = trace.times[static_cast<std::size_t>(t)];
        e.observed = trace.values(t);
        e.predicted = intercept + slope * e.time;
        const double deviation = std::abs(e.observed - e.predicted);
        if (se < 1e-12) {
            e.halfWidth = std::max(1e-12, multiplier * 1e-12);
            e.flag = deviation > 1e-9;
        } else {
            e.halfWidth = multiplier * se;
            e.flag = deviation > e.halfWidth;
        }
        report.perTime.push_back(e);
    }
    return report;
}

std::string sigmage_report_json(const SigmageReport& report) {
    nlohmann::ordered_json j;
    j["method"] = "sigmage";
    j["config"] = {{"window", report.window}, {"threshold", report.threshold}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& e : report.perTime)
        rows.push_back({{"t", e.time},
                        {"sigmage", number_or_string(e.sigmage)},
                        {"windowMean", e.windowMean},
                        {"windowSd", e.windowSd},
                        {"flag", e.flag}});
    j["perTime"] = rows;
    return j.dump(2) + "\n";
}

std::string regression_report_json(const RegressionBandReport& report) {
    nlohmann::ordered_json j;
    j["method"] = "regression_band";
    j["config"] = {{"window", report.window}, {"multiplier", report.multiplier}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& e : report.perTime)
        rows.push_back({{"t", e.time},
                        {"observed", e.observed},
                        {"predicted", e.predicted},
                        {"halfWidth", e.halfWidth},
                        {"flag", e.flag}});
    j["perTime"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace netmirror
