#pragma once

#include "netmirror/mirror.hpp"

#include <string>
#include <vector>

namespace netmirror {

struct SigmageEntry {
    double time = 0.0;
    double sigmage = 0.0;
    double windowMean = 0.0;
    double windowSd = 0.0;
    bool flag = false;
};

struct SigmageReport {
    std::vector<SigmageEntry> perTime;
    int window = 5;
    double threshold = 5.0;
};

struct RegressionBandEntry {
    double time = 0.0;
    double observed = 0.0;
    double predicted = 0.0;
    double halfWidth = 0.0;
    bool flag = false;
};

struct RegressionBandReport {
    std::vector<RegressionBandEntry> perTime;
    int window = 5;
    double multiplier = 5.0;
};

/// For every index with a full trailing window of w values: deviation from
/// the window mean in units of the window's sample standard deviation
/// (divisor w - 1). A window with sd < 1e-12 yields +inf (flagged) when the
/// deviation exceeds 1e-12 and 0 otherwise.
SigmageReport sigmage_scan(const IsomapTrace& trace, int w = 5, double threshold = 5.0);

/// Least-squares line through the previous w points, extrapolated one step;
/// flagged when the observation leaves the band of multiplier x residual
/// standard error (divisor w - 2).
RegressionBandReport regression_band_scan(const IsomapTrace& trace, int w = 5, double multiplier = 5.0);

std::string sigmage_report_json(const SigmageReport& report);
std::string regression_report_json(const RegressionBandReport& report);

}  // namespace netmirror
