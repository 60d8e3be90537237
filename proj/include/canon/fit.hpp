#pragma once

#include <vector>

namespace canon {

struct LinearFit {
    std::vector<double> coef;
    std::vector<double> stderr_of;
    double residual_rms = 0.0;
};

// Least squares y ~ sum_j coef_j * columns[j]; columns are rescaled internally.
LinearFit least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y);

struct SlopeFit {
    double slope = 0.0;
    double stderr_of = 0.0;
    double intercept = 0.0;
    double log_term = 0.0;  // coefficient of ln x when requested
};

// y ~ slope * x (+ c * ln x) + b.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, bool with_log_term);

enum class Extreme { min, max };

// Estimate of liminf or limsup of B(n) / (n ln n) from B(1..N).
struct NLogNRatio {
    double corrected = 0.0;  // nuisance-regressed extreme over [N/2, N]
    double raw = 0.0;        // plain extreme of B(n) / (n ln n) over [N/2, N]
    double drift = 0.0;      // change of the corrected extreme against the previous dyadic window
    double stirling = 0.0;   // extreme of B(n) / ln n! over [N/2, N], no regression
    double stirling_drift = 0.0;
    double misfit = 0.0;     // rms residual of the nuisance regression relative to |B(N)|
};

// B[i] holds B(i + 1). Needs N >= 16.
NLogNRatio nlogn_ratio(const std::vector<double>& B, Extreme which);

}  // namespace canon
