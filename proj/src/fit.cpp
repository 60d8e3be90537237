#include "canon/fit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "canon/error.hpp"

namespace canon {

LinearFit least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
    const auto m = static_cast<Eigen::Index>(y.size());
    const auto k = static_cast<Eigen::Index>(columns.size());
    if (k == 0 || m < k) fail(ErrorKind::insufficient_data, "least squares needs at least as many points as unknowns");
    Eigen::MatrixXd A(m, k);
    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& c = columns[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(c.size()) != m) fail(ErrorKind::precondition, "column length mismatch");
        double norm = 0.0;
        for (double v : c) norm += v * v;
        norm = std::sqrt(norm);
        scale(j) = norm > 0 ? norm : 1.0;
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = c[static_cast<std::size_t>(i)] / scale(j);
    }
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::VectorXd x = qr.solve(b);
    Eigen::VectorXd r = A * x - b;

    LinearFit out;
    const double rss = r.squaredNorm();
    out.residual_rms = std::sqrt(rss / static_cast<double>(m));
    const double sigma2 = m > k ? rss / static_cast<double>(m - k) : 0.0;
    Eigen::MatrixXd cov = (A.transpose() * A).inverse() * sigma2;
    for (Eigen::Index j = 0; j < k; ++j) {
        out.coef.push_back(x(j) / scale(j));
        out.stderr_of.push_back(std::sqrt(std::max(0.0, cov(j, j))) / scale(j));
    }
    for (double c : out.coef)
        if (!std::isfinite(c)) fail(ErrorKind::numeric, "least squares produced a non-finite coefficient");
    return out;
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, bool with_log_term) {
    std::vector<std::vector<double>> cols{x};
    if (with_log_term) {
        std::vector<double> lx;
        for (double v : x) {
            if (!(v > 0)) fail(ErrorKind::domain, "log term needs positive abscissae");
            lx.push_back(std::log(v));
        }
        cols.push_back(std::move(lx));
    }
    cols.emplace_back(x.size(), 1.0);
    const auto f = least_squares(cols, y);
    SlopeFit s;
    s.slope = f.coef[0];
    s.stderr_of = f.stderr_of[0];
    s.intercept = f.coef.back();
    if (with_log_term) s.log_term = f.coef[1];
    return s;
}

NLogNRatio nlogn_ratio(const std::vector<double>& B, Extreme which) {
    const auto N = static_cast<std::int64_t>(B.size());
    if (N < 16) fail(ErrorKind::insufficient_data, "growth ratio needs at least 16 terms");

    // Nuisance basis evaluated for n = 1..N.
    std::vector<double> lfact(static_cast<std::size_t>(N)), lnln(static_cast<std::size_t>(N));
    double acc = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
        lfact[static_cast<std::size_t>(n - 1)] = std::lgamma(static_cast<double>(n) + 1.0);
        if (n >= 2) acc += std::log(std::log(static_cast<double>(n)));
        lnln[static_cast<std::size_t>(n - 1)] = acc;
    }

    const auto lo = std::max<std::int64_t>(4, static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(N)))));
    std::vector<std::vector<double>> cols(4);
    std::vector<double> y;
    for (std::int64_t n = lo; n <= N; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        cols[0].push_back(lfact[i]);
        cols[1].push_back(lnln[i]);
        cols[2].push_back(static_cast<double>(n));
        cols[3].push_back(1.0);
        y.push_back(B[i]);
    }
    const auto f = least_squares(cols, y);

    auto corrected_at = [&](std::int64_t n) {
        const auto i = static_cast<std::size_t>(n - 1);
        return (B[i] - f.coef[1] * lnln[i] - f.coef[2] * static_cast<double>(n) - f.coef[3]) / lfact[i];
    };
    auto raw_at = [&](std::int64_t n) {
        const double x = static_cast<double>(n);
        return B[static_cast<std::size_t>(n - 1)] / (x * std::log(x));
    };
    auto extreme = [&](auto fn, std::int64_t a, std::int64_t b) {
        double e = fn(a);
        for (std::int64_t n = a + 1; n <= b; ++n) {
            const double v = fn(n);
            e = which == Extreme::min ? std::min(e, v) : std::max(e, v);
        }
        return e;
    };

    NLogNRatio out;
    const std::int64_t half = std::max<std::int64_t>(2, N / 2);
    out.corrected = extreme(corrected_at, half, N);
    out.raw = extreme(raw_at, half, N);
    auto stirling_at = [&](std::int64_t n) { return B[static_cast<std::size_t>(n - 1)] / lfact[static_cast<std::size_t>(n - 1)]; };
    out.stirling = extreme(stirling_at, half, N);
    const double scale = std::fabs(B.back());
    out.misfit = scale > 0 ? f.residual_rms / scale : 0.0;
    const std::int64_t quarter = std::max<std::int64_t>(2, N / 4);
    if (half - 1 > quarter) {
        out.drift = std::fabs(out.corrected - extreme(corrected_at, quarter, half - 1));
        out.stirling_drift = std::fabs(out.stirling - extreme(stirling_at, quarter, half - 1));
    }
    return out;
}

}  // namespace canon
