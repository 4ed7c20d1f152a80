#include "sevolab/common.hpp"

#include <Eigen/SVD>
#include <mutex>
#include <thread>

namespace sevolab {

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
    require(x.size() == y.size(), "fit_line: x/y length mismatch");
    require(x.size() >= 2, "fit_line: need at least two points");
    const std::size_t m = x.size();
    std::vector<double> weights(m, 1.0);
    if (!w.empty()) {
        require(w.size() == m, "fit_line: weight length mismatch");
        for (std::size_t i = 0; i < m; ++i) {
            require(w[i] > 0.0 && std::isfinite(w[i]), "fit_line: weights must be positive");
            weights[i] = w[i];
        }
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        require_finite(x[i], "fit_line x");
        require_finite(y[i], "fit_line y");
        sw += weights[i];
        sx += weights[i] * x[i];
        sy += weights[i] * y[i];
        sxx += weights[i] * x[i] * x[i];
        sxy += weights[i] * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    require(det > 0.0, "fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sxx * sy - sx * sxy) / det;

    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / sw;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += weights[i] * r * r;
        ss_tot += weights[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (m > 2) {
        const double sigma2 = ss_res / (static_cast<double>(m) - 2.0) * m / sw;
        fit.slope_se = std::sqrt(std::max(0.0, sigma2 * sw / det));
    }
    return fit;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
    require(threads >= 1, "parallel_for: threads must be >= 1");
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t wi = 0; wi < workers; ++wi) {
        pool.emplace_back([&, wi] {
            try {
                // Static stride partition: worker wi owns wi, wi+W, wi+2W, ...
                for (std::size_t i = wi; i < count; i += workers) fn(i);
            } catch (...) {
                std::scoped_lock lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    require(lo > 0 && hi > lo, "log_spaced: need 0 < lo < hi");
    require(count >= 2, "log_spaced: need at least two points");
    std::vector<double> out(count);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> uniform_grid(double horizon, int steps) {
    require(horizon > 0, "uniform_grid: horizon must be positive");
    require(steps >= 1, "uniform_grid: steps must be >= 1");
    std::vector<double> out(steps + 1);
    for (int i = 0; i <= steps; ++i) out[i] = horizon * i / steps;
    return out;
}

}  // namespace sevolab
