#include "smartpick/gp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace smartpick {

namespace {

// Candidate per-dimension length scales for the marginal-likelihood grid
// search; fleet coordinates are small integers, so this brackets "nearly
// independent" through "smooth across the whole grid".
constexpr std::array<double, 4> kLengthScaleGrid = {0.5, 1.0, 2.0, 4.0};

double se_kernel(const std::array<double, 2>& a, const std::array<double, 2>& b, double sf2,
                 const std::array<double, 2>& ls) {
    const double d0 = (a[0] - b[0]) / ls[0];
    const double d1 = (a[1] - b[1]) / ls[1];
    return sf2 * std::exp(-0.5 * (d0 * d0 + d1 * d1));
}

} // namespace

GpSurrogate::GpSurrogate(double noise_variance) : noise_var_(noise_variance) {
    if (!(noise_variance >= 0.0)) throw ValidationError("gp: noise variance must be >= 0");
}

void GpSurrogate::add(const std::array<double, 2>& x, double y) {
    xs_.push_back(x);
    ys_.push_back(y);
    fitted_ = false;
}

void GpSurrogate::fit() {
    const auto n = static_cast<Eigen::Index>(xs_.size());
    if (n == 0) throw StateError("gp: nothing observed yet");

    mean_y_ = 0;
    for (double y : ys_) mean_y_ += y;
    mean_y_ /= static_cast<double>(n);

    double var = 0;
    for (double y : ys_) var += (y - mean_y_) * (y - mean_y_);
    var /= static_cast<double>(n);
    sf2_ = std::max(var, 1e-12);
    jitter_ = sf2_ * 1e-10;

    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) yc(i) = ys_[static_cast<std::size_t>(i)] - mean_y_;

    double best_ml = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_L;
    Eigen::VectorXd best_alpha;
    std::array<double, 2> best_ls = {1.0, 1.0};

    for (double l0 : kLengthScaleGrid) {
        for (double l1 : kLengthScaleGrid) {
            const std::array<double, 2> ls = {l0, l1};
            Eigen::MatrixXd K(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double v = se_kernel(xs_[static_cast<std::size_t>(i)],
                                               xs_[static_cast<std::size_t>(j)], sf2_, ls);
                    K(i, j) = v;
                    K(j, i) = v;
                }
            Eigen::MatrixXd Kn = K;
            Kn.diagonal().array() += noise_var_ + jitter_;
            Eigen::LLT<Eigen::MatrixXd> llt(Kn);
            if (llt.info() != Eigen::Success) continue;
            Eigen::VectorXd alpha = llt.solve(yc);
            if (noise_var_ == 0.0) {
                // polish toward the unjittered system K a = yc so the
                // posterior mean interpolates observations tightly
                for (int it = 0; it < 3; ++it) {
                    Eigen::VectorXd r = yc - K * alpha;
                    alpha += llt.solve(r);
                }
            }
            double logdet = 0;
            const Eigen::MatrixXd& L = llt.matrixL();
            for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(L(i, i));
            const double ml = -0.5 * yc.dot(llt.solve(yc)) - logdet -
                              0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
            if (ml > best_ml) {
                best_ml = ml;
                best_L = L;
                best_alpha = alpha;
                best_ls = ls;
            }
        }
    }
    if (!std::isfinite(best_ml)) throw StateError("gp: kernel factorization failed on all scales");

    ls_ = best_ls;
    chol_.assign(static_cast<std::size_t>(n * n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            chol_[static_cast<std::size_t>(i * n + j)] = best_L(i, j);
    alpha_.assign(best_alpha.data(), best_alpha.data() + n);
    fitted_ = true;
}

GpSurrogate::Posterior GpSurrogate::posterior(const std::array<double, 2>& x) const {
    if (!fitted_) throw StateError("gp: fit() before querying the posterior");
    const auto n = static_cast<Eigen::Index>(xs_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i)
        k(i) = se_kernel(x, xs_[static_cast<std::size_t>(i)], sf2_, ls_);

    Posterior p;
    double mu = mean_y_;
    for (Eigen::Index i = 0; i < n; ++i) mu += k(i) * alpha_[static_cast<std::size_t>(i)];
    p.mean = mu;

    Eigen::Map<const Eigen::MatrixXd> Lmap(chol_.data(), n, n);
    // chol_ stores L row-major; Map default is column-major, so Lmap is L^T.
    Eigen::VectorXd v =
        Lmap.transpose().triangularView<Eigen::Lower>().solve(k);
    p.variance = std::max(0.0, sf2_ - v.squaredNorm());
    return p;
}

double probability_of_improvement(double mean, double stddev, double f_best, double xi) {
    if (!(stddev >= 0.0)) throw DomainError("pi: stddev must be >= 0");
    if (stddev < 1e-12) return mean > f_best + xi ? 1.0 : 0.0;
    const double z = (mean - f_best - xi) / stddev;
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace smartpick
