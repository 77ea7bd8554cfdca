#pragma once

#include <array>
#include <vector>

#include "smartpick/errors.hpp"

namespace smartpick {

// Gaussian-process regressor over 2-D fleet coordinates with a squared-
// exponential kernel and per-dimension length scales. The signal variance is
// the sample variance of the targets; length scales are picked by a marginal-
// likelihood grid search at fit() time. With noise_variance = 0 the posterior
// mean interpolates the observations (a vanishing solver jitter is the only
// slack, relative error ~1e-9).
class GpSurrogate {
public:
    explicit GpSurrogate(double noise_variance = 0.0);

    void add(const std::array<double, 2>& x, double y);
    std::size_t size() const { return xs_.size(); }

    // Fits hyperparameters and factorizes the kernel matrix. Needs >= 1 point.
    void fit();

    struct Posterior {
        double mean = 0;
        double variance = 0; // >= 0
    };
    // Posterior at x; StateError before fit().
    Posterior posterior(const std::array<double, 2>& x) const;

    double length_scale(int dim) const { return ls_[static_cast<std::size_t>(dim)]; }
    double signal_variance() const { return sf2_; }

private:
    double noise_var_;
    std::vector<std::array<double, 2>> xs_;
    std::vector<double> ys_;

    // fitted state
    bool fitted_ = false;
    std::array<double, 2> ls_ = {1.0, 1.0};
    double sf2_ = 1.0;
    double mean_y_ = 0.0;
    double jitter_ = 0.0;
    std::vector<double> alpha_;      // (K + sn I)^-1 (y - mean)
    std::vector<double> chol_;       // lower Cholesky factor, row-major n x n
};

// Probability that f(x) improves on f_best by at least xi: Phi((mu - f_best -
// xi) / sigma); at sigma ~ 0 it degenerates to the indicator of
// mu > f_best + xi.
double probability_of_improvement(double mean, double stddev, double f_best, double xi);

} // namespace smartpick
