#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace paofed {

/// Random Fourier feature map for the Gaussian kernel
/// k(x, x') = exp(-||x - x'||^2 / (2 sigma^2)).
///
/// z_i(x) = sqrt(2/D) cos(w_i^T x + b_i) with w_i ~ N(0, sigma^-2 I) and
/// b_i ~ U[0, 2 pi). The map is immutable once built; the server and every
/// client of one experiment share a single instance.
class FeatureMap {
public:
    /// Draws frequencies and phases from a stream seeded by `seed`.
    /// Throws std::invalid_argument unless dim_in, dim_out >= 1 and
    /// kernel_width > 0.
    static FeatureMap build(std::uint64_t seed, int dim_in, int dim_out,
                            double kernel_width);

    /// Wraps explicit parameters (frequencies is D x L). Used by tests and by
    /// callers that need a degenerate map; `seed` is informational only.
    FeatureMap(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
               double kernel_width, std::uint64_t seed = 0);

    Eigen::VectorXd map(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Allocation-free variant of map(); `out` must have dim_out() entries.
    void map_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                  Eigen::Ref<Eigen::VectorXd> out) const;

    /// Maps each row of a T x L matrix, returning T x D.
    Eigen::MatrixXd map_rows(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;

    int dim_in() const { return static_cast<int>(frequencies_.cols()); }
    int dim_out() const { return static_cast<int>(frequencies_.rows()); }
    double kernel_width() const { return kernel_width_; }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& frequencies() const { return frequencies_; }
    const Eigen::VectorXd& phases() const { return phases_; }

    /// Text artifact holding (seed, L, D, sigma); deserialize() rebuilds the
    /// identical map from those four values.
    std::string serialize() const;
    static FeatureMap deserialize(std::string_view text);

private:
    Eigen::MatrixXd frequencies_;
    Eigen::VectorXd phases_;
    double kernel_width_;
    double scale_;
    std::uint64_t seed_;
};

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y,
                       double kernel_width);

/// Median pairwise Euclidean distance between the rows of `samples`.
double median_heuristic_width(const Eigen::Ref<const Eigen::MatrixXd>& samples);

}  // namespace paofed
