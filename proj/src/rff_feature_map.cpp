#include "paofed/rff_feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "paofed/random.hpp"

namespace paofed {

FeatureMap FeatureMap::build(std::uint64_t seed, int dim_in, int dim_out,
                             double kernel_width) {
    if (dim_in < 1 || dim_out < 1)
        throw std::invalid_argument("feature map dimensions must be positive");
    if (!(kernel_width > 0.0) || !std::isfinite(kernel_width))
        throw std::invalid_argument("kernel width must be positive");

    Rng rng = make_stream(seed, "feature_map");
    std::normal_distribution<double> normal(0.0, 1.0 / kernel_width);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    Eigen::MatrixXd w(dim_out, dim_in);
    Eigen::VectorXd b(dim_out);
    for (int i = 0; i < dim_out; ++i) {
        for (int j = 0; j < dim_in; ++j) w(i, j) = normal(rng);
        b(i) = phase(rng);
        if (b(i) >= 2.0 * std::numbers::pi) b(i) = 0.0;
    }
    return FeatureMap(std::move(w), std::move(b), kernel_width, seed);
}

FeatureMap::FeatureMap(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                       double kernel_width, std::uint64_t seed)
    : frequencies_(std::move(frequencies)),
      phases_(std::move(phases)),
      kernel_width_(kernel_width),
      seed_(seed) {
    if (frequencies_.rows() < 1 || frequencies_.cols() < 1)
        throw std::invalid_argument("feature map dimensions must be positive");
    if (phases_.size() != frequencies_.rows())
        throw std::invalid_argument("one phase per frequency row required");
    if (!(kernel_width_ > 0.0))
        throw std::invalid_argument("kernel width must be positive");
    for (double p : phases_)
        if (!(p >= 0.0 && p < 2.0 * std::numbers::pi))
            throw std::invalid_argument("phases must lie in [0, 2pi)");
    scale_ = std::sqrt(2.0 / static_cast<double>(frequencies_.rows()));
}

Eigen::VectorXd FeatureMap::map(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd z(dim_out());
    map_into(x, z);
    return z;
}

void FeatureMap::map_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                          Eigen::Ref<Eigen::VectorXd> out) const {
    if (x.size() != dim_in())
        throw std::invalid_argument("input length does not match feature map");
    if (out.size() != dim_out())
        throw std::invalid_argument("output length does not match feature map");
    out.noalias() = frequencies_ * x;
    out = scale_ * (out + phases_).array().cos().matrix();
}

Eigen::MatrixXd FeatureMap::map_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
    if (inputs.cols() != dim_in())
        throw std::invalid_argument("input width does not match feature map");
    Eigen::MatrixXd z = inputs * frequencies_.transpose();
    z.rowwise() += phases_.transpose();
    return scale_ * z.array().cos().matrix();
}

std::string FeatureMap::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "rff-gaussian v1\n"
        << "seed " << seed_ << "\n"
        << "dim_in " << dim_in() << "\n"
        << "dim_out " << dim_out() << "\n"
        << "kernel_width " << kernel_width_ << "\n";
    return out.str();
}

FeatureMap FeatureMap::deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic, version;
    in >> magic >> version;
    if (magic != "rff-gaussian" || version != "v1")
        throw std::invalid_argument("not a serialized feature map");

    std::uint64_t seed = 0;
    int dim_in = 0, dim_out = 0;
    double width = 0.0;
    int seen = 0;
    std::string key;
    while (in >> key) {
        if (key == "seed") in >> seed;
        else if (key == "dim_in") in >> dim_in;
        else if (key == "dim_out") in >> dim_out;
        else if (key == "kernel_width") in >> width;
        else throw std::invalid_argument("unknown feature map field: " + key);
        if (!in) throw std::invalid_argument("malformed feature map field: " + key);
        ++seen;
    }
    if (seen != 4) throw std::invalid_argument("incomplete feature map artifact");
    return build(seed, dim_in, dim_out, width);
}

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y,
                       double kernel_width) {
    return std::exp(-(x - y).squaredNorm() / (2.0 * kernel_width * kernel_width));
}

double median_heuristic_width(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
    const Eigen::Index n = samples.rows();
    if (n < 2) throw std::invalid_argument("median heuristic needs two samples");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back((samples.row(i) - samples.row(j)).norm());
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    if (d.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(d.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace paofed
