#include "paofed/selection_mask.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace paofed {

namespace {
int wrap(long long v, int dim) {
    const long long r = v % dim;
    return static_cast<int>(r < 0 ? r + dim : r);
}
}  // namespace

SelectionMask::SelectionMask(std::vector<int> indices, int dim)
    : indices_(std::move(indices)), dim_(dim) {
    if (dim_ < 1) throw std::invalid_argument("mask dimension must be positive");
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw std::invalid_argument("mask indices must be distinct");
    if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= dim_))
        throw std::invalid_argument("mask index out of range");
}

SelectionMask SelectionMask::circular(int start, int m, int dim) {
    if (m < 0 || m > dim) throw std::invalid_argument("mask size must lie in [0, dim]");
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = wrap(static_cast<long long>(start) + i, dim);
    return SelectionMask(std::move(idx), dim);
}

SelectionMask SelectionMask::full(int dim) { return circular(0, dim, dim); }

bool SelectionMask::contains(int coordinate) const {
    return std::binary_search(indices_.begin(), indices_.end(), coordinate);
}

SelectionMask SelectionMask::circshift(int shift) const {
    std::vector<int> idx = indices_;
    for (int& i : idx) i = wrap(static_cast<long long>(i) + shift, dim_);
    return SelectionMask(std::move(idx), dim_);
}

MaskScheduler::MaskScheduler(int dim, int mask_size, Coordination coordination)
    : dim_(dim), mask_size_(mask_size), coordination_(coordination) {
    if (dim < 1) throw std::invalid_argument("model dimension must be positive");
    if (mask_size < 1 || mask_size > dim)
        throw std::invalid_argument("mask size must lie in [1, dim]");
}

SelectionMask MaskScheduler::downlink(int client, int iteration) const {
    long long start = static_cast<long long>(mask_size_) * iteration;
    if (coordination_ == Coordination::uncoordinated)
        start += static_cast<long long>(mask_size_) * client;
    return SelectionMask::circular(wrap(start, dim_), mask_size_, dim_);
}

std::vector<SelectionMask> MaskScheduler::advance_masks(int iteration, int clients) const {
    std::vector<SelectionMask> out;
    out.reserve(static_cast<std::size_t>(clients));
    for (int k = 0; k < clients; ++k) out.push_back(downlink(k, iteration));
    return out;
}

int MaskScheduler::period() const { return dim_ / std::gcd(dim_, mask_size_); }

}  // namespace paofed
