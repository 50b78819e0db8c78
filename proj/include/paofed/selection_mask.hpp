#pragma once

#include <vector>

namespace paofed {

/// Sorted set of the model coordinates kept by a diagonal 0/1 selection
/// matrix.
class SelectionMask {
public:
    SelectionMask() = default;
    /// Throws std::invalid_argument on duplicates or indices outside [0, dim).
    SelectionMask(std::vector<int> indices, int dim);

    /// m consecutive coordinates starting at `start`, wrapping modulo dim.
    static SelectionMask circular(int start, int m, int dim);
    static SelectionMask full(int dim);

    const std::vector<int>& indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    int dim() const { return dim_; }
    bool empty() const { return indices_.empty(); }
    bool contains(int coordinate) const;

    /// Mask with every index moved by `shift` positions modulo dim.
    SelectionMask circshift(int shift) const;

    friend bool operator==(const SelectionMask&, const SelectionMask&) = default;

private:
    std::vector<int> indices_;
    int dim_ = 0;
};

enum class Coordination { coordinated, uncoordinated };

/// Rotating downlink schedule: M_{0,n} holds coordinates [m n, m n + m)
/// modulo D; uncoordinated clients are further offset by m k.
class MaskScheduler {
public:
    MaskScheduler(int dim, int mask_size, Coordination coordination);

    SelectionMask downlink(int client, int iteration) const;
    /// Downlink masks of clients 0..clients-1 at `iteration`.
    std::vector<SelectionMask> advance_masks(int iteration, int clients) const;

    /// Iterations after which the schedule repeats: D / gcd(D, m).
    int period() const;
    int dim() const { return dim_; }
    int mask_size() const { return mask_size_; }
    Coordination coordination() const { return coordination_; }

private:
    int dim_;
    int mask_size_;
    Coordination coordination_;
};

}  // namespace paofed
