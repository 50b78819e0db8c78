#include "paofed/block_kronecker.hpp"

#include <stdexcept>
#include <vector>

namespace paofed {
namespace {

void check_partition(Eigen::Index rows, Eigen::Index cols, int b) {
    if (b < 1) throw std::invalid_argument("block size must be positive");
    if (rows % b != 0 || cols % b != 0)
        throw std::invalid_argument("matrix is not partitioned by the block size");
}

struct KronIndex {
    Eigen::Index b, rb, cb;
    // (row, col) of the product entry built from A(p, q) and B(r, s).
    std::pair<Eigen::Index, Eigen::Index> operator()(Eigen::Index p, Eigen::Index q,
                                                     Eigen::Index r, Eigen::Index s) const {
        const Eigen::Index bb = b * b;
        const Eigen::Index row = ((p / b) * rb + r / b) * bb + (p % b) * b + r % b;
        const Eigen::Index col = ((q / b) * cb + s / b) * bb + (q % b) * b + s % b;
        return {row, col};
    }
};

}  // namespace

Eigen::MatrixXd block_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int block_size) {
    check_partition(a.rows(), a.cols(), block_size);
    check_partition(b.rows(), b.cols(), block_size);
    const KronIndex idx{block_size, b.rows() / block_size, b.cols() / block_size};
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index q = 0; q < a.cols(); ++q)
        for (Eigen::Index p = 0; p < a.rows(); ++p) {
            const double av = a(p, q);
            if (av == 0.0) continue;
            for (Eigen::Index s = 0; s < b.cols(); ++s)
                for (Eigen::Index r = 0; r < b.rows(); ++r) {
                    const auto [row, col] = idx(p, q, r, s);
                    out(row, col) = av * b(r, s);
                }
        }
    return out;
}

SparseMatrix block_kron(const SparseMatrix& a, const SparseMatrix& b, int block_size) {
    check_partition(a.rows(), a.cols(), block_size);
    check_partition(b.rows(), b.cols(), block_size);
    const KronIndex idx{block_size, b.rows() / block_size, b.cols() / block_size};
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (Eigen::Index q = 0; q < a.outerSize(); ++q)
        for (SparseMatrix::InnerIterator ia(a, q); ia; ++ia)
            for (Eigen::Index s = 0; s < b.outerSize(); ++s)
                for (SparseMatrix::InnerIterator ib(b, s); ib; ++ib) {
                    const auto [row, col] = idx(ia.row(), ia.col(), ib.row(), ib.col());
                    t.emplace_back(row, col, ia.value() * ib.value());
                }
    SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Eigen::VectorXd bvec(const Eigen::MatrixXd& m, int block_size) {
    check_partition(m.rows(), m.cols(), block_size);
    const Eigen::Index b = block_size, rn = m.rows() / b, cn = m.cols() / b;
    Eigen::VectorXd v(m.size());
    Eigen::Index i = 0;
    for (Eigen::Index l = 0; l < cn; ++l)
        for (Eigen::Index k = 0; k < rn; ++k)
            for (Eigen::Index c = 0; c < b; ++c)
                for (Eigen::Index r = 0; r < b; ++r) v(i++) = m(k * b + r, l * b + c);
    return v;
}

Eigen::MatrixXd bvec_inv(const Eigen::VectorXd& v, int rows, int cols, int block_size) {
    check_partition(rows, cols, block_size);
    if (v.size() != static_cast<Eigen::Index>(rows) * cols)
        throw std::invalid_argument("vector length does not match the matrix shape");
    const Eigen::Index b = block_size, rn = rows / b, cn = cols / b;
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index l = 0; l < cn; ++l)
        for (Eigen::Index k = 0; k < rn; ++k)
            for (Eigen::Index c = 0; c < b; ++c)
                for (Eigen::Index r = 0; r < b; ++r) m(k * b + r, l * b + c) = v(i++);
    return m;
}

}  // namespace paofed
