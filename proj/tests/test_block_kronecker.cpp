#include "doctest.h"
#include "paofed/block_kronecker.hpp"

#include <unsupported/Eigen/KroneckerProduct>

using namespace paofed;

namespace {

// Reference built entry by entry from the block definition.
Eigen::MatrixXd block_kron_ref(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int s) {
    const int ra = static_cast<int>(a.rows()) / s, ca = static_cast<int>(a.cols()) / s;
    const int rb = static_cast<int>(b.rows()) / s, cb = static_cast<int>(b.cols()) / s;
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < ra; ++i)
        for (int j = 0; j < ca; ++j)
            for (int k = 0; k < rb; ++k)
                for (int l = 0; l < cb; ++l) {
                    const Eigen::MatrixXd kr = Eigen::kroneckerProduct(a.block(i * s, j * s, s, s),
                                                                       b.block(k * s, l * s, s, s));
                    out.block((i * rb + k) * s * s, (j * cb + l) * s * s, s * s, s * s) = kr;
                }
    return out;
}

Eigen::VectorXd bvec_ref(const Eigen::MatrixXd& m, int s) {
    Eigen::VectorXd out(m.size());
    int pos = 0;
    for (int l = 0; l < m.cols() / s; ++l)
        for (int k = 0; k < m.rows() / s; ++k)
            for (int c = 0; c < s; ++c)
                for (int r = 0; r < s; ++r) out(pos++) = m(k * s + r, l * s + c);
    return out;
}

}  // namespace

TEST_SUITE("block_kronecker") {

TEST_CASE("block size one is the ordinary Kronecker product") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 2);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Random(2, 4);
    const Eigen::MatrixXd k = Eigen::kroneckerProduct(a, b);
    CHECK((block_kron(a, b, 1) - k).norm() < 1e-14);
}

TEST_CASE("dense and sparse agree with the block definition") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 4);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Random(4, 6);
    const Eigen::MatrixXd ref = block_kron_ref(a, b, 2);
    CHECK((block_kron(a, b, 2) - ref).norm() < 1e-13);
    const SparseMatrix sa = a.sparseView(), sb = b.sparseView();
    CHECK((Eigen::MatrixXd(block_kron(sa, sb, 2)) - ref).norm() < 1e-13);
}

TEST_CASE("bvec round trip and layout") {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 4);
    CHECK((bvec(m, 2) - bvec_ref(m, 2)).norm() == 0.0);
    CHECK(bvec_inv(bvec(m, 2), 4, 4, 2) == m);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Random(6, 9);
    CHECK(bvec_inv(bvec(r, 3), 6, 9, 3) == r);
}

TEST_CASE("vectorization identities") {
    const int s = 2;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Random(6, 6);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Random(6, 6);
    const Eigen::VectorXd lhs = bvec(a * c * b, s);
    const Eigen::VectorXd rhs = block_kron(Eigen::MatrixXd(b.transpose()), a, s) * bvec(c, s);
    CHECK((lhs - rhs).norm() < 1e-12);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 4);
    const Eigen::MatrixXd n = Eigen::MatrixXd::Random(4, 4);
    CHECK((m.transpose() * n).trace() == doctest::Approx(bvec(m, 2).dot(bvec(n, 2))));
}

TEST_CASE("argument checks") {
    CHECK_THROWS_AS(bvec(Eigen::MatrixXd::Zero(3, 4), 2), std::invalid_argument);
    CHECK_THROWS_AS(block_kron(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(2, 2), 2),
                    std::invalid_argument);
}

}
