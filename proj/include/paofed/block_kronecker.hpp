#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace paofed {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Block Kronecker product and block vectorization for matrices partitioned
// into square blocks of side `block_size`:
//
//   (A (x)_b B) has block (i, j) equal to [A_ij (x) B_kl]_{k,l}
//   bvec(M)     stacks vec(M_kl) over k within each block column l
//
// so that bvec(A C B) = (B^T (x)_b A) bvec(C) and
// trace(A^T B) = bvec(A)^T bvec(B).

Eigen::MatrixXd block_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int block_size);
SparseMatrix block_kron(const SparseMatrix& a, const SparseMatrix& b, int block_size);

Eigen::VectorXd bvec(const Eigen::MatrixXd& m, int block_size);
Eigen::MatrixXd bvec_inv(const Eigen::VectorXd& v, int rows, int cols, int block_size);

}  // namespace paofed
