#pragma once

#include <Eigen/Dense>
#include <complex>

namespace zeropi {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct EigenPairs {
    RVector values;   // ascending
    CMatrix vectors;  // columns, unit norm; empty when not requested
};

// Lowest k eigenpairs of a Hermitian matrix. Only the lower triangle is read.
// Takes the matrix by value; LAPACK works in place.
EigenPairs lowest_eigenpairs(CMatrix h, int k, bool want_vectors = true);

// Largest deviation from Hermiticity, max |h_ij - conj(h_ji)|.
double hermiticity_error(const CMatrix& h);

}  // namespace zeropi
