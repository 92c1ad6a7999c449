#pragma once

#include <vector>

#include <Eigen/Dense>

namespace uniflux {

struct EigenPairs {
    std::vector<double> values;  // ascending
    Eigen::MatrixXd vectors;     // one unit-norm column per value (empty when not requested)
};

// Lowest `count` eigenpairs of the symmetric tridiagonal matrix (diag, off).
EigenPairs tridiagonal_lowest(const std::vector<double>& diag, const std::vector<double>& off,
                              int count, bool want_vectors);

// Lowest `count` eigenpairs of a dense symmetric matrix (lower triangle is read).
EigenPairs symmetric_lowest(const Eigen::MatrixXd& a, int count, bool want_vectors);

}  // namespace uniflux
