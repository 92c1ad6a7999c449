#include "uniflux/linalg.hpp"

#include <algorithm>

#include <lapacke.h>
#include <fmt/format.h>

#include "uniflux/errors.hpp"

namespace uniflux {

EigenPairs tridiagonal_lowest(const std::vector<double>& diag, const std::vector<double>& off,
                              int count, bool want_vectors) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    if (n < 1 || off.size() + 1 != diag.size())
        fail(ErrorKind::InvalidArgument, "tridiagonal matrix has inconsistent sizes");
    count = std::clamp(count, 1, static_cast<int>(n));

    std::vector<double> d(diag), e(off);
    e.push_back(0.0);
    std::vector<double> w(n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
    EigenPairs out;
    if (want_vectors) out.vectors.resize(n, count);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(
        LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, count,
        0.0, &found, w.data(), want_vectors ? out.vectors.data() : nullptr, n, isuppz.data());
    if (info != 0 || found != count)
        fail(ErrorKind::NonConvergence, fmt::format("dstevr failed (info = {}, found = {})", info, found));
    out.values.assign(w.begin(), w.begin() + count);
    return out;
}

EigenPairs symmetric_lowest(const Eigen::MatrixXd& a, int count, bool want_vectors) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (n < 1 || a.cols() != a.rows()) fail(ErrorKind::InvalidArgument, "matrix must be square");
    count = std::clamp(count, 1, static_cast<int>(n));

    Eigen::MatrixXd work = a;
    std::vector<double> w(n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
    EigenPairs out;
    if (want_vectors) out.vectors.resize(n, count);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(
        LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, count,
        0.0, &found, w.data(), want_vectors ? out.vectors.data() : nullptr, n, isuppz.data());
    if (info != 0 || found != count)
        fail(ErrorKind::NonConvergence, fmt::format("dsyevr failed (info = {}, found = {})", info, found));
    out.values.assign(w.begin(), w.begin() + count);
    return out;
}

}  // namespace uniflux
