#include "zeropi/linalg.hpp"
#include "zeropi/errors.hpp"

#include <lapacke.h>
#include <string>
#include <vector>

namespace zeropi {

EigenPairs lowest_eigenpairs(CMatrix h, int k, bool want_vectors)
{
    const lapack_int n = static_cast<lapack_int>(h.rows());
    require(h.rows() == h.cols(), "lowest_eigenpairs: matrix is not square");
    require(k >= 1, "lowest_eigenpairs: k must be positive");
    require(k <= n, "lowest_eigenpairs: k=" + std::to_string(k) + " exceeds dimension " + std::to_string(n));

    EigenPairs out;
    RVector w(n);
    CMatrix z;
    if (want_vectors) z.resize(n, k);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
    lapack_int found = 0;
    lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', 'L', n,
                                     reinterpret_cast<lapack_complex_double*>(h.data()), n, 0.0, 0.0,
                                     1, k, 0.0, &found, w.data(),
                                     want_vectors ? reinterpret_cast<lapack_complex_double*>(z.data()) : nullptr,
                                     want_vectors ? n : 1, isuppz.data());
    if (info != 0 || found != k)
        throw NumericalError("zheevr failed (info=" + std::to_string(info) + ", found=" + std::to_string(found) + ")");
    out.values = w.head(k);
    out.vectors = std::move(z);
    return out;
}

double hermiticity_error(const CMatrix& h)
{
    return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace zeropi
