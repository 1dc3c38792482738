#pragma once

#include <cmath>
#include <vector>

#include "gtlab/common.hpp"

namespace gtlab {

// Cyclic Jacobi rotations on a dense symmetric matrix (row-major, n*n).
// Returns all eigenvalues in ascending order. Converges when every
// off-diagonal magnitude falls below tol.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n,
                                              double tol = 1e-12,
                                              int max_sweeps = 100) {
    require(n > 0, "jacobi_eigenvalues: empty matrix");
    require(a.size() == static_cast<std::size_t>(n) * n, "jacobi_eigenvalues: size mismatch");
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off = std::max(off, std::fabs(at(i, j)));
        if (off < tol) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (std::fabs(apq) < tol) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double app = at(p, p), aqq = at(q, q);
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(p, k) = at(k, p);
                    at(k, q) = s * akp + c * akq;
                    at(q, k) = at(k, q);
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

}  // namespace gtlab
