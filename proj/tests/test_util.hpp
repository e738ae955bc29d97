#pragma once
// Shared fixtures for the unit and acceptance tests.

#include <adalasso/core.hpp>
#include <adalasso/rng.hpp>

#include <cmath>
#include <filesystem>
#include <string>

namespace testutil {

using adalasso::Index;
using adalasso::Matrix;
using adalasso::Vector;

inline Matrix gaussian(Index n, Index p, adalasso::RandomStream& rng)
{
    Matrix X(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    return X;
}

/// n x p design with X^T X / n = I (p <= n), from a thin QR.
inline Matrix orthonormal_design(Index n, Index p, adalasso::RandomStream& rng)
{
    const Matrix Z = gaussian(n, p, rng);
    Eigen::HouseholderQR<Matrix> qr(Z);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, p);
    return Q * std::sqrt(static_cast<double>(n));
}

inline double soft(double z, double t)
{
    return z > t ? z - t : (z < -t ? z + t : 0.0);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("adalasso_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testutil
