#pragma once
// Dense vector kernels used by the coordinate-descent and Gram inner loops.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is picked once at runtime from CPUID; it
// can be pinned with set_backend() or the ADALASSO_KERNELS environment
// variable ("scalar" or "avx2").

#include <cstddef>
#include <span>
#include <string_view>

namespace adalasso::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable
{
    double (*dot)(const double* x, const double* y, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*sum_squares)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
} // namespace scalar

namespace avx2 {
// Available only when compiled for x86-64; calling them on a CPU without
// AVX2/FMA is undefined behaviour. Use the dispatched entry points instead.
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
} // namespace avx2

bool avx2_compiled();
bool avx2_supported();

Backend active_backend();
/// Returns false (and leaves the backend unchanged) if the requested backend
/// is not usable on this machine.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& table();

inline double dot(std::span<const double> x, std::span<const double> y)
{
    return table().dot(x.data(), y.data(), x.size());
}

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y)
{
    table().axpy(a, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x)
{
    return table().sum_squares(x.data(), x.size());
}

inline double max_abs(std::span<const double> x)
{
    return table().max_abs(x.data(), x.size());
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y)
{
    return table().max_abs_diff(x.data(), y.data(), x.size());
}

} // namespace adalasso::kernels
