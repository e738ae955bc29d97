#include <adalasso/kernels.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace adalasso::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_squares(const double* x, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double max_abs(const double* x, std::size_t n)
{
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n)
{
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

} // namespace scalar

namespace {

constexpr KernelTable scalar_table{
    scalar::dot, scalar::axpy, scalar::sum_squares, scalar::max_abs, scalar::max_abs_diff};

#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable avx2_table{
    avx2::dot, avx2::axpy, avx2::sum_squares, avx2::max_abs, avx2::max_abs_diff};
#endif

const KernelTable* table_for(Backend b)
{
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2) return &avx2_table;
#endif
    (void)b;
    return &scalar_table;
}

Backend initial_backend()
{
    if (const char* env = std::getenv("ADALASSO_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && avx2_supported()) return Backend::avx2;
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot()
{
    static std::atomic<Backend> slot{initial_backend()};
    return slot;
}

} // namespace

bool avx2_compiled()
{
#if defined(__x86_64__) || defined(_M_X64)
    return true;
#else
    return false;
#endif
}

bool avx2_supported()
{
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

bool set_backend(Backend b)
{
    if (b == Backend::avx2 && !avx2_supported()) return false;
    backend_slot().store(b, std::memory_order_relaxed);
    return true;
}

std::string_view backend_name(Backend b)
{
    return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& table() { return *table_for(active_backend()); }

} // namespace adalasso::kernels
