#include "tabdoor/kernels.hpp"

#include <cmath>

namespace tabdoor::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sumsq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double sumsqdiff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void relu(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* pre, const double* grad_out, double* grad_in, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) grad_in[i] = pre[i] > 0.0 ? grad_out[i] : 0.0;
}

void sigmoid(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
}

}  // namespace scalar

namespace {

bool detect_avx2() {
#if defined(TABDOOR_HAVE_AVX2_KERNELS) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

std::optional<Backend>& forced() {
    static std::optional<Backend> f;
    return f;
}

}  // namespace

bool cpu_has_avx2() {
    static const bool has = detect_avx2();
    return has;
}

Backend active_backend() {
    if (forced()) return *forced();
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

void force_backend(std::optional<Backend> b) { forced() = b; }

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

#ifdef TABDOOR_HAVE_AVX2_KERNELS
#define TABDOOR_DISPATCH(fn, ...) \
    return active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#define TABDOOR_DISPATCH_VOID(fn, ...)                 \
    if (active_backend() == Backend::avx2)             \
        avx2::fn(__VA_ARGS__);                         \
    else                                               \
        scalar::fn(__VA_ARGS__)
#else
#define TABDOOR_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#define TABDOOR_DISPATCH_VOID(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) { TABDOOR_DISPATCH(dot, a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    TABDOOR_DISPATCH_VOID(axpy, alpha, x, y, n);
}
double sum(const double* a, std::size_t n) { TABDOOR_DISPATCH(sum, a, n); }
double sumsq(const double* a, std::size_t n) { TABDOOR_DISPATCH(sumsq, a, n); }
double sumsqdiff(const double* a, const double* b, std::size_t n) {
    TABDOOR_DISPATCH(sumsqdiff, a, b, n);
}
void relu(const double* in, double* out, std::size_t n) { TABDOOR_DISPATCH_VOID(relu, in, out, n); }
void relu_backward(const double* pre, const double* grad_out, double* grad_in, std::size_t n) {
    TABDOOR_DISPATCH_VOID(relu_backward, pre, grad_out, grad_in, n);
}
void sigmoid(const double* in, double* out, std::size_t n) {
    TABDOOR_DISPATCH_VOID(sigmoid, in, out, n);
}

}  // namespace tabdoor::kernels
