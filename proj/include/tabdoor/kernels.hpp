#pragma once

// Dense double-precision kernels used by the trainers and metrics.
// Scalar reference implementations plus AVX2 variants picked once at
// startup; force_backend() lets tests pin either path.

#include <cstddef>
#include <optional>

namespace tabdoor::kernels {

enum class Backend { scalar, avx2 };

bool cpu_has_avx2();
Backend active_backend();
void force_backend(std::optional<Backend> b);
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
double sumsqdiff(const double* a, const double* b, std::size_t n);
void relu(const double* in, double* out, std::size_t n);
// grad_in[i] = grad_out[i] if pre[i] > 0 else 0
void relu_backward(const double* pre, const double* grad_out, double* grad_in, std::size_t n);
void sigmoid(const double* in, double* out, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
double sumsqdiff(const double* a, const double* b, std::size_t n);
void relu(const double* in, double* out, std::size_t n);
void relu_backward(const double* pre, const double* grad_out, double* grad_in, std::size_t n);
void sigmoid(const double* in, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TABDOOR_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
double sumsqdiff(const double* a, const double* b, std::size_t n);
void relu(const double* in, double* out, std::size_t n);
void relu_backward(const double* pre, const double* grad_out, double* grad_in, std::size_t n);
void sigmoid(const double* in, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace tabdoor::kernels
