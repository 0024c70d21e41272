#pragma once

#include <complex>
#include <vector>

namespace tagex::la {

template <class T>
struct Dense {
    int n = 0;
    std::vector<T> a; // row major
    Dense() = default;
    explicit Dense(int n_) : n(n_), a(size_t(n_) * size_t(n_), T(0)) {}
    T& operator()(int i, int j) { return a[size_t(i) * size_t(n) + size_t(j)]; }
    const T& operator()(int i, int j) const { return a[size_t(i) * size_t(n) + size_t(j)]; }
};

using DenseD = Dense<double>;
using DenseC = Dense<std::complex<double>>;

// Solves A x = b in place by partial-pivot LU; A is copied.
std::vector<double> solve(const DenseD& A, const std::vector<double>& b);
std::vector<std::complex<double>> solve(const DenseC& A, const std::vector<std::complex<double>>& b);

DenseC matmul(const DenseC& A, const DenseC& B);

// exp(A) by scaling and squaring with the diagonal Pade(13) approximant.
DenseC expm(const DenseC& A);

} // namespace tagex::la
