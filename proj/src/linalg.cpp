#include "tagex/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace tagex::la {

template <class T>
static std::vector<T> solve_impl(Dense<T> A, std::vector<T> b) {
    const int n = A.n;
    if (int(b.size()) != n) throw std::invalid_argument("solve: size mismatch");
    std::vector<int> piv(size_t(n), 0);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(A(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > best) {
                best = std::abs(A(i, k));
                p = i;
            }
        if (best == 0.0) throw std::runtime_error("solve: singular matrix");
        piv[size_t(k)] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[size_t(k)], b[size_t(p)]);
        }
        T inv = T(1) / A(k, k);
        for (int i = k + 1; i < n; ++i) {
            T f = A(i, k) * inv;
            if (f == T(0)) continue;
            A(i, k) = f;
            for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
            b[size_t(i)] -= f * b[size_t(k)];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        T acc = b[size_t(i)];
        for (int j = i + 1; j < n; ++j) acc -= A(i, j) * b[size_t(j)];
        b[size_t(i)] = acc / A(i, i);
    }
    return b;
}

std::vector<double> solve(const DenseD& A, const std::vector<double>& b) { return solve_impl(A, b); }
std::vector<std::complex<double>> solve(const DenseC& A, const std::vector<std::complex<double>>& b) {
    return solve_impl(A, b);
}

DenseC matmul(const DenseC& A, const DenseC& B) {
    const int n = A.n;
    DenseC C(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            std::complex<double> aik = A(i, k);
            if (aik == std::complex<double>(0)) continue;
            for (int j = 0; j < n; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

static double norm_inf(const DenseC& A) {
    double best = 0.0;
    for (int i = 0; i < A.n; ++i) {
        double r = 0.0;
        for (int j = 0; j < A.n; ++j) r += std::abs(A(i, j));
        best = std::max(best, r);
    }
    return best;
}

DenseC expm(const DenseC& A0) {
    const int n = A0.n;
    static const double c[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
                                 129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
                                 1323241920.0,        40840800.0,          960960.0,           16380.0,
                                 182.0,               1.0};
    DenseC A = A0;
    double nrm = norm_inf(A);
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (nrm > theta13) {
        squarings = int(std::ceil(std::log2(nrm / theta13)));
        double scale = std::ldexp(1.0, -squarings);
        for (auto& v : A.a) v *= scale;
    }
    DenseC I(n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    DenseC A2 = matmul(A, A);
    DenseC A4 = matmul(A2, A2);
    DenseC A6 = matmul(A2, A4);
    auto lin = [&](double w0, const DenseC& M0, double w2, const DenseC& M2, double w4, const DenseC& M4, double w6,
                   const DenseC& M6) {
        DenseC R(n);
        for (size_t i = 0; i < R.a.size(); ++i) R.a[i] = w0 * M0.a[i] + w2 * M2.a[i] + w4 * M4.a[i] + w6 * M6.a[i];
        return R;
    };
    DenseC W1 = lin(c[9], I, c[11], A2, c[13], A4, 0.0, A6);
    DenseC W1h = matmul(A6, W1);
    DenseC W2 = lin(c[1], I, c[3], A2, c[5], A4, c[7], A6);
    for (size_t i = 0; i < W2.a.size(); ++i) W2.a[i] += W1h.a[i];
    DenseC U = matmul(A, W2); // odd part
    DenseC Z1 = lin(c[8], I, c[10], A2, c[12], A4, 0.0, A6);
    DenseC Z1h = matmul(A6, Z1);
    DenseC V = lin(c[0], I, c[2], A2, c[4], A4, c[6], A6); // even part
    for (size_t i = 0; i < V.a.size(); ++i) V.a[i] += Z1h.a[i];
    // solve (V - U) X = (V + U)
    DenseC L(n), R(n);
    for (size_t i = 0; i < L.a.size(); ++i) {
        L.a[i] = V.a[i] - U.a[i];
        R.a[i] = V.a[i] + U.a[i];
    }
    DenseC X(n);
    for (int j = 0; j < n; ++j) {
        std::vector<std::complex<double>> col(size_t(n), 0.0);
        for (int i = 0; i < n; ++i) col[size_t(i)] = R(i, j);
        auto x = solve(L, col);
        for (int i = 0; i < n; ++i) X(i, j) = x[size_t(i)];
    }
    for (int k = 0; k < squarings; ++k) X = matmul(X, X);
    return X;
}

} // namespace tagex::la
