#pragma once
// Small dense linear algebra and a self-contained RNG.
//
// Everything trains in double precision; checkpoints downcast to float32.
// The RNG avoids std::uniform_*_distribution so that streams are identical
// across standard library implementations.

#include <cmath>
#include <cstdint>
#include <vector>

namespace pathkg {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(size_t(r) * c, fill) {}

    double& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
    double operator()(int i, int j) const { return a[size_t(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

// y = M x
inline void matvec(const Mat& m, const Vec& x, Vec& y) {
    y.assign(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = &m.a[size_t(i) * m.cols];
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

// y = M^T x
inline void matvec_t(const Mat& m, const Vec& x, Vec& y) {
    y.assign(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = &m.a[size_t(i) * m.cols];
        for (int j = 0; j < m.cols; ++j) y[j] += row[j] * x[i];
    }
}

// M += s * u v^T
inline void add_outer(Mat& m, const Vec& u, const Vec& v, double s = 1.0) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = &m.a[size_t(i) * m.cols];
        const double su = s * u[i];
        for (int j = 0; j < m.cols; ++j) row[j] += su * v[j];
    }
}

inline void axpy(Vec& y, const Vec& x, double s) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

enum class Norm { L1, L2 };

inline double norm_value(const Vec& d, Norm n) {
    if (n == Norm::L1) {
        double s = 0.0;
        for (double x : d) s += std::fabs(x);
        return s;
    }
    return l2_norm(d);
}

// Gradient of norm_value at d; the subgradient at kinks is taken as 0.
inline Vec norm_grad(const Vec& d, Norm n) {
    Vec g(d.size(), 0.0);
    if (n == Norm::L1) {
        for (size_t i = 0; i < d.size(); ++i)
            g[i] = d[i] > 0.0 ? 1.0 : (d[i] < 0.0 ? -1.0 : 0.0);
        return g;
    }
    double len = l2_norm(d);
    if (len > 0.0) {
        for (size_t i = 0; i < d.size(); ++i) g[i] = d[i] / len;
    }
    return g;
}

// splitmix64-seeded mersenne twister with explicit draw helpers.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // warm the state through splitmix so nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next_u64();
    }

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform in [0, n)
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

private:
    uint64_t state_;
};

}  // namespace pathkg
