#include "nehari/spline.hpp"

#include "nehari/errors.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace nehari {

namespace {

constexpr int kDegree = 3;
constexpr int kGauss = 8;

// Gauss-Legendre on [-1, 1].
constexpr std::array<double, kGauss> kNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, kGauss> kWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

// Values and first two derivatives of the four cubic B-splines alive on knot span `span`.
struct Basis {
    double d[3][kDegree + 1];
};

Basis basis_ders(const std::vector<double>& t, int span, double x) {
    double ndu[kDegree + 1][kDegree + 1];
    double left[kDegree + 1], right[kDegree + 1];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= kDegree; ++j) {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    Basis out{};
    for (int j = 0; j <= kDegree; ++j) out.d[0][j] = ndu[j][kDegree];
    double a[2][kDegree + 1];
    for (int r = 0; r <= kDegree; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= 2; ++k) {
            double dk = 0.0;
            const int rk = r - k, pk = kDegree - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                dk = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : kDegree - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                dk += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                dk += a[s2][k] * ndu[r][pk];
            }
            out.d[k][r] = dk;
            std::swap(s1, s2);
        }
    }
    for (int r = 0; r <= kDegree; ++r) {
        out.d[1][r] *= kDegree;
        out.d[2][r] *= kDegree * (kDegree - 1);
    }
    return out;
}

}  // namespace

SplineSpace::SplineSpace(const RadialGrid& grid) {
    const auto& geom = grid.geom;
    const Eigen::Index m = grid.size();
    if (m < 4) throw StencilError("spline space needs at least 4 nodes");
    size_ = m;
    const int n = geom.n;
    const double omega = sphere_area(n);
    const bool sphere = geom.kind == GeometryKind::RoundSphere;

    std::vector<double> edges(m + 1);
    for (Eigen::Index j = 0; j <= m; ++j) edges[j] = geom.R * std::pow(double(j) / double(m), grid.grading);
    edges[m] = geom.R;
    std::vector<double> t;
    t.reserve(m + 7);
    for (int k = 0; k < kDegree; ++k) t.push_back(0.0);
    for (double e : edges) t.push_back(e);
    for (int k = 0; k < kDegree; ++k) t.push_back(geom.R);

    // B_0 + B_1 carries u'(0) = 0; B_{m+1}, B_{m+2} are dropped for the clamped end.
    auto column = [m](Eigen::Index k) -> Eigen::Index {
        if (k <= 1) return 0;
        if (k <= m) return k - 1;
        return -1;
    };

    const Eigen::Index nq = m * kGauss;
    points_.resize(nq);
    measure_.resize(nq);
    using Triplets = std::vector<Eigen::Triplet<double>>;
    Triplets tv, ts, tl;
    tv.reserve(nq * 4);
    ts.reserve(nq * 4);
    tl.reserve(nq * 4);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double a = edges[j], b = edges[j + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        const int span = int(j) + kDegree;
        for (int g = 0; g < kGauss; ++g) {
            const Eigen::Index row = j * kGauss + g;
            const double x = mid + half * kNodes[g];
            points_[row] = x;
            measure_[row] = half * kWeights[g] * omega * std::pow(sphere ? std::sin(x) : x, n - 1);
            const double drift = geom.drift(x);
            const Basis B = basis_ders(t, span, x);
            for (int r = 0; r <= kDegree; ++r) {
                const Eigen::Index col = column(span - kDegree + r);
                if (col < 0) continue;
                tv.emplace_back(row, col, B.d[0][r]);
                ts.emplace_back(row, col, B.d[1][r]);
                tl.emplace_back(row, col, B.d[2][r] + drift * B.d[1][r]);
            }
        }
    }
    value_.resize(nq, m);
    slope_.resize(nq, m);
    laplace_.resize(nq, m);
    value_.setFromTriplets(tv.begin(), tv.end());
    slope_.setFromTriplets(ts.begin(), ts.end());
    laplace_.setFromTriplets(tl.begin(), tl.end());

    Triplets tc;
    tc.reserve(m * 4);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = grid.nodes[i];
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        const Eigen::Index j = std::min<Eigen::Index>(std::max<Eigen::Index>(it - edges.begin() - 1, 0), m - 1);
        const int span = int(j) + kDegree;
        const Basis B = basis_ders(t, span, x);
        for (int r = 0; r <= kDegree; ++r) {
            const Eigen::Index col = column(span - kDegree + r);
            if (col >= 0) tc.emplace_back(i, col, B.d[0][r]);
        }
    }
    colloc_.resize(m, m);
    colloc_.setFromTriplets(tc.begin(), tc.end());
    lu_ = std::make_shared<Eigen::SparseLU<ColMatrix>>(colloc_);
    lu_t_ = std::make_shared<Eigen::SparseLU<ColMatrix>>(ColMatrix(colloc_.transpose()));
    if (lu_->info() != Eigen::Success || lu_t_->info() != Eigen::Success)
        throw NumericalError("spline collocation matrix is singular");
}

Eigen::VectorXd SplineSpace::coefficients(const Eigen::VectorXd& nodal) const {
    if (nodal.size() != size_) throw ShapeError("nodal vector length does not match the spline space");
    return lu_->solve(nodal);
}

Eigen::VectorXd SplineSpace::pullback(const Eigen::VectorXd& coeff_dual) const {
    if (coeff_dual.size() != size_) throw ShapeError("dual vector length does not match the spline space");
    return lu_t_->solve(coeff_dual);
}

}  // namespace nehari
