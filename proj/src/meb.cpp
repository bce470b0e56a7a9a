#include "stav/meb.hpp"

#include <cmath>
#include <stdexcept>

#include "stav/kernels.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    return kern::active().sq_dist(a.data(), b.data(), a.size());
}

// Circumsphere of 1..d+1 affinely independent points: solve the Gram system
// G lambda = q with G_ij = (p_i - p_0) . (p_j - p_0), q_i = |p_i - p_0|^2 / 2.
// A near-singular system means the support is degenerate; the caller treats
// that as "no expansion possible".
bool circumsphere(const std::vector<const std::vector<double>*>& support, BallResult& out) {
    const std::size_t k = support.size();
    if (k == 0) {
        out.center.clear();
        out.radius = -1.0;  // contains nothing
        return true;
    }
    const std::vector<double>& p0 = *support[0];
    const std::size_t d = p0.size();
    if (k == 1) {
        out.center = p0;
        out.radius = 0.0;
        return true;
    }
    const std::size_t m = k - 1;
    std::vector<std::vector<double>> diff(m, std::vector<double>(d));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < d; ++c) diff[i][c] = (*support[i + 1])[c] - p0[c];
    }
    std::vector<std::vector<double>> g(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            g[i][j] = kern::active().dot(diff[i].data(), diff[j].data(), d);
        }
        g[i][m] = 0.5 * kern::active().dot(diff[i].data(), diff[i].data(), d);
    }
    // Gaussian elimination with partial pivoting
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        }
        if (std::abs(g[piv][col]) < 1e-12) return false;
        std::swap(g[piv], g[col]);
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = g[r][col] / g[col][col];
            for (std::size_t c = col; c <= m; ++c) g[r][c] -= f * g[col][c];
        }
    }
    std::vector<double> lambda(m);
    for (std::size_t i = m; i-- > 0;) {
        double v = g[i][m];
        for (std::size_t j = i + 1; j < m; ++j) v -= g[i][j] * lambda[j];
        lambda[i] = v / g[i][i];
    }
    out.center = p0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < d; ++c) out.center[c] += lambda[i] * diff[i][c];
    }
    out.radius = std::sqrt(dist2(out.center, p0));
    return true;
}

struct WelzlState {
    const std::vector<std::vector<double>>* pts = nullptr;
    std::vector<std::size_t> order;
    std::size_t dim = 0;
};

BallResult welzl(WelzlState& st, std::size_t n, std::vector<const std::vector<double>*>& support) {
    BallResult ball;
    circumsphere(support, ball);
    if (n == 0 || support.size() == st.dim + 1) return ball;

    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& p = (*st.pts)[st.order[i]];
        const bool inside = !ball.center.empty() &&
                            dist2(ball.center, p) <= ball.radius * ball.radius * (1.0 + 1e-12) + 1e-24;
        if (inside) continue;

        support.push_back(&p);
        BallResult grown = welzl(st, i, support);
        support.pop_back();
        if (!grown.center.empty()) {
            ball = grown;
            // move-to-front keeps the expected recursion shallow
            const std::size_t idx = st.order[i];
            for (std::size_t j = i; j > 0; --j) st.order[j] = st.order[j - 1];
            st.order[0] = idx;
        }
    }
    return ball;
}

}  // namespace

BallResult exact_meb(const std::vector<std::vector<double>>& points, std::uint64_t shuffle_seed) {
    if (points.empty()) throw std::invalid_argument("exact_meb: empty point set");
    const std::size_t d = points[0].size();
    if (d == 0) throw std::invalid_argument("exact_meb: zero-dimensional points");
    for (const auto& p : points) {
        if (p.size() != d) throw std::invalid_argument("exact_meb: mixed dimensions");
    }

    WelzlState st;
    st.pts = &points;
    st.dim = d;
    st.order.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) st.order[i] = i;
    std::mt19937_64 g(shuffle_seed);
    shuffle_deterministic(st.order, g);

    std::vector<const std::vector<double>*> support;
    BallResult ball = welzl(st, points.size(), support);

    // Tighten so the reported radius is exactly the farthest point distance.
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, dist2(ball.center, p));
    ball.radius = std::sqrt(worst);
    return ball;
}

}  // namespace stav
