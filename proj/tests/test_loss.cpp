#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stav/loss.hpp"
#include "stav/meb.hpp"
#include "stav/rng.hpp"

using namespace stav;

namespace {

Features random_points(std::mt19937_64& g, std::size_t n, std::size_t d, double lo = -1.0,
                       double hi = 1.0) {
    Features phi(n, std::vector<double>(d));
    for (auto& p : phi)
        for (auto& v : p) v = uniform_in(g, lo, hi);
    return phi;
}

double rel_err(double a, double b) {
    const double m = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / m;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("squared hinge examples") {
    CHECK(squared_hinge(-0.5, 1) == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(squared_hinge(2.0, 1) == 0.0);
    CHECK(squared_hinge(1.0, 1) == 0.0);
    CHECK(squared_hinge(2.0, -1) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(squared_hinge(-1.0, -1) == 0.0);
    CHECK(squared_hinge(0.0, 1) == 1.0);
}

TEST_CASE("exact_meb handles canonical configurations") {
    // two points: midpoint, half distance
    Features two{{0, 0, 0}, {3, 0, 0}};
    BallResult b2 = exact_meb(two);
    CHECK(b2.radius == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(b2.center[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(b2.center[1] == doctest::Approx(0.0).scale(1).epsilon(1e-12));

    // unit-side equilateral triangle: circumradius 1/sqrt(3)
    Features tri{{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
    BallResult bt = exact_meb(tri);
    CHECK(bt.radius == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));

    // all identical points: zero radius
    Features same(7, std::vector<double>{0.4, -0.2, 0.1});
    BallResult bs = exact_meb(same);
    CHECK(bs.radius == 0.0);

    // interior points must not affect the ball
    Features with_interior{{-1, 0}, {1, 0}, {0, 0}, {0.2, 0.1}, {-0.3, 0.05}};
    BallResult bi = exact_meb(with_interior);
    CHECK(bi.radius == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact_meb contains all points and is locally minimal") {
    std::mt19937_64 g(101);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + uniform_index(g, 30);
        const std::size_t d = 1 + uniform_index(g, 5);
        Features pts = random_points(g, n, d, -2.0, 2.0);
        BallResult ball = exact_meb(pts);

        double worst = 0.0;
        for (const auto& p : pts) worst = std::max(worst, dist(ball.center, p));
        CHECK(worst <= ball.radius + 1e-9);
        CHECK(rel_err(worst, ball.radius) < 1e-9);

        // perturbation oracle: no nearby center does better
        for (int probe = 0; probe < 60; ++probe) {
            std::vector<double> c2 = ball.center;
            const double step = probe < 30 ? 1e-3 : 1e-2;
            for (auto& v : c2) v += uniform_in(g, -step, step);
            double w2 = 0.0;
            for (const auto& p : pts) w2 = std::max(w2, dist(c2, p));
            CHECK(w2 >= ball.radius - 1e-9);
        }
    }
}

TEST_CASE("exact_meb is deterministic for a fixed shuffle seed") {
    std::mt19937_64 g(103);
    Features pts = random_points(g, 25, 6);
    BallResult a = exact_meb(pts);
    BallResult b = exact_meb(pts);
    CHECK(a.radius == b.radius);
    CHECK(a.center == b.center);
}

TEST_CASE("relaxed radius: max pairwise distance") {
    Features two{{0, 0}, {3, 0}};
    CHECK(relaxed_radius_max(two) == doctest::Approx(3.0).epsilon(1e-12));

    std::mt19937_64 g(107);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + uniform_index(g, 20);
        Features pts = random_points(g, n, 4);
        double want = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) want = std::max(want, dist(pts[i], pts[j]));
        CHECK(rel_err(relaxed_radius_max(pts), want) < 1e-12);
    }
}

// The relaxed radius surrogate brackets the exact ball radius once halved:
// half the diameter never exceeds the radius, and in low dimension the radius
// stays below (1+sqrt(3))/2 times the half-diameter.
TEST_CASE("sandwich bound between relaxed and exact radius") {
    std::mt19937_64 g(109);
    const double upper = (1.0 + std::sqrt(3.0)) / 2.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_index(g, 49);
        const std::size_t d = 1 + uniform_index(g, 8);
        Features pts = random_points(g, n, d, -3.0, 3.0);
        const double half_diam = 0.5 * relaxed_radius_max(pts);
        const double r = exact_meb(pts).radius;
        CHECK(half_diam <= r + 1e-9);
        CHECK(r <= upper * half_diam + 1e-9);
        CHECK(relaxed_radius_max(pts) <= 2.0 * r + 1e-9);
    }
}

TEST_CASE("softmax radius weights form a distribution") {
    std::mt19937_64 g(113);
    for (double alpha : {0.0, 0.5, 5.0, 100.0, 2000.0}) {
        Features pts = random_points(g, 12, 5);
        SoftmaxRadius sr = softmax_radius(pts, alpha);
        double total = 0.0;
        for (double w : sr.weights) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(std::isfinite(sr.value));
    }
}

TEST_CASE("softmax radius limits in alpha") {
    std::mt19937_64 g(127);
    Features pts = random_points(g, 9, 4);

    // alpha = 0: uniform weights, value = (1/N^2) sum_ij d2_ij = (2/N) scatter
    SoftmaxRadius flat = softmax_radius(pts, 0.0);
    const double n = static_cast<double>(pts.size());
    for (double w : flat.weights) CHECK(std::abs(w - 1.0 / (n * n)) < 1e-15);
    const double scatter = scatter_around(pts, batch_mean(pts));
    CHECK(rel_err(flat.value, 2.0 / n * scatter) < 1e-10);

    // large alpha: approaches the max squared distance
    double maxd2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            maxd2 = std::max(maxd2, dist(pts[i], pts[j]) * dist(pts[i], pts[j]));
    SoftmaxRadius sharp = softmax_radius(pts, 100.0);
    CHECK(std::abs(sharp.value - maxd2) / maxd2 < 0.01);

    // monotone in alpha
    double prev = flat.value;
    for (double alpha : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double v = softmax_radius(pts, alpha).value;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("loss values against hand-computed cases") {
    LossConfig cfg;
    cfg.lambda = 2.0;
    cfg.eta = 0.3;

    // w = 0, b = 0: every margin is 1, hinge part = lambda * N
    std::mt19937_64 g(131);
    Features phi = random_points(g, 6, 4);
    std::vector<int> y{1, -1, 1, -1, 1, -1};
    std::vector<double> w(4, 0.0);
    const double scatter = scatter_around(phi, batch_mean(phi));
    CHECK(rel_err(loss_L3(phi, y, w, 0.0, cfg), 2.0 * cfg.eta * scatter + cfg.lambda * 6.0) < 1e-12);

    // perfectly separated, eta = 0: only the w-norm remains
    LossConfig cfg0;
    cfg0.lambda = 1.0;
    cfg0.eta = 0.0;
    Features sep{{2.0, 0.0}, {-2.0, 0.0}};
    std::vector<int> ysep{1, -1};
    std::vector<double> wsep{1.0, 0.0};
    CHECK(rel_err(loss_L3(sep, ysep, wsep, 0.0, cfg0), 0.5) < 1e-12);

    // frozen vs batch mean agree when the same mean is passed
    CHECK(loss_L3_frozen(phi, y, w, 0.0, cfg, batch_mean(phi)) == loss_L3(phi, y, w, 0.0, cfg));
}

TEST_CASE("alpha = 0 ties the L2 radius term to the scatter identity") {
    std::mt19937_64 g(137);
    Features phi = random_points(g, 10, 6);
    std::vector<int> y(10, 1);
    std::vector<double> w(6, 0.0);

    LossConfig l2;
    l2.variant = LossConfig::Variant::L2;
    l2.lambda = 0.0;
    l2.eta = 1.0;
    l2.alpha = 0.0;
    LossConfig l3 = l2;
    l3.variant = LossConfig::Variant::L3;

    const double n = 10.0;
    // radius terms: eta * (2/N) * scatter vs 2 * eta * scatter
    CHECK(rel_err(loss_L2(phi, y, w, 0.0, l2), loss_L3(phi, y, w, 0.0, l3) / n) < 1e-10);
}

TEST_CASE("reference losses L0/L1 evaluate their stated forms") {
    std::mt19937_64 g(139);
    Features phi = random_points(g, 8, 3);
    std::vector<int> y{1, 1, -1, -1, 1, -1, 1, -1};
    std::vector<double> w{0.3, -0.2, 0.5};
    const double b = 0.1;
    LossConfig cfg;
    cfg.lambda = 1.5;

    double hinges = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        hinges += squared_hinge(classifier_score(w, b, phi[i]), y[i]);
    double wn = 0.0;
    for (double v : w) wn += v * v;

    const double r = exact_meb(phi).radius;
    CHECK(rel_err(loss_L0_ref(phi, y, w, b, cfg), 0.5 * wn * r * r + cfg.lambda * hinges) < 1e-12);

    const double rt = relaxed_radius_max(phi);
    CHECK(rel_err(loss_L1_ref(phi, y, w, b, cfg), 0.5 * wn + rt * rt + cfg.lambda * hinges) < 1e-12);
}

TEST_CASE("classifier gradient: pinned example and finite differences") {
    LossConfig cfg;
    cfg.lambda = 1.5;
    cfg.eta = 0.2;

    // single sample, w = 0, b = 0, y = +1, phi = e1
    Features phi{{1.0, 0.0, 0.0}};
    std::vector<int> y{1};
    std::vector<double> w(3, 0.0);
    ClassifierGrad g0 = grad_classifier(phi, y, w, 0.0, cfg);
    CHECK(g0.d_w[0] == doctest::Approx(-2.0 * cfg.lambda).epsilon(1e-12));
    CHECK(g0.d_w[1] == 0.0);
    CHECK(g0.d_w[2] == 0.0);
    CHECK(g0.d_b == doctest::Approx(-2.0 * cfg.lambda).epsilon(1e-12));

    // FD sweep on a random batch; radius terms are (w,b)-free so L3 suffices
    std::mt19937_64 g(149);
    Features batch = random_points(g, 8, 5);
    std::vector<int> yb;
    for (int i = 0; i < 8; ++i) yb.push_back(i % 2 == 0 ? 1 : -1);
    std::vector<double> wb(5);
    for (auto& v : wb) v = uniform_in(g, -0.8, 0.8);
    const double bb = uniform_in(g, -0.5, 0.5);
    const std::vector<double> mean = batch_mean(batch);

    ClassifierGrad an = grad_classifier(batch, yb, wb, bb, cfg);
    const double eps = 1e-5;
    for (std::size_t p = 0; p < wb.size(); ++p) {
        auto wp = wb, wm = wb;
        wp[p] += eps;
        wm[p] -= eps;
        const double fd = (loss_L3_frozen(batch, yb, wp, bb, cfg, mean) -
                           loss_L3_frozen(batch, yb, wm, bb, cfg, mean)) /
                          (2 * eps);
        CHECK(rel_err(an.d_w[p], fd) < 1e-8);
    }
    const double fdb = (loss_L3_frozen(batch, yb, wb, bb + eps, cfg, mean) -
                        loss_L3_frozen(batch, yb, wb, bb - eps, cfg, mean)) /
                       (2 * eps);
    CHECK(rel_err(an.d_b, fdb) < 1e-8);
}

TEST_CASE("feature gradient: L3 frozen and exact modes") {
    std::mt19937_64 g(151);
    LossConfig cfg;
    cfg.lambda = 0.7;
    cfg.eta = 0.4;

    Features phi = random_points(g, 6, 4);
    std::vector<int> y{1, -1, -1, 1, 1, -1};
    std::vector<double> w(4);
    for (auto& v : w) v = uniform_in(g, -0.9, 0.9);
    const double b = 0.2;

    // lambda = 0: gradient reduces to 4 eta (phi_i - phi_bar)
    LossConfig no_hinge = cfg;
    no_hinge.lambda = 0.0;
    const std::vector<double> mean = batch_mean(phi);
    Features gr = grad_features(phi, y, w, b, no_hinge, MeanMode::frozen, &mean);
    for (std::size_t i = 0; i < phi.size(); ++i)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(rel_err(gr[i][c], 4.0 * no_hinge.eta * (phi[i][c] - mean[c])) < 1e-12);

    // eta = 0 and inactive hinges: zero gradient
    LossConfig no_radius = cfg;
    no_radius.eta = 0.0;
    Features far{{10.0, 0.0, 0.0, 0.0}, {-10.0, 0.0, 0.0, 0.0}};
    std::vector<int> yfar{1, -1};
    std::vector<double> wfar{1.0, 0.0, 0.0, 0.0};
    Features gz = grad_features(far, yfar, wfar, 0.0, no_radius, MeanMode::exact, nullptr);
    for (const auto& row : gz)
        for (double v : row) CHECK(v == 0.0);

    // frozen mode FD: phi_bar held fixed while features move
    const double eps = 1e-5;
    Features an = grad_features(phi, y, w, b, cfg, MeanMode::frozen, &mean);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
            Features pp = phi, pm = phi;
            pp[i][c] += eps;
            pm[i][c] -= eps;
            const double fd = (loss_L3_frozen(pp, y, w, b, cfg, mean) -
                               loss_L3_frozen(pm, y, w, b, cfg, mean)) /
                              (2 * eps);
            CHECK(rel_err(an[i][c], fd) < 1e-8);
        }
    }

    // exact mode FD: the mean is recomputed inside the loss
    Features ex = grad_features(phi, y, w, b, cfg, MeanMode::exact, nullptr);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
            Features pp = phi, pm = phi;
            pp[i][c] += eps;
            pm[i][c] -= eps;
            const double fd =
                (loss_L3(pp, y, w, b, cfg) - loss_L3(pm, y, w, b, cfg)) / (2 * eps);
            CHECK(rel_err(ex[i][c], fd) < 1e-8);
        }
    }
}

TEST_CASE("feature gradient: L2 variant against finite differences") {
    std::mt19937_64 g(157);
    LossConfig cfg;
    cfg.variant = LossConfig::Variant::L2;
    cfg.lambda = 0.5;
    cfg.eta = 0.6;
    cfg.alpha = 1.5;

    Features phi = random_points(g, 5, 3);
    std::vector<int> y{1, -1, 1, -1, 1};
    std::vector<double> w(3);
    for (auto& v : w) v = uniform_in(g, -0.8, 0.8);
    const double b = -0.1;

    Features an = grad_features(phi, y, w, b, cfg, MeanMode::exact, nullptr);
    const double eps = 1e-5;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            Features pp = phi, pm = phi;
            pp[i][c] += eps;
            pm[i][c] -= eps;
            const double fd =
                (loss_L2(pp, y, w, b, cfg) - loss_L2(pm, y, w, b, cfg)) / (2 * eps);
            CHECK(rel_err(an[i][c], fd) < 1e-7);
        }
    }
}
