#include "stav/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "stav/kernels.hpp"

namespace stav {

namespace {

void check_batch(const Features& phi, const std::vector<int>& y) {
    if (phi.empty()) throw std::invalid_argument("loss: empty batch");
    if (phi.size() != y.size()) throw std::invalid_argument("loss: feature/label count mismatch");
    for (const auto& p : phi) {
        if (p.size() != phi[0].size()) throw std::invalid_argument("loss: mixed feature dimensions");
    }
    for (int v : y) {
        if (v != 1 && v != -1) throw std::invalid_argument("loss: labels must be +1 or -1");
    }
}

double hinge_part(const Features& phi, const std::vector<int>& y,
                  const std::vector<double>& w, double b, double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        s += squared_hinge(classifier_score(w, b, phi[i]), y[i]);
    }
    return lambda * s;
}

double w_norm_half(const std::vector<double>& w) {
    return 0.5 * kern::active().dot(w.data(), w.data(), w.size());
}

}  // namespace

double squared_hinge(double score, int y) {
    const double m = 1.0 - score * y;
    return m > 0.0 ? m * m : 0.0;
}

double classifier_score(const std::vector<double>& w, double b, const std::vector<double>& phi) {
    if (w.size() != phi.size()) throw std::invalid_argument("classifier_score: dimension mismatch");
    return kern::active().dot(w.data(), phi.data(), w.size()) + b;
}

double relaxed_radius_max(const Features& phi) {
    if (phi.empty()) throw std::invalid_argument("relaxed_radius_max: empty set");
    double best = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t j = i + 1; j < phi.size(); ++j) {
            best = std::max(best, kern::active().sq_dist(phi[i].data(), phi[j].data(), phi[i].size()));
        }
    }
    return std::sqrt(best);
}

SoftmaxRadius softmax_radius(const Features& phi, double alpha) {
    if (phi.empty()) throw std::invalid_argument("softmax_radius: empty set");
    const std::size_t n = phi.size();
    std::vector<double> d2(n * n, 0.0);
    double top = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = i == j ? 0.0
                                    : kern::active().sq_dist(phi[i].data(), phi[j].data(), phi[i].size());
            d2[i * n + j] = v;
            top = std::max(top, alpha * v);
        }
    }
    SoftmaxRadius r;
    r.weights.resize(n * n);
    double z = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        r.weights[k] = std::exp(alpha * d2[k] - top);
        z += r.weights[k];
    }
    double value = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        r.weights[k] /= z;
        value += r.weights[k] * d2[k];
    }
    r.value = value;
    return r;
}

std::vector<double> batch_mean(const Features& phi) {
    if (phi.empty()) throw std::invalid_argument("batch_mean: empty set");
    std::vector<double> m(phi[0].size(), 0.0);
    for (const auto& p : phi) kern::active().axpy(1.0, p.data(), m.data(), m.size());
    const double inv = 1.0 / static_cast<double>(phi.size());
    for (double& v : m) v *= inv;
    return m;
}

double scatter_around(const Features& phi, const std::vector<double>& mean) {
    double s = 0.0;
    for (const auto& p : phi) {
        s += kern::active().sq_dist(p.data(), mean.data(), mean.size());
    }
    return s;
}

double loss_L0_ref(const Features& phi, const std::vector<int>& y,
                   const std::vector<double>& w, double b, const LossConfig& cfg) {
    check_batch(phi, y);
    const double r = exact_meb(phi).radius;
    return w_norm_half(w) * r * r + hinge_part(phi, y, w, b, cfg.lambda);
}

double loss_L1_ref(const Features& phi, const std::vector<int>& y,
                   const std::vector<double>& w, double b, const LossConfig& cfg) {
    check_batch(phi, y);
    const double rt = relaxed_radius_max(phi);
    return w_norm_half(w) + rt * rt + hinge_part(phi, y, w, b, cfg.lambda);
}

double loss_L2(const Features& phi, const std::vector<int>& y,
               const std::vector<double>& w, double b, const LossConfig& cfg) {
    check_batch(phi, y);
    return w_norm_half(w) + cfg.eta * softmax_radius(phi, cfg.alpha).value +
           hinge_part(phi, y, w, b, cfg.lambda);
}

double loss_L3(const Features& phi, const std::vector<int>& y,
               const std::vector<double>& w, double b, const LossConfig& cfg) {
    check_batch(phi, y);
    return loss_L3_frozen(phi, y, w, b, cfg, batch_mean(phi));
}

double loss_L3_frozen(const Features& phi, const std::vector<int>& y,
                      const std::vector<double>& w, double b, const LossConfig& cfg,
                      const std::vector<double>& phi_bar) {
    check_batch(phi, y);
    return w_norm_half(w) + 2.0 * cfg.eta * scatter_around(phi, phi_bar) +
           hinge_part(phi, y, w, b, cfg.lambda);
}

ClassifierGrad grad_classifier(const Features& phi, const std::vector<int>& y,
                               const std::vector<double>& w, double b, const LossConfig& cfg) {
    check_batch(phi, y);
    ClassifierGrad g{w, 0.0};
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double margin = 1.0 - classifier_score(w, b, phi[i]) * y[i];
        if (margin <= 0.0) continue;
        const double coef = -2.0 * cfg.lambda * y[i] * margin;
        kern::active().axpy(coef, phi[i].data(), g.d_w.data(), g.d_w.size());
        g.d_b += coef;
    }
    return g;
}

Features grad_features(const Features& phi, const std::vector<int>& y,
                       const std::vector<double>& w, double b, const LossConfig& cfg,
                       MeanMode mode, const std::vector<double>* phi_bar) {
    check_batch(phi, y);
    const std::size_t n = phi.size();
    const std::size_t d = phi[0].size();
    Features g(n, std::vector<double>(d, 0.0));

    if (cfg.variant == LossConfig::Variant::L3) {
        std::vector<double> mean;
        if (mode == MeanMode::frozen) {
            if (!phi_bar) throw std::invalid_argument("grad_features: frozen mode needs phi_bar");
            mean = *phi_bar;
        } else {
            mean = batch_mean(phi);
        }
        if (mean.size() != d) throw std::invalid_argument("grad_features: phi_bar dimension mismatch");

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < d; ++c) g[i][c] = 4.0 * cfg.eta * (phi[i][c] - mean[c]);
        }
        if (mode == MeanMode::exact) {
            // coupling through the mean: subtract (4 eta / N) sum_j (phi_j - mean).
            // Zero in exact arithmetic when `mean` is the batch mean; kept so the
            // mode really is the full derivative.
            std::vector<double> resid(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < d; ++c) resid[c] += phi[i][c] - mean[c];
            }
            const double f = 4.0 * cfg.eta / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < d; ++c) g[i][c] -= f * resid[c];
            }
        }
    } else {
        // L2: d/dphi_k of eta * sum_ij kappa_ij d2_ij
        //   = eta * sum_j (kappa_kj + kappa_jk)(1 + alpha (d2_kj - sigma)) * 2 (phi_k - phi_j)
        SoftmaxRadius sr = softmax_radius(phi, cfg.alpha);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == k) continue;
                const double d2 = kern::active().sq_dist(phi[k].data(), phi[j].data(), d);
                const double coef = cfg.eta * (sr.weights[k * n + j] + sr.weights[j * n + k]) *
                                    (1.0 + cfg.alpha * (d2 - sr.value)) * 2.0;
                for (std::size_t c = 0; c < d; ++c) g[k][c] += coef * (phi[k][c] - phi[j][c]);
            }
        }
    }

    // shared hinge pull: -2 lambda w y_i max(0, 1 - s_i y_i)
    for (std::size_t i = 0; i < n; ++i) {
        const double margin = 1.0 - classifier_score(w, b, phi[i]) * y[i];
        if (margin <= 0.0) continue;
        kern::active().axpy(-2.0 * cfg.lambda * y[i] * margin, w.data(), g[i].data(), d);
    }
    return g;
}

}  // namespace stav
