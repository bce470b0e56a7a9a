#pragma once

#include <vector>

#include "stav/meb.hpp"

namespace stav {

// Radius-margin training objectives over a batch of feature vectors phi_i
// with labels y_i in {-1, +1}:
//   L0 (reference) : 1/2 |w|^2 R^2 + lambda sum_i max(0, 1 - s_i y_i)^2,
//                    R the exact minimum-enclosing-ball radius;
//   L1 (reference) : 1/2 |w|^2 + max_{i,j} |phi_i - phi_j|^2 + hinge part;
//   L2             : 1/2 |w|^2 + eta * sum_{ij} kappa_ij |phi_i - phi_j|^2 + hinge part,
//                    kappa a softmax over alpha-scaled squared distances;
//   L3             : 1/2 |w|^2 + 2 eta * sum_i |phi_i - phi_bar|^2 + hinge part.
// s_i = w . phi_i + b throughout.

struct LossConfig {
    double lambda = 1.0;
    double eta = 0.0;
    double alpha = 0.0;  // softmax sharpness for L2
    enum class Variant { L2, L3 };
    Variant variant = Variant::L3;
};

using Features = std::vector<std::vector<double>>;

double squared_hinge(double score, int y);
double classifier_score(const std::vector<double>& w, double b, const std::vector<double>& phi);

// Max pairwise distance (not halved, not squared).
double relaxed_radius_max(const Features& phi);

// Softmax-weighted mean of squared pairwise distances. Weights run over all
// ordered pairs including i == j and are computed with the usual max-shift
// stabilisation, so they sum to 1 regardless of alpha's magnitude.
struct SoftmaxRadius {
    double value = 0.0;
    std::vector<double> weights;  // N*N, row-major
};
SoftmaxRadius softmax_radius(const Features& phi, double alpha);

std::vector<double> batch_mean(const Features& phi);
// sum_i |phi_i - mean|^2
double scatter_around(const Features& phi, const std::vector<double>& mean);

double loss_L0_ref(const Features& phi, const std::vector<int>& y,
                   const std::vector<double>& w, double b, const LossConfig& cfg);
double loss_L1_ref(const Features& phi, const std::vector<int>& y,
                   const std::vector<double>& w, double b, const LossConfig& cfg);
double loss_L2(const Features& phi, const std::vector<int>& y,
               const std::vector<double>& w, double b, const LossConfig& cfg);
// phi_bar recomputed from the batch
double loss_L3(const Features& phi, const std::vector<int>& y,
               const std::vector<double>& w, double b, const LossConfig& cfg);
// phi_bar supplied by the caller and treated as a constant
double loss_L3_frozen(const Features& phi, const std::vector<int>& y,
                      const std::vector<double>& w, double b, const LossConfig& cfg,
                      const std::vector<double>& phi_bar);

struct ClassifierGrad {
    std::vector<double> d_w;
    double d_b = 0.0;
};
// d/dw = w - 2 lambda sum_i y_i phi_i max(0, 1 - s_i y_i)
// d/db =   - 2 lambda sum_i y_i       max(0, 1 - s_i y_i)
// The radius terms do not involve (w, b), so this serves every variant.
ClassifierGrad grad_classifier(const Features& phi, const std::vector<int>& y,
                               const std::vector<double>& w, double b, const LossConfig& cfg);

// frozen: the mean supplied in phi_bar is treated as a constant (the training
// default). exact: differentiates through the batch mean, including the -1/N
// coupling; phi_bar may be null in that mode.
enum class MeanMode { frozen, exact };
Features grad_features(const Features& phi, const std::vector<int>& y,
                       const std::vector<double>& w, double b, const LossConfig& cfg,
                       MeanMode mode, const std::vector<double>* phi_bar);

}  // namespace stav
