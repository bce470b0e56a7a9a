#pragma once

#include <string>
#include <vector>

#include "stav/net.hpp"
#include "stav/video.hpp"

namespace stav {

struct Prediction {
    int label = 0;
    LatentAssignment assignment;  // the maximising assignment of the winning class
    double score = 0.0;
    std::vector<double> per_class_best;  // best score of each class over all assignments
};

// Joint maximisation over classes and admissible assignments, one network
// evaluation per assignment (features are shared across classes). Ties pick
// the lowest class index, then the lexicographically first assignment.
// Deterministic for any thread count.
Prediction predict(const VideoSample& x, const ModelParams& params, int threads);

struct Metrics {
    std::vector<std::vector<int>> counts;        // rows = truth, columns = prediction
    std::vector<std::vector<double>> confusion;  // counts row-normalised
    std::vector<int> support;                    // truth samples per class
    std::vector<double> per_class_accuracy;
    double average_accuracy = 0.0;  // mean of per-class accuracies over non-empty classes
    double overall_accuracy = 0.0;
};

Metrics metrics_from_pairs(const std::vector<int>& truth, const std::vector<int>& predicted,
                           int classes);

Metrics evaluate(const std::vector<VideoSample>& samples, const ModelParams& params, int threads,
                 std::vector<Prediction>* predictions = nullptr);

std::string metrics_csv(const Metrics& m, const std::vector<std::string>& class_names);
std::string metrics_table(const Metrics& m, const std::vector<std::string>& class_names);

}  // namespace stav
