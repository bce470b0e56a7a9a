#include "stav/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stav/errors.hpp"
#include "stav/loss.hpp"
#include "stav/parallel.hpp"

namespace stav {

Prediction predict(const VideoSample& x, const ModelParams& params, int threads) {
    const int classes = params.classes();
    const std::vector<LatentAssignment> candidates = enumerate_assignments(params.profile.seg);
    const ForwardOptions opt{RunMode::eval, 0};

    Features phi(candidates.size());
    parallel_for(candidates.size(), threads,
                 [&](std::size_t h) { phi[h] = forward_full(x, candidates[h], params, opt); });

    Prediction out;
    out.per_class_best.assign(classes, -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_h = 0;
    int best_c = 0;
    bool first = true;
    // Serial reduction in assignment order keeps the result identical for any
    // thread count; the explicit comparison implements the tie policy.
    for (std::size_t h = 0; h < candidates.size(); ++h) {
        const ScoreResult r = score_feature(phi[h], params.classifiers);
        for (int c = 0; c < classes; ++c) {
            const double s = r.scores[c];
            out.per_class_best[c] = std::max(out.per_class_best[c], s);
            const bool wins = first || s > best ||
                              (s == best && (c < best_c || (c == best_c && h < best_h)));
            if (wins) {
                best = s;
                best_c = c;
                best_h = h;
                first = false;
            }
        }
    }
    out.label = best_c;
    out.assignment = candidates[best_h];
    out.score = best;
    return out;
}

Metrics metrics_from_pairs(const std::vector<int>& truth, const std::vector<int>& predicted,
                           int classes) {
    if (truth.size() != predicted.size())
        throw shape_error("metrics_from_pairs: label lists differ in length");
    if (classes < 1) throw config_error("metrics need at least one class");

    Metrics m;
    m.counts.assign(classes, std::vector<int>(classes, 0));
    m.support.assign(classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes)
            throw config_error("metrics_from_pairs: label outside [0, classes)");
        ++m.counts[truth[i]][predicted[i]];
        ++m.support[truth[i]];
    }

    m.confusion.assign(classes, std::vector<double>(classes, 0.0));
    m.per_class_accuracy.assign(classes, 0.0);
    int diag = 0, nonempty = 0;
    double acc_sum = 0.0;
    for (int c = 0; c < classes; ++c) {
        diag += m.counts[c][c];
        if (m.support[c] == 0) continue;
        ++nonempty;
        for (int d = 0; d < classes; ++d)
            m.confusion[c][d] = static_cast<double>(m.counts[c][d]) / m.support[c];
        m.per_class_accuracy[c] = m.confusion[c][c];
        acc_sum += m.per_class_accuracy[c];
    }
    m.average_accuracy = nonempty > 0 ? acc_sum / nonempty : 0.0;
    m.overall_accuracy =
        truth.empty() ? 0.0 : static_cast<double>(diag) / static_cast<double>(truth.size());
    return m;
}

Metrics evaluate(const std::vector<VideoSample>& samples, const ModelParams& params, int threads,
                 std::vector<Prediction>* predictions) {
    std::vector<int> truth, pred;
    if (predictions) predictions->clear();
    for (const VideoSample& s : samples) {
        Prediction p = predict(s, params, threads);
        truth.push_back(s.label);
        pred.push_back(p.label);
        if (predictions) predictions->push_back(std::move(p));
    }
    return metrics_from_pairs(truth, pred, params.classes());
}

namespace {

std::string name_of(const std::vector<std::string>& names, int c) {
    return c < static_cast<int>(names.size()) ? names[c] : "class" + std::to_string(c);
}

}  // namespace

std::string metrics_csv(const Metrics& m, const std::vector<std::string>& class_names) {
    const int classes = static_cast<int>(m.counts.size());
    std::ostringstream out;
    out.precision(17);
    out << "section,class,name,accuracy,support\n";
    for (int c = 0; c < classes; ++c)
        out << "per_class," << c << ',' << name_of(class_names, c) << ','
            << m.per_class_accuracy[c] << ',' << m.support[c] << '\n';
    out << "average,,," << m.average_accuracy << ",\n";
    out << "overall,,," << m.overall_accuracy << ",\n";
    out << "section,truth";
    for (int d = 0; d < classes; ++d) out << ",pred_" << d;
    out << '\n';
    for (int c = 0; c < classes; ++c) {
        out << "confusion," << c;
        for (int d = 0; d < classes; ++d) out << ',' << m.confusion[c][d];
        out << '\n';
    }
    return out.str();
}

std::string metrics_table(const Metrics& m, const std::vector<std::string>& class_names) {
    const int classes = static_cast<int>(m.counts.size());
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "class             accuracy  support\n";
    for (int c = 0; c < classes; ++c)
        out << std::left << std::setw(18) << name_of(class_names, c) << std::right << std::setw(8)
            << m.per_class_accuracy[c] << std::setw(9) << m.support[c] << '\n';
    out << std::left << std::setw(18) << "average" << std::right << std::setw(8)
        << m.average_accuracy << '\n';
    out << std::left << std::setw(18) << "overall" << std::right << std::setw(8)
        << m.overall_accuracy << '\n';
    out << "confusion (rows = truth, normalised):\n";
    for (int c = 0; c < classes; ++c) {
        out << "  " << std::left << std::setw(16) << name_of(class_names, c) << std::right;
        for (int d = 0; d < classes; ++d) out << ' ' << std::setw(7) << m.confusion[c][d];
        out << '\n';
    }
    return out.str();
}

}  // namespace stav
