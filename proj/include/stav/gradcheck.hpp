#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stav/profile.hpp"

namespace stav {

struct GradCheckGroup {
    std::string name;  // layer1_w, layer1_b, ..., fc_w, fc_b, classifier_w, classifier_b
    double max_rel_err = 0.0;
    int params = 0;
};

struct GradCheckReport {
    std::vector<GradCheckGroup> groups;
    double network_max = 0.0;     // worst over the conv and fc groups
    double classifier_max = 0.0;  // worst over the classifier groups
};

// Central finite differences of the full frozen-mean objective versus the
// analytic gradients, over every parameter of a model built from `profile`.
// The problem is deterministic in `seed`: binary labels, random clips, mixed
// latent assignments, and a small random classifier so the hinges stay
// active. Relative error uses the denominator max(1, |analytic|, |numeric|).
GradCheckReport gradient_check(const ArchProfile& profile, std::uint64_t seed, int samples = 6,
                               double fd_step = 1e-5);

std::string gradcheck_summary(const GradCheckReport& r);

}  // namespace stav
