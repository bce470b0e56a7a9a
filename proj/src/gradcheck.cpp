#include "stav/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "stav/errors.hpp"
#include "stav/loss.hpp"
#include "stav/net.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

VideoSample random_clip(const ArchProfile& prof, int frames_per_anchor, std::uint64_t seed) {
    VideoSample v;
    v.height = prof.frame_h;
    v.width = prof.frame_w;
    v.channels = prof.channels;
    v.frame_count = prof.seg.anchors * frames_per_anchor;
    v.pixels.resize(v.pixel_count());
    std::mt19937_64 g(seed);
    for (double& p : v.pixels) p = uniform01(g);
    return v;
}

// Group label of every entry of param_refs, in the identical order.
std::vector<std::string> ref_labels(const ModelParams& p) {
    const ArchProfile& prof = p.profile;
    const int v1 = prof.k1[0] * prof.k1[1] * prof.k1[2];
    const int v2 = prof.k2[0] * prof.k2[1] * prof.k2[2];
    const int v3 = prof.k3[0] * prof.k3[1];
    std::vector<std::string> labels;
    auto push = [&](const char* name, int count) {
        labels.insert(labels.end(), count, name);
    };
    for (int s = 0; s < prof.seg.segments; ++s) {
        for (int g = 0; g < prof.c1; ++g)
            for (int c = 0; c < prof.channels; ++c) {
                push("layer1_w", v1);
                push("layer1_b", 1);
            }
        for (int k = 0; k < prof.map_sets(); ++k) {
            push("layer2_w", v2);
            push("layer2_b", 1);
        }
        for (int k = 0; k < prof.map_sets() * prof.c3; ++k) {
            push("layer3_w", v3);
            push("layer3_b", 1);
        }
    }
    push("fc_w", prof.fc_weight_count());
    push("fc_b", prof.fc_out);
    for (const Classifier& c : p.classifiers) {
        push("classifier_w", static_cast<int>(c.w.size()));
        push("classifier_b", 1);
    }
    return labels;
}

}  // namespace

GradCheckReport gradient_check(const ArchProfile& profile, std::uint64_t seed, int samples,
                               double fd_step) {
    profile.validate();
    if (samples < 2) throw config_error("gradient check needs at least two samples");

    LossConfig cfg;
    cfg.lambda = 1.0;
    cfg.eta = 0.05;
    cfg.variant = LossConfig::Variant::L3;

    std::vector<VideoSample> clips;
    std::vector<int> y;
    for (int i = 0; i < samples; ++i) {
        clips.push_back(random_clip(profile, 2, mix_seed(seed, 100 + i)));
        y.push_back(i % 2 == 0 ? 1 : -1);
    }
    const std::vector<LatentAssignment> candidates = enumerate_assignments(profile.seg);
    std::vector<LatentAssignment> latents;
    for (int i = 0; i < samples; ++i) latents.push_back(candidates[i % candidates.size()]);

    ModelParams params = init_params(profile, 1, mix_seed(seed, 7));
    {
        std::mt19937_64 g(mix_seed(seed, 9));
        for (double& w : params.classifiers[0].w) w = uniform_in(g, -0.5, 0.5);
        params.classifiers[0].b = uniform_in(g, -0.5, 0.5);
    }

    const ForwardOptions eval_opt{RunMode::eval, 0};
    auto features_at = [&](const ModelParams& p) {
        Features phi(samples);
        for (int i = 0; i < samples; ++i) phi[i] = forward_full(clips[i], latents[i], p, eval_opt);
        return phi;
    };

    // The mean is frozen at the base parameters for both sides of the check.
    const Features phi0 = features_at(params);
    const std::vector<double> phi_bar = batch_mean(phi0);

    auto objective = [&](const ModelParams& p) {
        return loss_L3_frozen(features_at(p), y, p.classifiers[0].w, p.classifiers[0].b, cfg,
                              phi_bar);
    };

    // Analytic side.
    ModelParams analytic = zeros_like(params);
    {
        const std::vector<double>& w = params.classifiers[0].w;
        const double b = params.classifiers[0].b;
        const ClassifierGrad cg = grad_classifier(phi0, y, w, b, cfg);
        const Features gf = grad_features(phi0, y, w, b, cfg, MeanMode::frozen, &phi_bar);
        std::vector<ParamRef> acc = param_refs(analytic);
        for (int i = 0; i < samples; ++i) {
            ForwardCache cache;
            forward_full(clips[i], latents[i], params, eval_opt, &cache);
            ModelParams gi = backward_full(params, cache, gf[i]);
            const std::vector<ParamRef> gr = param_refs(gi);
            for (std::size_t k = 0; k < acc.size(); ++k) *acc[k].p += *gr[k].p;
        }
        analytic.classifiers[0].w = cg.d_w;
        analytic.classifiers[0].b = cg.d_b;
    }

    // Numeric side, one central difference per parameter.
    const std::vector<std::string> labels = ref_labels(params);
    std::vector<ParamRef> refs = param_refs(params);
    const std::vector<ParamRef> grads = param_refs(analytic);
    if (labels.size() != refs.size())
        throw shape_error("gradient check label table out of sync with param_refs");

    std::map<std::string, GradCheckGroup> groups;
    GradCheckReport report;
    for (std::size_t k = 0; k < refs.size(); ++k) {
        double& pk = *refs[k].p;
        const double saved = pk;
        pk = saved + fd_step;
        const double fp = objective(params);
        pk = saved - fd_step;
        const double fm = objective(params);
        pk = saved;
        const double fd = (fp - fm) / (2.0 * fd_step);
        const double a = *grads[k].p;
        const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});

        GradCheckGroup& g = groups[labels[k]];
        g.name = labels[k];
        g.max_rel_err = std::max(g.max_rel_err, rel);
        ++g.params;
        if (labels[k].rfind("classifier", 0) == 0)
            report.classifier_max = std::max(report.classifier_max, rel);
        else
            report.network_max = std::max(report.network_max, rel);
    }

    // Emit the groups in declaration order rather than alphabetically.
    for (const char* name : {"layer1_w", "layer1_b", "layer2_w", "layer2_b", "layer3_w",
                             "layer3_b", "fc_w", "fc_b", "classifier_w", "classifier_b"}) {
        auto it = groups.find(name);
        if (it != groups.end()) report.groups.push_back(it->second);
    }
    return report;
}

std::string gradcheck_summary(const GradCheckReport& r) {
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(3);
    for (const GradCheckGroup& g : r.groups)
        out << g.name << ": max rel err " << g.max_rel_err << " over " << g.params
            << " params\n";
    out << "network max rel err: " << r.network_max << '\n';
    out << "classifier max rel err: " << r.classifier_max << '\n';
    return out.str();
}

}  // namespace stav
