#include "stav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "stav/checkpoint.hpp"
#include "stav/errors.hpp"
#include "stav/parallel.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

// Stream labels keeping the trainer's RNG consumers independent.
constexpr std::uint64_t kDropoutStream = 0xd817u;
constexpr std::uint64_t kShuffleStream = 0x5b0fu;

void check_labels(const std::vector<VideoSample>& samples, int classes) {
    if (samples.empty()) throw config_error("training set is empty");
    for (const VideoSample& v : samples)
        if (v.label < 0 || v.label >= classes)
            throw config_error("sample label " + std::to_string(v.label) + " outside [0, " +
                               std::to_string(classes) + ")");
}

double radius_term(const Features& phi, const LossConfig& cfg) {
    if (cfg.eta == 0.0) return 0.0;
    if (cfg.variant == LossConfig::Variant::L3)
        return 2.0 * cfg.eta * scatter_around(phi, batch_mean(phi));
    return cfg.eta * softmax_radius(phi, cfg.alpha).value;
}

}  // namespace

Features features_eval(const std::vector<VideoSample>& samples,
                       const std::vector<LatentAssignment>& latents, const ModelParams& params,
                       int threads) {
    if (samples.size() != latents.size())
        throw shape_error("features_eval: one assignment per sample required");
    Features phi(samples.size());
    const ForwardOptions opt{RunMode::eval, 0};
    parallel_for(samples.size(), threads,
                 [&](std::size_t i) { phi[i] = forward_full(samples[i], latents[i], params, opt); });
    return phi;
}

std::vector<LatentAssignment> estimate_latents(const std::vector<VideoSample>& samples,
                                               const ModelParams& params, int threads,
                                               const std::vector<LatentAssignment>* previous,
                                               EStepTrace* trace) {
    const int classes = params.classes();
    check_labels(samples, classes);
    if (previous && previous->size() != samples.size())
        throw shape_error("estimate_latents: previous assignment list has the wrong length");

    const std::vector<LatentAssignment> candidates = enumerate_assignments(params.profile.seg);
    const ForwardOptions opt{RunMode::eval, 0};

    std::vector<LatentAssignment> result(samples.size());
    std::vector<double> best_scores(samples.size());
    std::vector<double> prev_scores(samples.size());

    parallel_for(samples.size(), threads, [&](std::size_t i) {
        const Classifier& clf = params.classifiers[samples[i].label];
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        double at_prev = 0.0;
        for (std::size_t h = 0; h < candidates.size(); ++h) {
            const std::vector<double> phi = forward_full(samples[i], candidates[h], params, opt);
            const double s = classifier_score(clf.w, clf.b, phi);
            if (s > best) {  // strict: ties keep the lexicographically first candidate
                best = s;
                best_idx = h;
            }
            if (previous && candidates[h] == (*previous)[i]) at_prev = s;
        }
        result[i] = candidates[best_idx];
        best_scores[i] = best;
        prev_scores[i] = at_prev;
    });

    if (trace) {
        trace->hinge_before = 0.0;
        trace->hinge_after = 0.0;
        if (previous) {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                trace->hinge_before += squared_hinge(prev_scores[i], 1);
                trace->hinge_after += squared_hinge(best_scores[i], 1);
            }
        }
    }
    return result;
}

ObjectiveBreakdown objective_eval(const std::vector<VideoSample>& samples,
                                  const std::vector<LatentAssignment>& latents,
                                  const ModelParams& params, const LossConfig& loss,
                                  int threads) {
    const int classes = params.classes();
    check_labels(samples, classes);
    const Features phi = features_eval(samples, latents, params, threads);

    ObjectiveBreakdown out;
    out.radius = radius_term(phi, loss);
    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const ScoreResult r = score_feature(phi[i], params.classifiers);
        if (r.best_class == samples[i].label) ++correct;
        for (int c = 0; c < classes; ++c)
            out.hinge += loss.lambda * squared_hinge(r.scores[c], samples[i].label == c ? 1 : -1);
    }
    for (const Classifier& c : params.classifiers) {
        double sq = 0.0;
        for (double w : c.w) sq += w * w;
        out.regularizer += 0.5 * sq;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    out.objective = out.regularizer + out.radius + out.hinge;
    return out;
}

std::uint64_t sgd_step(const std::vector<VideoSample>& samples,
                       const std::vector<LatentAssignment>& latents,
                       const std::vector<std::size_t>& batch, ModelParams& params,
                       const std::vector<double>& phi_bar, const TrainConfig& cfg,
                       double lr_classifier, double lr_cnn, std::uint64_t dropout_counter) {
    const int classes = params.classes();
    const std::size_t B = batch.size();
    if (B == 0) return dropout_counter;

    // Train-mode forwards, one dropout stream per batch position.
    std::vector<ForwardCache> caches(B);
    Features phi(B);
    parallel_for(B, cfg.threads, [&](std::size_t k) {
        const ForwardOptions opt{RunMode::train,
                                 mix_seed(cfg.seed, kDropoutStream + dropout_counter + k)};
        const std::size_t i = batch[k];
        phi[k] = forward_full(samples[i], latents[i], params, opt, &caches[k]);
    });
    dropout_counter += B;

    // Per-class hinge gradients; the radius term rides on class 0's call so
    // the shared feature gradient counts it exactly once.
    std::vector<ClassifierGrad> cg(classes);
    Features g_feature(B, std::vector<double>(phi[0].size(), 0.0));
    for (int c = 0; c < classes; ++c) {
        std::vector<int> y(B);
        for (std::size_t k = 0; k < B; ++k) y[k] = samples[batch[k]].label == c ? 1 : -1;
        LossConfig cls_cfg = cfg.loss;
        if (c > 0) cls_cfg.eta = 0.0;
        const Classifier& clf = params.classifiers[c];
        cg[c] = grad_classifier(phi, y, clf.w, clf.b, cls_cfg);
        const Features gf = grad_features(phi, y, clf.w, clf.b, cls_cfg, MeanMode::frozen,
                                          &phi_bar);
        for (std::size_t k = 0; k < B; ++k)
            for (std::size_t d = 0; d < g_feature[k].size(); ++d) g_feature[k][d] += gf[k][d];
    }

    // Backpropagation per sample into private slots, then a serial reduction.
    std::vector<ModelParams> slots(B);
    parallel_for(B, cfg.threads,
                 [&](std::size_t k) { slots[k] = backward_full(params, caches[k], g_feature[k]); });
    ModelParams grads = zeros_like(params);
    {
        std::vector<ParamRef> acc = param_refs(grads);
        for (std::size_t k = 0; k < B; ++k) {
            const std::vector<ParamRef> gr = param_refs(slots[k]);
            for (std::size_t j = 0; j < acc.size(); ++j) *acc[j].p += *gr[j].p;
        }
    }
    for (int c = 0; c < classes; ++c) {
        grads.classifiers[c].w = cg[c].d_w;
        grads.classifiers[c].b = cg[c].d_b;
    }

    // Simultaneous update; abort on any non-finite gradient.
    std::vector<ParamRef> p_refs = param_refs(params);
    const std::vector<ParamRef> g_refs = param_refs(grads);
    for (std::size_t j = 0; j < p_refs.size(); ++j) {
        const double g = *g_refs[j].p;
        if (!std::isfinite(g))
            throw train_error("non-finite gradient in the batch starting at sample " +
                              std::to_string(batch[0]) + " (parameter index " +
                              std::to_string(j) + ")");
        const double lr = p_refs[j].group == ParamGroup::classifier ? lr_classifier : lr_cnn;
        *p_refs[j].p -= lr * g;
    }
    return dropout_counter;
}

TrainResult train_from(const std::vector<VideoSample>& samples, ModelParams initial,
                       const TrainConfig& cfg) {
    const int classes = initial.classes();
    check_labels(samples, classes);
    if (cfg.batch_size < 1) throw config_error("batch_size must be positive");
    if (cfg.inner_epochs < 1) throw config_error("inner_epochs must be positive");
    if (cfg.max_outer_iters < 1) throw config_error("max_outer_iters must be positive");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw config_error("dropout must lie in [0, 1)");

    TrainResult res;
    res.params = std::move(initial);
    res.params.dropout_rate = cfg.dropout;
    ModelParams current = res.params;

    res.latents = estimate_latents(samples, current, cfg.threads);

    auto push_row = [&](int iter) {
        const ObjectiveBreakdown b =
            objective_eval(samples, res.latents, current, cfg.loss, cfg.threads);
        res.history.push_back({iter, b.objective, b.hinge, b.radius, b.accuracy});
        return b.objective;
    };

    double best = push_row(0);
    res.params = current;

    double lr_w = cfg.lr_classifier;
    double lr_c = cfg.lr_cnn;
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, kShuffleStream));
    std::uint64_t dropout_counter = 0;

    for (int k = 1; k <= cfg.max_outer_iters; ++k) {
        // The scatter centre is frozen for the whole outer iteration.
        const std::vector<double> phi_bar =
            batch_mean(features_eval(samples, res.latents, current, cfg.threads));

        for (int e = 0; e < cfg.inner_epochs; ++e) {
            std::vector<std::size_t> order(samples.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            shuffle_deterministic(order, shuffle_rng);
            for (std::size_t off = 0; off < order.size(); off += cfg.batch_size) {
                const std::size_t end = std::min(order.size(), off + cfg.batch_size);
                const std::vector<std::size_t> batch(order.begin() + off, order.begin() + end);
                dropout_counter = sgd_step(samples, res.latents, batch, current, phi_bar, cfg,
                                           lr_w, lr_c, dropout_counter);
            }
        }

        const double prev = res.history.back().objective;
        const double now = push_row(k);
        res.outer_iterations = k;

        if (!cfg.checkpoint_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "iter_%03d.lsnm", k);
            save_model(cfg.checkpoint_dir / name, current);
        }
        if (now < best) {
            best = now;
            res.params = current;
        }
        if (!(now < prev)) {
            lr_w *= 0.5;
            lr_c *= 0.5;
        }
        if (std::abs(now - prev) < cfg.tol * std::max(1.0, std::abs(prev))) break;
        if (k == cfg.max_outer_iters) break;

        EStepTrace trace;
        res.latents = estimate_latents(samples, current, cfg.threads, &res.latents, &trace);
        res.estep_trace.push_back(trace);
    }
    return res;
}

TrainResult train(const std::vector<VideoSample>& samples, const ArchProfile& profile,
                  int classes, const TrainConfig& cfg) {
    return train_from(samples, init_params(profile, classes, cfg.seed), cfg);
}

std::string history_csv(const std::vector<LossRow>& history) {
    std::ostringstream out;
    out.precision(17);
    out << "iteration,objective,hinge,radius,train_accuracy\n";
    for (const LossRow& r : history)
        out << r.iteration << ',' << r.objective << ',' << r.hinge << ',' << r.radius << ','
            << r.train_accuracy << '\n';
    return out.str();
}

std::vector<double> softmax(const std::vector<double>& scores) {
    std::vector<double> p(scores.size());
    const double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = std::exp(scores[i] - mx);
    for (double& v : p) v /= sum;
    return p;
}

PretrainResult pretrain_softmax(const std::vector<VideoSample>& samples,
                                const ArchProfile& profile, int classes,
                                const PretrainConfig& cfg) {
    check_labels(samples, classes);
    if (cfg.batch_size < 1) throw config_error("batch_size must be positive");
    if (cfg.epochs < 1) throw config_error("epochs must be positive");

    PretrainResult res;
    res.params = init_params(profile, classes, mix_seed(cfg.seed, 0x9e7));
    ModelParams& params = res.params;
    const LatentAssignment fixed = near_equal_assignment(profile.seg);
    const ForwardOptions opt{RunMode::train, 0};  // dropout_rate is 0 here

    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, kShuffleStream + 1));
    for (int e = 0; e < cfg.epochs; ++e) {
        std::vector<std::size_t> order(samples.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_deterministic(order, shuffle_rng);

        double ce_sum = 0.0;
        for (std::size_t off = 0; off < order.size(); off += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), off + cfg.batch_size);
            const std::size_t B = end - off;

            std::vector<ForwardCache> caches(B);
            Features phi(B);
            parallel_for(B, cfg.threads, [&](std::size_t k) {
                phi[k] = forward_full(samples[order[off + k]], fixed, params, opt, &caches[k]);
            });

            ModelParams grads = zeros_like(params);
            Features g_feature(B);
            for (std::size_t k = 0; k < B; ++k) {
                const VideoSample& s = samples[order[off + k]];
                const ScoreResult r = score_feature(phi[k], params.classifiers);
                const std::vector<double> p = softmax(r.scores);
                ce_sum += -std::log(std::max(p[s.label], 1e-300));
                g_feature[k].assign(phi[k].size(), 0.0);
                for (int c = 0; c < classes; ++c) {
                    const double d = p[c] - (s.label == c ? 1.0 : 0.0);
                    Classifier& gc = grads.classifiers[c];
                    for (std::size_t j = 0; j < phi[k].size(); ++j) {
                        gc.w[j] += d * phi[k][j];
                        g_feature[k][j] += d * params.classifiers[c].w[j];
                    }
                    gc.b += d;
                }
            }

            std::vector<ModelParams> slots(B);
            parallel_for(B, cfg.threads, [&](std::size_t k) {
                slots[k] = backward_full(params, caches[k], g_feature[k]);
            });
            {
                std::vector<ParamRef> acc = param_refs(grads);
                for (std::size_t k = 0; k < B; ++k) {
                    const std::vector<ParamRef> gr = param_refs(slots[k]);
                    for (std::size_t j = 0; j < acc.size(); ++j) *acc[j].p += *gr[j].p;
                }
            }

            std::vector<ParamRef> p_refs = param_refs(params);
            const std::vector<ParamRef> g_refs = param_refs(grads);
            for (std::size_t j = 0; j < p_refs.size(); ++j) {
                if (!std::isfinite(*g_refs[j].p))
                    throw train_error("non-finite gradient during pre-training (epoch " +
                                      std::to_string(e) + ")");
                *p_refs[j].p -= cfg.lr * *g_refs[j].p;
            }
        }
        res.ce_history.push_back(ce_sum / static_cast<double>(samples.size()));
    }
    return res;
}

ModelParams expand_pretrained(const ModelParams& mono, const ArchProfile& target, int classes) {
    const ArchProfile& src = mono.profile;
    const bool compatible = src.frame_h == target.frame_h && src.frame_w == target.frame_w &&
                            src.c1 == target.c1 && src.c2 == target.c2 && src.c3 == target.c3 &&
                            src.k1 == target.k1 && src.k2 == target.k2 && src.k3 == target.k3 &&
                            src.pool1 == target.pool1 && src.pool2 == target.pool2 &&
                            src.fc_out == target.fc_out &&
                            src.seg.anchors == target.seg.anchors &&
                            src.seg.segments == target.seg.segments &&
                            src.seg.frames_per_segment == target.seg.frames_per_segment &&
                            src.seg.min_len == target.seg.min_len;
    if (!compatible)
        throw config_error("expand_pretrained: target architecture differs beyond channels");

    ModelParams out = alloc_params(target, classes);
    out.dropout_rate = mono.dropout_rate;
    for (std::size_t s = 0; s < out.subnets.size(); ++s) {
        for (int g = 0; g < target.c1; ++g)
            out.subnets[s].layer1[g][0] = mono.subnets[s].layer1[g][0];
        out.subnets[s].layer2 = mono.subnets[s].layer2;
        out.subnets[s].layer3 = mono.subnets[s].layer3;
    }
    duplicate_first_channel(out);
    // Keep the learned fully connected map: the structured classifiers start at
    // zero, so the first latent estimate ties every assignment and falls back to
    // the deterministic first admissible one, giving training a consistent start.
    out.fc_w = mono.fc_w;
    out.fc_b = mono.fc_b;
    return out;
}

}  // namespace stav
