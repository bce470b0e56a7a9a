#include "stav/net.hpp"

#include <atomic>
#include <cmath>
#include <random>

#include "stav/kernels.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

std::atomic<std::uint64_t> g_forward_calls{0};

int kernel_volume(const std::array<int, 3>& k) { return k[0] * k[1] * k[2]; }

double glorot_radius(int fan_in, int fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
}

void fill_uniform(Tensor& t, std::mt19937_64& g, double r) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform_in(g, -r, r);
}

void check(bool ok, const char* what) {
    if (!ok) throw config_error(what);
}

}  // namespace

void ModelParams::validate() const {
    profile.validate();
    check(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate outside [0, 1)");
    check(static_cast<int>(subnets.size()) == profile.seg.segments,
          "sub-network count does not match segment count");
    const std::vector<int> s1{profile.k1[0], profile.k1[1], profile.k1[2]};
    const std::vector<int> s2{profile.k2[0], profile.k2[1], profile.k2[2]};
    const std::vector<int> s3{profile.k3[0], profile.k3[1]};
    for (const SubNetworkParams& sp : subnets) {
        check(static_cast<int>(sp.layer1.size()) == profile.c1, "layer1 group count");
        for (const auto& group : sp.layer1) {
            check(static_cast<int>(group.size()) == profile.channels,
                  "layer1 kernels per channel");
            for (const ConvKernel3D& k : group)
                check(k.weights.shape() == s1, "layer1 kernel shape");
        }
        check(static_cast<int>(sp.layer2.size()) == profile.map_sets(), "layer2 kernel count");
        for (const ConvKernel3D& k : sp.layer2)
            check(k.weights.shape() == s2, "layer2 kernel shape");
        check(static_cast<int>(sp.layer3.size()) == profile.map_sets() * profile.c3,
              "layer3 kernel count");
        for (const ConvKernel2D& k : sp.layer3)
            check(k.weights.shape() == s3, "layer3 kernel shape");
    }
    check(fc_w.shape() == std::vector<int>{profile.fc_out, profile.concat_width()},
          "fully connected weight shape");
    check(static_cast<int>(fc_b.size()) == profile.fc_out, "fully connected bias width");
    check(!classifiers.empty(), "no classifiers");
    for (const Classifier& c : classifiers)
        check(static_cast<int>(c.w.size()) == profile.fc_out, "classifier width");
}

std::vector<ParamRef> param_refs(ModelParams& p) {
    std::vector<ParamRef> refs;
    auto push_tensor = [&](ParamGroup g, Tensor& t) {
        for (std::size_t i = 0; i < t.size(); ++i) refs.push_back({g, &t[i]});
    };
    for (SubNetworkParams& sp : p.subnets) {
        for (auto& group : sp.layer1)
            for (ConvKernel3D& k : group) {
                push_tensor(ParamGroup::conv, k.weights);
                refs.push_back({ParamGroup::conv, &k.bias});
            }
        for (ConvKernel3D& k : sp.layer2) {
            push_tensor(ParamGroup::conv, k.weights);
            refs.push_back({ParamGroup::conv, &k.bias});
        }
        for (ConvKernel2D& k : sp.layer3) {
            push_tensor(ParamGroup::conv, k.weights);
            refs.push_back({ParamGroup::conv, &k.bias});
        }
    }
    push_tensor(ParamGroup::fc, p.fc_w);
    for (double& b : p.fc_b) refs.push_back({ParamGroup::fc, &b});
    for (Classifier& c : p.classifiers) {
        for (double& w : c.w) refs.push_back({ParamGroup::classifier, &w});
        refs.push_back({ParamGroup::classifier, &c.b});
    }
    return refs;
}

ModelParams alloc_params(const ArchProfile& profile, int classes) {
    profile.validate();
    check(classes >= 1, "need at least one class");
    ModelParams p;
    p.profile = profile;

    const std::vector<int> s1{profile.k1[0], profile.k1[1], profile.k1[2]};
    const std::vector<int> s2{profile.k2[0], profile.k2[1], profile.k2[2]};
    const std::vector<int> s3{profile.k3[0], profile.k3[1]};
    p.subnets.resize(profile.seg.segments);
    for (SubNetworkParams& sp : p.subnets) {
        sp.layer1.resize(profile.c1);
        for (auto& group : sp.layer1) {
            group.resize(profile.channels);
            for (ConvKernel3D& k : group) k.weights = Tensor(s1);
        }
        sp.layer2.resize(profile.map_sets());
        for (ConvKernel3D& k : sp.layer2) k.weights = Tensor(s2);
        sp.layer3.resize(profile.map_sets() * profile.c3);
        for (ConvKernel2D& k : sp.layer3) k.weights = Tensor(s3);
    }
    p.fc_w = Tensor({profile.fc_out, profile.concat_width()});
    p.fc_b.assign(profile.fc_out, 0.0);
    p.classifiers.resize(classes);
    for (Classifier& c : p.classifiers) c.w.assign(profile.fc_out, 0.0);
    return p;
}

ModelParams init_params(const ArchProfile& profile, int classes, std::uint64_t seed) {
    ModelParams p = alloc_params(profile, classes);
    std::mt19937_64 g(seed);

    const int v1 = kernel_volume(profile.k1);
    const int v2 = kernel_volume(profile.k2);
    const int v3 = profile.k3[0] * profile.k3[1];
    const double r1 = glorot_radius(profile.channels * v1, profile.c1 * v1);
    const double r2 = glorot_radius(v2, profile.c2 * v2);
    const double r3 = glorot_radius(v3, profile.c3 * v3);
    const double rf = glorot_radius(profile.concat_width(), profile.fc_out);

    for (SubNetworkParams& sp : p.subnets) {
        for (auto& group : sp.layer1)
            for (ConvKernel3D& k : group) fill_uniform(k.weights, g, r1);
        for (ConvKernel3D& k : sp.layer2) fill_uniform(k.weights, g, r2);
        for (ConvKernel2D& k : sp.layer3) fill_uniform(k.weights, g, r3);
    }
    fill_uniform(p.fc_w, g, rf);
    return p;
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    for (const ParamRef& r : param_refs(z)) *r.p = 0.0;
    return z;
}

std::vector<Tensor> gather_segment(const VideoSample& x, const ArchProfile& prof,
                                   const std::vector<int>& anchor_frames,
                                   const LatentAssignment& h, int j) {
    const int m = prof.seg.frames_per_segment;
    const std::vector<int> frames = sample_segment_frames(h, j, anchor_frames, m);
    std::vector<Tensor> chans;
    chans.reserve(prof.channels);
    for (int c = 0; c < prof.channels; ++c) {
        Tensor t({prof.frame_h, prof.frame_w, m});
        for (int y = 0; y < prof.frame_h; ++y)
            for (int xw = 0; xw < prof.frame_w; ++xw)
                for (int k = 0; k < m; ++k) t.at3(y, xw, k) = x.at(frames[k], c, y, xw);
        chans.push_back(std::move(t));
    }
    return chans;
}

std::vector<double> forward_subnet(const std::vector<Tensor>& channels,
                                   const SubNetworkParams& sp, const ArchProfile& prof,
                                   SubnetCache* cache) {
    if (static_cast<int>(channels.size()) != prof.channels)
        throw shape_error("forward_subnet: channel count mismatch");
    const std::vector<int> in_shape{prof.frame_h, prof.frame_w, prof.seg.frames_per_segment};
    for (const Tensor& c : channels)
        if (c.shape() != in_shape)
            throw shape_error("forward_subnet: segment tensor is " + shape_str(c.shape()) +
                              ", profile expects " + shape_str(in_shape));

    const StageDims o1 = prof.conv1_out();
    const kern::Ops& ops = kern::active();

    // Layer 1: per-channel responses and biases summed, one tanh.
    std::vector<Tensor> l1(prof.c1);
    for (int g = 0; g < prof.c1; ++g) {
        double bias_sum = 0.0;
        for (const ConvKernel3D& k : sp.layer1[g]) bias_sum += k.bias;
        Tensor pre = Tensor::filled({o1.h, o1.w, o1.t}, bias_sum);
        for (int c = 0; c < prof.channels; ++c) {
            const ConvKernel3D& k = sp.layer1[g][c];
            ops.conv3d_acc(pre.data(), o1.h, o1.w, o1.t, channels[c].data(), prof.frame_w,
                           prof.seg.frames_per_segment, k.weights.data(), prof.k1[0],
                           prof.k1[1], prof.k1[2]);
        }
        l1[g] = tanh_map(pre);
    }

    std::vector<PoolResult> pool1(prof.c1);
    for (int g = 0; g < prof.c1; ++g)
        pool1[g] = maxpool2d(l1[g], prof.pool1[0], prof.pool1[1]);

    // Layer 2: kernel s = i1 * c2 + i2 reads pooled set i1.
    const int sets = prof.map_sets();
    std::vector<Tensor> l2(sets);
    for (int s = 0; s < sets; ++s) l2[s] = conv3d(pool1[s / prof.c2].out, sp.layer2[s]);

    std::vector<PoolResult> pool2(sets);
    for (int s = 0; s < sets; ++s)
        pool2[s] = maxpool2d(l2[s], prof.pool2[0], prof.pool2[1]);

    // Layer 3: every kernel of a set runs over each temporal slice.
    const StageDims p2 = prof.pool2_out();
    const int T = p2.t;
    std::vector<std::vector<Tensor>> slices(sets);
    for (int s = 0; s < sets; ++s) {
        slices[s].resize(T);
        for (int t = 0; t < T; ++t) {
            Tensor sl({p2.h, p2.w});
            for (int y = 0; y < p2.h; ++y)
                for (int xw = 0; xw < p2.w; ++xw) sl.at2(y, xw) = pool2[s].out.at3(y, xw, t);
            slices[s][t] = std::move(sl);
        }
    }
    std::vector<Tensor> l3(static_cast<std::size_t>(sets) * prof.c3 * T);
    std::vector<double> feat;
    feat.reserve(prof.subnet_features());
    for (int s = 0; s < sets; ++s)
        for (int k = 0; k < prof.c3; ++k)
            for (int t = 0; t < T; ++t) {
                Tensor out = conv2d(slices[s][t], sp.layer3[s * prof.c3 + k]);
                for (std::size_t i = 0; i < out.size(); ++i) feat.push_back(out[i]);
                l3[(static_cast<std::size_t>(s) * prof.c3 + k) * T + t] = std::move(out);
            }

    if (cache) {
        cache->input = channels;
        cache->l1 = std::move(l1);
        cache->pool1 = std::move(pool1);
        cache->l2 = std::move(l2);
        cache->pool2 = std::move(pool2);
        cache->slices = std::move(slices);
        cache->l3 = std::move(l3);
    }
    return feat;
}

std::vector<double> forward_full(const VideoSample& x, const LatentAssignment& h,
                                 const ModelParams& p, const ForwardOptions& opt,
                                 ForwardCache* cache) {
    const ArchProfile& prof = p.profile;
    // Clips may carry more channels than the profile consumes (a gray-only
    // profile reads just the first plane of gray+depth clips), never fewer.
    if (x.height != prof.frame_h || x.width != prof.frame_w || x.channels < prof.channels)
        throw shape_error("forward_full: clip dimensions do not match the profile");
    if (x.frame_count < 1) throw shape_error("forward_full: empty clip");
    if (!valid_assignment(h, prof.seg))
        throw config_error("forward_full: latent assignment is not admissible");

    const std::vector<int> anchors = sample_anchor_frames(x.frame_count, prof.seg.anchors);
    if (cache) {
        cache->subnets.assign(prof.seg.segments, SubnetCache{});
        cache->mode = opt.mode;
    }
    std::vector<double> concat;
    concat.reserve(prof.concat_width());
    for (int j = 0; j < prof.seg.segments; ++j) {
        const std::vector<Tensor> chans = gather_segment(x, prof, anchors, h, j);
        const std::vector<double> f =
            forward_subnet(chans, p.subnets[j], prof, cache ? &cache->subnets[j] : nullptr);
        concat.insert(concat.end(), f.begin(), f.end());
    }

    std::vector<std::uint8_t> mask;
    if (p.dropout_rate > 0.0) {
        if (opt.mode == RunMode::train) {
            mask = dropout_mask(concat.size(), p.dropout_rate, opt.dropout_seed);
            for (std::size_t i = 0; i < concat.size(); ++i)
                if (!mask[i]) concat[i] = 0.0;
        } else {
            const double keep = 1.0 - p.dropout_rate;
            for (double& v : concat) v *= keep;
        }
    }

    std::vector<double> feature = fully_connected(concat, p.fc_w, p.fc_b);
    g_forward_calls.fetch_add(1, std::memory_order_relaxed);

    if (cache) {
        cache->concat = std::move(concat);
        cache->mask = std::move(mask);
        cache->feature = feature;
    }
    return feature;
}

ModelParams backward_full(const ModelParams& p, const ForwardCache& cache,
                          std::span<const double> g_feature) {
    const ArchProfile& prof = p.profile;
    if (static_cast<int>(g_feature.size()) != prof.fc_out)
        throw shape_error("backward_full: upstream gradient width mismatch");
    if (static_cast<int>(cache.subnets.size()) != prof.seg.segments ||
        static_cast<int>(cache.concat.size()) != prof.concat_width())
        throw shape_error("backward_full: cache does not match the profile");

    ModelParams grads = zeros_like(p);

    FcGrads fg = fc_backward(cache.concat, p.fc_w, cache.feature, g_feature);
    grads.fc_w = std::move(fg.d_weights);
    grads.fc_b = std::move(fg.d_bias);

    // Through the dropout stage back to the raw concatenation.
    std::vector<double> g_concat = std::move(fg.d_input);
    if (p.dropout_rate > 0.0) {
        if (cache.mode == RunMode::train) {
            for (std::size_t i = 0; i < g_concat.size(); ++i)
                if (!cache.mask[i]) g_concat[i] = 0.0;
        } else {
            const double keep = 1.0 - p.dropout_rate;
            for (double& v : g_concat) v *= keep;
        }
    }

    const int sets = prof.map_sets();
    const StageDims o1 = prof.conv1_out();
    const StageDims p2 = prof.pool2_out();
    const int T = p2.t;
    const auto o3 = prof.conv3_out();
    const int per_subnet = prof.subnet_features();

    for (int j = 0; j < prof.seg.segments; ++j) {
        const SubnetCache& sc = cache.subnets[j];
        const SubNetworkParams& sp = p.subnets[j];
        SubNetworkParams& sg = grads.subnets[j];
        const double* g_feat = g_concat.data() + static_cast<std::size_t>(j) * per_subnet;

        // Layer 3 and the slice gather, accumulating into pooled-set gradients.
        std::vector<Tensor> g_pool2(sets);
        for (int s = 0; s < sets; ++s) g_pool2[s] = Tensor({p2.h, p2.w, T});
        std::size_t cursor = 0;
        for (int s = 0; s < sets; ++s)
            for (int k = 0; k < prof.c3; ++k)
                for (int t = 0; t < T; ++t) {
                    Tensor g_out({o3[0], o3[1]});
                    for (std::size_t i = 0; i < g_out.size(); ++i) g_out[i] = g_feat[cursor++];
                    const std::size_t li = (static_cast<std::size_t>(s) * prof.c3 + k) * T + t;
                    Conv2DGrads cg = conv2d_backward(sc.slices[s][t], sp.layer3[s * prof.c3 + k],
                                                     sc.l3[li], g_out);
                    ConvKernel2D& dk = sg.layer3[s * prof.c3 + k];
                    for (std::size_t i = 0; i < dk.weights.size(); ++i)
                        dk.weights[i] += cg.d_weights[i];
                    dk.bias += cg.d_bias;
                    for (int y = 0; y < p2.h; ++y)
                        for (int xw = 0; xw < p2.w; ++xw)
                            g_pool2[s].at3(y, xw, t) += cg.d_input.at2(y, xw);
                }

        // Pool 2, layer 2, pool 1, layer 1.
        std::vector<Tensor> g_pool1(prof.c1);
        const StageDims p1 = prof.pool1_out();
        for (int g = 0; g < prof.c1; ++g) g_pool1[g] = Tensor({p1.h, p1.w, p1.t});
        for (int s = 0; s < sets; ++s) {
            Tensor g_l2 = maxpool2d_backward(sc.l2[s].shape(), sc.pool2[s], g_pool2[s]);
            const int i1 = s / prof.c2;
            Conv3DGrads cg = conv3d_backward(sc.pool1[i1].out, sp.layer2[s], sc.l2[s], g_l2);
            ConvKernel3D& dk = sg.layer2[s];
            for (std::size_t i = 0; i < dk.weights.size(); ++i) dk.weights[i] += cg.d_weights[i];
            dk.bias += cg.d_bias;
            for (std::size_t i = 0; i < cg.d_input.size(); ++i) g_pool1[i1][i] += cg.d_input[i];
        }
        for (int g = 0; g < prof.c1; ++g) {
            Tensor g_l1 = maxpool2d_backward({o1.h, o1.w, o1.t}, sc.pool1[g], g_pool1[g]);
            for (int c = 0; c < prof.channels; ++c) {
                Conv3DGrads cg = conv3d_backward(sc.input[c], sp.layer1[g][c], sc.l1[g], g_l1);
                ConvKernel3D& dk = sg.layer1[g][c];
                for (std::size_t i = 0; i < dk.weights.size(); ++i)
                    dk.weights[i] += cg.d_weights[i];
                dk.bias += cg.d_bias;
            }
        }
    }
    return grads;
}

ScoreResult score_feature(std::span<const double> feature,
                          const std::vector<Classifier>& classifiers) {
    ScoreResult r;
    r.scores.reserve(classifiers.size());
    for (const Classifier& c : classifiers) {
        if (c.w.size() != feature.size())
            throw shape_error("score_feature: classifier width mismatch");
        r.scores.push_back(kern::active().dot(c.w.data(), feature.data(), feature.size()) +
                           c.b);
    }
    r.best_class = 0;
    for (std::size_t i = 1; i < r.scores.size(); ++i)
        if (r.scores[i] > r.scores[r.best_class]) r.best_class = static_cast<int>(i);
    return r;
}

std::uint64_t forward_full_calls() { return g_forward_calls.load(std::memory_order_relaxed); }
void reset_forward_full_calls() { g_forward_calls.store(0, std::memory_order_relaxed); }

void duplicate_first_channel(ModelParams& p) {
    for (SubNetworkParams& sp : p.subnets)
        for (auto& group : sp.layer1)
            for (std::size_t c = 1; c < group.size(); ++c) group[c] = group[0];
}

void rerandomize_fc(ModelParams& p, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    const double rf = glorot_radius(p.profile.concat_width(), p.profile.fc_out);
    fill_uniform(p.fc_w, g, rf);
    std::fill(p.fc_b.begin(), p.fc_b.end(), 0.0);
}

}  // namespace stav
