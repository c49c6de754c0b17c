#pragma once

// Training-loss math as pure functions over dense arrays: pixel L1, the
// inpainting-targeted L1 restricted to the non-zero input set, a patch
// contrastive loss over feature maps, and the adversarial terms. Each
// differentiable loss ships its analytic gradient; finite_diff_grad is the
// independent check.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "occluplan/core.hpp"

namespace occluplan {

// Dense row-major 2D array of doubles.
struct Image {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Image() = default;
    Image(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
    Image(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
        if (v.size() != static_cast<std::size_t>(r) * c) throw InvalidArgumentError("Image: size mismatch");
    }

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }
};

struct ImagePair {
    Image x;  // input (lidar domain)
    Image y;  // target (semantic domain)

    ImagePair(Image x_, Image y_) : x(std::move(x_)), y(std::move(y_)) {
        if (x.rows != y.rows || x.cols != y.cols) throw DimensionMismatchError("ImagePair: dimensions differ");
    }
};

// channels x locations feature block; value(c, s) = values[c*locations + s].
struct FeatureMap {
    int channels = 0;
    int locations = 0;
    std::vector<double> values;

    FeatureMap() = default;
    FeatureMap(int ch, int loc, double fill = 0.0)
        : channels(ch), locations(loc), values(static_cast<std::size_t>(ch) * loc, fill) {}
    FeatureMap(int ch, int loc, std::vector<double> data) : channels(ch), locations(loc), values(std::move(data)) {
        if (values.size() != static_cast<std::size_t>(ch) * loc) {
            throw InvalidArgumentError("FeatureMap: size mismatch");
        }
    }

    double& at(int c, int s) { return values[static_cast<std::size_t>(c) * locations + s]; }
    double at(int c, int s) const { return values[static_cast<std::size_t>(c) * locations + s]; }
};

struct LossBreakdown {
    double gan = 0.0;
    double patchnce = 0.0;
    double inpaint_l1 = 0.0;
    double total = 0.0;
};

namespace detail {

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidArgumentError(std::string(what) + ": non-finite value");
}

inline void check_batch(const std::vector<Image>& a, const std::vector<Image>& b, const char* what) {
    if (a.empty() || a.size() != b.size()) {
        throw InvalidArgumentError(std::string(what) + ": batches must be non-empty and equal length");
    }
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (a[n].rows != b[n].rows || a[n].cols != b[n].cols) {
            throw DimensionMismatchError(std::string(what) + ": item dimensions differ");
        }
        for (double v : a[n].v) check_finite(v, what);
        for (double v : b[n].v) check_finite(v, what);
    }
}

}  // namespace detail

// ---- pixel L1 ----

/// Mean over the batch of the per-image mean absolute difference.
inline double l1_loss(const std::vector<Image>& generated, const std::vector<Image>& targets) {
    detail::check_batch(generated, targets, "l1_loss");
    double acc = 0.0;
    for (std::size_t n = 0; n < generated.size(); ++n) {
        double item = 0.0;
        for (std::size_t i = 0; i < generated[n].v.size(); ++i) {
            item += std::fabs(generated[n].v[i] - targets[n].v[i]);
        }
        acc += item / static_cast<double>(generated[n].v.size());
    }
    return acc / static_cast<double>(generated.size());
}

/// d l1_loss / d generated. Subgradient: sign convention 0 at kinks.
inline std::vector<Image> l1_loss_grad(const std::vector<Image>& generated, const std::vector<Image>& targets) {
    detail::check_batch(generated, targets, "l1_loss_grad");
    const double inv_n = 1.0 / static_cast<double>(generated.size());
    std::vector<Image> grads;
    grads.reserve(generated.size());
    for (std::size_t n = 0; n < generated.size(); ++n) {
        Image g(generated[n].rows, generated[n].cols);
        const double scale = inv_n / static_cast<double>(generated[n].v.size());
        for (std::size_t i = 0; i < g.v.size(); ++i) {
            const double d = generated[n].v[i] - targets[n].v[i];
            g.v[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// ---- inpainting-targeted L1 ----

/// L1 restricted to the non-zero pixel set of each input image, normalized
/// by that set's size. An all-zero input contributes 0.
inline double inpaint_l1_loss(const std::vector<Image>& generated, const std::vector<Image>& inputs) {
    detail::check_batch(generated, inputs, "inpaint_l1_loss");
    double acc = 0.0;
    for (std::size_t n = 0; n < generated.size(); ++n) {
        double item = 0.0;
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < inputs[n].v.size(); ++i) {
            if (inputs[n].v[i] != 0.0) {
                ++nonzero;
                item += std::fabs(generated[n].v[i] - inputs[n].v[i]);
            }
        }
        if (nonzero > 0) acc += item / static_cast<double>(nonzero);
    }
    return acc / static_cast<double>(generated.size());
}

inline std::vector<Image> inpaint_l1_loss_grad(const std::vector<Image>& generated,
                                               const std::vector<Image>& inputs) {
    detail::check_batch(generated, inputs, "inpaint_l1_loss_grad");
    const double inv_n = 1.0 / static_cast<double>(generated.size());
    std::vector<Image> grads;
    grads.reserve(generated.size());
    for (std::size_t n = 0; n < generated.size(); ++n) {
        Image g(generated[n].rows, generated[n].cols);
        std::size_t nonzero = 0;
        for (double v : inputs[n].v) nonzero += (v != 0.0);
        if (nonzero > 0) {
            const double scale = inv_n / static_cast<double>(nonzero);
            for (std::size_t i = 0; i < g.v.size(); ++i) {
                if (inputs[n].v[i] == 0.0) continue;
                const double d = generated[n].v[i] - inputs[n].v[i];
                g.v[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// ---- patch contrastive loss ----

namespace detail {

inline void check_feature_layers(const std::vector<FeatureMap>& gen, const std::vector<FeatureMap>& tgt,
                                 double tau) {
    if (!(tau > 0.0)) throw InvalidArgumentError("patchnce_loss: tau must be > 0");
    if (gen.empty() || gen.size() != tgt.size()) {
        throw InvalidArgumentError("patchnce_loss: layer lists must be non-empty and equal length");
    }
    for (std::size_t l = 0; l < gen.size(); ++l) {
        if (gen[l].channels != tgt[l].channels || gen[l].locations != tgt[l].locations) {
            throw DimensionMismatchError("patchnce_loss: layer shapes differ");
        }
        if (gen[l].channels <= 0 || gen[l].locations <= 0) {
            throw InvalidArgumentError("patchnce_loss: empty feature map");
        }
        for (double v : gen[l].values) check_finite(v, "patchnce_loss");
        for (double v : tgt[l].values) check_finite(v, "patchnce_loss");
    }
}

inline double dot_at(const FeatureMap& a, int sa, const FeatureMap& b, int sb) {
    double d = 0.0;
    for (int c = 0; c < a.channels; ++c) d += a.at(c, sa) * b.at(c, sb);
    return d;
}

}  // namespace detail

/// Contrastive loss for one sample: at every location the generated feature
/// should match the co-located target feature better than any other target
/// location. Sums over layers and locations; log-sum-exp stabilized.
inline double patchnce_loss(const std::vector<FeatureMap>& gen_features,
                            const std::vector<FeatureMap>& tgt_features, double tau) {
    detail::check_feature_layers(gen_features, tgt_features, tau);
    double total = 0.0;
    std::vector<double> logits;
    for (std::size_t l = 0; l < gen_features.size(); ++l) {
        const FeatureMap& gen = gen_features[l];
        const FeatureMap& tgt = tgt_features[l];
        const int S = gen.locations;
        logits.resize(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) {
            double max_logit = -1e300;
            for (int sp = 0; sp < S; ++sp) {
                logits[sp] = detail::dot_at(gen, s, tgt, sp) / tau;
                max_logit = std::max(max_logit, logits[sp]);
            }
            double denom = 0.0;
            for (int sp = 0; sp < S; ++sp) denom += std::exp(logits[sp] - max_logit);
            // -log softmax of the positive (sp == s)
            total += max_logit + std::log(denom) - logits[s];
        }
    }
    detail::check_finite(total, "patchnce_loss");
    return total;
}

/// Mean of patchnce_loss over a batch of samples.
inline double patchnce_loss_batch(
    const std::vector<std::pair<std::vector<FeatureMap>, std::vector<FeatureMap>>>& samples, double tau) {
    if (samples.empty()) throw InvalidArgumentError("patchnce_loss_batch: empty batch");
    double acc = 0.0;
    for (const auto& [gen, tgt] : samples) acc += patchnce_loss(gen, tgt, tau);
    return acc / static_cast<double>(samples.size());
}

/// d patchnce_loss / d gen feature values, per layer.
inline std::vector<FeatureMap> patchnce_loss_grad(const std::vector<FeatureMap>& gen_features,
                                                  const std::vector<FeatureMap>& tgt_features, double tau) {
    detail::check_feature_layers(gen_features, tgt_features, tau);
    std::vector<FeatureMap> grads;
    grads.reserve(gen_features.size());
    std::vector<double> logits;
    for (std::size_t l = 0; l < gen_features.size(); ++l) {
        const FeatureMap& gen = gen_features[l];
        const FeatureMap& tgt = tgt_features[l];
        const int S = gen.locations;
        FeatureMap grad(gen.channels, S);
        logits.resize(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) {
            double max_logit = -1e300;
            for (int sp = 0; sp < S; ++sp) {
                logits[sp] = detail::dot_at(gen, s, tgt, sp) / tau;
                max_logit = std::max(max_logit, logits[sp]);
            }
            double denom = 0.0;
            for (int sp = 0; sp < S; ++sp) denom += std::exp(logits[sp] - max_logit);
            // dl/dv = (sum_sp softmax_sp * tgt_sp - tgt_s) / tau
            for (int sp = 0; sp < S; ++sp) {
                const double p = std::exp(logits[sp] - max_logit) / denom;
                for (int c = 0; c < gen.channels; ++c) grad.at(c, s) += p * tgt.at(c, sp) / tau;
            }
            for (int c = 0; c < gen.channels; ++c) grad.at(c, s) -= tgt.at(c, s) / tau;
        }
        grads.push_back(std::move(grad));
    }
    return grads;
}

// ---- adversarial terms ----

/// Non-saturating GAN losses from discriminator probabilities.
/// Returns (generator loss, discriminator loss).
inline std::pair<double, double> gan_loss(const std::vector<double>& disc_real,
                                          const std::vector<double>& disc_fake) {
    if (disc_real.empty() || disc_fake.empty()) throw InvalidArgumentError("gan_loss: empty batch");
    for (double p : disc_real) {
        if (!(p > 0.0 && p < 1.0)) throw InvalidArgumentError("gan_loss: probability outside (0,1)");
    }
    for (double p : disc_fake) {
        if (!(p > 0.0 && p < 1.0)) throw InvalidArgumentError("gan_loss: probability outside (0,1)");
    }
    double real_term = 0.0;
    for (double p : disc_real) real_term += std::log(p);
    real_term /= static_cast<double>(disc_real.size());
    double fake_term = 0.0, gen_term = 0.0;
    for (double p : disc_fake) {
        fake_term += std::log(1.0 - p);
        gen_term += std::log(p);
    }
    fake_term /= static_cast<double>(disc_fake.size());
    gen_term /= static_cast<double>(disc_fake.size());
    return {-gen_term, -real_term - fake_term};
}

/// d gen_loss / d disc_fake.
inline std::vector<double> gan_gen_loss_grad(const std::vector<double>& disc_fake) {
    if (disc_fake.empty()) throw InvalidArgumentError("gan_gen_loss_grad: empty batch");
    std::vector<double> g(disc_fake.size());
    const double inv_n = 1.0 / static_cast<double>(disc_fake.size());
    for (std::size_t i = 0; i < disc_fake.size(); ++i) {
        if (!(disc_fake[i] > 0.0 && disc_fake[i] < 1.0)) {
            throw InvalidArgumentError("gan_gen_loss_grad: probability outside (0,1)");
        }
        g[i] = -inv_n / disc_fake[i];
    }
    return g;
}

/// d disc_loss / d (disc_real, disc_fake).
inline std::pair<std::vector<double>, std::vector<double>> gan_disc_loss_grad(
    const std::vector<double>& disc_real, const std::vector<double>& disc_fake) {
    std::vector<double> gr(disc_real.size()), gf(disc_fake.size());
    const double inv_r = 1.0 / static_cast<double>(disc_real.size());
    const double inv_f = 1.0 / static_cast<double>(disc_fake.size());
    for (std::size_t i = 0; i < disc_real.size(); ++i) gr[i] = -inv_r / disc_real[i];
    for (std::size_t i = 0; i < disc_fake.size(); ++i) gf[i] = inv_f / (1.0 - disc_fake[i]);
    return {gr, gf};
}

// ---- total objective ----

/// gan + patchnce + inpaint_l1, summed left to right.
inline LossBreakdown total_objective(double gan, double patchnce, double inpaint_l1) {
    detail::check_finite(gan, "total_objective");
    detail::check_finite(patchnce, "total_objective");
    detail::check_finite(inpaint_l1, "total_objective");
    LossBreakdown b;
    b.gan = gan;
    b.patchnce = patchnce;
    b.inpaint_l1 = inpaint_l1;
    b.total = gan + patchnce + inpaint_l1;
    return b;
}

// ---- finite-difference oracle ----

/// Central differences (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps).
inline std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& loss_fn,
                                            std::vector<double> point, double eps) {
    if (!(eps > 0.0)) throw InvalidArgumentError("finite_diff_grad: eps must be > 0");
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double orig = point[i];
        point[i] = orig + eps;
        const double fp = loss_fn(point);
        point[i] = orig - eps;
        const double fm = loss_fn(point);
        point[i] = orig;
        detail::check_finite(fp, "finite_diff_grad");
        detail::check_finite(fm, "finite_diff_grad");
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

}  // namespace occluplan
