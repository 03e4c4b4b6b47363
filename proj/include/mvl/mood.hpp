#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mvl/error.hpp"
#include "mvl/fusion.hpp"
#include "mvl/gru.hpp"
#include "mvl/rng.hpp"
#include "mvl/stats.hpp"
#include "mvl/tensor.hpp"

namespace mvl::mood {

/// One labeled multi-view sequence. For classification the label is a class
/// index in [0, c); for regression it is the raw score.
struct SessionInstance {
    std::vector<std::vector<Vector>> views;  // [view][step]
    double label = 0.0;
};

struct TrainConfig {
    int hidden_dim = 8;   // recurrent units per direction
    int factor_dim = 8;   // fusion factors; the FC head uses classes * factor_dim
    int epochs = 500;
    int batch_size = 256;
    double learning_rate = 0.001;
    double dropout = 0.1;
    int min_length = 10;
    int max_length = 100;
    std::uint64_t seed = 0;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
    bool bidirectional = true;
    FusionKind fusion = FusionKind::MVM;
    int classes = 2;  // 1 -> regression on the raw score

    void validate() const {
        if (hidden_dim < 1 || factor_dim < 1 || epochs < 1 || batch_size < 1)
            throw InvalidArgument("mood::TrainConfig: sizes must be positive");
        if (learning_rate <= 0.0) throw InvalidArgument("mood::TrainConfig: bad learning rate");
        if (dropout < 0.0 || dropout >= 1.0)
            throw InvalidArgument("mood::TrainConfig: dropout must be in [0, 1)");
        if (classes < 1) throw InvalidArgument("mood::TrainConfig: classes must be >= 1");
    }
};

/// Per-view sequence encoder; bidirectional runs a second parameter set over
/// the reversed sequence and concatenates the two final states.
struct ViewEncoder {
    GruParams fwd, bwd;
    bool bidirectional = true;

    Eigen::Index output_width() const {
        return fwd.hidden_dim() * (bidirectional ? 2 : 1);
    }

    Vector encode(const std::vector<Vector>& seq, GruCache* cf = nullptr,
                  GruCache* cb = nullptr) const {
        const Vector hf = gru_forward(fwd, seq, cf);
        if (!bidirectional) return hf;
        std::vector<Vector> rev(seq.rbegin(), seq.rend());
        const Vector hb = gru_forward(bwd, rev, cb);
        Vector out(hf.size() + hb.size());
        out << hf, hb;
        return out;
    }
};

/// Model parameters as one traversable bundle (used for gradients and the
/// optimizer cache as well).
struct ParamSet {
    std::vector<ViewEncoder> encoders;
    FusionHead head;

    template <typename F>
    void for_each(F&& f) {
        for (ViewEncoder& e : encoders) {
            e.fwd.for_each(f);
            if (e.bidirectional) e.bwd.for_each(f);
        }
        head.for_each(f);
    }

    static ParamSet zeros_like(const ParamSet& other) {
        ParamSet p = other;
        p.for_each([](auto& m) { m.setZero(); });
        return p;
    }

    template <typename F>
    static void zip(ParamSet& a, ParamSet& b, ParamSet& c, F&& f) {
        std::vector<Matrix*> am, bm, cm;
        std::vector<Vector*> av, bv, cv;
        collect(a, am, av);
        collect(b, bm, bv);
        collect(c, cm, cv);
        for (std::size_t i = 0; i < am.size(); ++i) f(*am[i], *bm[i], *cm[i]);
        for (std::size_t i = 0; i < av.size(); ++i) f(*av[i], *bv[i], *cv[i]);
    }

    long parameter_count() const {
        long n = 0;
        const_cast<ParamSet*>(this)->for_each([&](auto& m) { n += static_cast<long>(m.size()); });
        return n;
    }

    Vector flatten() const {
        Vector out(parameter_count());
        Eigen::Index at = 0;
        const_cast<ParamSet*>(this)->for_each([&](auto& m) {
            out.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
            at += m.size();
        });
        return out;
    }

    void unflatten(const Vector& v) {
        Eigen::Index at = 0;
        for_each([&](auto& m) {
            Eigen::Map<Vector>(m.data(), m.size()) = v.segment(at, m.size());
            at += m.size();
        });
    }

private:
    static void collect(ParamSet& p, std::vector<Matrix*>& ms, std::vector<Vector*>& vs) {
        for (ViewEncoder& e : p.encoders) {
            auto push = [&](GruParams& g) {
                for (Matrix* m : {&g.wr, &g.ur, &g.wz, &g.uz, &g.wh, &g.uh}) ms.push_back(m);
            };
            push(e.fwd);
            if (e.bidirectional) push(e.bwd);
        }
        switch (p.head.kind) {
            case FusionKind::FC:
                ms.push_back(&p.head.w1);
                ms.push_back(&p.head.w2);
                break;
            case FusionKind::FM:
                for (auto& m : p.head.u) ms.push_back(&m);
                for (auto& v : p.head.w) vs.push_back(&v);
                break;
            case FusionKind::MVM:
                for (auto& per_class : p.head.uv)
                    for (auto& m : per_class) ms.push_back(&m);
                break;
        }
    }
};

struct MoodModel {
    ParamSet params;
    TrainConfig config;
    std::vector<Eigen::Index> view_dims;
    bool fitted = false;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double train_metric = 0.0;  // accuracy, or RMSE for regression
    double val_metric = 0.0;
};

struct TrainResult {
    MoodModel model;
    std::vector<EpochRecord> history;
};

namespace mood_detail {

inline Vector softmax(const Vector& scores) {
    const Vector shifted = (scores.array() - scores.maxCoeff()).matrix();
    Vector e = shifted.array().exp().matrix();
    return e / e.sum();
}

// Loss and upstream score gradient for one instance.
inline double loss_and_dscores(const Vector& scores, double label, int classes,
                               Vector& dscores) {
    if (classes == 1) {
        const double diff = scores[0] - label;
        dscores = Vector::Constant(1, 2.0 * diff);
        return diff * diff;
    }
    const Vector p = softmax(scores);
    const auto y = static_cast<Eigen::Index>(label);
    dscores = p;
    dscores[y] -= 1.0;
    return -std::log(std::max(p[y], 1e-300));
}

struct InstanceWork {
    std::vector<GruCache> cache_f, cache_b;
    std::vector<std::vector<Vector>> reversed;
};

}  // namespace mood_detail

/// Class scores for one instance; masks (if given) are applied to the encoder
/// outputs before fusion.
inline Vector model_scores(const MoodModel& model, const SessionInstance& inst,
                           const std::vector<Vector>* dropout_masks = nullptr,
                           std::vector<GruCache>* cf = nullptr,
                           std::vector<GruCache>* cb = nullptr,
                           std::vector<Vector>* h_out = nullptr) {
    const auto m = model.params.encoders.size();
    if (inst.views.size() != m)
        throw InvalidArgument("model_scores: view count mismatch");
    std::vector<Vector> h(m);
    for (std::size_t p = 0; p < m; ++p) {
        h[p] = model.params.encoders[p].encode(inst.views[p], cf ? &(*cf)[p] : nullptr,
                                               cb ? &(*cb)[p] : nullptr);
        if (dropout_masks) h[p] = h[p].cwiseProduct((*dropout_masks)[p]);
    }
    if (h_out) *h_out = h;
    return fusion_forward(model.params.head, h);
}

/// Loss of one instance with dropout disabled.
inline double instance_loss(const MoodModel& model, const SessionInstance& inst) {
    Vector dscores;
    return mood_detail::loss_and_dscores(model_scores(model, inst), inst.label,
                                         model.config.classes, dscores);
}

/// Full backpropagation for one instance; accumulates into `grads` and
/// returns the loss. Masks, when given, must match the encoder outputs.
inline double accumulate_gradients(const MoodModel& model, const SessionInstance& inst,
                                   ParamSet& grads,
                                   const std::vector<Vector>* dropout_masks = nullptr) {
    const auto m = model.params.encoders.size();
    std::vector<GruCache> cache_f(m), cache_b(m);
    std::vector<Vector> h;
    const Vector scores = model_scores(model, inst, dropout_masks, &cache_f, &cache_b, &h);
    Vector dscores;
    const double loss =
        mood_detail::loss_and_dscores(scores, inst.label, model.config.classes, dscores);

    std::vector<Vector> dh = fusion_backward(model.params.head, h, dscores, grads.head);
    for (std::size_t p = 0; p < m; ++p) {
        if (dropout_masks) dh[p] = dh[p].cwiseProduct((*dropout_masks)[p]);
        const ViewEncoder& enc = model.params.encoders[p];
        const Eigen::Index dhid = enc.fwd.hidden_dim();
        const GruGrads gf = gru_backward(enc.fwd, cache_f[p], dh[p].head(dhid));
        auto add = [](GruParams& acc, const GruParams& inc) {
            acc.wr += inc.wr; acc.ur += inc.ur;
            acc.wz += inc.wz; acc.uz += inc.uz;
            acc.wh += inc.wh; acc.uh += inc.uh;
        };
        add(grads.encoders[p].fwd, gf);
        if (enc.bidirectional)
            add(grads.encoders[p].bwd,
                gru_backward(enc.bwd, cache_b[p], dh[p].tail(dhid)));
    }
    return loss;
}

inline MoodModel init_model(const std::vector<Eigen::Index>& view_dims,
                            const TrainConfig& cfg) {
    cfg.validate();
    Rng rng = Rng(cfg.seed).fork(0x6d6f6f64);
    MoodModel model;
    model.config = cfg;
    model.view_dims = view_dims;
    model.params.encoders.resize(view_dims.size());
    for (std::size_t p = 0; p < view_dims.size(); ++p) {
        ViewEncoder& e = model.params.encoders[p];
        e.bidirectional = cfg.bidirectional;
        e.fwd = GruParams::glorot(view_dims[p], cfg.hidden_dim, rng);
        e.bwd = cfg.bidirectional ? GruParams::glorot(view_dims[p], cfg.hidden_dim, rng)
                                  : GruParams::zeros(view_dims[p], cfg.hidden_dim);
    }
    const int width = cfg.hidden_dim * (cfg.bidirectional ? 2 : 1);
    model.params.head = FusionHead::glorot(cfg.fusion, cfg.classes, cfg.factor_dim,
                                           static_cast<int>(view_dims.size()), width, rng);
    return model;
}

inline double evaluate_metric(const MoodModel& model,
                              const std::vector<SessionInstance>& data) {
    if (data.empty()) return 0.0;
    if (model.config.classes == 1) {
        Vector pred(static_cast<Eigen::Index>(data.size())),
            actual(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            pred[static_cast<Eigen::Index>(i)] = model_scores(model, data[i])[0];
            actual[static_cast<Eigen::Index>(i)] = data[i].label;
        }
        return rmse(pred, actual);
    }
    long correct = 0;
    for (const SessionInstance& inst : data) {
        const Vector scores = model_scores(model, inst);
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.size(); ++j)
            if (scores[j] > scores[best]) best = j;
        if (best == static_cast<Eigen::Index>(inst.label)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// End-to-end training: per-view bidirectional GRU encoders, inverted dropout
/// on the encoder outputs, one fusion head, softmax cross-entropy (or squared
/// error when classes == 1), RMSProp updates on shuffled mini-batches.
inline TrainResult train(const std::vector<SessionInstance>& train_set,
                         const std::vector<SessionInstance>& val_set,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) throw InvalidArgument("mood::train: empty dataset");
    const std::size_t m = train_set.front().views.size();
    if (m == 0) throw InvalidArgument("mood::train: instances must have views");
    std::vector<Eigen::Index> dims(m);
    for (std::size_t p = 0; p < m; ++p) {
        if (train_set.front().views[p].empty())
            throw InvalidArgument("mood::train: empty sequence");
        dims[p] = train_set.front().views[p].front().size();
    }
    if (cfg.classes >= 2) {
        std::vector<bool> seen(static_cast<std::size_t>(cfg.classes), false);
        for (const auto& inst : train_set) {
            const auto y = static_cast<long>(inst.label);
            if (y < 0 || y >= cfg.classes)
                throw InvalidArgument("mood::train: label outside [0, classes)");
            seen[static_cast<std::size_t>(y)] = true;
        }
        if (std::count(seen.begin(), seen.end(), true) < 2)
            throw InvalidArgument("mood::train: need at least two classes present");
    }

    MoodModel model = init_model(dims, cfg);
    ParamSet rms = ParamSet::zeros_like(model.params);
    Rng shuffle_rng = Rng(cfg.seed).fork(0x73687566);
    Rng dropout_rng = Rng(cfg.seed).fork(0x64726f70);

    const int width = cfg.hidden_dim * (cfg.bidirectional ? 2 : 1);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            ParamSet grads = ParamSet::zeros_like(model.params);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const SessionInstance& inst = train_set[order[bi]];
                std::vector<Vector> masks(m);
                for (std::size_t p = 0; p < m; ++p) {
                    masks[p] = Vector::Ones(width);
                    if (cfg.dropout > 0.0) {
                        const double keep = 1.0 - cfg.dropout;
                        for (Eigen::Index i = 0; i < width; ++i)
                            masks[p][i] = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
                    }
                }
                epoch_loss += accumulate_gradients(model, inst, grads, &masks);
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            ParamSet::zip(model.params, grads, rms,
                          [&](auto& param, auto& grad, auto& cache) {
                              grad *= scale;
                              cache = cfg.rms_decay * cache +
                                      (1.0 - cfg.rms_decay) * grad.cwiseProduct(grad);
                              param -= cfg.learning_rate *
                                       grad.cwiseQuotient(
                                           (cache.cwiseSqrt().array() + cfg.rms_epsilon)
                                               .matrix());
                          });
        }
        model.fitted = true;
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
        rec.train_metric = evaluate_metric(model, train_set);
        rec.val_metric = evaluate_metric(model, val_set);
        result.history.push_back(rec);
    }
    result.model = std::move(model);
    result.model.fitted = true;
    return result;
}

/// Predicted class indices (classification) or raw scores (regression);
/// dropout is never applied at inference.
inline Vector predict(const MoodModel& model, const std::vector<SessionInstance>& data) {
    if (!model.fitted) throw StateError("mood::predict: model not fitted");
    Vector out(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vector scores = model_scores(model, data[i]);
        if (model.config.classes == 1) {
            out[static_cast<Eigen::Index>(i)] = scores[0];
        } else {
            Eigen::Index best = 0;
            for (Eigen::Index j = 1; j < scores.size(); ++j)
                if (scores[j] > scores[best]) best = j;
            out[static_cast<Eigen::Index>(i)] = static_cast<double>(best);
        }
    }
    return out;
}

}  // namespace mvl::mood
