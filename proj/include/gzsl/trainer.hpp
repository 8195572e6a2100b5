#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/linalg.hpp"
#include "gzsl/model.hpp"
#include "gzsl/pipeline.hpp"

namespace gzsl {

// Hyper-parameters of a training run. The two presets carry the published
// per-partition values; everything is overridable.
struct TrainConfig {
    double lambda1 = 1.0;
    double lambda2 = 4.0;
    double beta1 = 4.0;
    double beta2 = 0.1;
    double beta3 = 1.0;
    double gamma = 0.5;
    double gamma1 = 0.001;
    double gamma2 = 0.0001;
    double gamma3 = 0.1;
    double lr_shared = 1e-4;
    double lr_pbd = 1e-4;
    double lr_stae = 2e-5;
    double lr_emotion = 2e-5;
    std::size_t batch_size = 8;
    std::size_t epochs = 200;
    // beta2/beta3 stay at zero until this epoch; default is 60% of epochs.
    std::optional<std::size_t> threshold_warmup_epoch;
    std::size_t q = 5;
    std::size_t r = 5;
    std::size_t heads = 5;
    std::size_t blstm_layers = 3;
    std::size_t hidden = 64;
    std::size_t proj_hidden = 50;
    std::size_t proto_dim = 20;
    std::size_t emotion_hidden = 50;
    std::uint64_t seed = 1;
    Pooling pooling = Pooling::last_first;
    bool stae_per_sample = false;
    std::size_t eval_every = 0;  // holdout evaluation cadence; 0 disables

    std::size_t resolved_warmup() const {
        return threshold_warmup_epoch ? *threshold_warmup_epoch : epochs * 3 / 5;
    }

    static TrainConfig preset_partition1() { return TrainConfig{}; }

    static TrainConfig preset_partition2() {
        TrainConfig c;
        c.lambda2 = 2.0;
        c.beta1 = 2.0;
        c.beta2 = 0.05;
        c.lr_pbd = 5e-5;
        c.lr_emotion = 5e-5;
        c.gamma1 = 0.0001;
        return c;
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double l_pbd = 0.0;
    double l_stae = 0.0;
    double l_em = 0.0;
    double total = 0.0;
    std::optional<double> holdout_h;
};

struct TrainResult {
    GzslModel model;
    std::vector<EpochRecord> log;
};

namespace train_detail {

// Branch losses of one batch. Per-sample losses are averaged; the StAE sum
// is normalized by the batch size; the threshold penalty enters once.
struct BatchLoss {
    Var pbd;
    Var stae;
    Var em;
    Var total;
};

inline BatchLoss batch_loss(const GzslModel& model, const std::vector<const SkeletonSequence*>& batch,
                            const PartitionSpec& partition, const TrainConfig& cfg,
                            double beta2_eff, double beta3_eff) {
    std::vector<Var> features;
    features.reserve(batch.size());
    std::vector<int> seen_labels, emotion_labels;
    for (const SkeletonSequence* s : batch) {
        Var x = ad::constant(transpose(s->frames));
        features.push_back(model.extractor.extract(x));
        seen_labels.push_back(partition.seen_index(s->gesture));
        emotion_labels.push_back(s->emotion);
    }
    Var f = ad::hstack(features);

    BatchLoss out;
    Var h_pbd = branch_attention(f, model.att_pbd);
    Var p = model.pbd.project(h_pbd);
    out.pbd = pbd_total_loss(p, seen_labels, model.pbd, cfg.beta1, beta2_eff, beta3_eff);

    Var h_stae = branch_attention(f, model.att_stae);
    Matrix y_t(model.dims.c_s, batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) y_t(seen_labels[j], j) = 1.0;
    out.stae = ad::scale(stae_train_loss(h_stae, y_t, model.stae),
                         1.0 / static_cast<double>(batch.size()));

    Var h_em = branch_attention(f, model.att_em);
    out.em = ad::softmax_cross_entropy(model.emotion.forward(h_em), emotion_labels);

    out.total = ad::add(out.pbd,
                        ad::add(ad::scale(out.stae, cfg.lambda1), ad::scale(out.em, cfg.lambda2)));
    return out;
}

// Closed-form ridge fit of U to map initial StAE-attended features onto the
// semantic targets A_s Y^T; warm start before gradient training.
inline void ridge_init_u(GzslModel& model, const std::vector<SkeletonSequence>& train,
                         const PartitionSpec& partition) {
    const std::size_t n = train.size();
    Matrix h(model.extractor.feature_dim(), n);
    Matrix s(model.dims.d_s, n);
    for (std::size_t j = 0; j < n; ++j) {
        Var x = ad::constant(transpose(train[j].frames));
        Var hj = branch_attention(model.extractor.extract(x), model.att_stae);
        for (std::size_t i = 0; i < h.rows(); ++i) h(i, j) = hj->value(i, 0);
        const int k = partition.seen_index(train[j].gesture);
        for (std::size_t i = 0; i < s.rows(); ++i) s(i, j) = model.stae.a_seen(i, k);
    }
    Matrix gram = matmul_nt(s, s);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += 1e-6;
    const EigenPair eg = sym_eig(gram);
    Matrix inv(gram.rows(), gram.cols());
    for (std::size_t k = 0; k < eg.values.size(); ++k)
        for (std::size_t i = 0; i < inv.rows(); ++i)
            for (std::size_t j = 0; j < inv.cols(); ++j)
                inv(i, j) += eg.vectors(i, k) * eg.vectors(j, k) / eg.values[k];
    model.stae.u->value = matmul(matmul_nt(h, s), inv);
}

}  // namespace train_detail

// Joint training loop: shuffled seeded batches, Adam with the four
// per-group learning rates, beta2/beta3 warm-up, per-epoch loss log.
// When holdout samples are supplied and eval_every > 0, the checkpoint with
// the best holdout harmonic mean is restored at the end; otherwise the
// final-epoch parameters are kept.
inline TrainResult train(const Dataset& data, const AttributeMatrix& attributes,
                         const PartitionSpec& partition, const TrainConfig& cfg,
                         const std::vector<SkeletonSequence>* holdout = nullptr) {
    if (data.train.empty()) throw DataError("train: empty training set");
    for (const auto& s : data.train)
        if (!partition.is_seen(s.gesture))
            throw DataError("train: training sample " + s.id + " is not from a seen class");

    ModelDims dims;
    dims.d_x = data.frame_dim;
    dims.heads = cfg.heads;
    dims.blstm_layers = cfg.blstm_layers;
    dims.hidden = cfg.hidden;
    dims.proj_hidden = cfg.proj_hidden;
    dims.proto_dim = cfg.proto_dim;
    dims.emotion_hidden = cfg.emotion_hidden;
    dims.c_s = partition.seen.size();
    dims.c_u = partition.unseen.size();
    dims.c_em = data.num_emotions;
    dims.d_s = attributes.dim();

    TrainResult result;
    result.model = GzslModel(dims, attributes.normalized_columns(partition.seen),
                             attributes.normalized_columns(partition.unseen), cfg.gamma,
                             cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.q, cfg.r, cfg.pooling,
                             cfg.seed);
    GzslModel& model = result.model;
    train_detail::ridge_init_u(model, data.train, partition);

    auto groups = model.param_groups(cfg.lr_shared, cfg.lr_pbd, cfg.lr_stae, cfg.lr_emotion);
    nn::Adam adam;
    Rng shuffle_rng = Rng(cfg.seed).fork(17);

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::optional<Checkpoint> best;
    double best_h = -1.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const bool warm = epoch >= cfg.resolved_warmup();
        const double beta2_eff = warm ? cfg.beta2 : 0.0;
        const double beta3_eff = warm ? cfg.beta3 : 0.0;
        shuffle_rng.shuffle(order);

        EpochRecord rec;
        rec.epoch = epoch;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const SkeletonSequence*> batch;
            for (std::size_t i = start; i < std::min(start + cfg.batch_size, order.size()); ++i)
                batch.push_back(&data.train[order[i]]);
            auto losses =
                train_detail::batch_loss(model, batch, partition, cfg, beta2_eff, beta3_eff);
            const double total = losses.total->value(0, 0);
            if (!std::isfinite(total))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(n_batches));
            rec.l_pbd += losses.pbd->value(0, 0);
            rec.l_stae += losses.stae->value(0, 0);
            rec.l_em += losses.em->value(0, 0);
            rec.total += total;
            ++n_batches;
            ad::backward(losses.total);
            adam.step(groups);
        }
        rec.l_pbd /= n_batches;
        rec.l_stae /= n_batches;
        rec.l_em /= n_batches;
        rec.total /= n_batches;

        if (holdout && !holdout->empty() && cfg.eval_every > 0 &&
            ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)) {
            EvaluationReport rep = evaluate(*holdout, model, partition, cfg.stae_per_sample);
            rec.holdout_h = rep.h;
            if (rep.h > best_h) {
                best_h = rep.h;
                best = model.to_checkpoint();
            }
        }
        result.log.push_back(rec);
    }
    if (best) model.load_values(*best);
    return result;
}

}  // namespace gzsl
