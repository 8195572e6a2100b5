#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/model.hpp"

namespace gzsl {

inline double harmonic_mean(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

// Intermediates of the gating path for one sample.
struct GateSample {
    Matrix features;    // d_f x 1, before branch attention
    Matrix h_stae;      // d_f x 1, StAE-attended features
    Matrix projection;  // proto_dim x 1
    GateDecision gate;
};

inline GateSample gate_sample(const SkeletonSequence& sample, const GzslModel& model) {
    if (sample.frames.cols() != model.dims.d_x)
        throw DataError("predict: sample frame dimension does not match the model");
    Var x = ad::constant(transpose(sample.frames));
    Var f = model.extractor.extract(x);
    Var h_pbd = branch_attention(f, model.att_pbd);
    Var h_stae = branch_attention(f, model.att_stae);
    Var p = model.pbd.project(h_pbd);
    GateSample out;
    out.features = f->value;
    out.h_stae = h_stae->value;
    out.projection = p->value;
    out.gate = gate(p->value, model.pbd);
    return out;
}

struct Prediction {
    std::string sample_id;
    int gesture = 0;
    int emotion = 0;
    double delta_d = 0.0;
    bool gated_seen = false;
};

// Alg.-style routing for a batch: every sample is gated by the PBD; the
// unseen-gated remainder is classified by one transductive StAE solve
// (or independently per sample when per_sample_stae is set).
inline std::vector<Prediction> predict_batch(const std::vector<SkeletonSequence>& samples,
                                             const GzslModel& model,
                                             const PartitionSpec& partition,
                                             bool per_sample_stae = false,
                                             std::size_t threads = 1) {
    std::vector<GateSample> gated(samples.size());
    if (threads <= 1 || samples.size() < 2) {
        for (std::size_t i = 0; i < samples.size(); ++i) gated[i] = gate_sample(samples[i], model);
    } else {
        const std::size_t n_workers = std::min(threads, samples.size());
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&, w]() {
                for (std::size_t i = w; i < samples.size(); i += n_workers)
                    gated[i] = gate_sample(samples[i], model);
            });
        }
        for (auto& t : workers) t.join();
    }

    std::vector<Prediction> out(samples.size());
    std::vector<std::size_t> routed;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i].sample_id = samples[i].id;
        out[i].delta_d = gated[i].gate.delta_d;
        out[i].gated_seen = gated[i].gate.is_seen();
        if (out[i].gated_seen) {
            out[i].gesture = partition.seen.at(gated[i].gate.nearest_class);
            out[i].emotion = partition.emotion(out[i].gesture);
        } else {
            routed.push_back(i);
        }
    }
    if (!routed.empty()) {
        Matrix h_te(model.extractor.feature_dim(), routed.size());
        for (std::size_t j = 0; j < routed.size(); ++j)
            for (std::size_t i = 0; i < h_te.rows(); ++i)
                h_te(i, j) = gated[routed[j]].h_stae(i, 0);
        UnseenPrediction pred = stae_infer(h_te, model.stae, per_sample_stae);
        for (std::size_t j = 0; j < routed.size(); ++j) {
            const std::size_t i = routed[j];
            out[i].gesture = partition.unseen.at(pred.labels[j]);
            out[i].emotion = partition.emotion(out[i].gesture);
        }
    }
    return out;
}

inline Prediction predict(const SkeletonSequence& sample, const GzslModel& model,
                          const PartitionSpec& partition) {
    return predict_batch({sample}, model, partition, /*per_sample_stae=*/true).front();
}

// Gate verdict counts split by the true side of each sample.
struct GateStats {
    std::size_t seen_gated_seen = 0;
    std::size_t seen_gated_unseen = 0;
    std::size_t unseen_gated_seen = 0;
    std::size_t unseen_gated_unseen = 0;
};

struct EvaluationReport {
    std::size_t seen_total = 0, seen_correct = 0;
    std::size_t unseen_total = 0, unseen_correct = 0;
    std::size_t seen_correct_em = 0, unseen_correct_em = 0;
    std::optional<double> acc_seen, acc_unseen;
    std::optional<double> acc_seen_em, acc_unseen_em;
    double h = 0.0;
    double h_em = 0.0;
    GateStats gate;
    std::vector<std::vector<std::size_t>> confusion_gesture;  // true x predicted
    std::vector<std::vector<std::size_t>> confusion_emotion;
};

inline EvaluationReport evaluate(const std::vector<SkeletonSequence>& test,
                                 const GzslModel& model, const PartitionSpec& partition,
                                 bool per_sample_stae = false, std::size_t threads = 1) {
    const std::vector<Prediction> preds =
        predict_batch(test, model, partition, per_sample_stae, threads);

    EvaluationReport rep;
    const std::size_t n_gestures = partition.emotion_of.size();
    std::size_t n_emotions = 0;
    for (int e : partition.emotion_of) n_emotions = std::max(n_emotions, std::size_t(e + 1));
    rep.confusion_gesture.assign(n_gestures, std::vector<std::size_t>(n_gestures, 0));
    rep.confusion_emotion.assign(n_emotions, std::vector<std::size_t>(n_emotions, 0));

    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& s = test[i];
        const auto& p = preds[i];
        const bool true_seen = partition.is_seen(s.gesture);
        const bool gesture_ok = p.gesture == s.gesture;
        const bool emotion_ok = p.emotion == s.emotion;
        rep.confusion_gesture[s.gesture][p.gesture] += 1;
        rep.confusion_emotion[s.emotion][p.emotion] += 1;
        if (true_seen) {
            rep.seen_total += 1;
            rep.seen_correct += gesture_ok;
            rep.seen_correct_em += emotion_ok;
            (p.gated_seen ? rep.gate.seen_gated_seen : rep.gate.seen_gated_unseen) += 1;
        } else {
            rep.unseen_total += 1;
            rep.unseen_correct += gesture_ok;
            rep.unseen_correct_em += emotion_ok;
            (p.gated_seen ? rep.gate.unseen_gated_seen : rep.gate.unseen_gated_unseen) += 1;
        }
    }
    if (rep.seen_total) {
        rep.acc_seen = double(rep.seen_correct) / double(rep.seen_total);
        rep.acc_seen_em = double(rep.seen_correct_em) / double(rep.seen_total);
    }
    if (rep.unseen_total) {
        rep.acc_unseen = double(rep.unseen_correct) / double(rep.unseen_total);
        rep.acc_unseen_em = double(rep.unseen_correct_em) / double(rep.unseen_total);
    }
    rep.h = harmonic_mean(rep.acc_seen.value_or(0.0), rep.acc_unseen.value_or(0.0));
    rep.h_em = harmonic_mean(rep.acc_seen_em.value_or(0.0), rep.acc_unseen_em.value_or(0.0));
    return rep;
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& rep) {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    j["seen_total"] = rep.seen_total;
    j["seen_correct"] = rep.seen_correct;
    j["unseen_total"] = rep.unseen_total;
    j["unseen_correct"] = rep.unseen_correct;
    j["acc_seen"] = opt(rep.acc_seen);
    j["acc_unseen"] = opt(rep.acc_unseen);
    j["harmonic_mean"] = rep.h;
    j["acc_seen_emotion"] = opt(rep.acc_seen_em);
    j["acc_unseen_emotion"] = opt(rep.acc_unseen_em);
    j["harmonic_mean_emotion"] = rep.h_em;
    j["gate"] = {{"seen_gated_seen", rep.gate.seen_gated_seen},
                 {"seen_gated_unseen", rep.gate.seen_gated_unseen},
                 {"unseen_gated_seen", rep.gate.unseen_gated_seen},
                 {"unseen_gated_unseen", rep.gate.unseen_gated_unseen}};
    j["confusion_gesture"] = rep.confusion_gesture;
    j["confusion_emotion"] = rep.confusion_emotion;
    return j;
}

inline void write_report(std::ostream& out, const EvaluationReport& rep) {
    out << report_to_json(rep).dump(2) << "\n";
}

// One JSON record per sample: id, gate margin, verdict and both labels.
inline void write_predictions(std::ostream& out, const std::vector<Prediction>& preds) {
    for (const auto& p : preds) {
        nlohmann::ordered_json j;
        j["sample_id"] = p.sample_id;
        j["delta_d"] = p.delta_d;
        j["verdict"] = p.gated_seen ? "seen" : "unseen";
        j["gesture"] = p.gesture;
        j["emotion"] = p.emotion;
        out << j.dump() << "\n";
    }
}

}  // namespace gzsl
