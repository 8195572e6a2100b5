#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

// Synthetic skeleton-gesture corpus. Every class gets an attribute vector;
// its motion parameters (base pose offset, per-channel sinusoid amplitude,
// frequency, phase, speed, mirror symmetry) are a fixed deterministic
// function of that vector, so attribute similarity carries over to motion
// similarity and unseen classes stay predictable from their attributes.
struct SynthSpec {
    std::size_t emotions = 5;
    std::size_t gestures_per_emotion = 3;
    std::size_t unseen_per_emotion = 1;
    std::size_t train_per_class = 40;   // seen classes only
    std::size_t test_per_seen = 8;
    std::size_t test_per_unseen = 10;
    std::size_t joints = 25;            // frame_dim = 3 * joints
    std::size_t len_min = 20;
    std::size_t len_max = 32;
    double noise = 0.02;
    std::size_t attr_continuous = 7;
    std::size_t attr_binary = 5;
    std::uint64_t seed = 1;
    // Test hook: supply the per-class attribute rows instead of sampling them.
    std::optional<Matrix> attribute_override;

    std::size_t num_classes() const { return emotions * gestures_per_emotion; }
    std::size_t frame_dim() const { return 3 * joints; }
    std::size_t attr_dim() const { return attr_continuous + attr_binary; }
};

struct SynthResult {
    Dataset dataset;
    AttributeMatrix attributes;
    PartitionSpec partition;
};

namespace synth_detail {

// Smooth squashing to (0, 1).
inline double squash(double x) { return 0.5 * (1.0 + std::tanh(x)); }

struct MotionParams {
    std::vector<double> amplitude;  // per channel
    std::vector<double> frequency;
    std::vector<double> phase;
    double speed = 1.0;
    bool mirrored = false;
};

// Fixed attribute-to-motion map: three motif matrices and a speed vector
// drawn once from the spec seed, applied linearly to the attribute vector.
struct MotionMapper {
    Matrix amp_motifs;    // d_x x d_s
    Matrix freq_motifs;   // d_x x d_s
    Matrix phase_motifs;  // d_x x d_s
    std::vector<double> speed_weights;
    Matrix base_pose;  // d_x x 1

    MotionMapper(const SynthSpec& spec, Rng& rng) {
        const std::size_t d_x = spec.frame_dim();
        const std::size_t d_s = spec.attr_dim();
        amp_motifs = rng.uniform_matrix(d_x, d_s, -1.0, 1.0);
        freq_motifs = rng.uniform_matrix(d_x, d_s, -1.0, 1.0);
        phase_motifs = rng.uniform_matrix(d_x, d_s, -1.0, 1.0);
        speed_weights.resize(d_s);
        for (auto& w : speed_weights) w = rng.uniform(-1.0, 1.0);
        base_pose = rng.uniform_matrix(d_x, 1, -0.5, 0.5);
    }

    MotionParams map(const double* attrs, std::size_t d_s) const {
        const std::size_t d_x = amp_motifs.rows();
        MotionParams mp;
        mp.amplitude.resize(d_x);
        mp.frequency.resize(d_x);
        mp.phase.resize(d_x);
        double speed_acc = 0.0;
        for (std::size_t s = 0; s < d_s; ++s) speed_acc += speed_weights[s] * attrs[s];
        mp.speed = 0.6 + 0.8 * squash(speed_acc);
        for (std::size_t j = 0; j < d_x; ++j) {
            double a = 0.0, f = 0.0, ph = 0.0;
            for (std::size_t s = 0; s < d_s; ++s) {
                a += amp_motifs(j, s) * attrs[s];
                f += freq_motifs(j, s) * attrs[s];
                ph += phase_motifs(j, s) * attrs[s];
            }
            mp.amplitude[j] = 0.2 + 0.8 * squash(a);
            mp.frequency[j] = 0.5 + 1.5 * squash(f);
            mp.phase[j] = 2.0 * 3.14159265358979323846 * squash(ph);
        }
        // The last binary attribute mirrors the second half of the channels.
        mp.mirrored = d_s > 0 && attrs[d_s - 1] > 0.5;
        return mp;
    }
};

inline SkeletonSequence render_sample(const SynthSpec& spec, const MotionMapper& mapper,
                                      const MotionParams& mp, int gesture, int emotion,
                                      std::size_t index, Rng& sample_rng) {
    const std::size_t d_x = spec.frame_dim();
    const std::size_t len =
        spec.len_min + (spec.len_max > spec.len_min
                            ? sample_rng.below(spec.len_max - spec.len_min + 1)
                            : 0);
    const double speed_jitter = sample_rng.uniform(0.9, 1.1);
    const double phase_jitter = sample_rng.uniform(-0.3, 0.3);

    SkeletonSequence s;
    s.gesture = gesture;
    s.emotion = emotion;
    s.frames = Matrix(len, d_x);
    for (std::size_t t = 0; t < len; ++t) {
        const double tau = static_cast<double>(t) / 10.0;
        for (std::size_t j = 0; j < d_x; ++j) {
            const double angle =
                mp.frequency[j] * mp.speed * speed_jitter * tau + mp.phase[j] + phase_jitter;
            s.frames(t, j) = mapper.base_pose(j, 0) + mp.amplitude[j] * std::sin(angle);
        }
        if (mp.mirrored) {
            for (std::size_t j = 0; j < d_x / 2; ++j)
                s.frames(t, d_x - 1 - j) = s.frames(t, j);
        }
        for (std::size_t j = 0; j < d_x; ++j)
            s.frames(t, j) += spec.noise * sample_rng.normal();
    }
    (void)index;
    return s;
}

}  // namespace synth_detail

inline SynthResult generate_synthetic(const SynthSpec& spec) {
    if (spec.emotions < 2) throw DataError("generate_synthetic: need at least 2 emotion classes");
    if (spec.gestures_per_emotion < 2)
        throw DataError("generate_synthetic: need at least 2 gesture classes per emotion");
    if (spec.unseen_per_emotion < 1 || spec.unseen_per_emotion >= spec.gestures_per_emotion)
        throw DataError("generate_synthetic: unseen_per_emotion must leave at least one seen "
                        "gesture per emotion");
    if (spec.len_min < 1 || spec.len_max < spec.len_min)
        throw DataError("generate_synthetic: invalid sequence length range");
    if (spec.joints < 1 || spec.train_per_class < 1)
        throw DataError("generate_synthetic: joints and train_per_class must be positive");
    if (spec.attr_dim() < 1) throw DataError("generate_synthetic: need at least one attribute");
    if (spec.attribute_override &&
        (spec.attribute_override->rows() != spec.num_classes() ||
         spec.attribute_override->cols() != spec.attr_dim()))
        throw DataError("generate_synthetic: attribute override has wrong shape");

    const std::size_t n_classes = spec.num_classes();
    Rng master(spec.seed);
    Rng attr_rng = master.fork(1);
    Rng motif_rng = master.fork(2);

    SynthResult result;
    AttributeMatrix& attrs = result.attributes;
    attrs.values = Matrix(n_classes, spec.attr_dim());
    for (std::size_t j = 0; j < spec.attr_continuous; ++j) {
        attrs.names.push_back("motion_c" + std::to_string(j));
        attrs.kinds.push_back('c');
    }
    for (std::size_t j = 0; j < spec.attr_binary; ++j) {
        attrs.names.push_back("flag_b" + std::to_string(j));
        attrs.kinds.push_back('b');
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        attrs.class_ids.push_back(static_cast<int>(c));
        if (spec.attribute_override) {
            for (std::size_t j = 0; j < spec.attr_dim(); ++j)
                attrs.values(c, j) = (*spec.attribute_override)(c, j);
        } else {
            for (std::size_t j = 0; j < spec.attr_continuous; ++j)
                attrs.values(c, j) = std::round(attr_rng.uniform() * 100.0) / 100.0;
            for (std::size_t j = 0; j < spec.attr_binary; ++j)
                attrs.values(c, spec.attr_continuous + j) = attr_rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
    }

    Dataset& ds = result.dataset;
    ds.num_classes = n_classes;
    ds.num_emotions = spec.emotions;
    ds.frame_dim = spec.frame_dim();
    for (std::size_t c = 0; c < n_classes; ++c)
        ds.emotion_map.push_back(static_cast<int>(c / spec.gestures_per_emotion));

    PartitionSpec& part = result.partition;
    part.emotion_of = ds.emotion_map;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::size_t within = c % spec.gestures_per_emotion;
        const bool unseen = within >= spec.gestures_per_emotion - spec.unseen_per_emotion;
        (unseen ? part.unseen : part.seen).push_back(static_cast<int>(c));
    }

    const synth_detail::MotionMapper mapper(spec, motif_rng);
    std::size_t next_id = 0;
    auto emit = [&](int gesture, std::size_t count, bool to_train) {
        const auto mp = mapper.map(attrs.values.row(gesture), spec.attr_dim());
        for (std::size_t i = 0; i < count; ++i) {
            Rng sample_rng = Rng(spec.seed).fork(3 + gesture, (to_train ? 1000000 : 0) + i);
            SkeletonSequence s = synth_detail::render_sample(
                spec, mapper, mp, gesture, ds.emotion_map[gesture], i, sample_rng);
            s.id = "s" + std::to_string(next_id++);
            (to_train ? ds.train : ds.test).push_back(std::move(s));
        }
    };
    for (int g : part.seen) {
        emit(g, spec.train_per_class, true);
        emit(g, spec.test_per_seen, false);
    }
    for (int g : part.unseen) emit(g, spec.test_per_unseen, false);
    return result;
}

// Emits dataset.txt, attributes.txt and partition.txt under dir.
inline void write_synthetic(const std::string& dir, const SynthResult& result) {
    save_dataset(dir + "/dataset.txt", result.dataset);
    save_attributes(dir + "/attributes.txt", result.attributes);
    save_partition(dir + "/partition.txt", result.partition);
}

}  // namespace gzsl
