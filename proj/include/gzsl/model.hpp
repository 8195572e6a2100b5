#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gzsl/attention.hpp"
#include "gzsl/checkpoint.hpp"
#include "gzsl/error.hpp"
#include "gzsl/extractor.hpp"
#include "gzsl/nn.hpp"
#include "gzsl/pbd.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/stae.hpp"

namespace gzsl {

// Auxiliary emotion classifier: FC -> ReLU -> FC logits.
struct EmotionHead {
    nn::FcLayer fc1;
    nn::FcLayer fc2;

    EmotionHead() = default;
    EmotionHead(std::size_t d_f, std::size_t hidden, std::size_t n_emotions, Rng& rng)
        : fc1(hidden, d_f, rng), fc2(n_emotions, hidden, rng) {}

    Var forward(Var h) const { return fc2.forward(ad::relu(fc1.forward(h))); }

    std::vector<Var> params() const { return {fc1.w, fc1.b, fc2.w, fc2.b}; }
};

struct ModelDims {
    std::size_t d_x = 75;
    std::size_t heads = 5;
    std::size_t blstm_layers = 3;
    std::size_t hidden = 64;
    std::size_t proj_hidden = 50;
    std::size_t proto_dim = 20;
    std::size_t emotion_hidden = 50;
    std::size_t c_s = 0;
    std::size_t c_u = 0;
    std::size_t c_em = 0;
    std::size_t d_s = 0;
};

// The full framework: shared extractor, per-branch attention modules and the
// three branches. Parameters split into the four learning-rate groups.
struct GzslModel {
    ModelDims dims;
    FeatureExtractor extractor;
    BranchAttentionParams att_pbd, att_stae, att_em;
    PrototypeModel pbd;
    StaeModel stae;
    EmotionHead emotion;

    GzslModel() = default;

    GzslModel(const ModelDims& dims, const Matrix& a_seen, const Matrix& a_unseen,
              double gamma, double gamma1, double gamma2, double gamma3, std::size_t q,
              std::size_t r, Pooling pooling, std::uint64_t seed)
        : dims(dims) {
        Rng rng(seed);
        extractor = FeatureExtractor(dims.d_x, dims.heads, dims.blstm_layers, dims.hidden, rng);
        extractor.pooling = pooling;
        const std::size_t d_f = extractor.feature_dim();
        att_pbd = BranchAttentionParams(d_f, rng);
        att_stae = BranchAttentionParams(d_f, rng);
        att_em = BranchAttentionParams(d_f, rng);
        pbd = PrototypeModel(d_f, dims.proj_hidden, dims.proto_dim, dims.c_s, rng);
        pbd.gamma = gamma;
        stae.u = ad::param(rng.uniform_matrix(d_f, dims.d_s, -0.1, 0.1));
        stae.a_seen = a_seen;
        stae.a_unseen = a_unseen;
        stae.gamma1 = gamma1;
        stae.gamma2 = gamma2;
        stae.gamma3 = gamma3;
        stae.instance_neighbors = q;
        stae.feature_neighbors = r;
        emotion = EmotionHead(d_f, dims.emotion_hidden, dims.c_em, rng);
    }

    // The four optimizer groups: the shared extractor and one group per
    // branch; each branch owns its attention module.
    std::vector<nn::ParamGroup> param_groups(double lr_shared, double lr_pbd, double lr_stae,
                                             double lr_emotion) const {
        std::vector<nn::ParamGroup> groups(4);
        groups[0] = {"shared", extractor.params(), lr_shared};
        groups[1] = {"pbd", att_pbd.params(), lr_pbd};
        for (const auto& p : pbd.params()) groups[1].params.push_back(p);
        groups[2] = {"stae", att_stae.params(), lr_stae};
        groups[2].params.push_back(stae.u);
        groups[3] = {"emotion", att_em.params(), lr_emotion};
        for (const auto& p : emotion.params()) groups[3].params.push_back(p);
        return groups;
    }

    std::vector<std::pair<std::string, Var>> named_params() const {
        std::vector<std::pair<std::string, Var>> out;
        for (std::size_t i = 0; i < extractor.attention.heads.size(); ++i) {
            const auto& h = extractor.attention.heads[i];
            const std::string base = "shared.attn.h" + std::to_string(i) + ".";
            out.emplace_back(base + "wq", h.wq);
            out.emplace_back(base + "wk", h.wk);
            out.emplace_back(base + "wv", h.wv);
        }
        out.emplace_back("shared.attn.wo", extractor.attention.wo);
        for (std::size_t l = 0; l < extractor.blstm.layers.size(); ++l) {
            for (const char* dir : {"fwd", "bwd"}) {
                const auto& cell = dir[0] == 'f' ? extractor.blstm.layers[l].fwd
                                                 : extractor.blstm.layers[l].bwd;
                const std::string base =
                    "shared.blstm.l" + std::to_string(l) + "." + dir + ".";
                const char* names[] = {"wi", "wf", "wo", "wg", "ri", "rf",
                                       "ro", "rg", "bi", "bf", "bo", "bg"};
                auto ps = cell.params();
                for (std::size_t k = 0; k < ps.size(); ++k) out.emplace_back(base + names[k], ps[k]);
            }
        }
        out.emplace_back("pbd.att.w", att_pbd.w);
        out.emplace_back("pbd.att.b", att_pbd.b);
        out.emplace_back("pbd.fc1.w", pbd.fc1.w);
        out.emplace_back("pbd.fc1.b", pbd.fc1.b);
        out.emplace_back("pbd.fc2.w", pbd.fc2.w);
        out.emplace_back("pbd.fc2.b", pbd.fc2.b);
        out.emplace_back("pbd.prototypes", pbd.prototypes);
        out.emplace_back("pbd.thresholds", pbd.thresholds);
        out.emplace_back("stae.att.w", att_stae.w);
        out.emplace_back("stae.att.b", att_stae.b);
        out.emplace_back("stae.u", stae.u);
        out.emplace_back("emotion.att.w", att_em.w);
        out.emplace_back("emotion.att.b", att_em.b);
        out.emplace_back("emotion.fc1.w", emotion.fc1.w);
        out.emplace_back("emotion.fc1.b", emotion.fc1.b);
        out.emplace_back("emotion.fc2.w", emotion.fc2.w);
        out.emplace_back("emotion.fc2.b", emotion.fc2.b);
        return out;
    }

    Checkpoint to_checkpoint() const {
        Checkpoint ckpt;
        auto put = [&](const std::string& k, double v) {
            ckpt.meta[k] = io_detail::format_double(v);
        };
        put("d_x", dims.d_x);
        put("heads", dims.heads);
        put("blstm_layers", dims.blstm_layers);
        put("hidden", dims.hidden);
        put("proj_hidden", dims.proj_hidden);
        put("proto_dim", dims.proto_dim);
        put("emotion_hidden", dims.emotion_hidden);
        put("c_s", dims.c_s);
        put("c_u", dims.c_u);
        put("c_em", dims.c_em);
        put("d_s", dims.d_s);
        put("gamma", pbd.gamma);
        put("gamma1", stae.gamma1);
        put("gamma2", stae.gamma2);
        put("gamma3", stae.gamma3);
        put("q", stae.instance_neighbors);
        put("r", stae.feature_neighbors);
        ckpt.meta["pooling"] = extractor.pooling == Pooling::last_first ? "last_first" : "mean";
        for (const auto& [name, p] : named_params()) ckpt.params[name] = p->value;
        ckpt.params["stae.a_seen"] = stae.a_seen;
        ckpt.params["stae.a_unseen"] = stae.a_unseen;
        return ckpt;
    }

    static GzslModel from_checkpoint(const Checkpoint& ckpt) {
        ModelDims dims;
        dims.d_x = static_cast<std::size_t>(ckpt.meta_double("d_x"));
        dims.heads = static_cast<std::size_t>(ckpt.meta_double("heads"));
        dims.blstm_layers = static_cast<std::size_t>(ckpt.meta_double("blstm_layers"));
        dims.hidden = static_cast<std::size_t>(ckpt.meta_double("hidden"));
        dims.proj_hidden = static_cast<std::size_t>(ckpt.meta_double("proj_hidden"));
        dims.proto_dim = static_cast<std::size_t>(ckpt.meta_double("proto_dim"));
        dims.emotion_hidden = static_cast<std::size_t>(ckpt.meta_double("emotion_hidden"));
        dims.c_s = static_cast<std::size_t>(ckpt.meta_double("c_s"));
        dims.c_u = static_cast<std::size_t>(ckpt.meta_double("c_u"));
        dims.c_em = static_cast<std::size_t>(ckpt.meta_double("c_em"));
        dims.d_s = static_cast<std::size_t>(ckpt.meta_double("d_s"));
        auto pooling_it = ckpt.meta.find("pooling");
        const Pooling pooling = (pooling_it != ckpt.meta.end() && pooling_it->second == "mean")
                                    ? Pooling::mean
                                    : Pooling::last_first;
        GzslModel model(dims, ckpt.require("stae.a_seen"), ckpt.require("stae.a_unseen"),
                        ckpt.meta_double("gamma"), ckpt.meta_double("gamma1"),
                        ckpt.meta_double("gamma2"), ckpt.meta_double("gamma3"),
                        static_cast<std::size_t>(ckpt.meta_double("q")),
                        static_cast<std::size_t>(ckpt.meta_double("r")), pooling, 0);
        for (auto& [name, p] : model.named_params()) {
            const Matrix& stored = ckpt.require(name);
            if (!stored.same_shape(p->value))
                throw DataError("checkpoint: parameter " + name + " has mismatched shape");
            p->value = stored;
        }
        return model;
    }

    void load_values(const Checkpoint& ckpt) {
        for (auto& [name, p] : named_params()) {
            const Matrix& stored = ckpt.require(name);
            if (!stored.same_shape(p->value))
                throw DataError("checkpoint: parameter " + name + " has mismatched shape");
            p->value = stored;
        }
        stae.a_seen = ckpt.require("stae.a_seen");
        stae.a_unseen = ckpt.require("stae.a_unseen");
    }
};

}  // namespace gzsl
