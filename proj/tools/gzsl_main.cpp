#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gzsl/gzsl.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("GZSL_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << msg << "\n";
}

struct GenOptions {
    gzsl::SynthSpec spec;
    std::string out_dir;
};

struct TrainOptions {
    std::string dataset, attributes, partition, checkpoint, out;
    std::string preset = "partition1";
    gzsl::TrainConfig config;
};

struct EvalOptions {
    std::string dataset, partition, checkpoint, out;
    std::size_t threads = 1;
    bool per_sample_stae = false;
};

int run_gen(const GenOptions& opt) {
    gzsl::SynthResult result = gzsl::generate_synthetic(opt.spec);
    std::filesystem::create_directories(opt.out_dir);
    gzsl::write_synthetic(opt.out_dir, result);
    info("gen: wrote dataset.txt, attributes.txt, partition.txt to " + opt.out_dir + " (" +
         std::to_string(result.dataset.train.size()) + " train / " +
         std::to_string(result.dataset.test.size()) + " test samples)");
    return 0;
}

int run_train(const TrainOptions& opt) {
    gzsl::LoadedData data = gzsl::load_dataset(opt.dataset, opt.partition);
    gzsl::AttributeMatrix attrs = gzsl::load_attributes(opt.attributes);
    info("train: " + std::to_string(data.dataset.train.size()) + " samples, " +
         std::to_string(data.partition.seen.size()) + " seen / " +
         std::to_string(data.partition.unseen.size()) + " unseen classes, " +
         std::to_string(opt.config.epochs) + " epochs");
    gzsl::TrainResult result = gzsl::train(data.dataset, attrs, data.partition, opt.config);
    for (const auto& rec : result.log)
        debug("epoch " + std::to_string(rec.epoch) + " total " + std::to_string(rec.total));

    gzsl::save_checkpoint(opt.checkpoint, result.model.to_checkpoint());
    info("train: checkpoint written to " + opt.checkpoint);
    if (!opt.out.empty()) {
        std::ofstream log_out(opt.out);
        if (!log_out) throw gzsl::DataError("cannot open log file for writing: " + opt.out);
        for (const auto& rec : result.log) {
            nlohmann::ordered_json j;
            j["epoch"] = rec.epoch;
            j["l_pbd"] = rec.l_pbd;
            j["l_stae"] = rec.l_stae;
            j["l_em"] = rec.l_em;
            j["total"] = rec.total;
            if (rec.holdout_h) j["holdout_h"] = *rec.holdout_h;
            log_out << j.dump() << "\n";
        }
        info("train: log written to " + opt.out);
    }
    return 0;
}

int run_eval(const EvalOptions& opt) {
    gzsl::LoadedData data = gzsl::load_dataset(opt.dataset, opt.partition);
    gzsl::GzslModel model = gzsl::GzslModel::from_checkpoint(gzsl::load_checkpoint(opt.checkpoint));
    gzsl::EvaluationReport rep = gzsl::evaluate(data.dataset.test, model, data.partition,
                                                opt.per_sample_stae, opt.threads);
    gzsl::write_report(std::cout, rep);
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) throw gzsl::DataError("cannot open report file for writing: " + opt.out);
        gzsl::write_report(out, rep);
    }
    return 0;
}

int run_predict(const EvalOptions& opt) {
    gzsl::LoadedData data = gzsl::load_dataset(opt.dataset, opt.partition);
    gzsl::GzslModel model = gzsl::GzslModel::from_checkpoint(gzsl::load_checkpoint(opt.checkpoint));
    auto preds = gzsl::predict_batch(data.dataset.test, model, data.partition,
                                     opt.per_sample_stae, opt.threads);
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) throw gzsl::DataError("cannot open output file for writing: " + opt.out);
        gzsl::write_predictions(out, preds);
    } else {
        gzsl::write_predictions(std::cout, preds);
    }
    return 0;
}

int run_inspect(const std::string& checkpoint, const std::string& dataset,
                const std::string& partition) {
    if (checkpoint.empty() && dataset.empty())
        throw gzsl::DataError("inspect: pass --checkpoint and/or --dataset");
    if (!checkpoint.empty()) {
        gzsl::Checkpoint ckpt = gzsl::load_checkpoint(checkpoint);
        std::cout << "checkpoint: " << checkpoint << "\n";
        for (const auto& [k, v] : ckpt.meta) std::cout << "  meta " << k << " = " << v << "\n";
        std::size_t total = 0;
        for (const auto& [name, m] : ckpt.params) total += m.size();
        std::cout << "  parameters: " << ckpt.params.size() << " tensors, " << total
                  << " values\n";
        for (const auto& [name, m] : ckpt.params)
            std::cout << "  " << name << "  " << m.rows() << "x" << m.cols()
                      << "  |max|=" << gzsl::max_abs(m) << "\n";
    }
    if (!dataset.empty()) {
        gzsl::Dataset ds = [&] {
            if (!partition.empty()) return gzsl::load_dataset(dataset, partition).dataset;
            auto in = gzsl::io_detail::open_input(dataset);
            return gzsl::load_dataset_file(in, dataset);
        }();
        std::cout << "dataset: " << dataset << "\n";
        std::cout << "  classes: " << ds.num_classes << ", emotions: " << ds.num_emotions
                  << ", frame_dim: " << ds.frame_dim << "\n";
        std::cout << "  train samples: " << ds.train.size()
                  << ", test samples: " << ds.test.size() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized zero-shot emotion recognition from skeleton gesture sequences"};
    app.require_subcommand(1);
    app.set_config("--config");

    GenOptions gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    cmd_gen->add_option("--out", gen.out_dir, "Output directory")->required();
    cmd_gen->add_option("--seed", gen.spec.seed, "Generator seed");
    cmd_gen->add_option("--emotions", gen.spec.emotions, "Number of emotion classes");
    cmd_gen->add_option("--gestures-per-emotion", gen.spec.gestures_per_emotion,
                        "Gesture classes per emotion");
    cmd_gen->add_option("--unseen-per-emotion", gen.spec.unseen_per_emotion,
                        "Unseen gesture classes per emotion");
    cmd_gen->add_option("--train-per-class", gen.spec.train_per_class,
                        "Training samples per seen class");
    cmd_gen->add_option("--test-per-seen", gen.spec.test_per_seen, "Test samples per seen class");
    cmd_gen->add_option("--test-per-unseen", gen.spec.test_per_unseen,
                        "Test samples per unseen class");
    cmd_gen->add_option("--joints", gen.spec.joints, "Skeleton joints (3 channels each)");
    cmd_gen->add_option("--len-min", gen.spec.len_min, "Minimum sequence length");
    cmd_gen->add_option("--len-max", gen.spec.len_max, "Maximum sequence length");
    cmd_gen->add_option("--noise", gen.spec.noise, "Per-channel Gaussian noise sigma");

    TrainOptions tr;
    CLI::App* cmd_train = app.add_subcommand("train", "Train a model");
    cmd_train->add_option("--dataset", tr.dataset, "Dataset file")->required();
    cmd_train->add_option("--attributes", tr.attributes, "Attribute file")->required();
    cmd_train->add_option("--partition", tr.partition, "Partition file")->required();
    cmd_train->add_option("--checkpoint", tr.checkpoint, "Output checkpoint path")->required();
    cmd_train->add_option("--out", tr.out, "Output training log (JSON lines)");
    cmd_train->add_option("--preset", tr.preset, "Hyper-parameter preset")
        ->check(CLI::IsMember({"partition1", "partition2"}));
    auto* f_seed = cmd_train->add_option("--seed", "Training seed");
    auto* f_epochs = cmd_train->add_option("--epochs", "Training epochs");
    auto* f_batch = cmd_train->add_option("--batch-size", "Batch size");
    auto* f_warmup = cmd_train->add_option("--warmup-epoch", "Threshold warm-up epoch");
    auto* f_lambda1 = cmd_train->add_option("--lambda1", "StAE loss weight");
    auto* f_lambda2 = cmd_train->add_option("--lambda2", "Emotion loss weight");
    auto* f_beta1 = cmd_train->add_option("--beta1", "Prototype loss weight");
    auto* f_beta2 = cmd_train->add_option("--beta2", "Threshold hinge weight");
    auto* f_beta3 = cmd_train->add_option("--beta3", "Threshold penalty weight");
    auto* f_gamma = cmd_train->add_option("--gamma", "DCE distance scale");
    auto* f_gamma1 = cmd_train->add_option("--gamma1", "StAE alignment weight");
    auto* f_gamma2 = cmd_train->add_option("--gamma2", "Instance graph weight (test-time)");
    auto* f_gamma3 = cmd_train->add_option("--gamma3", "Feature graph weight");
    auto* f_lr_shared = cmd_train->add_option("--lr-shared", "Shared network learning rate");
    auto* f_lr_pbd = cmd_train->add_option("--lr-pbd", "PBD branch learning rate");
    auto* f_lr_stae = cmd_train->add_option("--lr-stae", "StAE branch learning rate");
    auto* f_lr_emotion = cmd_train->add_option("--lr-emotion", "Emotion branch learning rate");
    std::string pooling = "last_first";
    cmd_train->add_option("--pooling", pooling, "Sequence pooling mode")
        ->check(CLI::IsMember({"last_first", "mean"}));

    EvalOptions ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a test set");
    cmd_eval->add_option("--dataset", ev.dataset, "Dataset file")->required();
    cmd_eval->add_option("--partition", ev.partition, "Partition file")->required();
    cmd_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    cmd_eval->add_option("--out", ev.out, "Also write the report to this file");
    cmd_eval->add_option("--threads", ev.threads, "Worker threads for per-sample evaluation");
    cmd_eval->add_flag("--per-sample-stae", ev.per_sample_stae,
                       "Classify unseen-gated samples independently (gamma2 = 0)");

    EvalOptions pr;
    CLI::App* cmd_predict = app.add_subcommand("predict", "Per-sample predictions (JSON lines)");
    cmd_predict->add_option("--dataset", pr.dataset, "Dataset file")->required();
    cmd_predict->add_option("--partition", pr.partition, "Partition file")->required();
    cmd_predict->add_option("--checkpoint", pr.checkpoint, "Checkpoint file")->required();
    cmd_predict->add_option("--out", pr.out, "Output file (default stdout)");
    cmd_predict->add_option("--threads", pr.threads, "Worker threads for per-sample evaluation");
    cmd_predict->add_flag("--per-sample-stae", pr.per_sample_stae,
                          "Classify unseen-gated samples independently (gamma2 = 0)");

    std::string ins_checkpoint, ins_dataset, ins_partition;
    CLI::App* cmd_inspect = app.add_subcommand("inspect", "Summarize checkpoints and datasets");
    cmd_inspect->add_option("--checkpoint", ins_checkpoint, "Checkpoint file");
    cmd_inspect->add_option("--dataset", ins_dataset, "Dataset file");
    cmd_inspect->add_option("--partition", ins_partition, "Partition file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (cmd_gen->parsed()) return run_gen(gen);
        if (cmd_train->parsed()) {
            tr.config = tr.preset == "partition2" ? gzsl::TrainConfig::preset_partition2()
                                                  : gzsl::TrainConfig::preset_partition1();
            if (*f_seed) tr.config.seed = f_seed->as<std::uint64_t>();
            if (*f_epochs) tr.config.epochs = f_epochs->as<std::size_t>();
            if (*f_batch) tr.config.batch_size = f_batch->as<std::size_t>();
            if (*f_warmup) tr.config.threshold_warmup_epoch = f_warmup->as<std::size_t>();
            if (*f_lambda1) tr.config.lambda1 = f_lambda1->as<double>();
            if (*f_lambda2) tr.config.lambda2 = f_lambda2->as<double>();
            if (*f_beta1) tr.config.beta1 = f_beta1->as<double>();
            if (*f_beta2) tr.config.beta2 = f_beta2->as<double>();
            if (*f_beta3) tr.config.beta3 = f_beta3->as<double>();
            if (*f_gamma) tr.config.gamma = f_gamma->as<double>();
            if (*f_gamma1) tr.config.gamma1 = f_gamma1->as<double>();
            if (*f_gamma2) tr.config.gamma2 = f_gamma2->as<double>();
            if (*f_gamma3) tr.config.gamma3 = f_gamma3->as<double>();
            if (*f_lr_shared) tr.config.lr_shared = f_lr_shared->as<double>();
            if (*f_lr_pbd) tr.config.lr_pbd = f_lr_pbd->as<double>();
            if (*f_lr_stae) tr.config.lr_stae = f_lr_stae->as<double>();
            if (*f_lr_emotion) tr.config.lr_emotion = f_lr_emotion->as<double>();
            tr.config.pooling =
                pooling == "mean" ? gzsl::Pooling::mean : gzsl::Pooling::last_first;
            return run_train(tr);
        }
        if (cmd_eval->parsed()) return run_eval(ev);
        if (cmd_predict->parsed()) return run_predict(pr);
        if (cmd_inspect->parsed()) return run_inspect(ins_checkpoint, ins_dataset, ins_partition);
    } catch (const gzsl::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const gzsl::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
