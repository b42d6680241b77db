#include "ddb/torch/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ddb/errors.hpp"
#include "ddb/label_noise.hpp"
#include "ddb/torch/augment.hpp"
#include "ddb/torch/dataset.hpp"
#include "ddb/torch/prober.hpp"

namespace fs = std::filesystem;

namespace ddb::train {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string checkpoint_name(std::int64_t epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "epoch_%06lld.pt", static_cast<long long>(epoch));
    return buf;
}

struct EvalResult {
    double error = 0.0;  // percent
    double loss = 0.0;   // mean cross-entropy, nats
};

EvalResult evaluate(nets::ConvNet& model, const torch::Tensor& images,
                    const std::vector<std::int32_t>& labels, DatasetId dataset) {
    const bool was_training = model.is_training();
    model.eval();
    torch::NoGradGuard no_grad;
    const std::int64_t n = images.size(0);
    const std::int64_t eval_batch = 512;
    auto label_tensor = torch::tensor(std::vector<std::int64_t>(labels.begin(), labels.end()));
    std::int64_t correct = 0;
    double loss_sum = 0.0;
    for (std::int64_t start = 0; start < n; start += eval_batch) {
        const std::int64_t stop = std::min(n, start + eval_batch);
        auto x = data::normalize(images.slice(0, start, stop), dataset);
        auto y = label_tensor.slice(0, start, stop);
        auto logits = model.forward(x);
        loss_sum += torch::cross_entropy_loss(logits, y, {}, torch::Reduction::Sum)
                        .item<double>();
        correct += logits.argmax(1).eq(y).sum().item<std::int64_t>();
    }
    if (was_training) model.train();
    EvalResult r;
    r.error = 100.0 * static_cast<double>(n - correct) / static_cast<double>(n);
    r.loss = loss_sum / static_cast<double>(n);
    return r;
}

// One optimizer pass over the (noisy) training set. Shuffle and
// augmentation draws depend only on (seed, epoch), which makes replayed
// epochs after a resume follow the same sample order.
void train_one_epoch(nets::ConvNet& model, torch::optim::Adam& optimizer,
                     const data::ImageDataset& trainset, const NoisyLabelSet& noise,
                     const RunConfig& config, std::int64_t epoch) {
    std::mt19937_64 rng(config.seed ^ splitmix64(static_cast<std::uint64_t>(epoch) + 0x5eed));
    const std::int64_t n = trainset.size();
    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    model.train();
    for (std::int64_t start = 0; start < n; start += config.batch_size) {
        const std::int64_t stop = std::min(n, start + config.batch_size);
        auto idx = torch::tensor(
            std::vector<std::int64_t>(order.begin() + start, order.begin() + stop));
        auto x = trainset.images.index_select(0, idx);
        if (config.augmentation) x = aug::augment_batch(x, rng);
        x = data::normalize(x, config.dataset);
        std::vector<std::int64_t> y_vals(stop - start);
        for (std::int64_t i = start; i < stop; ++i) {
            y_vals[i - start] = noise.noisy_labels[order[i]];
        }
        auto y = torch::tensor(y_vals);

        optimizer.zero_grad();
        auto loss = torch::cross_entropy_loss(model.forward(x), y);
        loss.backward();
        optimizer.step();
    }
}

std::string resolve_pretrained(const RunConfig& config, const TrainOptions& opts) {
    if (!opts.pretrained_path.empty()) return opts.pretrained_path;
    if (const char* dir = std::getenv("DDB_PRETRAINED_DIR")) {
        return (fs::path(dir) / (to_string(config.architecture) + ".pt")).string();
    }
    return {};
}

}  // namespace

RunManifest run_training(const RunConfig& config_in, RunStore& store, const TrainOptions& opts) {
    RunConfig config = config_in;
    config.validate();

    RunManifest manifest;
    std::int64_t done_epochs = 0;
    if (!opts.resume_run_id.empty()) {
        manifest = store.load_manifest(opts.resume_run_id);
        if (manifest.config.hash() != config.hash()) {
            throw StateError("resume config does not match the stored run config");
        }
        config = manifest.config;
        done_epochs = static_cast<std::int64_t>(store.load_records(opts.resume_run_id).size());
    }

    // Seed before model construction so initialization is reproducible.
    torch::manual_seed(config.seed);

    if (config.epochs == 0 && opts.resume_run_id.empty()) {
        // A zero-epoch run never touches the data.
        RunManifest m = store.create_run(config);
        return store.finalize_run(m.run_id, RunStatus::complete);
    }
    data::ImageDataset trainset = data::load_dataset(config.dataset, config.data_root, true);
    data::ImageDataset testset = data::load_dataset(config.dataset, config.data_root, false);

    const auto noise = inject_label_noise(trainset.labels, config.noise_p, config.seed,
                                          trainset.num_classes);

    auto model = nets::make_model(config.architecture, trainset.num_classes);
    if (config.init == InitMode::pretrained) {
        const std::string path = resolve_pretrained(config, opts);
        if (path.empty() || !fs::exists(path)) {
            throw ConfigurationError(
                "init=pretrained requires a weights file (set DDB_PRETRAINED_DIR or use "
                "init=scratch)");
        }
        const int copied = nets::load_pretrained(*model, path);
        if (!opts.quiet) {
            std::fprintf(stderr, "loaded %d pretrained tensors from %s\n", copied, path.c_str());
        }
    }
    torch::optim::Adam optimizer(model->parameters(),
                                 torch::optim::AdamOptions(config.learning_rate));

    // Probe inputs are fixed for the whole run.
    probe::ProbeBatch probes;
    if (config.probing_enabled() && config.epochs > 0) {
        if (!opts.probe_manifest.empty()) {
            probes = probe::load_probe_batch(opts.probe_manifest, config.dataset);
        } else {
            SynthSpec spec;
            spec.n_masks = 32;
            spec.n_fills = 32;
            spec.n_shape_pairs = 50;
            spec.n_texture_pairs = 50;
            probes = probe::probe_batch_from_synthetic(
                generate_synthetic_probe(spec, config.seed), config.dataset);
        }
    }

    double wall_base = 0.0;
    std::int64_t replay_from = 0;
    if (opts.resume_run_id.empty()) {
        manifest = store.create_run(config);
    } else {
        const auto records = store.load_records(manifest.run_id);
        if (!records.empty()) wall_base = records.back().wall_time;
        // Restore the newest checkpoint at or before the last recorded
        // epoch, then replay the gap without appending.
        for (std::int64_t e = done_epochs - 1; e >= 0; --e) {
            const auto ckpt = store.checkpoint_dir(manifest.run_id) / checkpoint_name(e);
            if (fs::exists(ckpt)) {
                probe::load_checkpoint(*model, ckpt);
                const auto optim_path = ckpt.string() + ".optim";
                if (fs::exists(optim_path)) torch::load(optimizer, optim_path);
                replay_from = e + 1;
                break;
            }
        }
        // A crash can land between record append and manifest save; reopen
        // reconciles the manifest with the records file on disk.
        manifest = store.reopen_run(manifest.run_id);
        for (std::int64_t e = replay_from; e < done_epochs; ++e) {
            train_one_epoch(*model, optimizer, trainset, noise, config, e);
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    for (std::int64_t epoch = done_epochs; epoch < config.epochs; ++epoch) {
        train_one_epoch(*model, optimizer, trainset, noise, config, epoch);

        EpochRecord rec;
        rec.epoch = epoch;
        const auto train_eval = evaluate(*model, trainset.images, noise.noisy_labels, config.dataset);
        const auto test_eval = evaluate(*model, testset.images, testset.labels, config.dataset);
        rec.train_error = train_eval.error;
        rec.train_loss = train_eval.loss;
        rec.test_error = test_eval.error;
        rec.test_loss = test_eval.loss;

        const bool probe_epoch = config.probing_enabled() && epoch % config.probe_cadence == 0;
        if (probe_epoch) {
            const auto ckpt = store.checkpoint_dir(manifest.run_id) / checkpoint_name(epoch);
            probe::save_checkpoint(*model, ckpt);
            torch::save(optimizer, ckpt.string() + ".optim");
            rec.checkpoint_ref = "checkpoints/" + checkpoint_name(epoch);

            std::ofstream layers_out(store.run_dir(manifest.run_id) / "bias_layers",
                                     std::ios::app);
            for (int layer : config.probe_layers) {
                auto est = probe::probe_bias(*model, probes, layer);
                est.epoch = epoch;
                layers_out << epoch << ',' << est.layer_index << ',' << est.shape_frac << ','
                           << est.texture_frac << ',' << est.residual_frac << '\n';
                // The record carries the last configured layer (final conv
                // by default); the sweep lives in bias_layers.
                if (layer == config.probe_layers.back()) {
                    rec.shape_bias = est.shape_frac;
                    rec.texture_bias = est.texture_frac;
                    rec.residual_bias = est.residual_frac;
                }
            }
        }

        rec.wall_time =
            wall_base +
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest = store.append_epoch_record(manifest.run_id, rec);
        if (!opts.quiet) {
            std::fprintf(stderr, "epoch %lld: train %.2f%% test %.2f%%%s\n",
                         static_cast<long long>(epoch), rec.train_error, rec.test_error,
                         probe_epoch ? " [probe]" : "");
        }
    }

    return store.finalize_run(manifest.run_id, RunStatus::complete);
}

}  // namespace ddb::train
