#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddb/errors.hpp"
#include "ddb/report/plots.hpp"
#include "ddb/report/report.hpp"
#include "ddb/run_store.hpp"
#include "ddb/synth_probe.hpp"
#include "ddb/torch/adain.hpp"
#include "ddb/torch/imaging.hpp"
#include "ddb/torch/prober.hpp"
#include "ddb/torch/trainer.hpp"

namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

ddb::RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ddb::IoError("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ddb::RunConfig::parse(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-descent bias experiment harness"};
    app.require_subcommand(1);

    std::string run_root = "runs";
    std::uint64_t seed = 0;
    std::string config_file;
    app.add_option("--run-dir", run_root, "Run store root directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Seed for training / pair sampling");
    app.add_option("--config", config_file, "Flat key=value run config file");

    // --- train ---------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a classifier and record per-epoch metrics");
    std::string dataset = "cifar10", arch = "resnet18", init = "pretrained";
    double noise_p = 0.2, lr = 1e-4;
    std::int64_t batch_size = 128, epochs = 0, probe_cadence = 1;
    std::vector<int> probe_layers;
    std::string data_root, resume_id, probe_manifest, pretrained_path;
    bool no_augment = false, quiet = false;
    auto* d_opt = train->add_option("--dataset", dataset, "cifar10 | cifar100 | custom");
    auto* a_opt = train->add_option("--arch", arch,
                                    "resnet18 | mobilenetv2 | densenet121 | efficientnetb0 | tinycnn");
    auto* i_opt = train->add_option("--init", init, "scratch | pretrained");
    auto* p_opt = train->add_option("--noise-p", noise_p, "Label noise fraction");
    auto* lr_opt = train->add_option("--lr", lr, "Adam learning rate");
    auto* b_opt = train->add_option("--batch-size", batch_size, "Mini-batch size");
    auto* e_opt = train->add_option("--epochs", epochs, "Epochs to train to");
    auto* c_opt = train->add_option("--probe-cadence", probe_cadence, "Epochs between probes");
    auto* l_opt = train->add_option("--probe-layers", probe_layers,
                                    "Conv taps to probe (1-based, -1 = final conv)");
    auto* dr_opt = train->add_option("--data-root", data_root,
                                     "Dataset directory ($DDB_DATA_ROOT fallback)");
    auto* na_opt = train->add_flag("--no-augmentation", no_augment, "Disable crop/flip augmentation");
    train->add_option("--resume", resume_id, "Resume an existing run id");
    train->add_option("--probe-manifest", probe_manifest,
                      "Stylized pairset manifest ($DDB_PROBE_PAIRSET fallback)");
    train->add_option("--pretrained", pretrained_path,
                      "Pretrained weights file ($DDB_PRETRAINED_DIR/<arch>.pt fallback)");
    train->add_flag("--quiet", quiet, "Suppress per-epoch progress");

    // --- probe ---------------------------------------------------------
    auto* probe_cmd = app.add_subcommand("probe", "Measure shape/texture bias of a checkpoint");
    std::string ckpt_path, pairset_path, probe_arch = "resnet18", baseline = "mean_rho";
    std::string probe_dataset = "cifar10";
    int num_classes = 10;
    std::vector<int> layers = {-1};
    probe_cmd->add_option("--checkpoint", ckpt_path, "Model checkpoint")->required();
    probe_cmd->add_option("--pairset", pairset_path,
                          "Pairset manifest ($DDB_PROBE_PAIRSET fallback)");
    probe_cmd->add_option("--arch", probe_arch, "Architecture of the checkpoint");
    probe_cmd->add_option("--dataset", probe_dataset, "Normalization to apply to probe images");
    probe_cmd->add_option("--num-classes", num_classes, "Classifier head width");
    probe_cmd->add_option("--layers", layers, "Conv taps (1-based, -1 = final conv)");
    probe_cmd->add_option("--baseline-mode", baseline, "mean_rho | raw_paper | reference_impl");

    // --- stylize -------------------------------------------------------
    auto* stylize = app.add_subcommand("stylize", "Build stylized probe pairs via AdaIN");
    std::string content_dir, style_dir, out_dir, assets_dir;
    std::int64_t n_shape = 200, n_texture = 200;
    double alpha = 1.0;
    bool exhaustive = false;
    stylize->add_option("--content-dir", content_dir, "Content images")->required();
    stylize->add_option("--style-dir", style_dir, "Style images")->required();
    stylize->add_option("--out-dir", out_dir, "Output directory")->required();
    stylize->add_option("--assets", assets_dir,
                        "Directory with encoder.pt/decoder.pt ($DDB_ADAIN_ASSETS fallback)");
    stylize->add_option("--shape-pairs", n_shape, "Shape-matched pairs to emit");
    stylize->add_option("--texture-pairs", n_texture, "Texture-matched pairs to emit");
    stylize->add_option("--alpha", alpha, "Stylization strength in [0,1]");
    stylize->add_flag("--exhaustive", exhaustive, "One pair per content / per style");

    // --- synth-probe ---------------------------------------------------
    auto* synth = app.add_subcommand("synth-probe", "Generate a procedural probe pairset");
    std::string synth_out;
    int image_size = 64, n_masks = 16, n_fills = 16;
    std::int64_t synth_shape = 16, synth_texture = 16;
    synth->add_option("--out-dir", synth_out, "Output directory")->required();
    synth->add_option("--size", image_size, "Image side length");
    synth->add_option("--masks", n_masks, "Mask corpus size");
    synth->add_option("--fills", n_fills, "Fill corpus size");
    synth->add_option("--shape-pairs", synth_shape, "Shape-matched pairs");
    synth->add_option("--texture-pairs", synth_texture, "Texture-matched pairs");

    // --- analyze -------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "Segment phases and correlate bias with error");
    std::string analyze_run_id, analyze_out;
    double theta = 0.1;
    std::int64_t lag = 5;
    analyze->add_option("--run", analyze_run_id, "Run id inside --run-dir")->required();
    analyze->add_option("--out", analyze_out, "Output directory (default <run>/analysis)");
    analyze->add_option("--theta", theta, "Plateau threshold, percentage points");
    analyze->add_option("--lag", lag, "Lag L for the plateau rule");

    // --- report --------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "Emit plots, tables and a summary for a run");
    std::string report_run_id, report_out;
    report_cmd->add_option("--run", report_run_id, "Run id inside --run-dir")->required();
    report_cmd->add_option("--out", report_out, "Output directory (default <run>/report)");
    report_cmd->add_option("--theta", theta, "Plateau threshold, percentage points");
    report_cmd->add_option("--lag", lag, "Lag L for the plateau rule");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            ddb::RunConfig config;
            if (!config_file.empty()) config = load_config_file(config_file);
            if (*d_opt) config.dataset = ddb::dataset_from_string(dataset);
            if (*a_opt) config.architecture = ddb::architecture_from_string(arch);
            if (*i_opt) config.init = ddb::init_from_string(init);
            if (*p_opt) config.noise_p = noise_p;
            if (*lr_opt) config.learning_rate = lr;
            if (*b_opt) config.batch_size = batch_size;
            if (*e_opt) config.epochs = epochs;
            if (*c_opt) config.probe_cadence = probe_cadence;
            if (*l_opt) config.probe_layers = probe_layers;
            if (*dr_opt) config.data_root = data_root;
            if (*na_opt) config.augmentation = false;
            if (*seed_opt) config.seed = seed;
            if (config.data_root.empty()) config.data_root = env_or("DDB_DATA_ROOT", "");

            ddb::train::TrainOptions opts;
            opts.resume_run_id = resume_id;
            opts.probe_manifest = probe_manifest.empty()
                                      ? env_or("DDB_PROBE_PAIRSET", "")
                                      : probe_manifest;
            opts.pretrained_path = pretrained_path;
            opts.quiet = quiet;
            ddb::RunStore store{run_root};
            const auto manifest = ddb::train::run_training(config, store, opts);
            std::printf("%s\n", manifest.run_id.c_str());
        } else if (*probe_cmd) {
            if (pairset_path.empty()) pairset_path = env_or("DDB_PROBE_PAIRSET", "");
            if (pairset_path.empty()) {
                throw ddb::ConfigurationError("probe needs --pairset or $DDB_PROBE_PAIRSET");
            }
            auto model = ddb::nets::make_model(ddb::architecture_from_string(probe_arch),
                                               num_classes);
            ddb::probe::load_checkpoint(*model, ckpt_path);
            const auto batch = ddb::probe::load_probe_batch(
                pairset_path, ddb::dataset_from_string(probe_dataset));
            const auto estimates = ddb::probe::layer_sweep(
                *model, batch, layers, ddb::baseline_mode_from_string(baseline));
            std::printf("layer,shape_frac,texture_frac,residual_frac\n");
            for (const auto& est : estimates) {
                std::printf("%d,%.17g,%.17g,%.17g\n", est.layer_index, est.shape_frac,
                            est.texture_frac, est.residual_frac);
            }
        } else if (*stylize) {
            ddb::adain::StylizationAssets assets;
            if (!ddb::adain::StylizationAssets::locate(assets_dir, assets)) {
                throw ddb::ConfigurationError(
                    "encoder.pt/decoder.pt not found (use --assets or $DDB_ADAIN_ASSETS)");
            }
            assets.alpha = alpha;
            const auto set = ddb::adain::build_pair_sets(content_dir, style_dir, n_shape,
                                                         n_texture, seed, assets, out_dir,
                                                         exhaustive);
            std::printf("%zu shape pairs, %zu texture pairs -> %s\n", set.shape_pairs.size(),
                        set.texture_pairs.size(), out_dir.c_str());
        } else if (*synth) {
            ddb::SynthSpec spec;
            spec.image_size = image_size;
            spec.n_masks = n_masks;
            spec.n_fills = n_fills;
            spec.n_shape_pairs = synth_shape;
            spec.n_texture_pairs = synth_texture;
            auto set = ddb::generate_synthetic_probe(spec, seed);
            fs::create_directories(synth_out);
            auto materialize = [&](std::vector<ddb::ProbePair>& pairs,
                                   const std::vector<std::pair<ddb::GrayImage, ddb::GrayImage>>&
                                       images,
                                   const char* kind) {
                for (std::size_t k = 0; k < pairs.size(); ++k) {
                    pairs[k].path_a = std::string(kind) + "_" + std::to_string(k) + "_a.png";
                    pairs[k].path_b = std::string(kind) + "_" + std::to_string(k) + "_b.png";
                    ddb::img::save_gray_png(images[k].first, fs::path(synth_out) / pairs[k].path_a);
                    ddb::img::save_gray_png(images[k].second, fs::path(synth_out) / pairs[k].path_b);
                }
            };
            materialize(set.meta.shape_pairs, set.shape_images, "shape");
            materialize(set.meta.texture_pairs, set.texture_images, "texture");
            ddb::save_pairset_manifest(set.meta, fs::path(synth_out) / "pairset.tsv");
            std::printf("%zu shape pairs, %zu texture pairs -> %s\n",
                        set.meta.shape_pairs.size(), set.meta.texture_pairs.size(),
                        synth_out.c_str());
        } else if (*analyze) {
            ddb::RunStore store{run_root};
            ddb::PhaseConfig pc;
            pc.theta = theta;
            pc.lag = lag;
            const auto analysis = ddb::report::analyze_run(store, analyze_run_id, pc);
            const fs::path out = analyze_out.empty()
                                     ? store.run_dir(analyze_run_id) / "analysis"
                                     : fs::path(analyze_out);
            fs::create_directories(out);
            ddb::report::write_phase_table(analysis, out / "phases.csv");
            ddb::report::write_report_json(analysis, out / "report.json");
            std::ifstream table(out / "phases.csv");
            std::printf("%s", std::string((std::istreambuf_iterator<char>(table)),
                                          std::istreambuf_iterator<char>())
                                  .c_str());
        } else if (*report_cmd) {
            ddb::RunStore store{run_root};
            ddb::PhaseConfig pc;
            pc.theta = theta;
            pc.lag = lag;
            const fs::path out = report_out.empty()
                                     ? store.run_dir(report_run_id) / "report"
                                     : fs::path(report_out);
            const auto bundle = ddb::report::emit_report(store, report_run_id, out, pc);
            std::printf("report written to %s\n", out.string().c_str());
            (void)bundle;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
