// Command-line surface for the pedestrian-identification pipeline:
//   simulate  write synthetic walker recordings (MDF1 + label sidecars)
//   prepare   frames -> TDS -> denoise -> crop -> sample store (MCS1)
//   train     train the MCL model, write checkpoint + training log
//   eval      accuracy + confusion matrix for a checkpoint on a sample store
//   inspect   dump MDF1/MCL1/MCS1 headers, optional TDS image export
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric divergence.
// Set MCL_LOG=debug for verbose progress on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdpid/datagen.hpp"
#include "mdpid/mcl.hpp"
#include "mdpid/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mdpid;

namespace {

bool log_debug_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("MCL_LOG");
        return v != nullptr && std::string(v) == "debug";
    }();
    return on;
}

void log_debug(const std::string& msg) {
    if (log_debug_enabled()) std::cerr << "[mdpid] " << msg << "\n";
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<std::size_t>(std::stoul(tok)));
    }
    if (out.empty()) throw ConfigError("empty size list: " + s);
    return out;
}

struct RunConfig {
    std::string data_dir = ".";
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;

    // radar
    std::size_t samples_per_chirp = 256;
    std::size_t chirps_per_frame = 256;
    double chirp_duration = 256e-6;
    double carrier_frequency = 77e9;

    // simulate
    std::size_t classes = 3;
    double duration = 60.0;
    double base_speed = 0.4, speed_step = 0.3;
    double limb_amp = 40.0, limb_amp_step = 15.0;
    double gait_base = 0.7, gait_step = 0.4;
    double noise = 0.05;

    // prepare
    std::size_t target_cells = 205;
    double noise_margin = 3.0;
    double rel_threshold_db = 10.0;
    std::size_t stride = 15;
    std::size_t tds_window = 45;
    std::size_t feature_window = 165;
    bool export_tds = false;

    // train
    std::string samples_path;
    std::string model_path;
    double lr = 0.001;
    std::size_t epochs = 500;
    std::size_t batch = 32;
    double val_frac = 0.3;
    std::string conv_channels = "16,32,64,64";
    std::size_t fn1_hidden = 128;
    std::string fn2_hidden = "5,5";
    std::string cn_hidden = "1000,100";

    RadarConfig radar() const {
        RadarConfig c;
        c.samples_per_chirp = samples_per_chirp;
        c.chirps_per_frame = chirps_per_frame;
        c.chirp_duration_s = chirp_duration;
        c.carrier_frequency_hz = carrier_frequency;
        c.validate();
        return c;
    }

    PrepareOptions prepare_opts() const {
        PrepareOptions o;
        o.target_cells = target_cells;
        o.noise_margin = noise_margin;
        o.rel_threshold_db = rel_threshold_db;
        o.stride = stride;
        o.tds_window = tds_window;
        o.feature_window = feature_window;
        o.threads = threads;
        return o;
    }
};

std::vector<std::string> list_recordings(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".mdf")
            out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_simulate(const RunConfig& cfg) {
    const RadarConfig radar = cfg.radar();
    fs::create_directories(cfg.out_dir);
    std::vector<WalkerProfile> profiles;
    for (std::size_t i = 0; i < cfg.classes; ++i) {
        WalkerProfile p;
        p.torso_speed_mps = cfg.base_speed + cfg.speed_step * static_cast<double>(i);
        p.limb_doppler_amplitude_hz = cfg.limb_amp + cfg.limb_amp_step * static_cast<double>(i);
        p.gait_frequency_hz = cfg.gait_base + cfg.gait_step * static_cast<double>(i);
        p.noise_floor = cfg.noise;
        p.id = static_cast<int>(i);
        profiles.push_back(p);
    }
    const auto recordings = make_dataset(profiles, cfg.duration, radar, cfg.seed);

    std::ofstream manifest(cfg.out_dir + "/manifest.txt");
    manifest << "# file frames person_id torso_speed_mps limb_amp_hz gait_hz\n";
    for (std::size_t i = 0; i < recordings.size(); ++i) {
        const std::string path = cfg.out_dir + "/walker_" + std::to_string(i) + ".mdf";
        write_recording(recordings[i], path);
        manifest << path << " " << recordings[i].frames.size() << " " << profiles[i].id << " "
                 << profiles[i].torso_speed_mps << " " << profiles[i].limb_doppler_amplitude_hz
                 << " " << profiles[i].gait_frequency_hz << "\n";
        log_debug("wrote " + path);
    }
    std::cout << "simulated " << recordings.size() << " recordings into " << cfg.out_dir << "\n";
    return 0;
}

int cmd_prepare(const RunConfig& cfg) {
    const auto files = list_recordings(cfg.data_dir);
    if (files.empty()) throw IoError("no .mdf recordings found in " + cfg.data_dir);
    fs::create_directories(cfg.out_dir);

    SampleStore store;
    const PrepareOptions opts = cfg.prepare_opts();
    store.tds_rows = opts.tds_window;
    store.feature_window = opts.feature_window;
    for (std::size_t i = 0; i < files.size(); ++i) {
        FrameRecording rec;
        try {
            rec = read_recording(files[i]);
        } catch (const Error& e) {
            throw IoError(files[i] + ": " + e.what());
        }
        const Tds tds = prepare_tds(rec, opts);
        store.tds_cols = tds.cols;
        SampleOptions so;
        so.stride = opts.stride;
        so.tds_window = opts.tds_window;
        so.feature_window = opts.feature_window;
        so.rel_threshold_db = opts.rel_threshold_db;
        so.recording_id = static_cast<std::uint32_t>(i);
        auto samples = build_samples(tds, rec.config, rec.labels, so);
        for (auto& s : samples) store.samples.push_back(std::move(s));
        if (cfg.export_tds) {
            const std::string stem = fs::path(files[i]).stem().string();
            write_tds_pgm(tds, cfg.out_dir + "/" + stem + ".pgm");
            write_tds_csv(tds, cfg.out_dir + "/" + stem + ".csv");
        }
        log_debug(files[i] + ": " + std::to_string(samples.size()) + " samples");
    }
    const Normalization norm = compute_normalization(store.samples);
    save_sample_store(store, cfg.out_dir + "/samples.mcs");
    write_features_csv(store.samples, cfg.out_dir + "/features.csv");
    std::ofstream ns(cfg.out_dir + "/normalization.csv");
    ns << std::setprecision(17) << "tds_mean,tds_std,x1_mean,x1_std,x2_mean,x2_std,"
       << "x3_mean,x3_std,x4_mean,x4_std\n"
       << norm.tds_mean << "," << norm.tds_std;
    for (std::size_t j = 0; j < 4; ++j)
        ns << "," << norm.feat_mean[j] << "," << norm.feat_std[j];
    ns << "\n";
    std::cout << "prepared " << store.samples.size() << " samples (" << store.tds_rows << "x"
              << store.tds_cols << " TDS windows) into " << cfg.out_dir << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    const std::string samples =
        cfg.samples_path.empty() ? cfg.data_dir + "/samples.mcs" : cfg.samples_path;
    const SampleStore store = load_sample_store(samples);
    if (store.samples.empty()) throw EmptyDataset("sample store is empty");

    int max_label = 0;
    for (const Sample& s : store.samples) max_label = std::max(max_label, s.label);

    ModelConfig mc;
    mc.num_classes = static_cast<std::size_t>(max_label) + 1;
    mc.tds_rows = store.tds_rows;
    mc.tds_cols = store.tds_cols;
    mc.conv_channels = parse_size_list(cfg.conv_channels);
    mc.fn1_hidden = cfg.fn1_hidden;
    mc.fn2_hidden = parse_size_list(cfg.fn2_hidden);
    mc.cn_hidden = parse_size_list(cfg.cn_hidden);

    std::vector<Sample> train_set, val_set;
    split_train_val(store.samples, cfg.val_frac, store.feature_window, train_set, val_set);
    log_debug("train samples: " + std::to_string(train_set.size()) +
              ", val samples: " + std::to_string(val_set.size()));

    MclModel<float> model = build_model<float>(mc, cfg.seed);
    model.norm = compute_normalization(train_set);

    TrainOptions to;
    to.learning_rate = cfg.lr;
    to.epochs = cfg.epochs;
    to.batch_size = cfg.batch;
    to.seed = cfg.seed;
    const TrainingLog log = train(model, train_set, val_set, to);

    fs::create_directories(cfg.out_dir);
    save_checkpoint(model, cfg.out_dir + "/model.mcl");
    write_training_log_csv(log, cfg.out_dir + "/train_log.csv");
    const EvalResult final_val = evaluate(model, val_set);
    std::ofstream ms(cfg.out_dir + "/metrics.txt");
    ms << std::setprecision(10) << "epochs_run " << log.size() << "\n"
       << "best_val_accuracy " << final_val.accuracy << "\n"
       << "best_val_loss " << final_val.mean_loss << "\n";
    std::cout << "trained " << log.size() << " epochs, best val accuracy "
              << final_val.accuracy << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    const std::string samples =
        cfg.samples_path.empty() ? cfg.data_dir + "/samples.mcs" : cfg.samples_path;
    const SampleStore store = load_sample_store(samples);
    MclModel<float> model = load_checkpoint(cfg.model_path);
    const EvalResult r = evaluate(model, store.samples);
    fs::create_directories(cfg.out_dir);
    write_confusion_csv(r.confusion, cfg.out_dir + "/confusion.csv");
    std::ofstream ms(cfg.out_dir + "/accuracy.txt");
    ms << std::setprecision(10) << r.accuracy << "\n";
    std::cout << "accuracy " << std::setprecision(10) << r.accuracy << " over "
              << store.samples.size() << " samples\n";
    return 0;
}

int cmd_inspect(const RunConfig& cfg, const std::string& path, const std::string& pgm_out,
                const std::string& csv_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4] = {};
    is.read(magic, 4);
    const std::string m(magic, 4);
    if (m == "MDF1") {
        const FrameRecording rec = read_recording(path);
        std::cout << "MDF1 recording\n"
                  << "  samples_per_chirp " << rec.config.samples_per_chirp << "\n"
                  << "  chirps_per_frame  " << rec.config.chirps_per_frame << "\n"
                  << "  frames            " << rec.frames.size() << "\n"
                  << "  chirp_duration_s  " << rec.config.chirp_duration_s << "\n"
                  << "  carrier_freq_hz   " << rec.config.carrier_frequency_hz << "\n"
                  << "  frame_rate_hz     " << rec.config.frame_rate() << "\n";
        int labeled = 0;
        for (int l : rec.labels) labeled += (l != kUnlabeled) ? 1 : 0;
        std::cout << "  labeled_frames    " << labeled << "\n";
        if (!pgm_out.empty() || !csv_out.empty()) {
            const Tds tds = prepare_tds(rec, cfg.prepare_opts());
            if (!pgm_out.empty()) write_tds_pgm(tds, pgm_out);
            if (!csv_out.empty()) write_tds_csv(tds, csv_out);
            std::cout << "  tds_shape         " << tds.rows << "x" << tds.cols << "\n";
        }
    } else if (m == "MCL1") {
        MclModel<float> model = load_checkpoint(path);
        std::size_t params = 0;
        for (auto* t : model.parameters()) params += t->numel();
        std::cout << "MCL1 checkpoint\n"
                  << "  classes        " << model.cfg.num_classes << "\n"
                  << "  tds_window     " << model.cfg.tds_rows << "x" << model.cfg.tds_cols
                  << "\n"
                  << "  cn_input_dim   " << model.cn_input_dim() << "\n"
                  << "  cn_output_dim  " << model.cn_output_dim() << "\n"
                  << "  parameters     " << params << "\n";
    } else if (m == "MCS1") {
        const SampleStore store = load_sample_store(path);
        std::cout << "MCS1 sample store\n"
                  << "  samples        " << store.samples.size() << "\n"
                  << "  tds_window     " << store.tds_rows << "x" << store.tds_cols << "\n"
                  << "  feature_window " << store.feature_window << "\n";
    } else {
        throw BadMagic("unrecognized magic in " + path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"micro-Doppler pedestrian identification pipeline"};
    app.set_config("--config", "", "key = value config file; flags override file values");

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "RNG seed; all randomness flows from it");
    app.add_option("--data-dir", cfg.data_dir, "input directory");
    app.add_option("--out-dir", cfg.out_dir, "output directory");
    app.add_option("--threads", cfg.threads, "worker threads (1 = bit-reproducible)");
    app.add_option("--samples-per-chirp", cfg.samples_per_chirp, "fast-time samples K");
    app.add_option("--chirps", cfg.chirps_per_frame, "chirps per frame L");
    app.add_option("--chirp-duration", cfg.chirp_duration, "chirp duration in seconds");
    app.add_option("--carrier", cfg.carrier_frequency, "carrier frequency in Hz");
    app.add_option("--target-cells", cfg.target_cells, "Doppler cells after crop");
    app.add_option("--noise-margin", cfg.noise_margin, "denoise threshold margin (MAD units)");
    app.add_option("--rel-threshold-db", cfg.rel_threshold_db, "envelope threshold below row max");
    app.add_option("--stride", cfg.stride, "sample window stride in frames");
    app.add_option("--tds-window", cfg.tds_window, "TDS window rows fed to FN1");
    app.add_option("--feature-window", cfg.feature_window, "frames behind the FN2 features");

    auto* sim = app.add_subcommand("simulate", "write synthetic walker recordings");
    sim->add_option("--classes", cfg.classes, "number of walker profiles");
    sim->add_option("--duration", cfg.duration, "seconds per recording");
    sim->add_option("--base-speed", cfg.base_speed, "torso speed of profile 0 (m/s)");
    sim->add_option("--speed-step", cfg.speed_step, "torso speed increment per profile");
    sim->add_option("--limb-amp", cfg.limb_amp, "limb Doppler amplitude of profile 0 (Hz)");
    sim->add_option("--limb-amp-step", cfg.limb_amp_step, "limb amplitude increment");
    sim->add_option("--gait-base", cfg.gait_base, "gait frequency of profile 0 (Hz)");
    sim->add_option("--gait-step", cfg.gait_step, "gait frequency increment");
    sim->add_option("--noise", cfg.noise, "I/Q noise floor (linear std)");

    auto* prep = app.add_subcommand("prepare", "recordings -> TDS -> sample store");
    prep->add_flag("--export-tds", cfg.export_tds, "also write per-recording TDS PGM + CSV");

    auto* trn = app.add_subcommand("train", "train the MCL model");
    trn->add_option("--samples", cfg.samples_path, "sample store (default data-dir/samples.mcs)");
    trn->add_option("--epochs", cfg.epochs, "training epochs");
    trn->add_option("--lr", cfg.lr, "SGD learning rate");
    trn->add_option("--batch", cfg.batch, "batch size");
    trn->add_option("--val-frac", cfg.val_frac, "chronological validation fraction");
    trn->add_option("--conv-channels", cfg.conv_channels, "FN1 conv channels, comma separated");
    trn->add_option("--fn1-hidden", cfg.fn1_hidden, "FN1 fully connected hidden width");
    trn->add_option("--fn2-hidden", cfg.fn2_hidden, "FN2 hidden widths, comma separated");
    trn->add_option("--cn-hidden", cfg.cn_hidden, "CN hidden widths, comma separated");

    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on a sample store");
    evl->add_option("--samples", cfg.samples_path, "sample store (default data-dir/samples.mcs)");
    evl->add_option("--model", cfg.model_path, "MCL1 checkpoint")->required();

    std::string inspect_path, pgm_out, csv_out;
    auto* ins = app.add_subcommand("inspect", "dump file headers");
    ins->add_option("path", inspect_path, "MDF1 / MCL1 / MCS1 file")->required();
    ins->add_option("--tds-pgm", pgm_out, "export the recording's TDS as PGM");
    ins->add_option("--tds-csv", csv_out, "export the recording's TDS as CSV");

    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg);
        if (prep->parsed()) return cmd_prepare(cfg);
        if (trn->parsed()) return cmd_train(cfg);
        if (evl->parsed()) return cmd_eval(cfg);
        if (ins->parsed()) return cmd_inspect(cfg, inspect_path, pgm_out, csv_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DivergedLoss& e) {
        std::cerr << "numeric divergence: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
