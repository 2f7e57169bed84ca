// End-to-end exercise of the command-line tool. Takes the binary path as
// argv[1] and drives simulate -> prepare -> train -> eval -> inspect in a
// temp directory, checking exit codes and output artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "ok" : "FAIL") << ": " << what << std::endl;
    if (!ok) ++g_failures;
}

int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_test <path-to-binary>" << std::endl;
        return 2;
    }
    const std::string bin = argv[1];
    const fs::path tmp =
        fs::temp_directory_path() / ("mdpid_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const std::string dir = tmp.string();

    const std::string radar =
        " --samples-per-chirp 16 --chirps 64 --chirp-duration 0.001 --target-cells 51";

    // simulate two walkers
    check(run(bin + radar + " --seed 7 --out-dir " + dir + "/data simulate --classes 2" +
              " --duration 45 --base-speed 0.2 --speed-step 0.2 --limb-amp 30" +
              " --limb-amp-step 20 --gait-base 0.6 --gait-step 0.5 --noise 0.05") == 0,
          "simulate exits 0");
    check(fs::exists(dir + "/data/walker_0.mdf") && fs::exists(dir + "/data/walker_1.mdf"),
          "simulate writes recordings");
    check(fs::exists(dir + "/data/walker_0.mdf.labels.csv"), "simulate writes label sidecars");
    check(fs::exists(dir + "/data/manifest.txt"), "simulate writes a manifest");

    // prepare with TDS export
    check(run(bin + radar + " --data-dir " + dir + "/data --out-dir " + dir +
              "/prep prepare --export-tds") == 0,
          "prepare exits 0");
    check(fs::exists(dir + "/prep/samples.mcs"), "prepare writes the sample store");
    check(fs::exists(dir + "/prep/features.csv"), "prepare writes features.csv");
    check(fs::exists(dir + "/prep/normalization.csv"), "prepare writes normalization.csv");
    check(fs::exists(dir + "/prep/walker_0.pgm") && fs::exists(dir + "/prep/walker_0.csv"),
          "prepare exports TDS images");
    {
        std::ifstream f(dir + "/prep/features.csv");
        std::string header;
        std::getline(f, header);
        check(header == "window_start_frame,x1,x2,x3,x4,label", "features.csv header");
    }

    // train a small model for a few epochs
    check(run(bin + " --seed 7 --data-dir " + dir + "/prep --out-dir " + dir +
              "/model train --epochs 3 --lr 0.01 --batch 16 --conv-channels 4,8,16,16" +
              " --fn1-hidden 16 --fn2-hidden 5,5 --cn-hidden 64,16") == 0,
          "train exits 0");
    check(fs::exists(dir + "/model/model.mcl"), "train writes the checkpoint");
    check(fs::exists(dir + "/model/train_log.csv"), "train writes the log");
    check(fs::exists(dir + "/model/metrics.txt"), "train writes metrics");
    {
        std::ifstream f(dir + "/model/train_log.csv");
        std::string header;
        std::getline(f, header);
        check(header == "epoch,train_loss,train_acc,val_loss,val_acc", "train log header");
        std::size_t rows = 0;
        std::string line;
        while (std::getline(f, line))
            if (!line.empty()) ++rows;
        check(rows == 3, "train log has one row per epoch");
    }

    // evaluate the checkpoint
    check(run(bin + " --data-dir " + dir + "/prep --out-dir " + dir + "/eval eval --model " +
              dir + "/model/model.mcl") == 0,
          "eval exits 0");
    check(fs::exists(dir + "/eval/confusion.csv") && fs::exists(dir + "/eval/accuracy.txt"),
          "eval writes confusion matrix and accuracy");

    // inspect all three formats
    check(run(bin + radar + " inspect " + dir + "/data/walker_0.mdf --tds-pgm " + dir +
              "/inspect.pgm > " + dir + "/inspect_mdf.txt") == 0,
          "inspect recording exits 0");
    check(fs::exists(dir + "/inspect.pgm"), "inspect exports a TDS image");
    check(run(bin + " inspect " + dir + "/model/model.mcl > " + dir + "/inspect_mcl.txt") == 0,
          "inspect checkpoint exits 0");
    check(run(bin + " inspect " + dir + "/prep/samples.mcs > " + dir + "/inspect_mcs.txt") == 0,
          "inspect sample store exits 0");

    // config file: values load, flags still override
    {
        std::ofstream cf(dir + "/run.cfg");
        cf << "samples-per-chirp=16\nchirps=64\nchirp-duration=0.001\ntarget-cells=51\n";
    }
    check(run(bin + " --config " + dir + "/run.cfg inspect " + dir +
              "/data/walker_0.mdf --tds-csv " + dir + "/cfg_tds.csv > /dev/null") == 0,
          "config file drives the radar geometry");
    check(fs::exists(dir + "/cfg_tds.csv"), "config-file run exports the TDS");

    // error paths
    {
        std::ofstream junk(dir + "/junk.mdf", std::ios::binary);
        junk << "JUNKJUNKJUNKJUNKJUNKJUNKJUNKJUNK";
    }
    check(run(bin + " inspect " + dir + "/junk.mdf 2> /dev/null") == 3,
          "bad magic exits 3");
    check(run(bin + " --data-dir " + dir + "/empty prepare 2> /dev/null") == 3,
          "missing input data exits 3");
    check(run(bin + " 2> /dev/null") == 2, "missing subcommand exits 2");
    check(run(bin + " train --epochs -1 2> /dev/null") == 2, "invalid flag value exits 2");

    fs::remove_all(tmp);
    if (g_failures > 0) {
        std::cout << g_failures << " checks failed" << std::endl;
        return 1;
    }
    std::cout << "all checks passed" << std::endl;
    return 0;
}
