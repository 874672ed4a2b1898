#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* kEnvVars[] = {
    "I2B_HIDDEN", "I2B_EPOCHS", "I2B_BATCH", "I2B_DROPOUT", "I2B_LR", "I2B_VAL_FRACTION",
    "I2B_WEIGHT_TRANSFORM", "I2B_ROW_NORMALIZE", "I2B_EDGES", "I2B_LABELS", "I2B_LABEL_MAP",
    "I2B_OUT", "I2B_PER_CLASS", "I2B_CONTRACTS", "I2B_NOISE", "I2B_BACKGROUND_FACTOR",
    "I2B_SEED", "I2B_OUT_DIR", "I2B_GRAPH", "I2B_CALLS", "I2B_HOPS", "I2B_MAX_NEIGHBORS",
    "I2B_EOSIO", "I2B_TOP_CONTRACTS", "I2B_TRANSFORM", "I2B_NAME_KIND", "I2B_THREADS",
    "I2B_BUNDLE", "I2B_VARIANT", "I2B_RATIO", "I2B_SPLIT_SEED", "I2B_HISTORY", "I2B_MODEL",
    "I2B_METHODS", "I2B_SEEDS", "I2B_KNN_K", "I2B_FGSD_BINS", "I2B_NETLSD_SCALES"};

void clear_env() {
    for (const char* v : kEnvVars) unsetenv(v);
}

// Runs the CLI with `args` from inside `dir`; stdout/stderr land next to it.
int run_cli(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd " + dir.string() + " && " + I2B_CLI_PATH + " " + args +
                            " > out.log 2> err.log";
    const int rc = std::system(cmd.c_str());
    return rc;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// data rows after the header line, skipping the # echo block
int history_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    bool seen_header = false;
    int n = 0;
    while (std::getline(in, line)) {
        if (seen_header) ++n;
        if (line == "epoch,train_loss,val_f1") seen_header = true;
    }
    return seen_header ? n : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// One full pipeline in `dir` using only relative paths, so identical
// invocations in different directories must produce identical bytes.
void run_pipeline(const fs::path& dir) {
    REQUIRE(run_cli(dir, "synth --per-class 20 --seed 3 --noise 0.2 --out-dir data") == 0);
    REQUIRE(run_cli(dir, "ingest --edges data/edges.csv --labels data/labels.csv "
                         "--out graph.bin") == 0);
    REQUIRE(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 1 "
                         "--out bundle.jsonl") == 0);
    REQUIRE(run_cli(dir, "train --bundle bundle.jsonl --hidden 8 --epochs 3 --batch 8 "
                         "--seed 5 --ratio 1:1 --history history.csv --out model.ckpt") == 0);
    REQUIRE(run_cli(dir, "eval --bundle bundle.jsonl --model model.ckpt --ratio 1:1 "
                         "--split-seed 5 --out metrics.csv") == 0);
}

}  // namespace

TEST_CASE("the full pipeline runs and leaves the expected artifacts") {
    clear_env();
    const auto dir = fresh_dir("i2b_cli_pipe");
    run_pipeline(dir);

    for (const char* f : {"data/edges.csv", "data/labels.csv", "data/calls.csv",
                          "data/config.txt", "graph.bin", "bundle.jsonl", "model.ckpt",
                          "history.csv", "metrics.csv"})
        CHECK(fs::exists(dir / f));

    // history: echo comments, header, one row per epoch
    const std::string hist = slurp(dir / "history.csv");
    CHECK(hist.find("epoch,train_loss,val_f1") != std::string::npos);
    CHECK(hist.find("# command = train") != std::string::npos);

    const std::string metrics = slurp(dir / "metrics.csv");
    CHECK(metrics.find("precision,recall,f1") != std::string::npos);
    CHECK(metrics.find("# ratio = 1:1") != std::string::npos);

    const std::string out = slurp(dir / "out.log");
    CHECK(out.find("precision=") != std::string::npos);

    REQUIRE(run_cli(dir, "baseline --bundle bundle.jsonl --methods fgsd+knn,netlsd+knn "
                         "--seeds 2 --out cmp.csv") == 0);
    const std::string cmp = slurp(dir / "cmp.csv");
    CHECK(cmp.find("method,seed,precision,recall,f1") != std::string::npos);
    CHECK(cmp.find("fgsd+knn,mean,") != std::string::npos);
    CHECK(cmp.find("netlsd+knn,mean,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("identical runs in different directories produce identical bytes") {
    clear_env();
    const auto a = fresh_dir("i2b_cli_rep_a");
    const auto b = fresh_dir("i2b_cli_rep_b");
    run_pipeline(a);
    run_pipeline(b);

    for (const char* f : {"data/edges.csv", "model.ckpt", "history.csv", "metrics.csv"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("out-of-range and malformed invocations fail with a message") {
    clear_env();
    const auto dir = fresh_dir("i2b_cli_err");
    REQUIRE(run_cli(dir, "synth --per-class 8 --seed 1 --out-dir data") == 0);
    REQUIRE(run_cli(dir, "ingest --edges data/edges.csv --labels data/labels.csv "
                         "--out graph.bin") == 0);

    CHECK(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 3 "
                       "--out bundle.jsonl") != 0);
    CHECK(slurp(dir / "err.log").find("--hops") != std::string::npos);

    CHECK(run_cli(dir, "ingest --edges data/missing.csv --labels data/labels.csv "
                       "--out g2.bin") != 0);
    CHECK(run_cli(dir, "synth --noise 1.5 --out-dir data2") != 0);
    CHECK(run_cli(dir, "") != 0);  // a subcommand is required

    REQUIRE(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 1 "
                         "--out bundle.jsonl") == 0);
    CHECK(run_cli(dir, "baseline --bundle bundle.jsonl --methods svm") != 0);
    CHECK(slurp(dir / "err.log").find("unknown method") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("a stale checkpoint is rejected when the feature schema moves") {
    clear_env();
    const auto dir = fresh_dir("i2b_cli_schema");
    REQUIRE(run_cli(dir, "synth --per-class 10 --seed 2 --out-dir data") == 0);
    REQUIRE(run_cli(dir, "ingest --edges data/edges.csv --labels data/labels.csv "
                         "--out graph.bin") == 0);
    REQUIRE(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 1 "
                         "--out plain.jsonl") == 0);
    REQUIRE(run_cli(dir, "train --bundle plain.jsonl --hidden 8 --epochs 2 --batch 8 "
                         "--out model.ckpt") == 0);

    // same graph, different schema: name-kind block appended
    REQUIRE(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 1 "
                         "--name-kind --out kinds.jsonl") == 0);
    CHECK(run_cli(dir, "eval --bundle kinds.jsonl --model model.ckpt") != 0);
    const std::string err = slurp(dir / "err.log");
    CHECK(err.find("schema mismatch") != std::string::npos);
    CHECK(err.find("retrain") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("flags override environment variables which override config files") {
    clear_env();
    const auto dir = fresh_dir("i2b_cli_conf");
    REQUIRE(run_cli(dir, "synth --per-class 10 --seed 4 --out-dir data") == 0);
    REQUIRE(run_cli(dir, "ingest --edges data/edges.csv --labels data/labels.csv "
                         "--out graph.bin") == 0);
    REQUIRE(run_cli(dir, "extract --graph graph.bin --calls data/calls.csv --hops 1 "
                         "--out bundle.jsonl") == 0);

    {
        std::ofstream cfg(dir / "train.conf");
        cfg << "# training defaults\n"
            << "bundle = bundle.jsonl\n"
            << "hidden = 8\n"
            << "batch = 8\n"
            << "epochs = 2\n"
            << "out = model.ckpt\n";
    }

    // config file alone
    REQUIRE(run_cli(dir, "train --config train.conf --history h.csv") == 0);
    CHECK(history_rows(dir / "h.csv") == 2);
    CHECK(slurp(dir / "h.csv").find("# epochs = 2") != std::string::npos);

    // environment beats the config file
    setenv("I2B_EPOCHS", "3", 1);
    REQUIRE(run_cli(dir, "train --config train.conf --history h.csv") == 0);
    CHECK(history_rows(dir / "h.csv") == 3);
    CHECK(slurp(dir / "h.csv").find("# epochs = 3") != std::string::npos);

    // an explicit flag beats both
    REQUIRE(run_cli(dir, "train --config train.conf --epochs 4 --history h.csv") == 0);
    CHECK(history_rows(dir / "h.csv") == 4);
    CHECK(slurp(dir / "h.csv").find("# epochs = 4") != std::string::npos);
    unsetenv("I2B_EPOCHS");
    fs::remove_all(dir);
}
