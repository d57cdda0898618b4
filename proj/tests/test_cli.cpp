#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef MNR_CLI_PATH
#error "MNR_CLI_PATH must point at the CLI binary"
#endif

#ifdef _WIN32
#include <process.h>
#else
#include <sys/wait.h>
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output; // stdout and stderr combined
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "mnr_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string &args) {
    const fs::path log = work_dir() / "last_output.txt";
    const std::string cmd =
        std::string("\"") + MNR_CLI_PATH + "\" " + args + " > \"" + log.string() +
        "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
#ifdef _WIN32
    r.code = raw;
#else
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#endif
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string &s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage and version") {
    CHECK(run_cli("--version").code == 0);
    // no subcommand, missing required flags, unknown values: usage errors.
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("simulate").code == 2);
    CHECK(run_cli("simulate --n 10 --p 4 --design bogus --out x.csv").code == 2);
    CHECK(run_cli("infer --data x.csv --method oracle --out y").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    const RunResult help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.output.find("simulate") != std::string::npos);
    CHECK(help.output.find("bench") != std::string::npos);
}

TEST_CASE("simulate writes data, truth and manifest") {
    const fs::path dir = work_dir();
    const fs::path data = dir / "data.csv";
    const RunResult r = run_cli(
        "simulate --design toeplitz --rho 0.5 --n 60 --p 8 --beta 1:2,4:-1.5 "
        "--seed 11 --out \"" + data.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("wrote") != std::string::npos);
    REQUIRE(fs::exists(data));
    REQUIRE(fs::exists(dir / "data.truth.json"));
    REQUIRE(fs::exists(dir / "data.manifest.json"));

    const std::string csv = slurp(data);
    CHECK(csv.rfind("x1,", 0) == 0);
    CHECK(csv.find(",y") != std::string::npos);
    CHECK(line_count(csv) == 61); // header + 60 rows

    const json truth = json::parse(slurp(dir / "data.truth.json"));
    CHECK(truth.at("generator").at("kind") == "toeplitz");
    CHECK(truth.at("generator").at("rho") == 0.5);
    CHECK(truth.at("generator").at("p") == 8);
    CHECK(truth.at("model").at("beta").at("1") == 2.0);
    CHECK(truth.at("seed") == 11);

    const json manifest = json::parse(slurp(dir / "data.manifest.json"));
    CHECK(manifest.at("tool") == "mnr");
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("outputs").size() == 2);

    // malformed --beta is a usage error.
    CHECK(run_cli("simulate --n 10 --p 4 --beta 1:2:3 --out \"" +
                  (dir / "junk.csv").string() + "\"").code == 2);
    CHECK(run_cli("simulate --n 10 --p 4 --beta 9:1 --out \"" +
                  (dir / "junk.csv").string() + "\"").code == 2);
}

TEST_CASE("infer on simulated data") {
    const fs::path dir = work_dir();
    const fs::path data = dir / "data.csv"; // from the simulate case
    REQUIRE(fs::exists(data));

    const fs::path stem = dir / "rep";
    const RunResult r = run_cli("infer --data \"" + data.string() +
                                "\" --threads 1 --seed 11 --out \"" +
                                stem.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("method=mnr") != std::string::npos);
    CHECK(r.output.find("top features by Holm-adjusted p-value:") !=
          std::string::npos);
    REQUIRE(fs::exists(dir / "rep.json"));
    REQUIRE(fs::exists(dir / "rep.csv"));
    REQUIRE(fs::exists(dir / "rep.manifest.json"));

    const json rep = json::parse(slurp(dir / "rep.json"));
    CHECK(rep.at("method") == "mnr");
    CHECK(rep.at("n") == 60);
    CHECK(rep.at("p") == 8);
    REQUIRE(rep.at("records").size() == 8);
    CHECK(slurp(dir / "rep.csv").rfind("feature,beta_hat,se,", 0) == 0);

    // deterministic across thread counts: identical report bytes.
    const fs::path stem3 = dir / "rep3";
    REQUIRE(run_cli("infer --data \"" + data.string() +
                    "\" --threads 3 --seed 11 --out \"" + stem3.string() +
                    "\"").code == 0);
    CHECK(slurp(dir / "rep3.json") == slurp(dir / "rep.json"));

    // desparsified via the same subcommand.
    const fs::path dstem = dir / "dl";
    REQUIRE(run_cli("infer --data \"" + data.string() +
                    "\" --method desparsified --threads 1 --out \"" +
                    dstem.string() + "\"").code == 0);
    CHECK(json::parse(slurp(dir / "dl.json")).at("method") == "desparsified");

    // causal subcommand prints and records the selected set.
    const fs::path cstem = dir / "causal";
    const RunResult cr = run_cli("causal --data \"" + data.string() +
                                 "\" --alpha 0.05 --threads 1 --out \"" +
                                 cstem.string() + "\"");
    REQUIRE(cr.code == 0);
    CHECK(cr.output.find("selected causal features:") != std::string::npos);
    const json crep = json::parse(slurp(dir / "causal.json"));
    CHECK(crep.at("method") == "causal");
    CHECK(crep.contains("selected_causal"));
}

TEST_CASE("data and numeric failures map to distinct exit codes") {
    const fs::path dir = work_dir();
    // missing file: I/O -> 3.
    CHECK(run_cli("infer --data \"" + (dir / "absent.csv").string() +
                  "\" --out \"" + (dir / "x").string() + "\"").code == 3);

    // malformed cell: parse -> 3, message names the location.
    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "x1,y\n1.0,oops\n";
    const RunResult pr = run_cli("infer --data \"" + bad.string() + "\" --out \"" +
                                 (dir / "x").string() + "\"");
    CHECK(pr.code == 3);
    CHECK(pr.output.find("line 2") != std::string::npos);

    // constant predictor: numeric failure -> 4.
    const fs::path cst = dir / "const.csv";
    {
        std::ofstream f(cst);
        f << "x1,x2,y\n";
        for (int i = 0; i < 30; ++i)
            f << "1.0," << 0.1 * i << "," << 0.2 * i << "\n";
    }
    const RunResult nr = run_cli("infer --data \"" + cst.string() + "\" --out \"" +
                                 (dir / "x").string() + "\"");
    CHECK(nr.code == 4);

    // desparsified rejects non-gaussian data: invalid option use -> 2.
    const fs::path bdata = dir / "bin.csv";
    REQUIRE(run_cli("simulate --design identity --n 80 --p 5 --family binomial "
                    "--beta 1:2 --seed 4 --out \"" + bdata.string() + "\"").code == 0);
    CHECK(run_cli("infer --data \"" + bdata.string() +
                  "\" --family binomial --method desparsified --out \"" +
                  (dir / "x").string() + "\"").code == 2);
}

TEST_CASE("bench writes reports and maps band failures to exit 5") {
    const fs::path dir = work_dir();
    const fs::path cfg = dir / "bench.json";
    std::ofstream(cfg) << R"({
      "name": "cli-bench",
      "generator": {"kind": "identity", "p": 6, "n": 60},
      "model": {"family": "gaussian", "beta": {"1": 2.0}},
      "replicates": 2,
      "seed": 5,
      "bands": [{"metric": "coverage_noise", "min": 0.0, "max": 1.0}],
      "desk": {"replicates": 1}
    })";

    const fs::path out = dir / "bench_out";
    const RunResult r = run_cli("bench --config \"" + cfg.string() +
                                "\" --threads 1 --out \"" + out.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("coverage_noise") != std::string::npos);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(r.output.find("all bands passed") != std::string::npos);
    for (const char *f : {"result.json", "metrics.json", "metrics.csv",
                          "metrics.md", "manifest.json"})
        CHECK(fs::exists(out / f));
    const json metrics = json::parse(slurp(out / "metrics.json"));
    CHECK(metrics.at("replicates") == 2);
    CHECK(json::parse(slurp(out / "result.json")).at("pass") == true);
    CHECK(slurp(out / "metrics.csv").rfind("metric,group,value\n", 0) == 0);
    CHECK(slurp(out / "metrics.md").rfind("# cli-bench", 0) == 0);

    // the desk overlay rewrites the configured fields.
    const fs::path dout = dir / "bench_desk";
    REQUIRE(run_cli("bench --config \"" + cfg.string() +
                    "\" --desk --threads 1 --out \"" + dout.string() +
                    "\"").code == 0);
    CHECK(json::parse(slurp(dout / "metrics.json")).at("replicates") == 1);

    // --seed overrides the config seed.
    const fs::path sout = dir / "bench_seed";
    REQUIRE(run_cli("bench --config \"" + cfg.string() +
                    "\" --seed 123 --threads 1 --out \"" + sout.string() +
                    "\"").code == 0);
    CHECK(json::parse(slurp(sout / "metrics.json")).at("seed") == 123);

    // failing band: reports still written, exit code 5.
    const fs::path fcfg = dir / "bench_fail.json";
    std::ofstream(fcfg) << R"({
      "generator": {"kind": "identity", "p": 6, "n": 60},
      "model": {"family": "gaussian", "beta": {"1": 2.0}},
      "replicates": 2,
      "seed": 5,
      "bands": [{"metric": "coverage_noise", "min": 1.01}]
    })";
    const fs::path fout = dir / "bench_fail";
    const RunResult fr = run_cli("bench --config \"" + fcfg.string() +
                                 "\" --threads 1 --out \"" + fout.string() + "\"");
    CHECK(fr.code == 5);
    CHECK(fr.output.find("FAIL") != std::string::npos);
    CHECK(fr.output.find("band failure") != std::string::npos);
    CHECK(fs::exists(fout / "result.json"));
    CHECK(json::parse(slurp(fout / "result.json")).at("pass") == false);

    // config problems.
    CHECK(run_cli("bench --config \"" + (dir / "missing.json").string() +
                  "\" --out \"" + (dir / "x").string() + "\"").code == 3);
    const fs::path no_desk = dir / "no_desk.json";
    std::ofstream(no_desk) << R"({
      "generator": {"kind": "identity", "p": 6, "n": 60},
      "model": {"family": "gaussian"},
      "replicates": 1
    })";
    CHECK(run_cli("bench --config \"" + no_desk.string() + "\" --desk --out \"" +
                  (dir / "x").string() + "\"").code == 2);
    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{broken";
    CHECK(run_cli("bench --config \"" + broken.string() + "\" --out \"" +
                  (dir / "x").string() + "\"").code == 3);
}

TEST_SUITE_END();
