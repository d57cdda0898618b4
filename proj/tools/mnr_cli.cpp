// Command-line front end: simulation, inference on CSV data, causal
// discovery and Monte-Carlo benchmark runs. All statistical work goes
// through the C API in mnr/mnr.h; this file only parses flags, shuffles
// files and formats terminal output.
//
// Exit codes: 0 success, 2 usage, 3 data/config parse or I/O,
// 4 numerical failure, 5 benchmark band failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mnr/mnr.h"

using nlohmann::json;

namespace {

int exit_code_of(mnr_status st) {
    switch (st) {
    case MNR_OK: return 0;
    case MNR_EINVAL: return 2;
    case MNR_EPARSE: return 3;
    case MNR_EIO: return 3;
    case MNR_ENUMERIC: return 4;
    case MNR_EBAND: return 5;
    }
    return 2;
}

int fail(mnr_status st) {
    std::fprintf(stderr, "error: %s\n", mnr_last_error());
    return exit_code_of(st);
}

int usage_error(const std::string &msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 2;
}

int io_failure(const std::string &msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 3;
}

// Wrapper that frees strings returned by the library.
struct OwnedString {
    char *ptr = nullptr;
    ~OwnedString() { mnr_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

bool write_text(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(content.data(), std::streamsize(content.size()));
    return bool(out);
}

std::string stem_of(const std::string &path) {
    for (const char *ext : {".csv", ".json", ".md"}) {
        const std::string e = ext;
        if (path.size() > e.size() &&
            path.compare(path.size() - e.size(), e.size(), e) == 0)
            return path.substr(0, path.size() - e.size());
    }
    return path;
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char *env = std::getenv("MNR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

// "1:2,2:4,5:-3" (1-based indices) -> {"1": 2.0, "2": 4.0, "5": -3.0}
bool parse_beta_spec(const std::string &spec, json &out, std::string &err) {
    out = json::object();
    if (spec.empty()) return true;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        const std::string tok = spec.substr(pos, comma - pos);
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
            err = "--beta entry '" + tok + "' is not index:value";
            return false;
        }
        try {
            std::size_t used = 0;
            const int idx = std::stoi(tok.substr(0, colon), &used);
            if (used != colon || idx < 1) throw std::invalid_argument("index");
            const std::string vs = tok.substr(colon + 1);
            const double val = std::stod(vs, &used);
            if (used != vs.size()) throw std::invalid_argument("value");
            out[std::to_string(idx)] = val;
        } catch (const std::exception &) {
            err = "--beta entry '" + tok + "' is not index:value";
            return false;
        }
        pos = comma + 1;
    }
    return true;
}

std::string design_to_kind(const std::string &design) {
    if (design == "ar2") return "ar2_precision";
    return design; // identity | toeplitz | equicorr | ar2_precision
}

int write_manifest(const std::string &path, const std::string &command,
                   const json &config, const json &inputs, const json &outputs) {
    json m;
    m["tool"] = "mnr";
    m["version"] = mnr_version();
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    if (!write_text(path, m.dump(2) + "\n"))
        return io_failure("cannot write manifest '" + path + "'");
    return 0;
}

void print_top10(const json &report) {
    const json &records = report.at("records");
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ha = records[a].at("p_holm").get<double>();
        const double hb = records[b].at("p_holm").get<double>();
        if (ha != hb) return ha < hb;
        const double pa = records[a].at("p_value").get<double>();
        const double pb = records[b].at("p_value").get<double>();
        if (pa != pb) return pa < pb;
        return records[a].at("feature").get<int>() < records[b].at("feature").get<int>();
    });
    std::printf("method=%s family=%s n=%zu p=%zu level=%g assessed=%zu\n",
                report.at("method").get<std::string>().c_str(),
                report.at("family").get<std::string>().c_str(),
                report.at("n").get<std::size_t>(), report.at("p").get<std::size_t>(),
                report.at("level").get<double>(), records.size());
    std::printf("top features by Holm-adjusted p-value:\n");
    std::printf("%8s %12s %12s %12s %12s %12s %12s\n", "feature", "beta_hat", "se",
                "ci_low", "ci_high", "p_value", "p_holm");
    const std::size_t k = std::min<std::size_t>(10, order.size());
    for (std::size_t i = 0; i < k; ++i) {
        const json &r = records[order[i]];
        std::printf("%8d %12.6g %12.6g %12.6g %12.6g %12.4g %12.4g\n",
                    r.at("feature").get<int>(), r.at("beta_hat").get<double>(),
                    r.at("se").get<double>(), r.at("ci_low").get<double>(),
                    r.at("ci_high").get<double>(), r.at("p_value").get<double>(),
                    r.at("p_holm").get<double>());
    }
    if (report.contains("selected_causal")) {
        std::printf("selected causal features:");
        for (const json &f : report.at("selected_causal"))
            std::printf(" %d", f.get<int>());
        std::printf("%s\n",
                    report.at("causal_fallback").get<bool>() ? " (singleton fallback)" : "");
    }
    const json &errors = report.at("errors");
    if (!errors.empty()) {
        std::printf("feature failures: %zu (see report errors array)\n", errors.size());
    }
}

struct SimulateArgs {
    std::string design = "toeplitz";
    double rho = 0.0;
    std::size_t n = 0, p = 0;
    std::string family = "gaussian";
    std::string beta;
    double intercept = 0.0;
    double sigma2 = 1.0;
    double lambda0 = 0.1;
    double lambda_c = 1.0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_simulate(const SimulateArgs &a) {
    json beta;
    std::string err;
    if (!parse_beta_spec(a.beta, beta, err)) return usage_error(err);
    for (const auto &[key, val] : beta.items()) {
        (void)val;
        if (std::stoul(key) > a.p)
            return usage_error("--beta index " + key + " exceeds --p " +
                               std::to_string(a.p));
    }
    json cfg;
    cfg["generator"] = {{"kind", design_to_kind(a.design)},
                        {"rho", a.rho},
                        {"p", a.p},
                        {"n", a.n}};
    cfg["model"] = {{"family", a.family},       {"intercept", a.intercept},
                    {"beta", beta},             {"sigma2", a.sigma2},
                    {"lambda0", a.lambda0},     {"lambda_c", a.lambda_c}};
    cfg["seed"] = a.seed;

    mnr_dataset *ds = nullptr;
    const mnr_status st = mnr_simulate(cfg.dump().c_str(), &ds);
    if (st != MNR_OK) return fail(st);
    const mnr_status wst = mnr_dataset_write_csv(ds, a.out.c_str());
    if (wst != MNR_OK) {
        mnr_dataset_free(ds);
        return fail(wst);
    }
    const std::string stem = stem_of(a.out);
    const std::string truth_path = stem + ".truth.json";
    const char *truth = mnr_dataset_truth_json(ds);
    const std::string truth_text = truth ? truth : cfg.dump(2);
    mnr_dataset_free(ds);
    if (!write_text(truth_path, truth_text + "\n"))
        return io_failure("cannot write '" + truth_path + "'");
    const int mrc = write_manifest(stem + ".manifest.json", "simulate",
                                   json::parse(truth_text), json::object(),
                                   json::array({a.out, truth_path}));
    if (mrc != 0) return mrc;
    std::printf("wrote %s (%zu rows, %zu predictors), truth %s\n", a.out.c_str(),
                std::size_t(a.n), std::size_t(a.p), truth_path.c_str());
    return 0;
}

struct InferArgs {
    std::string data;
    std::string response = "y";
    std::string event = "event";
    std::string family = "gaussian";
    std::string method = "mnr";
    double level = 0.95;
    std::string selection;
    std::string blanket = "nodewise";
    std::size_t screen_cap = 0, model_cap = 0;
    int blanket_cap = 0;
    double nodewise_gamma = 1.0;
    double alpha = 0.05;
    int threads = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_infer(const InferArgs &a, bool causal) {
    std::string method = a.method;
    if (causal) method = "causal";
    if (method == "mnr-screen") method = "mnr_screen";
    json opt;
    opt["pipeline"] = method;
    opt["level"] = a.level;
    if (!a.selection.empty()) opt["selection"] = a.selection;
    opt["blanket"] = a.blanket == "corr" ? "corr_screen" : a.blanket;
    if (a.screen_cap) opt["screen_cap"] = a.screen_cap;
    if (a.model_cap) opt["model_cap"] = a.model_cap;
    if (a.blanket_cap) opt["blanket_cap"] = a.blanket_cap;
    opt["nodewise_gamma"] = a.nodewise_gamma;
    opt["causal_alpha"] = a.alpha;
    opt["threads"] = resolve_threads(a.threads);
    opt["seed"] = a.seed;

    mnr_dataset *ds = nullptr;
    mnr_status st = mnr_dataset_read_csv(a.data.c_str(), a.family.c_str(),
                                         a.response.c_str(), a.event.c_str(), &ds);
    if (st != MNR_OK) return fail(st);

    mnr_report *rep = nullptr;
    st = mnr_infer(ds, opt.dump().c_str(), &rep);
    mnr_dataset_free(ds);
    if (st != MNR_OK) return fail(st);

    OwnedString js, cs;
    st = mnr_report_to_json(rep, &js.ptr);
    if (st == MNR_OK) st = mnr_report_to_csv(rep, &cs.ptr);
    mnr_report_free(rep);
    if (st != MNR_OK) return fail(st);

    const std::string stem = stem_of(a.out);
    const std::string json_path = stem + ".json";
    const std::string csv_path = stem + ".csv";
    if (!write_text(json_path, js.str() + "\n") || !write_text(csv_path, cs.str()))
        return io_failure("cannot write report to '" + stem + ".{json,csv}'");
    json resolved = opt;
    resolved["data"] = a.data;
    resolved["family"] = a.family;
    resolved["response"] = a.response;
    resolved["event"] = a.event;
    const int mrc =
        write_manifest(stem + ".manifest.json", causal ? "causal" : "infer", resolved,
                       json{{"data", a.data}}, json::array({json_path, csv_path}));
    if (mrc != 0) return mrc;

    print_top10(json::parse(js.str()));
    std::printf("report: %s, %s\n", json_path.c_str(), csv_path.c_str());
    return 0;
}

struct BenchArgs {
    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    bool desk = false;
};

int run_bench(const BenchArgs &a) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) return io_failure("cannot open config '" + a.config + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::exception &e) {
        std::fprintf(stderr, "error: config %s: %s\n", a.config.c_str(), e.what());
        return 3;
    }
    if (a.desk) {
        if (!cfg.contains("desk"))
            return usage_error("--desk requested but config has no \"desk\" overlay");
        json overlay = cfg.at("desk");
        cfg.erase("desk");
        cfg.merge_patch(overlay);
    } else {
        cfg.erase("desk");
    }
    if (a.seed_given) cfg["seed"] = a.seed;

    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec)
        return io_failure("cannot create output directory '" + a.out_dir + "'");

    OwnedString result;
    const mnr_status st =
        mnr_bench_run(cfg.dump().c_str(), resolve_threads(a.threads), &result.ptr);
    if (st != MNR_OK && st != MNR_EBAND) return fail(st);

    const json out = json::parse(result.str());
    const std::string metrics = out.at("metrics").dump(2);
    OwnedString csv, md;
    mnr_status cst = mnr_metrics_to_csv(metrics.c_str(), &csv.ptr);
    if (cst == MNR_OK) cst = mnr_metrics_to_markdown(metrics.c_str(), &md.ptr);
    if (cst != MNR_OK) return fail(cst);

    const std::filesystem::path dir(a.out_dir);
    const std::string result_path = (dir / "result.json").string();
    const std::string mj = (dir / "metrics.json").string();
    const std::string mc = (dir / "metrics.csv").string();
    const std::string mm = (dir / "metrics.md").string();
    if (!write_text(result_path, result.str() + "\n") ||
        !write_text(mj, metrics + "\n") || !write_text(mc, csv.str()) ||
        !write_text(mm, md.str()))
        return io_failure("cannot write reports under '" + a.out_dir + "'");
    const int mrc = write_manifest((dir / "manifest.json").string(), "bench", cfg,
                                   json{{"config", a.config}},
                                   json::array({result_path, mj, mc, mm}));
    if (mrc != 0) return mrc;

    for (const json &b : out.at("bands")) {
        const double lo = b.contains("min") ? b.at("min").get<double>() : -1e308;
        const double hi = b.contains("max") ? b.at("max").get<double>() : 1e308;
        std::printf("band %-28s value=%-12.6g range=[%g, %g] %s\n",
                    b.at("metric").get<std::string>().c_str(),
                    b.at("value").get<double>(), lo, hi,
                    b.at("pass").get<bool>() ? "PASS" : "FAIL");
    }
    const bool pass = out.at("pass").get<bool>();
    if (out.at("bands").empty())
        std::printf("no bands configured; metrics written to %s\n", a.out_dir.c_str());
    else
        std::printf("%s\n", pass ? "all bands passed" : "band failure");
    return pass ? 0 : 5;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Markov neighborhood regression: high-dimensional inference via "
                 "low-dimensional subset regressions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mnr_version()));

    SimulateArgs sim;
    CLI::App *s = app.add_subcommand("simulate", "Generate a synthetic dataset");
    s->add_option("--design", sim.design, "identity|toeplitz|ar2|equicorr")
        ->check(CLI::IsMember({"identity", "toeplitz", "ar2", "ar2_precision", "equicorr"}));
    s->add_option("--rho", sim.rho, "correlation parameter");
    s->add_option("--n", sim.n, "rows")->required();
    s->add_option("--p", sim.p, "predictors")->required();
    s->add_option("--family", sim.family, "gaussian|binomial|cox")
        ->check(CLI::IsMember({"gaussian", "binomial", "cox"}));
    s->add_option("--beta", sim.beta, "sparse truth, e.g. \"1:2,2:4,5:-3\" (1-based)");
    s->add_option("--intercept", sim.intercept, "intercept (ignored by cox)");
    s->add_option("--sigma2", sim.sigma2, "gaussian noise variance");
    s->add_option("--lambda0", sim.lambda0, "cox event scale");
    s->add_option("--lambda-c", sim.lambda_c, "cox censoring scale");
    s->add_option("--seed", sim.seed, "rng seed");
    s->add_option("--out", sim.out, "output CSV path")->required();

    InferArgs inf;
    CLI::App *i = app.add_subcommand("infer", "Confidence intervals and p-values");
    auto add_infer_flags = [&](CLI::App *cmd, bool causal) {
        cmd->add_option("--data", inf.data, "input CSV")->required();
        cmd->add_option("--response", inf.response, "response column name");
        cmd->add_option("--event", inf.event, "event column name (cox)");
        cmd->add_option("--family", inf.family, "gaussian|binomial|cox")
            ->check(CLI::IsMember({"gaussian", "binomial", "cox"}));
        if (!causal)
            cmd->add_option("--method", inf.method, "mnr|mnr-screen|desparsified")
                ->check(CLI::IsMember({"mnr", "mnr-screen", "mnr_screen", "desparsified"}));
        cmd->add_option("--level", inf.level, "confidence level");
        cmd->add_option("--selection", inf.selection,
                        "sis|lasso|scad|mcp|sis_then_lasso|sis_then_scad|sis_then_mcp");
        cmd->add_option("--blanket", inf.blanket, "nodewise|corr")
            ->check(CLI::IsMember({"nodewise", "corr", "corr_screen"}));
        cmd->add_option("--screen-cap", inf.screen_cap, "screening cap override");
        cmd->add_option("--model-cap", inf.model_cap, "selection size cap override");
        cmd->add_option("--blanket-cap", inf.blanket_cap, "blanket size cap override");
        cmd->add_option("--nodewise-gamma", inf.nodewise_gamma,
                        "extended-BIC weight for nodewise blankets");
        if (causal) cmd->add_option("--alpha", inf.alpha, "Holm selection threshold");
        cmd->add_option("--threads", inf.threads, "worker threads (0 = MNR_THREADS/auto)");
        cmd->add_option("--seed", inf.seed, "seed recorded in the report");
        cmd->add_option("--out", inf.out, "report path stem")->required();
    };
    add_infer_flags(i, false);
    CLI::App *c = app.add_subcommand("causal", "Causal-set discovery (Holm selection)");
    add_infer_flags(c, true);

    BenchArgs ben;
    CLI::App *b = app.add_subcommand("bench", "Monte-Carlo benchmark from a config");
    b->add_option("--config", ben.config, "experiment config JSON")->required();
    b->add_option("--out", ben.out_dir, "output directory")->required();
    b->add_option("--seed", ben.seed, "override config seed");
    b->add_option("--threads", ben.threads, "worker threads (0 = MNR_THREADS/auto)");
    b->add_flag("--desk", ben.desk, "apply the config's desk-scale overlay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    ben.seed_given = b->count("--seed") > 0;
    if (s->parsed()) return run_simulate(sim);
    if (i->parsed()) return run_infer(inf, false);
    if (c->parsed()) return run_infer(inf, true);
    if (b->parsed()) return run_bench(ben);
    return 2;
}
