#include "mnr/mnr.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "baselines.hpp"
#include "bench.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "infer.hpp"
#include "report.hpp"

using nlohmann::json;

struct mnr_dataset {
    mnr::datagen::Dataset ds;
    std::string truth; // generating config for simulated data, else empty
};

struct mnr_report {
    mnr::infer::MnrReport rep;
};

namespace {

thread_local std::string g_error;

mnr_status status_of(const mnr::Error &e) {
    switch (e.code()) {
    case mnr::errc::invalid_argument: return MNR_EINVAL;
    case mnr::errc::parse: return MNR_EPARSE;
    case mnr::errc::numeric: return MNR_ENUMERIC;
    case mnr::errc::io: return MNR_EIO;
    case mnr::errc::band: return MNR_EBAND;
    default: return MNR_EINVAL;
    }
}

template <typename Fn> mnr_status guarded(Fn &&fn) {
    try {
        fn();
        g_error.clear();
        return MNR_OK;
    } catch (const mnr::Error &e) {
        g_error = e.what();
        return status_of(e);
    } catch (const std::bad_alloc &) {
        g_error = "out of memory";
        return MNR_ENUMERIC;
    } catch (const std::exception &e) {
        g_error = e.what();
        return MNR_EINVAL;
    }
}

char *dup_string(const std::string &s) {
    char *out = new char[s.size() + 1];
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

const char *require(const char *ptr, const char *what) {
    if (!ptr)
        throw mnr::invalid_argument_error(std::string(what) + " is null");
    return ptr;
}

mnr::datagen::Family parse_family(const std::string &s) {
    if (s == "gaussian") return mnr::datagen::Family::gaussian;
    if (s == "binomial") return mnr::datagen::Family::binomial;
    if (s == "cox") return mnr::datagen::Family::cox;
    throw mnr::invalid_argument_error("unknown family '" + s + "'");
}

// Accepts the simulation fields of an experiment config (generator, model,
// seed); the benchmark-only fields keep their defaults and are ignored.
mnr::bench::ExperimentConfig parse_sim_config(const std::string &text) {
    return mnr::bench::config_from_json(text);
}

struct InferOptions {
    std::string pipeline = "mnr";
    mnr::infer::MnrConfig mnr;
};

InferOptions parse_infer_options(const char *options_json) {
    InferOptions opt;
    if (!options_json || !*options_json)
        return opt;
    json j;
    try {
        j = json::parse(options_json);
    } catch (const json::exception &e) {
        throw mnr::parse_error(std::string("options json: ") + e.what());
    }
    try {
        opt.pipeline = j.value("pipeline", std::string("mnr"));
        if (opt.pipeline != "mnr" && opt.pipeline != "mnr_screen" &&
            opt.pipeline != "causal" && opt.pipeline != "desparsified")
            throw mnr::invalid_argument_error("unknown pipeline '" + opt.pipeline + "'");
        opt.mnr.level = j.value("level", 0.95);
        if (!(opt.mnr.level > 0.0 && opt.mnr.level < 1.0))
            throw mnr::invalid_argument_error("level outside (0,1)");
        opt.mnr.selection = j.value("selection", std::string());
        opt.mnr.blanket_method = j.value("blanket", std::string("nodewise"));
        opt.mnr.screen_cap = j.value("screen_cap", std::size_t(0));
        opt.mnr.model_cap = j.value("model_cap", std::size_t(0));
        opt.mnr.blanket_cap = j.value("blanket_cap", 0);
        opt.mnr.nodewise_gamma = j.value("nodewise_gamma", 1.0);
        opt.mnr.causal_alpha = j.value("causal_alpha", 0.05);
        if (!(opt.mnr.causal_alpha > 0.0 && opt.mnr.causal_alpha < 1.0))
            throw mnr::invalid_argument_error("causal_alpha outside (0,1)");
        opt.mnr.threads = j.value("threads", 1);
        opt.mnr.seed = j.value("seed", std::uint64_t(0));
        opt.mnr.mode = opt.pipeline == "mnr_screen" ? mnr::infer::Mode::screening
                                                    : mnr::infer::Mode::full;
    } catch (const json::exception &e) {
        throw mnr::parse_error(std::string("options json: ") + e.what());
    }
    return opt;
}

mnr::infer::MnrReport desparsified_report(const mnr::datagen::Dataset &ds,
                                          const InferOptions &opt) {
    mnr::baselines::DebiasedResult dr =
        mnr::baselines::desparsified_lasso(ds, opt.mnr.level, opt.mnr.threads);
    mnr::infer::MnrReport rep;
    rep.records = std::move(dr.records);
    std::vector<double> praw(rep.records.size());
    for (std::size_t i = 0; i < rep.records.size(); ++i)
        praw[i] = rep.records[i].p_value;
    rep.p_holm = mnr::infer::adjust_pvalues(praw, mnr::infer::Adjust::holm);
    rep.p_bh = mnr::infer::adjust_pvalues(praw, mnr::infer::Adjust::bh);
    rep.z.resize(praw.size());
    for (std::size_t i = 0; i < praw.size(); ++i)
        rep.z[i] = mnr::infer::p_to_z(praw[i]);
    rep.method = "desparsified";
    rep.selection_method = "lasso";
    rep.level = opt.mnr.level;
    rep.family = ds.family;
    rep.n = ds.n();
    rep.p = ds.p();
    rep.seed = opt.mnr.seed;
    return rep;
}

} // namespace

extern "C" {

const char *mnr_version(void) { return "0.1.0"; }

const char *mnr_last_error(void) { return g_error.c_str(); }

void mnr_string_free(char *s) { delete[] s; }

mnr_status mnr_simulate(const char *config_json, mnr_dataset **out) {
    return guarded([&] {
        require(config_json, "config_json");
        require(reinterpret_cast<const char *>(out), "out");
        const mnr::bench::ExperimentConfig cfg = parse_sim_config(config_json);
        mnr::numkit::Matrix draws = mnr::datagen::sample_mvn(cfg.n, cfg.cov, cfg.seed);
        auto holder = std::make_unique<mnr_dataset>();
        holder->ds = mnr::datagen::gen_response(std::move(draws), cfg.model, cfg.seed);
        holder->truth = mnr::bench::config_to_json(cfg);
        *out = holder.release();
    });
}

mnr_status mnr_dataset_read_csv(const char *path, const char *family,
                                const char *response, const char *event,
                                mnr_dataset **out) {
    return guarded([&] {
        require(path, "path");
        require(family, "family");
        require(reinterpret_cast<const char *>(out), "out");
        auto holder = std::make_unique<mnr_dataset>();
        holder->ds = mnr::csvio::read_dataset(path, parse_family(family),
                                              response ? response : "y",
                                              event ? event : "event");
        *out = holder.release();
    });
}

mnr_status mnr_dataset_write_csv(const mnr_dataset *ds, const char *path) {
    return guarded([&] {
        require(reinterpret_cast<const char *>(ds), "dataset");
        require(path, "path");
        mnr::csvio::write_dataset(path, ds->ds);
    });
}

size_t mnr_dataset_rows(const mnr_dataset *ds) { return ds ? ds->ds.n() : 0; }

size_t mnr_dataset_cols(const mnr_dataset *ds) { return ds ? ds->ds.p() : 0; }

const char *mnr_dataset_truth_json(const mnr_dataset *ds) {
    if (!ds || ds->truth.empty())
        return nullptr;
    return ds->truth.c_str();
}

void mnr_dataset_free(mnr_dataset *ds) { delete ds; }

mnr_status mnr_infer(const mnr_dataset *ds, const char *options_json,
                     mnr_report **out) {
    return guarded([&] {
        require(reinterpret_cast<const char *>(ds), "dataset");
        require(reinterpret_cast<const char *>(out), "out");
        const InferOptions opt = parse_infer_options(options_json);
        auto holder = std::make_unique<mnr_report>();
        if (opt.pipeline == "desparsified")
            holder->rep = desparsified_report(ds->ds, opt);
        else if (opt.pipeline == "causal")
            holder->rep = mnr::infer::run_causal(ds->ds, opt.mnr);
        else
            holder->rep = mnr::infer::run_mnr(ds->ds, opt.mnr);
        *out = holder.release();
    });
}

mnr_status mnr_report_to_json(const mnr_report *rep, char **out) {
    return guarded([&] {
        require(reinterpret_cast<const char *>(rep), "report");
        require(reinterpret_cast<const char *>(out), "out");
        *out = dup_string(mnr::report::report_to_json(rep->rep));
    });
}

mnr_status mnr_report_to_csv(const mnr_report *rep, char **out) {
    return guarded([&] {
        require(reinterpret_cast<const char *>(rep), "report");
        require(reinterpret_cast<const char *>(out), "out");
        *out = dup_string(mnr::report::report_to_csv(rep->rep));
    });
}

void mnr_report_free(mnr_report *rep) { delete rep; }

mnr_status mnr_bench_run(const char *config_json, int threads, char **result_json) {
    bool band_failed = false;
    const mnr_status st = guarded([&] {
        require(config_json, "config_json");
        require(reinterpret_cast<const char *>(result_json), "result_json");
        const mnr::bench::ExperimentConfig cfg =
            mnr::bench::config_from_json(config_json);
        const mnr::bench::MetricsTable table = mnr::bench::run_experiment(cfg, threads);
        const std::vector<mnr::bench::BandResult> bands =
            mnr::bench::evaluate_bands(table, cfg.bands);
        json out;
        out["metrics"] = json::parse(mnr::bench::metrics_to_json(table));
        json jb = json::array();
        bool all_pass = true;
        for (const mnr::bench::BandResult &b : bands) {
            json e;
            e["metric"] = b.band.metric;
            if (std::isfinite(b.band.lo)) e["min"] = b.band.lo;
            if (std::isfinite(b.band.hi)) e["max"] = b.band.hi;
            e["value"] = b.value;
            e["pass"] = b.pass;
            if (!b.pass) all_pass = false;
            jb.push_back(std::move(e));
        }
        out["bands"] = std::move(jb);
        out["pass"] = all_pass;
        *result_json = dup_string(out.dump(2));
        band_failed = !all_pass;
    });
    if (st != MNR_OK)
        return st;
    if (band_failed) {
        g_error = "one or more metric bands failed";
        return MNR_EBAND;
    }
    return MNR_OK;
}

mnr_status mnr_metrics_to_csv(const char *metrics_json, char **out) {
    return guarded([&] {
        require(metrics_json, "metrics_json");
        require(reinterpret_cast<const char *>(out), "out");
        *out = dup_string(
            mnr::bench::metrics_to_csv(mnr::bench::metrics_from_json(metrics_json)));
    });
}

mnr_status mnr_metrics_to_markdown(const char *metrics_json, char **out) {
    return guarded([&] {
        require(metrics_json, "metrics_json");
        require(reinterpret_cast<const char *>(out), "out");
        *out = dup_string(
            mnr::bench::metrics_to_markdown(mnr::bench::metrics_from_json(metrics_json)));
    });
}

} // extern "C"
