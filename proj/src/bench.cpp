#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "baselines.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "threadpool.hpp"

namespace mnr::bench {

using datagen::CounterRng;
using datagen::Family;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Per-replicate partial sums; folded in replicate order after the parallel
// section so results do not depend on the thread count.
struct RepPartial {
    bool failed = false;
    std::string error;
    // index 0 = signal group, 1 = noise group
    double cov_sum[2] = {0.0, 0.0};
    std::size_t cov_n[2] = {0, 0};
    double w_sum[2] = {0.0, 0.0};
    double w_sq[2] = {0.0, 0.0};
    std::vector<int> joint_cover;  // per set: 1 covered, 0 missed, -1 failed
    std::vector<double> coef_val;  // tracked estimates, nan when unavailable
    std::vector<int> selected;
    bool has_selected = false;
    bool causal_fallback = false;
    int feature_errors = 0;
    int flagged = 0;
    double max_grad = 0.0;
};

struct Pool {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        sq += v * v;
        ++n;
    }
    GroupStats finalize(std::size_t reps_used) const {
        GroupStats g;
        g.count = n;
        if (n == 0) return g;
        g.mean = sum / double(n);
        if (n > 1 && reps_used > 0) {
            const double var = std::max(0.0, (sq - sum * sum / double(n)) / double(n - 1));
            g.sd = std::sqrt(var / double(reps_used));
        }
        return g;
    }
};

std::string fam_name(Family f) {
    switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::binomial: return "binomial";
    default: return "cox";
    }
}

Family fam_parse(const std::string &s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "binomial") return Family::binomial;
    if (s == "cox") return Family::cox;
    throw parse_error("unknown family '" + s + "'");
}

std::string cov_name(datagen::CovKind k) {
    switch (k) {
    case datagen::CovKind::identity: return "identity";
    case datagen::CovKind::toeplitz: return "toeplitz";
    case datagen::CovKind::equicorr: return "equicorr";
    default: return "ar2_precision";
    }
}

datagen::CovKind cov_parse(const std::string &s) {
    if (s == "identity") return datagen::CovKind::identity;
    if (s == "toeplitz") return datagen::CovKind::toeplitz;
    if (s == "equicorr") return datagen::CovKind::equicorr;
    if (s == "ar2_precision") return datagen::CovKind::ar2_precision;
    throw parse_error("unknown covariance kind '" + s + "'");
}

std::string set_label(const std::vector<int> &feats) {
    std::string s;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        if (i) s += '+';
        s += std::to_string(feats[i] + 1);
    }
    return s;
}

std::string fmt4(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void run_one_replicate(const ExperimentConfig &cfg, int r, const std::vector<double> &truth,
                       RepPartial &out) {
    const std::uint64_t rep_seed =
        CounterRng::derive(cfg.seed, {datagen::kStreamReplicate, std::uint64_t(r)});
    numkit::Matrix x = datagen::sample_mvn(cfg.n, cfg.cov, rep_seed);
    datagen::Dataset ds = datagen::gen_response(std::move(x), cfg.model, rep_seed);

    out.joint_cover.assign(cfg.joint_sets.size(), -1);
    out.coef_val.assign(cfg.track_coefs.size(), kNan);

    std::vector<infer::InferenceRecord> records;
    std::vector<double> p_holm, p_bh;
    infer::MnrReport rep;
    const bool is_mnr = cfg.pipeline == "mnr" || cfg.pipeline == "mnr_screen" ||
                        cfg.pipeline == "causal";
    if (is_mnr) {
        infer::MnrConfig mc = cfg.mnr;
        mc.level = cfg.level;
        mc.threads = 1; // replicates already run in parallel
        mc.seed = rep_seed;
        mc.mode = cfg.pipeline == "mnr_screen" ? infer::Mode::screening : infer::Mode::full;
        rep = cfg.pipeline == "causal" ? infer::run_causal(ds, mc) : infer::run_mnr(ds, mc);
        records = rep.records;
        p_holm = rep.p_holm;
        p_bh = rep.p_bh;
        out.feature_errors += int(rep.errors.size());
        if (cfg.pipeline == "causal") {
            out.selected = rep.selected_causal;
            out.has_selected = true;
            out.causal_fallback = rep.causal_fallback;
        }
    } else { // desparsified
        baselines::DebiasedResult dr = baselines::desparsified_lasso(ds, cfg.level, 1);
        records = std::move(dr.records);
        std::vector<double> praw(records.size());
        for (std::size_t i = 0; i < records.size(); ++i)
            praw[i] = records[i].p_value;
        p_holm = infer::adjust_pvalues(praw, infer::Adjust::holm);
        p_bh = infer::adjust_pvalues(praw, infer::Adjust::bh);
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const infer::InferenceRecord &rec = records[i];
        const double b = truth[std::size_t(rec.feature)];
        const int g = b != 0.0 ? 0 : 1;
        out.cov_sum[g] += (rec.ci_low <= b && b <= rec.ci_high) ? 1.0 : 0.0;
        ++out.cov_n[g];
        const double w = rec.ci_high - rec.ci_low;
        out.w_sum[g] += w;
        out.w_sq[g] += w * w;
        if (rec.flagged) ++out.flagged;
        out.max_grad = std::max(out.max_grad, rec.grad_norm);
    }

    if (cfg.select_rule.enabled && cfg.pipeline != "causal") {
        const std::vector<double> &padj =
            cfg.select_rule.adjust == infer::Adjust::holm ? p_holm : p_bh;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (padj[i] < cfg.select_rule.alpha)
                out.selected.push_back(records[i].feature);
        out.has_selected = true;
    }

    for (std::size_t t = 0; t < cfg.track_coefs.size(); ++t)
        for (const infer::InferenceRecord &rec : records)
            if (rec.feature == cfg.track_coefs[t]) {
                out.coef_val[t] = rec.beta_hat;
                break;
            }

    if (!cfg.joint_sets.empty() && (cfg.pipeline == "mnr" || cfg.pipeline == "mnr_screen")) {
        for (std::size_t s = 0; s < cfg.joint_sets.size(); ++s) {
            try {
                const infer::JointInferenceRecord jr = infer::joint_infer(
                    ds, cfg.joint_sets[s], rep.blankets, rep.s_star, cfg.level);
                bool covered = true;
                for (std::size_t u = 0; u < jr.features.size(); ++u) {
                    const double b = truth[std::size_t(jr.features[u])];
                    if (!(jr.ci_low[u] <= b && b <= jr.ci_high[u])) covered = false;
                }
                out.joint_cover[s] = covered ? 1 : 0;
            } catch (const Error &) {
                out.joint_cover[s] = -1;
                ++out.feature_errors;
            }
        }
    }
}

} // namespace

MetricsTable run_experiment(const ExperimentConfig &cfg, int threads) {
    if (cfg.replicates < 1)
        throw invalid_argument_error("run_experiment: replicates must be >= 1");
    if (cfg.n < 4)
        throw invalid_argument_error("run_experiment: n too small");
    const std::size_t p = cfg.cov.p;
    const std::vector<double> truth = datagen::dense_beta(cfg.model, p);
    const std::vector<int> signal = datagen::signal_set(cfg.model);

    std::vector<RepPartial> parts(std::size_t(cfg.replicates));
    parallel_for(cfg.replicates, threads, [&](int r) {
        RepPartial &out = parts[std::size_t(r)];
        try {
            run_one_replicate(cfg, r, truth, out);
        } catch (const Error &e) {
            out.failed = true;
            out.error = e.what();
        }
    });

    MetricsTable t;
    t.name = cfg.name;
    t.pipeline = cfg.pipeline;
    t.family = cfg.model.family;
    t.n = cfg.n;
    t.p = p;
    t.replicates = cfg.replicates;
    t.level = cfg.level;
    t.seed = cfg.seed;

    Pool cov[2], wid[2];
    std::vector<std::pair<std::size_t, std::size_t>> joint_hits(cfg.joint_sets.size(),
                                                                {0, 0});
    std::vector<Pool> coef_pool(cfg.track_coefs.size());
    std::vector<std::vector<int>> selected_sets;
    for (const RepPartial &pr : parts) {
        if (pr.failed) {
            ++t.failed_replicates;
            continue;
        }
        for (int g = 0; g < 2; ++g) {
            cov[g].sum += pr.cov_sum[g];
            cov[g].sq += pr.cov_sum[g]; // indicators: x^2 = x
            cov[g].n += pr.cov_n[g];
            wid[g].sum += pr.w_sum[g];
            wid[g].sq += pr.w_sq[g];
            wid[g].n += pr.cov_n[g];
        }
        for (std::size_t s = 0; s < joint_hits.size(); ++s)
            if (pr.joint_cover[s] >= 0) {
                ++joint_hits[s].second;
                joint_hits[s].first += std::size_t(pr.joint_cover[s]);
            }
        for (std::size_t c = 0; c < coef_pool.size(); ++c)
            if (!std::isnan(pr.coef_val[c])) coef_pool[c].add(pr.coef_val[c]);
        if (pr.has_selected) selected_sets.push_back(pr.selected);
        if (pr.feature_errors > 0) ++t.error_replicates;
        t.feature_errors += pr.feature_errors;
        t.flagged_records += pr.flagged;
        if (pr.causal_fallback) ++t.causal_fallbacks;
        t.max_grad_norm = std::max(t.max_grad_norm, pr.max_grad);
    }

    const std::size_t reps_used = std::size_t(cfg.replicates - t.failed_replicates);
    t.coverage_signal = cov[0].finalize(reps_used);
    t.coverage_noise = cov[1].finalize(reps_used);
    t.width_signal = wid[0].finalize(reps_used);
    t.width_noise = wid[1].finalize(reps_used);

    for (std::size_t s = 0; s < cfg.joint_sets.size(); ++s) {
        JointCoverage jc;
        jc.features = cfg.joint_sets[s];
        jc.count = joint_hits[s].second;
        jc.rate = jc.count ? double(joint_hits[s].first) / double(jc.count) : 0.0;
        t.joint.push_back(std::move(jc));
    }
    for (std::size_t c = 0; c < cfg.track_coefs.size(); ++c) {
        CoefStats cs;
        cs.feature = cfg.track_coefs[c];
        cs.count = coef_pool[c].n;
        if (cs.count > 0) cs.mean = coef_pool[c].sum / double(cs.count);
        if (cs.count > 1) {
            const double var =
                std::max(0.0, (coef_pool[c].sq - coef_pool[c].sum * coef_pool[c].sum /
                                                     double(cs.count)) /
                                  double(cs.count - 1));
            cs.sd = std::sqrt(var);
        }
        t.coefs.push_back(cs);
    }
    if (!selected_sets.empty() || cfg.select_rule.enabled || cfg.pipeline == "causal") {
        t.has_selection = true;
        auto [fsr, nsr] = compute_fsr_nsr(selected_sets, signal, reps_used);
        t.fsr = fsr;
        t.nsr = nsr;
    }
    return t;
}

std::pair<double, double> compute_fsr_nsr(const std::vector<std::vector<int>> &selected,
                                          const std::vector<int> &signal,
                                          std::size_t replicates) {
    const std::set<int> truth(signal.begin(), signal.end());
    std::size_t total_sel = 0, false_sel = 0, missed = 0;
    for (const std::vector<int> &sel : selected) {
        const std::set<int> s(sel.begin(), sel.end());
        total_sel += s.size();
        for (int j : s)
            if (!truth.count(j)) ++false_sel;
        for (int j : truth)
            if (!s.count(j)) ++missed;
    }
    const double fsr = total_sel ? double(false_sel) / double(total_sel) : 0.0;
    const double denom = double(replicates) * double(truth.size());
    const double nsr = denom > 0.0 ? double(missed) / denom : 0.0;
    return {fsr, nsr};
}

std::vector<BandResult> evaluate_bands(const MetricsTable &t,
                                       const std::vector<Band> &bands) {
    std::vector<BandResult> out;
    auto push = [&](const Band &b, const std::string &metric, double value) {
        BandResult r;
        r.band = b;
        r.band.metric = metric;
        r.value = value;
        r.pass = std::isfinite(value) && value >= b.lo && value <= b.hi;
        out.push_back(std::move(r));
    };
    for (const Band &b : bands) {
        if (b.metric == "coverage_signal") {
            push(b, b.metric, t.coverage_signal.mean);
        } else if (b.metric == "coverage_noise") {
            push(b, b.metric, t.coverage_noise.mean);
        } else if (b.metric == "width_signal") {
            push(b, b.metric, t.width_signal.mean);
        } else if (b.metric == "width_noise") {
            push(b, b.metric, t.width_noise.mean);
        } else if (b.metric == "fsr") {
            push(b, b.metric, t.fsr);
        } else if (b.metric == "nsr") {
            push(b, b.metric, t.nsr);
        } else if (b.metric == "failure_rate") {
            const double rate = t.replicates > 0
                                    ? double(t.failed_replicates + t.error_replicates) /
                                          double(t.replicates)
                                    : 1.0;
            push(b, b.metric, rate);
        } else if (b.metric == "max_grad_norm") {
            push(b, b.metric, t.max_grad_norm);
        } else if (b.metric == "joint_coverage") {
            for (const JointCoverage &jc : t.joint)
                push(b, "joint_coverage:" + set_label(jc.features), jc.rate);
        } else if (b.metric.rfind("coef_mean:", 0) == 0) {
            const int feat = std::stoi(b.metric.substr(10)) - 1;
            double v = kNan;
            for (const CoefStats &cs : t.coefs)
                if (cs.feature == feat && cs.count > 0) v = cs.mean;
            push(b, b.metric, v);
        } else {
            throw invalid_argument_error("unknown band metric '" + b.metric + "'");
        }
    }
    return out;
}

namespace {

json group_to_json(const GroupStats &g) {
    return json{{"mean", g.mean}, {"sd", g.sd}, {"count", g.count}};
}

GroupStats group_from_json(const json &j) {
    GroupStats g;
    g.mean = j.at("mean").get<double>();
    g.sd = j.at("sd").get<double>();
    g.count = j.at("count").get<std::size_t>();
    return g;
}

} // namespace

std::string metrics_to_json(const MetricsTable &t) {
    json j;
    j["name"] = t.name;
    j["pipeline"] = t.pipeline;
    j["family"] = fam_name(t.family);
    j["n"] = t.n;
    j["p"] = t.p;
    j["replicates"] = t.replicates;
    j["level"] = t.level;
    j["seed"] = t.seed;
    j["coverage"] = {{"signal", group_to_json(t.coverage_signal)},
                     {"noise", group_to_json(t.coverage_noise)}};
    j["width"] = {{"signal", group_to_json(t.width_signal)},
                  {"noise", group_to_json(t.width_noise)}};
    if (t.has_selection) {
        j["fsr"] = t.fsr;
        j["nsr"] = t.nsr;
    }
    json joints = json::array();
    for (const JointCoverage &jc : t.joint) {
        json feats = json::array();
        for (int f : jc.features)
            feats.push_back(f + 1);
        joints.push_back(
            {{"features", feats}, {"rate", jc.rate}, {"count", jc.count}});
    }
    j["joint_coverage"] = std::move(joints);
    json coefs = json::array();
    for (const CoefStats &cs : t.coefs)
        coefs.push_back({{"feature", cs.feature + 1},
                         {"mean", cs.mean},
                         {"sd", cs.sd},
                         {"count", cs.count}});
    j["coefficients"] = std::move(coefs);
    j["failed_replicates"] = t.failed_replicates;
    j["error_replicates"] = t.error_replicates;
    j["feature_errors"] = t.feature_errors;
    j["flagged_records"] = t.flagged_records;
    j["causal_fallbacks"] = t.causal_fallbacks;
    j["max_grad_norm"] = t.max_grad_norm;
    return j.dump(2);
}

MetricsTable metrics_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw parse_error(std::string("metrics json: ") + e.what());
    }
    try {
        MetricsTable t;
        t.name = j.at("name").get<std::string>();
        t.pipeline = j.at("pipeline").get<std::string>();
        t.family = fam_parse(j.at("family").get<std::string>());
        t.n = j.at("n").get<std::size_t>();
        t.p = j.at("p").get<std::size_t>();
        t.replicates = j.at("replicates").get<int>();
        t.level = j.at("level").get<double>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.coverage_signal = group_from_json(j.at("coverage").at("signal"));
        t.coverage_noise = group_from_json(j.at("coverage").at("noise"));
        t.width_signal = group_from_json(j.at("width").at("signal"));
        t.width_noise = group_from_json(j.at("width").at("noise"));
        if (j.contains("fsr")) {
            t.has_selection = true;
            t.fsr = j.at("fsr").get<double>();
            t.nsr = j.at("nsr").get<double>();
        }
        for (const json &e : j.at("joint_coverage")) {
            JointCoverage jc;
            for (const json &f : e.at("features"))
                jc.features.push_back(f.get<int>() - 1);
            jc.rate = e.at("rate").get<double>();
            jc.count = e.at("count").get<std::size_t>();
            t.joint.push_back(std::move(jc));
        }
        for (const json &e : j.at("coefficients")) {
            CoefStats cs;
            cs.feature = e.at("feature").get<int>() - 1;
            cs.mean = e.at("mean").get<double>();
            cs.sd = e.at("sd").get<double>();
            cs.count = e.at("count").get<std::size_t>();
            t.coefs.push_back(cs);
        }
        t.failed_replicates = j.at("failed_replicates").get<int>();
        t.error_replicates = j.at("error_replicates").get<int>();
        t.feature_errors = j.at("feature_errors").get<int>();
        t.flagged_records = j.at("flagged_records").get<int>();
        t.causal_fallbacks = j.at("causal_fallbacks").get<int>();
        t.max_grad_norm = j.at("max_grad_norm").get<double>();
        return t;
    } catch (const json::exception &e) {
        throw parse_error(std::string("metrics json: ") + e.what());
    }
}

std::string metrics_to_csv(const MetricsTable &t) {
    using report::fmt_double;
    std::string out = "metric,group,value\n";
    auto row = [&](const std::string &m, const std::string &g, const std::string &v) {
        out += m;
        out += ',';
        out += g;
        out += ',';
        out += v;
        out += '\n';
    };
    auto num = [&](const std::string &m, const std::string &g, double v) {
        row(m, g, fmt_double(v));
    };
    num("replicates", "", t.replicates);
    num("level", "", t.level);
    num("n", "", double(t.n));
    num("p", "", double(t.p));
    const std::pair<std::string, const GroupStats *> groups[] = {
        {"signal", &t.coverage_signal},
        {"noise", &t.coverage_noise},
    };
    for (const auto &[g, gs] : groups) {
        num("coverage", g, gs->mean);
        num("coverage_sd", g, gs->sd);
        num("coverage_count", g, double(gs->count));
    }
    const std::pair<std::string, const GroupStats *> wgroups[] = {
        {"signal", &t.width_signal},
        {"noise", &t.width_noise},
    };
    for (const auto &[g, gs] : wgroups) {
        num("width", g, gs->mean);
        num("width_sd", g, gs->sd);
    }
    if (t.has_selection) {
        num("fsr", "", t.fsr);
        num("nsr", "", t.nsr);
    }
    for (const JointCoverage &jc : t.joint)
        num("joint_coverage", set_label(jc.features), jc.rate);
    for (const CoefStats &cs : t.coefs) {
        num("coef_mean", std::to_string(cs.feature + 1), cs.mean);
        num("coef_sd", std::to_string(cs.feature + 1), cs.sd);
    }
    num("failed_replicates", "", t.failed_replicates);
    num("error_replicates", "", t.error_replicates);
    num("feature_errors", "", t.feature_errors);
    num("flagged_records", "", t.flagged_records);
    num("causal_fallbacks", "", t.causal_fallbacks);
    num("max_grad_norm", "", t.max_grad_norm);
    return out;
}

std::string metrics_to_markdown(const MetricsTable &t) {
    std::string out = "# " + t.name + "\n\n";
    out += "pipeline `" + t.pipeline + "`, family `" + fam_name(t.family) + "`, n=" +
           std::to_string(t.n) + ", p=" + std::to_string(t.p) + ", replicates=" +
           std::to_string(t.replicates) + ", level=" + fmt4(t.level) + ", seed=" +
           std::to_string(t.seed) + "\n\n";
    out += "| Measure | Group | Mean | SD(mean) | Pool |\n";
    out += "|---|---|---|---|---|\n";
    auto grow = [&](const std::string &m, const std::string &g, const GroupStats &gs) {
        out += "| " + m + " | " + g + " | " + fmt4(gs.mean) + " | " + fmt4(gs.sd) +
               " | " + std::to_string(gs.count) + " |\n";
    };
    grow("Coverage", "signal", t.coverage_signal);
    grow("Coverage", "noise", t.coverage_noise);
    grow("Width", "signal", t.width_signal);
    grow("Width", "noise", t.width_noise);
    out += '\n';
    if (t.has_selection) {
        out += "| Selection | Value |\n|---|---|\n";
        out += "| FSR | " + fmt4(t.fsr) + " |\n";
        out += "| NSR | " + fmt4(t.nsr) + " |\n";
        if (t.causal_fallbacks > 0)
            out += "| Fallback singletons | " + std::to_string(t.causal_fallbacks) +
                   " |\n";
        out += '\n';
    }
    if (!t.joint.empty()) {
        out += "| Joint set | Coverage | Replicates |\n|---|---|---|\n";
        for (const JointCoverage &jc : t.joint)
            out += "| (" + set_label(jc.features) + ") | " + fmt4(jc.rate) + " | " +
                   std::to_string(jc.count) + " |\n";
        out += '\n';
    }
    if (!t.coefs.empty()) {
        out += "| Coefficient | Mean | SD | Replicates |\n|---|---|---|---|\n";
        for (const CoefStats &cs : t.coefs)
            out += "| " + std::to_string(cs.feature + 1) + " | " + fmt4(cs.mean) +
                   " | " + fmt4(cs.sd) + " | " + std::to_string(cs.count) + " |\n";
        out += '\n';
    }
    out += "failed replicates: " + std::to_string(t.failed_replicates) +
           ", replicates with feature errors: " + std::to_string(t.error_replicates) +
           ", feature errors: " + std::to_string(t.feature_errors) +
           ", flagged records: " + std::to_string(t.flagged_records) + "\n";
    if (t.family != Family::gaussian)
        out += "max score sup-norm at accepted fits: " +
               report::fmt_double(t.max_grad_norm) + "\n";
    return out;
}

ExperimentConfig config_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw parse_error(std::string("experiment config: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        cfg.name = j.value("name", std::string("experiment"));

        const json &gen = j.at("generator");
        cfg.cov.kind = cov_parse(gen.at("kind").get<std::string>());
        cfg.cov.rho = gen.value("rho", 0.0);
        cfg.cov.p = gen.at("p").get<std::size_t>();
        cfg.n = gen.at("n").get<std::size_t>();

        const json &model = j.at("model");
        cfg.model.family = fam_parse(model.at("family").get<std::string>());
        cfg.model.beta0 = model.value("intercept", 0.0);
        cfg.model.sigma2 = model.value("sigma2", 1.0);
        cfg.model.lambda0 = model.value("lambda0", 0.1);
        cfg.model.lambda_c = model.value("lambda_c", 1.0);
        if (model.contains("beta")) {
            for (const auto &[key, val] : model.at("beta").items()) {
                const int idx = std::stoi(key);
                if (idx < 1 || std::size_t(idx) > cfg.cov.p)
                    throw parse_error("beta index " + key + " outside 1.." +
                                      std::to_string(cfg.cov.p));
                cfg.model.beta.emplace_back(idx - 1, val.get<double>());
            }
            std::sort(cfg.model.beta.begin(), cfg.model.beta.end());
        }

        const json pipe = j.value("pipeline", json::object());
        cfg.pipeline = pipe.value("kind", std::string("mnr"));
        if (cfg.pipeline != "mnr" && cfg.pipeline != "mnr_screen" &&
            cfg.pipeline != "causal" && cfg.pipeline != "desparsified")
            throw parse_error("unknown pipeline '" + cfg.pipeline + "'");
        if (cfg.pipeline == "desparsified" && cfg.model.family != Family::gaussian)
            throw parse_error("pipeline 'desparsified' supports family 'gaussian' only");
        cfg.mnr.selection = pipe.value("selection", std::string());
        cfg.mnr.blanket_method = pipe.value("blanket", std::string("nodewise"));
        cfg.mnr.screen_cap = pipe.value("screen_cap", std::size_t(0));
        cfg.mnr.model_cap = pipe.value("model_cap", std::size_t(0));
        cfg.mnr.blanket_cap = pipe.value("blanket_cap", 0);
        cfg.mnr.nodewise_gamma = pipe.value("nodewise_gamma", 1.0);
        cfg.mnr.causal_alpha = pipe.value("causal_alpha", 0.05);

        cfg.replicates = j.value("replicates", 100);
        if (cfg.replicates < 1) throw parse_error("replicates must be >= 1");
        cfg.level = j.value("level", 0.95);
        if (!(cfg.level > 0.0 && cfg.level < 1.0))
            throw parse_error("level outside (0,1)");
        cfg.seed = j.value("seed", std::uint64_t(0));

        if (j.contains("joint_sets")) {
            for (const json &set : j.at("joint_sets")) {
                std::vector<int> feats;
                for (const json &f : set) {
                    const int idx = f.get<int>();
                    if (idx < 1 || std::size_t(idx) > cfg.cov.p)
                        throw parse_error("joint_sets index outside 1.." +
                                          std::to_string(cfg.cov.p));
                    feats.push_back(idx - 1);
                }
                if (feats.empty()) throw parse_error("joint_sets contains an empty set");
                cfg.joint_sets.push_back(std::move(feats));
            }
        }
        if (j.contains("select_rule")) {
            const json &sr = j.at("select_rule");
            cfg.select_rule.enabled = true;
            const std::string adj = sr.value("adjust", std::string("bh"));
            if (adj == "holm")
                cfg.select_rule.adjust = infer::Adjust::holm;
            else if (adj == "bh")
                cfg.select_rule.adjust = infer::Adjust::bh;
            else
                throw parse_error("select_rule.adjust must be 'holm' or 'bh'");
            cfg.select_rule.alpha = sr.value("alpha", 0.05);
            if (!(cfg.select_rule.alpha > 0.0 && cfg.select_rule.alpha < 1.0))
                throw parse_error("select_rule.alpha outside (0,1)");
        }
        if (j.contains("track_coefs")) {
            for (const json &f : j.at("track_coefs")) {
                const int idx = f.get<int>();
                if (idx < 1 || std::size_t(idx) > cfg.cov.p)
                    throw parse_error("track_coefs index outside 1.." +
                                      std::to_string(cfg.cov.p));
                cfg.track_coefs.push_back(idx - 1);
            }
        }
        if (j.contains("bands")) {
            for (const json &b : j.at("bands")) {
                Band band;
                band.metric = b.at("metric").get<std::string>();
                band.lo = b.value("min", -kInf);
                band.hi = b.value("max", kInf);
                cfg.bands.push_back(std::move(band));
            }
        }
        return cfg;
    } catch (const json::exception &e) {
        throw parse_error(std::string("experiment config: ") + e.what());
    }
}

std::string config_to_json(const ExperimentConfig &cfg) {
    json j;
    j["name"] = cfg.name;
    j["generator"] = {{"kind", cov_name(cfg.cov.kind)},
                      {"rho", cfg.cov.rho},
                      {"p", cfg.cov.p},
                      {"n", cfg.n}};
    json beta = json::object();
    for (const auto &[idx, val] : cfg.model.beta)
        beta[std::to_string(idx + 1)] = val;
    j["model"] = {{"family", fam_name(cfg.model.family)},
                  {"intercept", cfg.model.beta0},
                  {"beta", std::move(beta)},
                  {"sigma2", cfg.model.sigma2},
                  {"lambda0", cfg.model.lambda0},
                  {"lambda_c", cfg.model.lambda_c}};
    json pipe;
    pipe["kind"] = cfg.pipeline;
    if (!cfg.mnr.selection.empty()) pipe["selection"] = cfg.mnr.selection;
    pipe["blanket"] = cfg.mnr.blanket_method;
    if (cfg.mnr.screen_cap) pipe["screen_cap"] = cfg.mnr.screen_cap;
    if (cfg.mnr.model_cap) pipe["model_cap"] = cfg.mnr.model_cap;
    if (cfg.mnr.blanket_cap) pipe["blanket_cap"] = cfg.mnr.blanket_cap;
    pipe["nodewise_gamma"] = cfg.mnr.nodewise_gamma;
    if (cfg.pipeline == "causal") pipe["causal_alpha"] = cfg.mnr.causal_alpha;
    j["pipeline"] = std::move(pipe);
    j["replicates"] = cfg.replicates;
    j["level"] = cfg.level;
    j["seed"] = cfg.seed;
    if (!cfg.joint_sets.empty()) {
        json sets = json::array();
        for (const std::vector<int> &s : cfg.joint_sets) {
            json set = json::array();
            for (int f : s)
                set.push_back(f + 1);
            sets.push_back(std::move(set));
        }
        j["joint_sets"] = std::move(sets);
    }
    if (cfg.select_rule.enabled)
        j["select_rule"] = {
            {"adjust", cfg.select_rule.adjust == infer::Adjust::holm ? "holm" : "bh"},
            {"alpha", cfg.select_rule.alpha}};
    if (!cfg.track_coefs.empty()) {
        json tc = json::array();
        for (int f : cfg.track_coefs)
            tc.push_back(f + 1);
        j["track_coefs"] = std::move(tc);
    }
    if (!cfg.bands.empty()) {
        json bands = json::array();
        for (const Band &b : cfg.bands) {
            json e;
            e["metric"] = b.metric;
            if (std::isfinite(b.lo)) e["min"] = b.lo;
            if (std::isfinite(b.hi)) e["max"] = b.hi;
            bands.push_back(std::move(e));
        }
        j["bands"] = std::move(bands);
    }
    return j.dump(2);
}

} // namespace mnr::bench
