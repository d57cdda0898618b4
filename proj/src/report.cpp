#include "report.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace mnr::report {

std::string fmt_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v))
        return v;
    return nullptr; // df = infinity (normal approximation) and friends
}

double null_or_inf(const nlohmann::json &v) {
    if (v.is_null())
        return std::numeric_limits<double>::infinity();
    return v.get<double>();
}

} // namespace

std::string report_to_csv(const infer::MnrReport &rep) {
    std::string out =
        "feature,beta_hat,se,ci_low,ci_high,p_value,p_holm,p_bh,z_score,df,subset_size\n";
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        const infer::InferenceRecord &r = rep.records[i];
        out += std::to_string(r.feature + 1);
        out += ',';
        out += fmt_double(r.beta_hat);
        out += ',';
        out += fmt_double(r.se);
        out += ',';
        out += fmt_double(r.ci_low);
        out += ',';
        out += fmt_double(r.ci_high);
        out += ',';
        out += fmt_double(r.p_value);
        out += ',';
        out += fmt_double(rep.p_holm[i]);
        out += ',';
        out += fmt_double(rep.p_bh[i]);
        out += ',';
        out += fmt_double(rep.z[i]);
        out += ',';
        out += fmt_double(r.df);
        out += ',';
        out += std::to_string(r.subset_size);
        out += '\n';
    }
    return out;
}

std::string report_to_json(const infer::MnrReport &rep) {
    nlohmann::json j;
    j["method"] = rep.method;
    j["selection_method"] = rep.selection_method;
    j["level"] = rep.level;
    j["family"] = rep.family == datagen::Family::gaussian    ? "gaussian"
                  : rep.family == datagen::Family::binomial ? "binomial"
                                                            : "cox";
    j["n"] = rep.n;
    j["p"] = rep.p;
    j["seed"] = rep.seed;
    nlohmann::json recs = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        const infer::InferenceRecord &r = rep.records[i];
        nlohmann::json e;
        e["feature"] = r.feature + 1;
        e["beta_hat"] = r.beta_hat;
        e["se"] = r.se;
        e["ci_low"] = r.ci_low;
        e["ci_high"] = r.ci_high;
        e["p_value"] = r.p_value;
        e["p_holm"] = rep.p_holm[i];
        e["p_bh"] = rep.p_bh[i];
        e["z_score"] = rep.z[i];
        e["df"] = finite_or_null(r.df);
        e["subset_size"] = r.subset_size;
        if (r.flagged)
            e["flag"] = r.flag;
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    nlohmann::json sstar = nlohmann::json::array();
    for (int k : rep.s_star)
        sstar.push_back(k + 1);
    j["s_star"] = std::move(sstar);
    j["blankets"] = nlohmann::json::parse(blanket::to_json(rep.blankets));
    nlohmann::json errs = nlohmann::json::array();
    for (const auto &[feat, msg] : rep.errors)
        errs.push_back({{"feature", feat + 1}, {"error", msg}});
    j["errors"] = std::move(errs);
    if (rep.method == "causal") {
        nlohmann::json sel = nlohmann::json::array();
        for (int k : rep.selected_causal)
            sel.push_back(k + 1);
        j["selected_causal"] = std::move(sel);
        j["causal_fallback"] = rep.causal_fallback;
    }
    return j.dump(2);
}

infer::MnrReport report_from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("report json: ") + e.what());
    }
    infer::MnrReport rep;
    try {
        rep.method = j.at("method").get<std::string>();
        rep.selection_method = j.value("selection_method", std::string());
        rep.level = j.at("level").get<double>();
        const std::string fam = j.at("family").get<std::string>();
        rep.family = fam == "gaussian"    ? datagen::Family::gaussian
                     : fam == "binomial" ? datagen::Family::binomial
                                         : datagen::Family::cox;
        rep.n = j.at("n").get<std::size_t>();
        rep.p = j.at("p").get<std::size_t>();
        rep.seed = j.value("seed", std::uint64_t(0));
        for (const auto &e : j.at("records")) {
            infer::InferenceRecord r;
            r.feature = e.at("feature").get<int>() - 1;
            r.beta_hat = e.at("beta_hat").get<double>();
            r.se = e.at("se").get<double>();
            r.ci_low = e.at("ci_low").get<double>();
            r.ci_high = e.at("ci_high").get<double>();
            r.p_value = e.at("p_value").get<double>();
            r.df = null_or_inf(e.at("df"));
            r.subset_size = e.at("subset_size").get<int>();
            if (e.contains("flag")) {
                r.flagged = true;
                r.flag = e.at("flag").get<std::string>();
            }
            rep.records.push_back(r);
            rep.p_holm.push_back(e.at("p_holm").get<double>());
            rep.p_bh.push_back(e.at("p_bh").get<double>());
            rep.z.push_back(e.at("z_score").get<double>());
        }
        for (const auto &v : j.at("s_star"))
            rep.s_star.push_back(v.get<int>() - 1);
        rep.blankets = blanket::blanket_from_json(j.at("blankets").dump());
        for (const auto &e : j.at("errors"))
            rep.errors.emplace_back(e.at("feature").get<int>() - 1,
                                    e.at("error").get<std::string>());
        if (j.contains("selected_causal")) {
            for (const auto &v : j.at("selected_causal"))
                rep.selected_causal.push_back(v.get<int>() - 1);
            rep.causal_fallback = j.value("causal_fallback", false);
        }
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("report json: ") + e.what());
    }
    return rep;
}

} // namespace mnr::report
