#ifndef KFWER_IO_HPP
#define KFWER_IO_HPP

// File formats: CSV data ingestion, flat key-value scenario files, and JSON
// reports for procedure runs and simulations.

#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "matrix.hpp"
#include "procedure.hpp"
#include "simulation.hpp"

namespace kfwer {

struct dataset {
    std::vector<std::string> names; // one per column
    matrix values;                  // n x s
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

inline bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

template <typename Int>
bool parse_integer(std::string_view text, Int& out) {
    text = trim(text);
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

} // namespace detail

/// CSV with a header row of hypothesis names followed by n rows of s numbers.
inline dataset read_csv(std::istream& in, const std::string& source = "input") {
    dataset out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        const auto view = detail::trim(line);
        if (view.empty()) continue;
        const auto fields = detail::split_commas(view);
        if (!have_header) {
            for (auto f : fields) {
                f = detail::trim(f);
                if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
                out.names.emplace_back(f);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != out.names.size())
            throw parse_error(source + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(out.names.size()) + " fields, found " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(fields[c], v))
                throw parse_error(source + ":" + std::to_string(line_no) + ": column '" + out.names[c] +
                                  "': not a finite number: '" + std::string(detail::trim(fields[c])) + "'");
            values.push_back(v);
        }
        ++rows;
    }
    if (!have_header) throw parse_error(source + ": empty file, expected a header row");
    out.values = matrix(rows, out.names.size(), std::move(values));
    return out;
}

inline dataset read_csv_string(const std::string& text, const std::string& source = "input") {
    std::istringstream in(text);
    return read_csv(in, source);
}

// ---------------------------------------------------------------------------
// Scenario files

inline std::string valid_procedure_list() {
    std::string out;
    for (auto name : sim_procedure_names) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

/// `key = value` lines; '#' starts a comment. Keys mirror the scenario fields;
/// `procedures` is a comma-separated list. Unknown keys are errors.
inline scenario read_scenario(std::istream& in, const std::string& source = "scenario") {
    scenario sc;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) -> parse_error {
        return parse_error(source + ":" + std::to_string(line_no) + ": " + what);
    };
    auto as_size = [&](std::string_view key, std::string_view v) {
        std::size_t out = 0;
        if (!detail::parse_integer(v, out)) throw fail(std::string(key) + ": expected a nonnegative integer");
        return out;
    };
    auto as_double = [&](std::string_view key, std::string_view v) {
        double out = 0.0;
        if (!detail::parse_double(v, out)) throw fail(std::string(key) + ": expected a number");
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) throw fail("expected 'key = value'");
        const auto key = detail::trim(view.substr(0, eq));
        const auto value = detail::trim(view.substr(eq + 1));
        if (key == "n") sc.n = as_size(key, value);
        else if (key == "s") sc.s = as_size(key, value);
        else if (key == "rho") sc.rho = as_double(key, value);
        else if (key == "signal_count") sc.signal_count = as_size(key, value);
        else if (key == "signal_value") sc.signal_value = as_double(key, value);
        else if (key == "reps") sc.reps = as_size(key, value);
        else if (key == "B") sc.B = as_size(key, value);
        else if (key == "seed") {
            std::uint64_t seed = 0;
            if (!detail::parse_integer(value, seed)) throw fail("seed: expected an unsigned 64-bit integer");
            sc.seed = seed;
        } else if (key == "k") sc.k = as_size(key, value);
        else if (key == "alpha") sc.alpha = as_double(key, value);
        else if (key == "gamma") sc.gamma = as_double(key, value);
        else if (key == "median_alpha") sc.median_alpha = as_double(key, value);
        else if (key == "n_max") sc.n_max = as_size(key, value);
        else if (key == "procedures") {
            sc.procedures.clear();
            for (auto name : detail::split_commas(value)) {
                name = detail::trim(name);
                const auto p = parse_sim_procedure(name);
                if (!p)
                    throw fail("unknown procedure '" + std::string(name) + "'; valid names: " + valid_procedure_list());
                sc.procedures.push_back(*p);
            }
        } else {
            throw fail("unknown key '" + std::string(key) + "'");
        }
    }
    try {
        validate(sc);
    } catch (const domain_error& e) {
        throw parse_error(source + ": " + e.what());
    }
    return sc;
}

inline scenario read_scenario_string(const std::string& text, const std::string& source = "scenario") {
    std::istringstream in(text);
    return read_scenario(in, source);
}

// ---------------------------------------------------------------------------
// JSON reports

using json = nlohmann::ordered_json;

inline json to_json(const procedure_spec& spec) {
    json j;
    j["method"] = std::string(to_string(spec.tag));
    j["alpha"] = spec.alpha;
    j["k"] = spec.k;
    j["gamma"] = spec.gamma;
    j["variant"] = std::string(to_string(spec.kind));
    j["n_max"] = spec.n_max;
    j["sided"] = std::string(to_string(spec.sided));
    j["top_k_mod"] = spec.top_k_mod;
    j["b_boot"] = spec.bootstrap_resamples;
    j["b_sub"] = spec.subsample_count;
    j["subsample_size"] = spec.subsample_size ? json(*spec.subsample_size) : json(nullptr);
    j["statistic"] = std::string(to_string(spec.family));
    j["seed"] = spec.seed;
    return j;
}

inline procedure_spec procedure_spec_from_json(const json& j) {
    procedure_spec spec;
    const auto m = parse_method(j.at("method").get<std::string>());
    if (!m) throw parse_error("report: unknown method");
    spec.tag = *m;
    spec.alpha = j.at("alpha").get<double>();
    spec.k = j.at("k").get<std::size_t>();
    spec.gamma = j.at("gamma").get<double>();
    const auto v = parse_variant(j.at("variant").get<std::string>());
    if (!v) throw parse_error("report: unknown variant");
    spec.kind = *v;
    spec.n_max = j.at("n_max").get<std::size_t>();
    spec.sided = j.at("sided").get<std::string>() == "two" ? sidedness::two : sidedness::one;
    spec.top_k_mod = j.at("top_k_mod").get<bool>();
    spec.bootstrap_resamples = j.at("b_boot").get<std::size_t>();
    spec.subsample_count = j.at("b_sub").get<std::size_t>();
    if (!j.at("subsample_size").is_null()) spec.subsample_size = j.at("subsample_size").get<std::size_t>();
    spec.family = j.at("statistic").get<std::string>() == "raw" ? statistic_family::raw_mean
                                                                 : statistic_family::studentized;
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

inline json to_json(const step_trace& trace) {
    json j;
    j["variant"] = std::string(to_string(trace.kind));
    j["stop_reason"] = std::string(to_string(trace.stop));
    json steps = json::array();
    for (const auto& st : trace.steps) {
        json s;
        s["active"] = st.active;
        s["rejected_before"] = st.rejected_before;
        s["critical_value"] = st.critical_value;
        s["newly_rejected"] = st.newly_rejected;
        s["subsets_evaluated"] = st.subsets_evaluated;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

inline json to_json(const fdp_trace& trace) {
    json j;
    json rounds = json::array();
    for (const auto& r : trace.rounds) rounds.push_back({{"k", r.k}, {"rejected_count", r.rejected_count}, {"stop", r.stop}});
    j["rounds"] = std::move(rounds);
    j["stop_reason"] = std::string(to_string(trace.stop));
    j["final_rejected"] = trace.final_rejected;
    return j;
}

/// One report record: the spec used, rejections by name, per-hypothesis
/// statistics and p-values, and the full trace.
inline json report_record(const dataset& data, const procedure_spec& spec, const procedure_outcome& outcome) {
    json j = to_json(spec);
    json rejected = json::array();
    for (std::size_t i : outcome.rejected) rejected.push_back(data.names[i]);
    j["rejected"] = std::move(rejected);
    j["rejected_indices"] = outcome.rejected;
    json hyps = json::array();
    for (std::size_t i = 0; i < outcome.statistics.size(); ++i) {
        json h{{"name", data.names[i]}, {"statistic", outcome.statistics[i]}, {"p_value", outcome.pvalues[i]}};
        if (!outcome.statistics.signs().empty()) h["sign"] = outcome.statistics.signs()[i];
        hyps.push_back(std::move(h));
    }
    j["hypotheses"] = std::move(hyps);

    json trace;
    if (outcome.constants) {
        trace["stepdown_constants"] = outcome.constants->alphas;
        json order = json::array();
        for (std::size_t i : stepdown_pvalue(outcome.pvalues, *outcome.constants).order) order.push_back(i);
        trace["pvalue_order"] = std::move(order);
    }
    if (outcome.stepdown) {
        trace["stepdown"] = to_json(outcome.stepdown->trace);
        trace["top_k_mod_applied"] = outcome.stepdown->top_k_mod_applied;
        if (!outcome.stepdown->declared_signs.empty()) trace["declared_signs"] = outcome.stepdown->declared_signs;
    }
    if (outcome.fdp) trace["fdp"] = to_json(*outcome.fdp);
    if (outcome.augmentation_base) trace["augmentation_base"] = *outcome.augmentation_base;
    j["trace"] = std::move(trace);
    return j;
}

inline json to_json(const scenario& sc) {
    json j;
    j["n"] = sc.n;
    j["s"] = sc.s;
    j["rho"] = sc.rho;
    j["signal_count"] = sc.signal_count;
    j["signal_value"] = sc.signal_value;
    j["reps"] = sc.reps;
    j["B"] = sc.B;
    j["seed"] = sc.seed;
    j["k"] = sc.k;
    j["alpha"] = sc.alpha;
    j["gamma"] = sc.gamma;
    j["median_alpha"] = sc.median_alpha;
    j["n_max"] = sc.n_max;
    json procs = json::array();
    for (auto p : sc.procedures) procs.push_back(std::string(to_string(p)));
    j["procedures"] = std::move(procs);
    return j;
}

inline json to_json(const simulation_report& report) {
    json j;
    j["scenario"] = to_json(report.config);
    json procs = json::array();
    for (const auto& p : report.procedures) {
        json r;
        r["procedure"] = std::string(to_string(p.procedure));
        r["label"] = p.label;
        r["implemented"] = p.implemented;
        if (!p.implemented) {
            r["note"] = "not implemented";
            procs.push_back(std::move(r));
            continue;
        }
        r["criterion"] = p.fdp_criterion ? "fdp" : "kfwer";
        r["k"] = p.k;
        r["alpha"] = p.alpha;
        r["reps"] = p.reps;
        r["control_rate"] = p.control_rate;
        r["control_se"] = p.control_se;
        r["avg_false_rejected"] = p.avg_false_rejected;
        r["false_rejected_se"] = p.false_rejected_se;
        procs.push_back(std::move(r));
    }
    j["procedures"] = std::move(procs);
    return j;
}

} // namespace kfwer

#endif // KFWER_IO_HPP
