#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "pubpriv/errors.hpp"
#include "pubpriv/harness.hpp"

// JSON mirrors ExperimentConfig field by field; flags on the CLI override
// whatever the file set. Unknown keys are rejected rather than ignored.

namespace pubpriv::harness {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "problem",        "d",      "n",        "m",       "tau",
    "prior_sigma2",   "noise_sigma2",       "prior_precision_b",
    "mechanism",      "trials", "seed",     "kappa_override",
    "outputs",        "zprime_samples", "zprime_private_rows",
};

const std::set<std::string> kKnownMechanismKeys = {
    "kind", "eps", "delta", "clip_radius", "sensitivity_weight", "mix_weights",
};

void check_keys(const json& j, const std::set<std::string>& known, const char* where) {
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw ParameterError(std::string("config: unknown key '") + item.key() + "' in " +
                                 where);
        }
    }
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParameterError("config: top level must be a JSON object");
    }
    check_keys(j, kKnownKeys, "config");

    ExperimentConfig config;
    if (j.contains("problem")) config.problem = parse_problem(j.at("problem").get<std::string>());

    auto geti = [&](const char* key, int fallback) {
        return j.contains(key) ? j.at(key).get<int>() : fallback;
    };
    auto getd = [&](const char* key, double fallback) {
        return j.contains(key) ? j.at(key).get<double>() : fallback;
    };

    config.mean.d = config.reg.d = geti("d", 1);
    config.mean.n = config.reg.n = geti("n", 0);
    config.mean.m = config.reg.m = geti("m", 0);
    config.mean.tau = config.reg.tau = getd("tau", 0.0);
    config.mean.prior_sigma2 = getd("prior_sigma2", 1.0);
    config.reg.noise_sigma2 = getd("noise_sigma2", 1.0);
    config.reg.prior_precision_b = getd("prior_precision_b", 0.0);

    if (j.contains("mechanism")) {
        const json& mech = j.at("mechanism");
        check_keys(mech, kKnownMechanismKeys, "mechanism");
        if (mech.contains("kind")) {
            config.mechanism.kind = mechanisms::parse_kind(mech.at("kind").get<std::string>());
        }
        if (mech.contains("eps") && !mech.at("eps").is_null()) {
            config.mechanism.budget.eps = mech.at("eps").get<double>();
        }
        if (mech.contains("delta")) config.mechanism.budget.delta = mech.at("delta").get<double>();
        if (mech.contains("clip_radius"))
            config.mechanism.clip_radius = mech.at("clip_radius").get<double>();
        if (mech.contains("sensitivity_weight"))
            config.mechanism.sensitivity_weight = mech.at("sensitivity_weight").get<double>();
        if (mech.contains("mix_weights")) {
            const json& w = mech.at("mix_weights");
            config.mechanism.mix_weights = estimators::PosteriorWeights{
                w.at("w_priv").get<double>(), w.at("w_pub").get<double>()};
        }
    }

    if (j.contains("trials")) config.trials = j.at("trials").get<int>();
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        config.seed.root = s.at("root").get<std::uint64_t>();
        if (s.contains("stream")) config.seed.stream = s.at("stream").get<std::uint64_t>();
    }
    if (j.contains("kappa_override") && !j.at("kappa_override").is_null()) {
        config.kappa_override = j.at("kappa_override").get<double>();
    }
    if (j.contains("outputs")) {
        for (const auto& name : j.at("outputs")) {
            config.outputs.push_back(parse_aggregate(name.get<std::string>()));
        }
    }
    if (j.contains("zprime_samples")) config.zprime_samples = j.at("zprime_samples").get<int>();
    if (j.contains("zprime_private_rows")) {
        config.zprime_private_rows = j.at("zprime_private_rows").get<bool>();
    }
    return config;
}

std::string config_to_json_text(const ExperimentConfig& config) {
    const bool is_mean = config.problem == Problem::mean;
    json j;
    j["problem"] = problem_name(config.problem);
    j["d"] = is_mean ? config.mean.d : config.reg.d;
    j["n"] = is_mean ? config.mean.n : config.reg.n;
    j["m"] = is_mean ? config.mean.m : config.reg.m;
    j["tau"] = is_mean ? config.mean.tau : config.reg.tau;
    j["prior_sigma2"] = config.mean.prior_sigma2;
    j["noise_sigma2"] = config.reg.noise_sigma2;
    j["prior_precision_b"] = config.reg.prior_precision_b;
    json mech;
    mech["kind"] = mechanisms::kind_name(config.mechanism.kind);
    if (std::isfinite(config.mechanism.budget.eps)) {
        mech["eps"] = config.mechanism.budget.eps; // absent means unbounded
    }
    mech["delta"] = config.mechanism.budget.delta;
    mech["clip_radius"] = config.mechanism.clip_radius;
    mech["sensitivity_weight"] = config.mechanism.sensitivity_weight;
    if (config.mechanism.mix_weights) {
        mech["mix_weights"] = {{"w_priv", config.mechanism.mix_weights->w_priv},
                               {"w_pub", config.mechanism.mix_weights->w_pub}};
    }
    j["mechanism"] = std::move(mech);
    j["trials"] = config.trials;
    j["seed"] = {{"root", config.seed.root}, {"stream", config.seed.stream}};
    if (config.kappa_override) {
        j["kappa_override"] = *config.kappa_override;
    }
    json outs = json::array();
    for (Aggregate a : config.outputs) outs.push_back(aggregate_name(a));
    j["outputs"] = std::move(outs);
    j["zprime_samples"] = config.zprime_samples;
    j["zprime_private_rows"] = config.zprime_private_rows;
    return j.dump(2);
}

void write_json(std::ostream& out, const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        for (const auto& stat : row.result.stats) {
            arr.push_back({{"axis_value", row.axis_value},
                           {"stat_name", stat.name},
                           {"mean", stat.mean},
                           {"stderr", stat.stderr_},
                           {"count", stat.count},
                           {"min", stat.min},
                           {"max", stat.max}});
        }
    }
    out << arr.dump(2) << '\n';
}

} // namespace pubpriv::harness
