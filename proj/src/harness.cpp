#include "pubpriv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pubpriv/bounds.hpp"
#include "pubpriv/errors.hpp"
#include "pubpriv/estimators.hpp"
#include "pubpriv/fingerprint.hpp"

namespace pubpriv::harness {

namespace {

// Substream purposes within one trial.
constexpr std::uint64_t kStreamInstance = 0;
constexpr std::uint64_t kStreamData = 1;
constexpr std::uint64_t kStreamMechanism = 2;
constexpr std::uint64_t kStreamZprimePick = 3;
constexpr std::uint64_t kStreamZprimeBase = 16;

bool wants(const ExperimentConfig& config, Aggregate a) {
    return std::find(config.outputs.begin(), config.outputs.end(), a) != config.outputs.end();
}

bool mean_only(Aggregate a) {
    return a == Aggregate::quad_term || a == Aggregate::cross_term ||
           a == Aggregate::posterior_gap;
}

bool reg_only(Aggregate a) { return a == Aggregate::gls_score; }

std::vector<int> pick_indices(int total, int want, Rng& rng) {
    if (want >= total) {
        std::vector<int> all(total);
        for (int i = 0; i < total; ++i) all[i] = i;
        return all;
    }
    // partial Fisher-Yates over [0, total)
    std::vector<int> pool(total);
    for (int i = 0; i < total; ++i) pool[i] = i;
    std::vector<int> chosen(want);
    for (int k = 0; k < want; ++k) {
        const auto j = k + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(total - k)));
        std::swap(pool[k], pool[j]);
        chosen[k] = pool[k];
    }
    return chosen;
}

} // namespace

const char* problem_name(Problem p) {
    return p == Problem::mean ? "mean" : "regression";
}

Problem parse_problem(const std::string& name) {
    if (name == "mean") return Problem::mean;
    if (name == "regression" || name == "reg") return Problem::regression;
    throw ParameterError("unknown problem: " + name);
}

const char* aggregate_name(Aggregate a) {
    switch (a) {
        case Aggregate::err_l2: return "err_l2";
        case Aggregate::err_l2_sq: return "err_l2_sq";
        case Aggregate::sum_total: return "sum_total";
        case Aggregate::sum_priv: return "sum_priv";
        case Aggregate::sum_pub_weighted: return "sum_pub_weighted";
        case Aggregate::quad_term: return "quad_term";
        case Aggregate::cross_term: return "cross_term";
        case Aggregate::posterior_gap: return "posterior_gap";
        case Aggregate::gls_score: return "gls_score";
        case Aggregate::zprime: return "zprime";
        case Aggregate::zprime_sq: return "zprime_sq";
    }
    throw ParameterError("unknown aggregate");
}

Aggregate parse_aggregate(const std::string& name) {
    for (Aggregate a : {Aggregate::err_l2, Aggregate::err_l2_sq, Aggregate::sum_total,
                        Aggregate::sum_priv, Aggregate::sum_pub_weighted, Aggregate::quad_term,
                        Aggregate::cross_term, Aggregate::posterior_gap, Aggregate::gls_score,
                        Aggregate::zprime, Aggregate::zprime_sq}) {
        if (name == aggregate_name(a)) return a;
    }
    throw ParameterError("unknown aggregate: " + name);
}

void ExperimentConfig::validate() const {
    if (trials < 1) {
        throw ParameterError("config: trials must be >= 1");
    }
    if (problem == Problem::mean) {
        mean.validate();
        if (!mechanisms::is_mean_kind(mechanism.kind)) {
            throw ParameterError("config: mechanism kind does not match the mean problem");
        }
    } else {
        reg.validate();
        if (!mechanisms::is_reg_kind(mechanism.kind)) {
            throw ParameterError("config: mechanism kind does not match the regression problem");
        }
    }
    if (kappa_override && !(*kappa_override >= 1.0)) {
        throw ParameterError("config: kappa_override must be >= 1");
    }
    for (Aggregate a : outputs) {
        if (problem == Problem::mean && reg_only(a)) {
            throw ParameterError(std::string("config: aggregate ") + aggregate_name(a) +
                                 " needs the regression problem");
        }
        if (problem == Problem::regression && mean_only(a)) {
            throw ParameterError(std::string("config: aggregate ") + aggregate_name(a) +
                                 " needs the mean problem");
        }
    }
    if (wants(*this, Aggregate::zprime) || wants(*this, Aggregate::zprime_sq)) {
        if (zprime_samples < 1) {
            throw ParameterError(
                "config: zprime_samples must be >= 1 when zprime outputs are requested");
        }
        const int n_rows = problem == Problem::mean ? mean.n : reg.n;
        if (zprime_private_rows && n_rows < 1) {
            throw ParameterError("config: zprime_private_rows needs at least one private row");
        }
    }
}

namespace {

void run_mean_trial(const ExperimentConfig& config, const RngSeed trial_seed, TrialRecord& rec) {
    const auto& params = config.mean;
    const auto instance =
        models::sample_mean_instance(params, substream(trial_seed, kStreamInstance));
    const auto ds = models::sample_mean_dataset(params, instance, substream(trial_seed, kStreamData));
    const auto out =
        mechanisms::estimate_mean(config.mechanism, ds, params, substream(trial_seed, kStreamMechanism));
    rec.alpha = (out.estimate - instance.mu_priv).norm();

    const double kappa =
        config.kappa_override ? *config.kappa_override : bounds::kappa(params.m, params.tau, params.d);

    const bool need_trace = wants(config, Aggregate::sum_total) ||
                            wants(config, Aggregate::sum_priv) ||
                            wants(config, Aggregate::sum_pub_weighted);
    fingerprint::FingerprintTrace trace;
    if (need_trace) {
        trace = fingerprint::mean_statistics(out.estimate, ds, instance, kappa);
    }
    const bool need_decomp = wants(config, Aggregate::quad_term) || wants(config, Aggregate::cross_term);
    fingerprint::BayesDecomposition decomp;
    if (need_decomp) {
        decomp = fingerprint::bayes_decomposition(out.estimate, ds, instance, params, kappa);
    }

    for (Aggregate a : config.outputs) {
        double value = 0.0;
        switch (a) {
            case Aggregate::err_l2: value = rec.alpha; break;
            case Aggregate::err_l2_sq: value = rec.alpha * rec.alpha; break;
            case Aggregate::sum_total: value = trace.sum_total; break;
            case Aggregate::sum_priv: value = trace.sum_priv; break;
            case Aggregate::sum_pub_weighted: value = trace.sum_pub_weighted; break;
            case Aggregate::quad_term: value = decomp.quad_term; break;
            case Aggregate::cross_term: value = decomp.cross_term; break;
            case Aggregate::posterior_gap: {
                const auto posterior = mechanisms::bayes_posterior_mean_any(ds, params);
                const auto pooled = estimators::kappa_weighted_pooled_mean(ds, kappa);
                value = (posterior - pooled).squaredNorm();
                break;
            }
            case Aggregate::zprime:
            case Aggregate::zprime_sq:
                continue; // folded from the draw list below
            default:
                continue;
        }
        rec.values.emplace_back(a, value);
    }

    if (wants(config, Aggregate::zprime) || wants(config, Aggregate::zprime_sq)) {
        Rng pick(substream(trial_seed, kStreamZprimePick));
        const int index_pool = config.zprime_private_rows ? params.n : params.n + params.m;
        const auto indices = pick_indices(index_pool, config.zprime_samples, pick);
        rec.zprime_draws.reserve(indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) {
            rec.zprime_draws.push_back(fingerprint::resampled_statistic(
                config.mechanism, ds, instance, params, indices[j],
                substream(trial_seed, kStreamZprimeBase + j)));
        }
    }
}

void run_reg_trial(const ExperimentConfig& config, const RngSeed trial_seed, TrialRecord& rec) {
    const auto& params = config.reg;
    const auto instance =
        models::sample_reg_instance(params, substream(trial_seed, kStreamInstance));
    const auto ds = models::sample_reg_dataset(params, instance, substream(trial_seed, kStreamData));
    const auto out =
        mechanisms::estimate_reg(config.mechanism, ds, params, substream(trial_seed, kStreamMechanism));
    rec.alpha = (out.estimate - instance.beta_priv).norm();

    const bool need_trace = wants(config, Aggregate::sum_total) ||
                            wants(config, Aggregate::sum_priv) ||
                            wants(config, Aggregate::sum_pub_weighted);
    fingerprint::FingerprintTrace trace;
    if (need_trace) {
        trace = fingerprint::reg_score_statistics(out.estimate, ds, instance);
    }

    for (Aggregate a : config.outputs) {
        double value = 0.0;
        switch (a) {
            case Aggregate::err_l2: value = rec.alpha; break;
            case Aggregate::err_l2_sq: value = rec.alpha * rec.alpha; break;
            case Aggregate::sum_total: value = trace.sum_total; break;
            case Aggregate::sum_priv: value = trace.sum_priv; break;
            case Aggregate::sum_pub_weighted: value = trace.sum_pub_weighted; break;
            case Aggregate::gls_score: {
                const estimators::SigmaInverse inv(ds.x_pub(), params.tau, params.noise_sigma2,
                                                   params.n);
                value = fingerprint::gls_score_statistic(out.estimate, ds, instance, inv);
                break;
            }
            case Aggregate::zprime:
            case Aggregate::zprime_sq:
                continue;
            default:
                continue;
        }
        rec.values.emplace_back(a, value);
    }

    if (wants(config, Aggregate::zprime) || wants(config, Aggregate::zprime_sq)) {
        Rng pick(substream(trial_seed, kStreamZprimePick));
        const int index_pool = config.zprime_private_rows ? params.n : params.n + params.m;
        const auto indices = pick_indices(index_pool, config.zprime_samples, pick);
        rec.zprime_draws.reserve(indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) {
            rec.zprime_draws.push_back(fingerprint::resampled_statistic(
                config.mechanism, ds, instance, params, indices[j],
                substream(trial_seed, kStreamZprimeBase + j)));
        }
    }
}

} // namespace

TrialRecord run_trial(const ExperimentConfig& config, int trial_index) {
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.seed = substream(config.seed, static_cast<std::uint64_t>(trial_index));
    const auto start = std::chrono::steady_clock::now();
    try {
        if (config.problem == Problem::mean) {
            run_mean_trial(config, rec.seed, rec);
        } else {
            run_reg_trial(config, rec.seed, rec);
        }
        // trial statistics must be finite; anything else is a loud failure
        bool finite = std::isfinite(rec.alpha);
        for (const auto& [agg, value] : rec.values) {
            (void)agg;
            finite = finite && std::isfinite(value);
        }
        for (double z : rec.zprime_draws) {
            finite = finite && std::isfinite(z);
        }
        if (!finite) {
            throw NumericalError("non-finite statistic in trial");
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.values.clear();
        rec.zprime_draws.clear();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

void RunningStat::push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
}

void RunningStat::merge(const RunningStat& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double delta = other.mean_ - mean_;
    mean_ = (na * mean_ + nb * other.mean_) / (na + nb);
    m2_ += other.m2_ + delta * delta * (na * nb / (na + nb));
    count_ += other.count_;
    min_ = std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
}

double RunningStat::variance_sample() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(count_ - 1);
}

double RunningStat::stderr_of_mean() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(variance_sample() / static_cast<double>(count_));
}

ExperimentResult run_experiment(const ExperimentConfig& config, Execution exec) {
    config.validate();
    std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < config.trials; ++t) {
            records[static_cast<std::size_t>(t)] = run_trial(config, t);
        }
    } else {
        for (int t = 0; t < config.trials; ++t) {
            records[static_cast<std::size_t>(t)] = run_trial(config, t);
        }
    }

    ExperimentResult result;
    result.trials = config.trials;
    std::vector<RunningStat> accs(config.outputs.size());
    for (const auto& rec : records) { // fold in trial order: reproducible
        if (rec.failed) {
            ++result.trial_errors;
            if (result.first_error.empty()) result.first_error = rec.error;
            continue;
        }
        for (std::size_t k = 0; k < config.outputs.size(); ++k) {
            const Aggregate a = config.outputs[k];
            if (a == Aggregate::zprime) {
                for (double z : rec.zprime_draws) accs[k].push(z);
            } else if (a == Aggregate::zprime_sq) {
                for (double z : rec.zprime_draws) accs[k].push(z * z);
            } else {
                for (const auto& [agg, value] : rec.values) {
                    if (agg == a) {
                        accs[k].push(value);
                        break;
                    }
                }
            }
        }
    }
    for (std::size_t k = 0; k < config.outputs.size(); ++k) {
        SummaryStat stat;
        stat.name = aggregate_name(config.outputs[k]);
        stat.mean = accs[k].mean();
        stat.stderr_ = accs[k].stderr_of_mean();
        stat.count = accs[k].count();
        stat.min = accs[k].min();
        stat.max = accs[k].max();
        result.stats.push_back(std::move(stat));
    }
    result.failed = result.trial_errors * 10 > result.trials;
    return result;
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::n: return "n";
        case SweepAxis::m: return "m";
        case SweepAxis::d: return "d";
        case SweepAxis::tau: return "tau";
        case SweepAxis::eps: return "eps";
        case SweepAxis::trials: return "trials";
    }
    throw ParameterError("unknown axis");
}

SweepAxis parse_axis(const std::string& name) {
    for (SweepAxis axis : {SweepAxis::n, SweepAxis::m, SweepAxis::d, SweepAxis::tau, SweepAxis::eps,
                           SweepAxis::trials}) {
        if (name == axis_name(axis)) return axis;
    }
    throw ParameterError("unknown sweep axis: " + name);
}

namespace {

void apply_axis(ExperimentConfig& config, SweepAxis axis, double value) {
    const bool is_mean = config.problem == Problem::mean;
    auto as_count = [&](const char* what) {
        const auto rounded = std::llround(value);
        if (rounded < 0 || std::abs(value - static_cast<double>(rounded)) > 1e-9) {
            throw ParameterError(std::string("sweep: ") + what + " takes nonnegative integers");
        }
        return static_cast<int>(rounded);
    };
    switch (axis) {
        case SweepAxis::n:
            (is_mean ? config.mean.n : config.reg.n) = as_count("n");
            break;
        case SweepAxis::m:
            (is_mean ? config.mean.m : config.reg.m) = as_count("m");
            break;
        case SweepAxis::d:
            (is_mean ? config.mean.d : config.reg.d) = as_count("d");
            break;
        case SweepAxis::tau:
            (is_mean ? config.mean.tau : config.reg.tau) = value;
            break;
        case SweepAxis::eps:
            config.mechanism.budget.eps = value;
            break;
        case SweepAxis::trials:
            config.trials = as_count("trials");
            break;
    }
}

} // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                const std::vector<double>& values, Execution exec) {
    if (values.empty()) {
        throw ParameterError("run_sweep: no axis values");
    }
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double value : values) {
        ExperimentConfig config = base;
        apply_axis(config, axis, value);
        SweepRow row;
        row.axis_value = value;
        row.result = run_experiment(config, exec);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

void put_double(std::ostream& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

} // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "axis_value,stat_name,mean,stderr,count,min,max\n";
    for (const auto& row : rows) {
        for (const auto& stat : row.result.stats) {
            put_double(out, row.axis_value);
            out << ',' << stat.name << ',';
            put_double(out, stat.mean);
            out << ',';
            put_double(out, stat.stderr_);
            out << ',' << stat.count << ',';
            put_double(out, stat.min);
            out << ',';
            put_double(out, stat.max);
            out << '\n';
        }
    }
}

} // namespace pubpriv::harness
