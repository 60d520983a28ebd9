#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pubpriv/mechanisms.hpp"
#include "pubpriv/models.hpp"

namespace pubpriv::harness {

enum class Problem { mean, regression };

const char* problem_name(Problem p);
Problem parse_problem(const std::string& name);

// Per-trial aggregates the runner knows how to compute. zprime / zprime_sq
// fold every resampled draw as its own observation.
enum class Aggregate {
    err_l2,
    err_l2_sq,
    sum_total,
    sum_priv,
    sum_pub_weighted,
    quad_term,        // mean problem only
    cross_term,       // mean problem only
    posterior_gap,    // mean problem only: |E[mu|X] - Xbar|^2
    gls_score,        // regression only
    zprime,
    zprime_sq,
};

const char* aggregate_name(Aggregate a);
Aggregate parse_aggregate(const std::string& name);

struct ExperimentConfig {
    Problem problem = Problem::mean;
    models::MeanModelParams mean;
    models::RegModelParams reg;
    mechanisms::MechanismSpec mechanism;
    int trials = 1;
    RngSeed seed;
    std::optional<double> kappa_override;
    std::vector<Aggregate> outputs;
    int zprime_samples = 8; // resampled indices evaluated per trial
    // Restrict resampled draws to private rows. Under shift the zero-mean
    // null holds for private rows at any tau but for public rows only at
    // tau = 0 (their statistic picks up the shift through the mechanism).
    bool zprime_private_rows = false;

    void validate() const;
};

struct SummaryStat {
    std::string name;
    double mean = 0.0;
    double stderr_ = std::numeric_limits<double>::quiet_NaN(); // NaN until count >= 2
    long long count = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
};

struct TrialRecord {
    int trial_index = 0;
    RngSeed seed;
    double alpha = std::numeric_limits<double>::quiet_NaN(); // |estimate - truth|_2
    double seconds = 0.0;
    bool failed = false;
    std::string error;
    std::vector<std::pair<Aggregate, double>> values;
    std::vector<double> zprime_draws;
};

// One draw of the whole pipeline: prior -> data -> mechanism -> statistics.
// Deterministic in (config, trial_index); errors are captured in the record.
TrialRecord run_trial(const ExperimentConfig& config, int trial_index);

enum class Execution { serial, parallel };

struct ExperimentResult {
    std::vector<SummaryStat> stats;
    int trials = 0;
    long long trial_errors = 0;
    bool failed = false; // more than 10% of trials errored
    std::string first_error;
};

// Trials are buffered by index and folded in order, so aggregates are
// bit-identical across runs and thread counts.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                Execution exec = Execution::parallel);

enum class SweepAxis { n, m, d, tau, eps, trials };

const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

struct SweepRow {
    double axis_value = 0.0;
    ExperimentResult result;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                const std::vector<double>& values,
                                Execution exec = Execution::parallel);

// Welford accumulator with min/max; merge() keeps it usable for pre-reduced
// partials even though the runner folds serially for reproducibility.
class RunningStat {
public:
    void push(double x);
    void merge(const RunningStat& other);
    long long count() const { return count_; }
    double mean() const { return mean_; }
    double variance_sample() const;
    double stderr_of_mean() const;
    double min() const { return min_; }
    double max() const { return max_; }

private:
    long long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Results + config serialization
// ---------------------------------------------------------------------------

// CSV schema (exact): axis_value,stat_name,mean,stderr,count,min,max
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_json(std::ostream& out, const std::vector<SweepRow>& rows);

ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);

} // namespace pubpriv::harness
