#pragma once
// Monte Carlo estimators that confront simulations with closed-form targets.
//
// Everything funnels through replicate_map: each replicate derives its own
// RngKey from its index, so reports are bitwise reproducible regardless of
// the worker count. Aggregation is sums and sums of squares only.

#include <functional>
#include <optional>
#include <vector>

#include "dl/dlm1d.hpp"
#include "dl/engine.hpp"
#include "dl/grains.hpp"

namespace dl {

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    long replicates = 0;
    std::optional<double> target;
    std::optional<double> z_score;
    enum class Verdict { pass, fail, no_target };
    Verdict verdict = Verdict::no_target;
};

const char* verdict_name(EstimateReport::Verdict v);

EstimateReport make_report(double value, double std_error, long replicates,
                           std::optional<double> target, double threshold = 3.0);

// run fn(replicate) concurrently; result order follows replicate index
std::vector<double> replicate_map(long replicates, int threads,
                                  const std::function<double(long)>& fn);

struct SampleSummary {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_error = 0.0;
    long n = 0;
};

SampleSummary summarize(const std::vector<double>& xs);

// sample variance as the statistic, standard error by leave-one-out jackknife
SampleSummary variance_summary(const std::vector<double>& xs);

// mean of a per-replicate statistic
EstimateReport estimate_mean(long replicates, int threads, const RngKey& key,
                             const std::function<double(const RngKey&)>& statistic,
                             std::optional<double> target, double threshold = 3.0);

// variance of a per-replicate total, divided by `measure`
EstimateReport estimate_variance(long replicates, int threads, const RngKey& key,
                                 const std::function<double(const RngKey&)>& total,
                                 double measure, std::optional<double> target,
                                 double threshold = 3.0);

// boundary points per unit eroded length; margin defaults to the grain reach
EstimateReport estimate_intensity_1d(double length, const GrainLaw1D& law, long replicates,
                                     const RngKey& key, int threads = 0,
                                     std::optional<double> target = {}, double margin = -1.0,
                                     double threshold = 3.0);

// -------------------- pair correlation --------------------

struct AtomRate {
    double separation = 0.0;
    EstimateReport rate;  // pairs at this exact separation per unit length
};

struct PcfEstimate {
    std::vector<double> edges;          // bin edges, size bins+1
    std::vector<EstimateReport> bins;   // density-part estimates per bin
    std::vector<AtomRate> atoms;        // one per grain-length atom
    double eroded_length = 0.0;
    long replicates = 0;
};

// border-corrected pair counts over pre-simulated tessellations; targets are
// bin averages of the closed-form pair correlation when `with_targets`
PcfEstimate estimate_pcf(const std::vector<Tessellation1D>& ts, const GrainLaw1D& law,
                         const std::vector<double>& edges, bool with_targets = true,
                         double threshold = 3.0);

// -------------------- temporal covariance --------------------

struct CovarianceFit {
    std::vector<double> lags;
    std::vector<double> covariance;  // covariance of window totals per lag
    std::vector<bool> used;          // positive entries entering the fit
    double rate = 0.0, rate_std_error = 0.0;
    double intercept = 0.0, intercept_std_error = 0.0;
    long replicates = 0;
};

// evolves each replicate forward, fits log-covariance against lag by
// weighted least squares; rate targets the mean grain measure
CovarianceFit estimate_time_covariance(double length, const GrainLaw1D& law,
                                       const std::vector<double>& lags, long replicates,
                                       const RngKey& key, int threads = 0);

// -------------------- distribution checks --------------------

struct NormalityReport {
    long n = 0;
    double mean = 0.0, sd = 0.0;
    double skewness = 0.0, excess_kurtosis = 0.0, ks_distance = 0.0;
    double skew_limit = 0.0, kurt_limit = 0.0, ks_limit = 0.0;
    bool pass = false;
};

NormalityReport normality_check(const std::vector<double>& xs);

// lengths of the cell covering the window midpoint, one per replicate
std::vector<double> sample_exposed_lengths(double length, const GrainLaw1D& law,
                                           long replicates, const RngKey& key, int threads = 0);

// lengths of a uniformly chosen interior cell, one per replicate
std::vector<double> sample_typical_lengths(double length, const GrainLaw1D& law,
                                           long replicates, const RngKey& key, int threads = 0);

// Kolmogorov-Smirnov distance between samples and a mixed law; atoms in the
// law are matched exactly (within tol) before the continuous comparison
struct MixedLaw;
double mixed_ks_distance(std::vector<double> xs, const MixedLaw& law, double atom_tol = 1e-9);

// empirical mass near each law atom (within tol)
std::vector<double> empirical_atom_masses(const std::vector<double>& xs, const MixedLaw& law,
                                          double atom_tol = 1e-9);

EstimateReport estimate_vacancy(double length, const GrainLaw1D& law, double h,
                                long replicates, const RngKey& key, int threads = 0,
                                std::optional<double> target = {}, double threshold = 3.0);

}  // namespace dl
