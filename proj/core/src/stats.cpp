#include "dl/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dl/closedform.hpp"
#include "quadrature.hpp"

namespace dl {

namespace {

constexpr uint64_t kForwardTag = 0xF0F0F0F0ull;  // decorrelates forward arrivals

void parallel_for_index(long n, int threads, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    int workers = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = int(std::min<long>(workers, n));
    if (workers == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> cursor{0};
    std::exception_ptr err;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long i = cursor.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mtx);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

double default_margin(const GrainLaw1D& law, double margin) {
    return margin >= 0.0 ? margin : law.radius_bound();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

const char* verdict_name(EstimateReport::Verdict v) {
    switch (v) {
        case EstimateReport::Verdict::pass: return "pass";
        case EstimateReport::Verdict::fail: return "fail";
        default: return "no_target";
    }
}

EstimateReport make_report(double value, double std_error, long replicates,
                           std::optional<double> target, double threshold) {
    EstimateReport r;
    r.value = value;
    r.std_error = std_error;
    r.replicates = replicates;
    r.target = target;
    if (target) {
        double z = std_error > 0.0 ? (value - *target) / std_error
                                   : (value == *target ? 0.0 : INFINITY);
        r.z_score = z;
        r.verdict = std::abs(z) <= threshold ? EstimateReport::Verdict::pass
                                             : EstimateReport::Verdict::fail;
    }
    return r;
}

std::vector<double> replicate_map(long replicates, int threads,
                                  const std::function<double(long)>& fn) {
    std::vector<double> out(size_t(std::max<long>(replicates, 0)));
    parallel_for_index(replicates, threads, [&](long i) { out[size_t(i)] = fn(i); });
    return out;
}

SampleSummary summarize(const std::vector<double>& xs) {
    SampleSummary s;
    s.n = long(xs.size());
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / double(s.n);
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / double(s.n - 1);
    s.std_error = std::sqrt(s.variance / double(s.n));
    return s;
}

SampleSummary variance_summary(const std::vector<double>& xs) {
    SampleSummary s;
    long n = long(xs.size());
    s.n = n;
    if (n < 3) throw std::invalid_argument("variance_summary: need at least 3 values");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(n);
    double s2 = 0.0;
    for (double x : xs) s2 += (x - mean) * (x - mean);
    // leave-one-out values of the unbiased variance, centered arithmetic to
    // avoid catastrophic cancellation in S2 - S1^2/n
    std::vector<double> loo(static_cast<size_t>(n));
    double nm1 = double(n - 1);
    for (long i = 0; i < n; ++i) {
        double d = xs[size_t(i)] - mean;
        // residual sum of squares about the leave-one-out mean
        double rss = s2 - d * d * double(n) / nm1;
        loo[size_t(i)] = rss / double(n - 2);
    }
    double lm = 0.0;
    for (double v : loo) lm += v;
    lm /= double(n);
    double jk = 0.0;
    for (double v : loo) jk += (v - lm) * (v - lm);
    s.mean = s2 / nm1;
    s.variance = nm1 / double(n) * jk;
    s.std_error = std::sqrt(s.variance);
    return s;
}

EstimateReport estimate_mean(long replicates, int threads, const RngKey& key,
                             const std::function<double(const RngKey&)>& statistic,
                             std::optional<double> target, double threshold) {
    auto xs = replicate_map(replicates, threads,
                            [&](long i) { return statistic(key.with_replicate(uint64_t(i))); });
    SampleSummary s = summarize(xs);
    return make_report(s.mean, s.std_error, replicates, target, threshold);
}

EstimateReport estimate_variance(long replicates, int threads, const RngKey& key,
                                 const std::function<double(const RngKey&)>& total,
                                 double measure, std::optional<double> target,
                                 double threshold) {
    auto xs = replicate_map(replicates, threads,
                            [&](long i) { return total(key.with_replicate(uint64_t(i))); });
    SampleSummary s = variance_summary(xs);
    return make_report(s.mean / measure, s.std_error / measure, replicates, target, threshold);
}

EstimateReport estimate_intensity_1d(double length, const GrainLaw1D& law, long replicates,
                                     const RngKey& key, int threads,
                                     std::optional<double> target, double margin,
                                     double threshold) {
    double m = default_margin(law, margin);
    double eroded = length - 2.0 * m;
    if (!(eroded > 0.0))
        throw std::invalid_argument("estimate_intensity_1d: window shorter than twice the margin");
    return estimate_mean(
        replicates, threads, key,
        [&](const RngKey& k) {
            Tessellation1D t = simulate1d(length, law, k);
            return double(t.boundary_count(m, length - m)) / eroded;
        },
        target, threshold);
}

// -------------------- pair correlation --------------------

PcfEstimate estimate_pcf(const std::vector<Tessellation1D>& ts, const GrainLaw1D& law,
                         const std::vector<double>& edges, bool with_targets,
                         double threshold) {
    if (ts.size() < 2) throw std::invalid_argument("estimate_pcf: need at least 2 tessellations");
    if (edges.size() < 2 || edges.front() <= 0.0 ||
        !std::is_sorted(edges.begin(), edges.end()))
        throw std::invalid_argument("estimate_pcf: edges must be positive and increasing");

    double length = ts.front().length;
    double m = law.radius_bound();
    double eroded = length - 2.0 * m;
    if (!(eroded > edges.back()))
        throw std::invalid_argument("estimate_pcf: bins wider than the eroded window");

    double lam1 = intensity_1d(law);
    size_t nb = edges.size() - 1;
    auto pair_atoms = pcf_atoms_1d(law);

    PcfEstimate out;
    out.edges = edges;
    out.eroded_length = eroded;
    out.replicates = long(ts.size());

    // per-replicate bin rates and atom rates
    std::vector<std::vector<double>> bin_rates(nb);
    std::vector<std::vector<double>> atom_rates(pair_atoms.size());
    for (auto& v : bin_rates) v.reserve(ts.size());
    for (auto& v : atom_rates) v.reserve(ts.size());

    for (const auto& t : ts) {
        if (t.length != length)
            throw std::invalid_argument("estimate_pcf: mixed window lengths");
        std::vector<double> pts;
        pts.reserve(t.eta.size());
        for (double x : t.eta)
            if (x >= m && x <= length - m) pts.push_back(x);

        std::vector<size_t> counts(nb, 0);
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = i + 1; j < pts.size(); ++j) {
                double d = pts[j] - pts[i];
                if (d >= edges.back()) break;
                // exact-separation pairs belong to the atom channel, not the bins
                bool at_atom = false;
                for (const auto& pa : pair_atoms)
                    if (std::abs(d - pa.separation) < 1e-9) at_atom = true;
                if (at_atom) continue;
                auto it = std::upper_bound(edges.begin(), edges.end(), d);
                if (it == edges.begin()) continue;
                size_t b = size_t(it - edges.begin()) - 1;
                if (b < nb) ++counts[b];
            }
        for (size_t b = 0; b < nb; ++b) {
            double width = edges[b + 1] - edges[b];
            bin_rates[b].push_back(double(counts[b]) / (width * eroded * lam1 * lam1));
        }

        // exact-separation pairs from whole visible components; a pair with
        // both ends inside the eroded window leaves only eroded - sep room
        // for its left end, hence the span in the denominator
        for (size_t a = 0; a < pair_atoms.size(); ++a) {
            double sep = pair_atoms[a].separation;
            size_t hits = 0;
            for (const auto& c : t.cells)
                if (c.full_component && c.start >= m && c.end <= length - m &&
                    std::abs((c.end - c.start) - sep) < 1e-9)
                    ++hits;
            atom_rates[a].push_back(double(hits) / (eroded - sep));
        }
    }

    for (size_t b = 0; b < nb; ++b) {
        std::optional<double> target;
        if (with_targets) {
            double width = edges[b + 1] - edges[b];
            target = integrate([&](double z) { return pcf_1d(law, z); }, edges[b],
                               edges[b + 1], 1e-9) /
                     width;
        }
        SampleSummary s = summarize(bin_rates[b]);
        out.bins.push_back(make_report(s.mean, s.std_error, s.n, target, threshold));
    }
    for (size_t a = 0; a < pair_atoms.size(); ++a) {
        SampleSummary s = summarize(atom_rates[a]);
        AtomRate ar;
        ar.separation = pair_atoms[a].separation;
        std::optional<double> target;
        if (with_targets) target = pair_atoms[a].rate;
        ar.rate = make_report(s.mean, s.std_error, s.n, target, threshold);
        out.atoms.push_back(ar);
    }
    return out;
}

// -------------------- temporal covariance --------------------

CovarianceFit estimate_time_covariance(double length, const GrainLaw1D& law,
                                       const std::vector<double>& lags, long replicates,
                                       const RngKey& key, int threads) {
    if (lags.empty() || lags.front() != 0.0 || !std::is_sorted(lags.begin(), lags.end()))
        throw std::invalid_argument("estimate_time_covariance: lags must start at 0, sorted");
    if (replicates < 3)
        throw std::invalid_argument("estimate_time_covariance: too few replicates");
    double m = law.radius_bound();
    double lo = m, hi = length - m;
    if (!(hi > lo))
        throw std::invalid_argument("estimate_time_covariance: window shorter than margins");

    size_t nl = lags.size();
    std::vector<std::vector<double>> counts(static_cast<size_t>(replicates),
                                            std::vector<double>(nl));
    parallel_for_index(replicates, threads, [&](long i) {
        RngKey base = key.with_replicate(uint64_t(i));
        Tessellation1D t = simulate1d(length, law, base);
        EvolvingState1D state = evolving_from(t);
        TimeSeries series = evolve1d(state, law, base.with_experiment(base.experiment ^ kForwardTag),
                                     lags, lo, hi);
        for (size_t j = 0; j < nl; ++j) counts[size_t(i)][j] = series.value[j];
    });

    CovarianceFit fit;
    fit.lags = lags;
    fit.replicates = replicates;
    double n = double(replicates);
    std::vector<double> means(nl, 0.0);
    for (auto& row : counts)
        for (size_t j = 0; j < nl; ++j) means[j] += row[j];
    for (auto& v : means) v /= n;
    for (size_t j = 0; j < nl; ++j) {
        double acc = 0.0;
        for (auto& row : counts) acc += (row[0] - means[0]) * (row[j] - means[j]);
        fit.covariance.push_back(acc / (n - 1.0));
        fit.used.push_back(fit.covariance.back() > 0.0);
    }

    // weighted least squares on log covariance; weight c^2 matches the
    // delta-method variance of log of an estimated covariance
    double W = 0.0, Sx = 0.0, Sy = 0.0;
    for (size_t j = 0; j < nl; ++j)
        if (fit.used[j]) {
            double w = fit.covariance[j] * fit.covariance[j];
            W += w;
            Sx += w * lags[j];
            Sy += w * std::log(fit.covariance[j]);
        }
    if (W <= 0.0) return fit;
    double xbar = Sx / W, ybar = Sy / W;
    double sxx = 0.0, sxy = 0.0;
    size_t k = 0;
    for (size_t j = 0; j < nl; ++j)
        if (fit.used[j]) {
            double w = fit.covariance[j] * fit.covariance[j];
            sxx += w * (lags[j] - xbar) * (lags[j] - xbar);
            sxy += w * (lags[j] - xbar) * (std::log(fit.covariance[j]) - ybar);
            ++k;
        }
    if (sxx <= 0.0 || k < 2) return fit;
    double slope = sxy / sxx;
    fit.rate = -slope;
    fit.intercept = ybar - slope * xbar;
    if (k > 2) {
        double rss = 0.0;
        for (size_t j = 0; j < nl; ++j)
            if (fit.used[j]) {
                double w = fit.covariance[j] * fit.covariance[j];
                double r = std::log(fit.covariance[j]) - (fit.intercept + slope * lags[j]);
                rss += w * r * r;
            }
        double s2 = rss / double(k - 2);
        fit.rate_std_error = std::sqrt(s2 / sxx);
        fit.intercept_std_error = std::sqrt(s2 * (1.0 / W + xbar * xbar / sxx));
    }
    return fit;
}

// -------------------- distribution checks --------------------

NormalityReport normality_check(const std::vector<double>& xs) {
    long n = long(xs.size());
    if (n < 1000) throw std::invalid_argument("normality_check: need at least 1000 samples");
    NormalityReport r;
    r.n = n;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    r.mean = mean;
    r.sd = std::sqrt(m2);
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (long i = 0; i < n; ++i) {
        double f = normal_cdf((sorted[size_t(i)] - mean) / r.sd);
        d = std::max(d, std::abs(double(i + 1) / double(n) - f));
        d = std::max(d, std::abs(f - double(i) / double(n)));
    }
    r.ks_distance = d;
    r.skew_limit = 4.0 * std::sqrt(6.0 / double(n));
    r.kurt_limit = 4.0 * std::sqrt(24.0 / double(n));
    r.ks_limit = 1.63 / std::sqrt(double(n));
    r.pass = std::abs(r.skewness) < r.skew_limit &&
             std::abs(r.excess_kurtosis) < r.kurt_limit && r.ks_distance < r.ks_limit;
    return r;
}

std::vector<double> sample_exposed_lengths(double length, const GrainLaw1D& law,
                                           long replicates, const RngKey& key, int threads) {
    return replicate_map(replicates, threads, [&](long i) {
        Tessellation1D t = simulate1d(length, law, key.with_replicate(uint64_t(i)));
        const Cell1D& c = t.cell_at(0.5 * length);
        return c.end - c.start;
    });
}

std::vector<double> sample_typical_lengths(double length, const GrainLaw1D& law,
                                           long replicates, const RngKey& key, int threads) {
    return replicate_map(replicates, threads, [&](long i) {
        RngKey k = key.with_replicate(uint64_t(i));
        Tessellation1D t = simulate1d(length, law, k);
        std::vector<const Cell1D*> interior;
        interior.reserve(t.cells.size());
        for (const auto& c : t.cells)
            if (!c.edge) interior.push_back(&c);
        if (interior.empty()) return 0.0;
        RngStream pick = k.stream(purpose::sampling);
        const Cell1D* c = interior[size_t(pick.below(uint64_t(interior.size())))];
        return c->end - c->start;
    });
}

double mixed_ks_distance(std::vector<double> xs, const MixedLaw& law, double atom_tol) {
    if (xs.empty()) throw std::invalid_argument("mixed_ks_distance: empty sample");
    for (double& x : xs)
        for (const auto& a : law.atoms)
            if (std::abs(x - a.x) < atom_tol) x = a.x;
    std::sort(xs.begin(), xs.end());
    double n = double(xs.size());
    auto count_lt = [&](double c) {
        return double(std::lower_bound(xs.begin(), xs.end(), c) - xs.begin());
    };
    auto count_le = [&](double c) {
        return double(std::upper_bound(xs.begin(), xs.end(), c) - xs.begin());
    };
    auto atom_mass = [&](double c) {
        for (const auto& a : law.atoms)
            if (a.x == c) return a.mass;
        return 0.0;
    };
    std::vector<double> candidates = xs;
    for (const auto& a : law.atoms) candidates.push_back(a.x);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double d = 0.0;
    for (double c : candidates) {
        double f = law.cdf(c);
        d = std::max(d, std::abs(count_le(c) / n - f));
        d = std::max(d, std::abs(count_lt(c) / n - (f - atom_mass(c))));
    }
    return d;
}

std::vector<double> empirical_atom_masses(const std::vector<double>& xs, const MixedLaw& law,
                                          double atom_tol) {
    std::vector<double> out;
    out.reserve(law.atoms.size());
    for (const auto& a : law.atoms) {
        size_t hits = 0;
        for (double x : xs)
            if (std::abs(x - a.x) < atom_tol) ++hits;
        out.push_back(xs.empty() ? 0.0 : double(hits) / double(xs.size()));
    }
    return out;
}

EstimateReport estimate_vacancy(double length, const GrainLaw1D& law, double h,
                                long replicates, const RngKey& key, int threads,
                                std::optional<double> target, double threshold) {
    if (!(h >= 0.0) || h >= length)
        throw std::invalid_argument("estimate_vacancy: span outside the window");
    double origin = 0.5 * (length - h);
    return estimate_mean(
        replicates, threads, key,
        [&](const RngKey& k) {
            Tessellation1D t = simulate1d(length, law, k);
            return vacancy_indicator(t, origin, h) ? 1.0 : 0.0;
        },
        target, threshold);
}

}  // namespace dl
