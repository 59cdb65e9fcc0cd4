#pragma once

// Deterministic Monte-Carlo simulation of mixture-elliptic P&L, used as the
// independent check on every analytic VaR / ES figure.
//
// Draws are produced in fixed-size chunks; chunk k uses Philox stream
// (seed, k), so the batch is bit-identical for any number of workers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mixrisk/model.hpp"

namespace mixrisk {

inline constexpr std::size_t kDefaultChunkSize = std::size_t(1) << 16;

struct SampleBatch {
    std::vector<double> pnl;
    std::vector<std::uint32_t> component;  // generating component of each draw
    std::uint64_t seed = 0;
    std::uint64_t chunks = 0;
    std::uint64_t model_hash = 0;
};

struct SamplerOptions {
    int threads = 0;  // 0: MIXRISK_THREADS if set, else hardware concurrency
    std::size_t chunk_size = kDefaultChunkSize;
};

/// Worker count from MIXRISK_THREADS, capped to hardware concurrency; at least 1.
int default_worker_count();

/// FNV-1a digest of the model parameters and portfolio.
std::uint64_t model_digest(const ValidatedModel<double>& model, const Portfolio<double>& p);

/// Draw component j with probability beta_j, z ~ N(0, Sigma_j) through the
/// Cholesky factor, w ~ chi2(nu_j)/nu_j for Student components, then
/// x = mu_j + z / sqrt(w) and P&L = delta . x + theta * horizon.
SampleBatch sample_mixture(const ValidatedModel<double>& model, const Portfolio<double>& p, std::size_t n_draws,
                           std::uint64_t seed, const SamplerOptions& options = {});

/// -(lower order statistic at index ceil(alpha N)); requires N alpha >= 100.
double empirical_var(const SampleBatch& batch, double alpha);

/// Mean of -P&L over the ceil(alpha N) worst draws; requires N alpha >= 100.
double empirical_es(const SampleBatch& batch, double alpha);

struct TailEstimate {
    double var = 0.0;
    double es = 0.0;
    double var_se_bootstrap = 0.0;
    double es_se_bootstrap = 0.0;
    double var_se_order_statistic = 0.0;
    int resamples = 0;
};

/// Empirical VaR/ES with standard errors.  The bootstrap is an exact
/// multinomial resample of the whole batch, evaluated on the sorted lower
/// tail only (cells beyond the ceil(alpha N)-th resampled draw never matter).
/// The order-statistic SE is half the distribution-free 1-sigma interval
/// (x_(k+m) - x_(k-m)) / 2 with m = ceil(sqrt(N alpha (1 - alpha))).
TailEstimate tail_estimate(const SampleBatch& batch, double alpha, int resamples = 200, std::uint64_t seed = 0);

/// Raw batch dump: 32-byte little-endian header (magic "MIXRSK01", N, seed,
/// chunks) followed by N little-endian IEEE-754 doubles.
void write_batch(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_batch(const std::filesystem::path& path);

}  // namespace mixrisk
