#include "mixrisk/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>
#include <variant>

#include "mixrisk/errors.hpp"
#include "mixrisk/philox.hpp"

namespace mixrisk {

namespace {

constexpr char kMagic[8] = {'M', 'I', 'X', 'R', 'S', 'K', '0', '1'};
constexpr std::uint64_t kBootstrapKey = 0xB0075712A9D3C4E1ull;

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void real(double v) { bytes(&v, sizeof v); }
    void integer(std::uint64_t v) { bytes(&v, sizeof v); }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::size_t tail_count(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha: must lie in (0, 1)");
    if (double(n) * alpha < 100.0)
        throw DomainError("tail sample too small: N*alpha = " + std::to_string(double(n) * alpha) +
                          " < 100 (N=" + std::to_string(n) + ")");
    return static_cast<std::size_t>(std::ceil(alpha * double(n) - 1e-9));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ValidationError("batch file: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

}  // namespace

int default_worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("MIXRISK_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) return std::min(cap, hw);
    }
    return hw;
}

std::uint64_t model_digest(const ValidatedModel<double>& model, const Portfolio<double>& p) {
    Fnv1a h;
    h.integer(static_cast<std::uint64_t>(model.dimension()));
    for (const auto& c : model.model().components) {
        h.real(c.weight);
        for (Eigen::Index i = 0; i < c.mean.size(); ++i) h.real(c.mean[i]);
        for (Eigen::Index i = 0; i < c.scale.rows(); ++i)
            for (Eigen::Index k = 0; k < c.scale.cols(); ++k) h.real(c.scale(i, k));
        h.integer(c.generator.index());
        if (const auto* t = std::get_if<StudentT<double>>(&c.generator)) h.real(t->nu);
    }
    for (Eigen::Index i = 0; i < p.delta.size(); ++i) h.real(p.delta[i]);
    h.real(p.theta);
    h.real(p.horizon);
    return h.value();
}

SampleBatch sample_mixture(const ValidatedModel<double>& model, const Portfolio<double>& p, std::size_t n_draws,
                           std::uint64_t seed, const SamplerOptions& options) {
    if (n_draws < 1) throw DomainError("sample_mixture: n_draws must be >= 1");
    if (options.chunk_size < 1) throw DomainError("sample_mixture: chunk_size must be >= 1");
    check_portfolio(p, model);
    for (const auto& c : model.model().components)
        if (std::holds_alternative<Custom<double>>(c.generator))
            throw DomainError("sample_mixture: custom generators cannot be sampled");

    const int n = model.dimension();
    const std::size_t m = model.size();
    std::vector<double> cumulative(m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) cumulative[j] = (acc += model.component(j).weight);
    cumulative.back() = 1.0;

    SampleBatch batch;
    batch.seed = seed;
    batch.model_hash = model_digest(model, p);
    batch.pnl.resize(n_draws);
    batch.component.resize(n_draws);
    const std::size_t chunk = options.chunk_size;
    batch.chunks = (n_draws + chunk - 1) / chunk;

    const double carry = p.theta_carry();
    const auto run_chunk = [&](std::uint64_t k) {
        Philox4x32 rng(seed, k);
        std::uniform_real_distribution<double> pick(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector<double> eps(n), x(n);
        const std::size_t begin = k * chunk;
        const std::size_t end = std::min(n_draws, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
            const double u = pick(rng);
            const std::size_t j = static_cast<std::size_t>(
                std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            const std::size_t jj = std::min(j, m - 1);
            const auto& c = model.component(jj);
            for (int d = 0; d < n; ++d) eps[d] = gauss(rng);
            x.noalias() = model.factor(jj).lower.triangularView<Eigen::Lower>() * eps;
            if (const auto* t = std::get_if<StudentT<double>>(&c.generator)) {
                std::chi_squared_distribution<double> chi2(t->nu);
                const double w = chi2(rng) / t->nu;
                x /= std::sqrt(w);
            }
            x += c.mean;
            batch.pnl[i] = p.delta.dot(x) + carry;
            batch.component[i] = static_cast<std::uint32_t>(jj);
        }
    };

    const int workers =
        std::max(1, std::min<int>(options.threads > 0 ? options.threads : default_worker_count(),
                                  static_cast<int>(batch.chunks)));
    if (workers == 1) {
        for (std::uint64_t k = 0; k < batch.chunks; ++k) run_chunk(k);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::uint64_t k = next++; k < batch.chunks; k = next++) run_chunk(k);
            });
        for (auto& t : pool) t.join();
    }
    return batch;
}

double empirical_var(const SampleBatch& batch, double alpha) {
    const std::size_t k = tail_count(batch.pnl.size(), alpha);
    std::vector<double> v = batch.pnl;
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    return -v[k - 1];
}

double empirical_es(const SampleBatch& batch, double alpha) {
    const std::size_t k = tail_count(batch.pnl.size(), alpha);
    std::vector<double> v = batch.pnl;
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += v[i];
    return -sum / double(k);
}

TailEstimate tail_estimate(const SampleBatch& batch, double alpha, int resamples, std::uint64_t seed) {
    const std::size_t n = batch.pnl.size();
    const std::size_t k = tail_count(n, alpha);
    if (resamples < 2) throw DomainError("tail_estimate: need at least 2 bootstrap resamples");

    std::vector<double> sorted = batch.pnl;
    std::sort(sorted.begin(), sorted.end());

    TailEstimate est;
    est.var = -sorted[k - 1];
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
    est.es = -sum / double(k);

    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(double(n) * alpha * (1.0 - alpha))));
    const std::size_t lo = k - 1 >= m ? k - 1 - m : 0;
    const std::size_t hi = std::min(n - 1, k - 1 + m);
    est.var_se_order_statistic = 0.5 * (sorted[hi] - sorted[lo]);

    // Sequential binomials give an exact multinomial(N; 1/N, ..., 1/N)
    // resample; only the cells up to the k-th resampled draw are needed.
    std::vector<double> vars(resamples), ess(resamples);
    for (int r = 0; r < resamples; ++r) {
        Philox4x32 rng(seed ^ kBootstrapKey, static_cast<std::uint64_t>(r));
        std::uint64_t remaining = n;
        std::size_t taken = 0;
        double tail_sum = 0.0;
        double threshold = sorted[n - 1];
        for (std::size_t i = 0; i < n && taken < k; ++i) {
            std::uint64_t c = remaining;
            if (i + 1 < n) {
                std::binomial_distribution<std::uint64_t> bin(remaining, 1.0 / double(n - i));
                c = bin(rng);
            }
            remaining -= c;
            if (c == 0) continue;
            const std::size_t use = std::min<std::size_t>(c, k - taken);
            tail_sum += double(use) * sorted[i];
            taken += use;
            threshold = sorted[i];
        }
        vars[r] = -threshold;
        ess[r] = -tail_sum / double(k);
    }
    const auto stdev = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= double(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / double(v.size() - 1));
    };
    est.var_se_bootstrap = stdev(vars);
    est.es_se_bootstrap = stdev(ess);
    est.resamples = resamples;
    return est;
}

void write_batch(const std::filesystem::path& path, const SampleBatch& batch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("batch file: cannot open " + path.string() + " for writing");
    out.write(kMagic, 8);
    put_u64(out, batch.pnl.size());
    put_u64(out, batch.seed);
    put_u64(out, batch.chunks);
    for (double v : batch.pnl) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw ValidationError("batch file: write failed for " + path.string());
}

SampleBatch read_batch(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("batch file: cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw ValidationError("batch file: bad magic in " + path.string());
    SampleBatch batch;
    const std::uint64_t n = get_u64(in);
    batch.seed = get_u64(in);
    batch.chunks = get_u64(in);
    batch.pnl.resize(n);
    for (auto& v : batch.pnl) v = std::bit_cast<double>(get_u64(in));
    return batch;
}

}  // namespace mixrisk
