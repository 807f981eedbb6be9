#include "seiprd/mcmc.hpp"

#include "seiprd/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace seiprd {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double transform_init(const InitInterval& interval, double x)
{
  switch (interval.kind) {
    case InitKind::positive: return std::log(x);
    case InitKind::unit_interval: return std::log(x) - std::log1p(-x);
    case InitKind::unconstrained: break;
  }
  return x;
}

// Window boundaries at which the proposal metric is re-estimated, as iteration
// counts since the start of warmup. Mirrors the usual fast/slow/fast layout.
std::vector<std::size_t> metric_update_points(std::size_t n_warmup)
{
  std::vector<std::size_t> points;
  if (n_warmup < 20) {
    return points;
  }
  const std::size_t init_buffer = std::max<std::size_t>(n_warmup * 15 / 100, 5);
  const std::size_t term_buffer = std::max<std::size_t>(n_warmup / 10, 5);
  const std::size_t slow_end = n_warmup - term_buffer;
  std::size_t window = 25;
  std::size_t start = init_buffer;
  while (start < slow_end) {
    std::size_t end = start + window;
    // fold a short remainder into the last slow window
    if (end + 2 * window > slow_end) {
      end = slow_end;
    }
    points.push_back(end);
    start = end;
    window *= 2;
  }
  return points;
}

struct ChainResult {
  std::vector<double> draws;
  std::vector<double> log_density;
  ChainStats stats;
};

class Proposal {
 public:
  Proposal(std::size_t dim, ProposalMetric metric)
      : metric_{metric}, factor_{Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                            static_cast<Eigen::Index>(dim))}
  {
  }

  void update(const std::vector<Eigen::VectorXd>& window)
  {
    const auto d = factor_.rows();
    const double n = static_cast<double>(window.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : window) {
      mean += x;
    }
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : window) {
      const Eigen::VectorXd c = x - mean;
      cov.noalias() += c * c.transpose();
    }
    cov /= (n - 1.0);
    // shrink toward a small multiple of the identity
    cov = (n / (n + 5.0)) * cov;
    cov.diagonal().array() += 1e-3 * 5.0 / (n + 5.0);

    if (metric_ == ProposalMetric::diagonal) {
      factor_.setZero();
      factor_.diagonal() = cov.diagonal().cwiseSqrt();
      return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
    } else {
      factor_.setZero();
      factor_.diagonal() = cov.diagonal().cwiseSqrt();
    }
  }

  Eigen::VectorXd step(const Eigen::VectorXd& z) const
  {
    if (metric_ == ProposalMetric::diagonal) {
      return factor_.diagonal().cwiseProduct(z);
    }
    return factor_.triangularView<Eigen::Lower>() * z;
  }

  std::vector<double> marginal_sd() const
  {
    Eigen::VectorXd sd = factor_.rowwise().norm();
    return {sd.data(), sd.data() + sd.size()};
  }

 private:
  ProposalMetric metric_;
  Eigen::MatrixXd factor_;
};

ChainResult run_one_chain(const LogDensity& log_density, std::size_t dim, const ChainConfig& cfg,
                          std::size_t chain)
{
  Rng rng = chain_rng(cfg.seed, chain);
  ChainResult result;
  auto& stats = result.stats;

  std::vector<double> current;
  double current_lp = -std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 0; attempt < cfg.init_retries; ++attempt) {
    current = init_point(cfg, dim, rng);
    current_lp = log_density(current);
    if (std::isfinite(current_lp)) {
      break;
    }
  }
  if (!std::isfinite(current_lp)) {
    throw InitialisationError("chain " + std::to_string(chain) +
                              ": no finite starting point after " +
                              std::to_string(cfg.init_retries) + " attempts");
  }
  stats.initial_point = current;

  const auto d = static_cast<Eigen::Index>(dim);
  const double base_log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
  double log_scale = base_log_scale;
  Proposal proposal(dim, cfg.metric);
  const auto update_points = metric_update_points(cfg.n_warmup);
  std::size_t next_update = 0;
  std::size_t window_start = 0;
  std::size_t window_accepts = 0;
  std::size_t rm_step = 0;
  std::vector<Eigen::VectorXd> window;

  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::size_t warmup_accepts = 0;
  std::size_t sample_accepts = 0;

  result.draws.reserve(cfg.n_retained() * dim);
  result.log_density.reserve(cfg.n_retained());
  stats.adaptation_trace.reserve(cfg.n_warmup);

  Eigen::VectorXd z(d);
  std::vector<double> candidate(dim);

  for (std::size_t it = 0; it < cfg.n_samples; ++it) {
    for (Eigen::Index i = 0; i < d; ++i) {
      z[i] = normal(rng);
    }
    const Eigen::VectorXd delta = std::exp(log_scale) * proposal.step(z);
    for (std::size_t i = 0; i < dim; ++i) {
      candidate[i] = current[i] + delta[static_cast<Eigen::Index>(i)];
    }
    const double candidate_lp = log_density(candidate);
    double accept_prob = 0.0;
    if (std::isfinite(candidate_lp)) {
      accept_prob = std::min(1.0, std::exp(candidate_lp - current_lp));
    }
    const bool accepted = uniform(rng) < accept_prob;
    if (accepted) {
      current.swap(candidate);
      current_lp = candidate_lp;
    }

    if (it < cfg.n_warmup) {
      warmup_accepts += accepted ? 1 : 0;
      window_accepts += accepted ? 1 : 0;
      ++rm_step;
      log_scale += std::pow(static_cast<double>(rm_step), -0.6) *
                   (accept_prob - cfg.target_acceptance);
      log_scale = std::clamp(log_scale, -30.0, 5.0);
      stats.adaptation_trace.push_back({it, log_scale, false});
      window.emplace_back(Eigen::Map<const Eigen::VectorXd>(current.data(), d));

      const std::size_t done = it + 1;
      const bool window_end =
          (next_update < update_points.size() && done == update_points[next_update]) ||
          done == cfg.n_warmup;
      if (window_end) {
        if (window_accepts == 0) {
          stats.warnings.push_back("chain " + std::to_string(chain) +
                                   ": every proposal rejected during warmup iterations " +
                                   std::to_string(window_start) + "-" + std::to_string(it));
        }
        if (next_update < update_points.size() && done == update_points[next_update]) {
          proposal.update(window);
          log_scale = base_log_scale;
          rm_step = 0;
          stats.adaptation_trace.push_back({it, log_scale, true});
          ++next_update;
        }
        window.clear();
        window_start = done;
        window_accepts = 0;
      }
      // samples before the first slow window only tune the scale
      if (done == std::max<std::size_t>(cfg.n_warmup * 15 / 100, 5) && !update_points.empty()) {
        window.clear();
      }
    } else {
      sample_accepts += accepted ? 1 : 0;
      if ((it + 1 - cfg.n_warmup) % cfg.thin != 0) {
        continue;
      }
      result.draws.insert(result.draws.end(), current.begin(), current.end());
      result.log_density.push_back(current_lp);
    }
  }

  stats.warmup_acceptance =
      cfg.n_warmup > 0 ? static_cast<double>(warmup_accepts) / static_cast<double>(cfg.n_warmup)
                       : 0.0;
  stats.acceptance =
      static_cast<double>(sample_accepts) / static_cast<double>(cfg.n_samples - cfg.n_warmup);
  stats.log_scale = log_scale;
  stats.proposal_sd = proposal.marginal_sd();
  for (auto& sd : stats.proposal_sd) {
    sd *= std::exp(log_scale);
  }
  return result;
}

// Biased autocovariance of one series at every lag, via zero-padded FFT.
std::vector<double> autocovariance(std::span<const double> x)
{
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::size_t padded = 1;
  while (padded < 2 * n) {
    padded <<= 1;
  }
  std::vector<double> centered(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = x[i] - mean;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, centered);
  for (auto& c : spectrum) {
    c = std::complex<double>(std::norm(c), 0.0);
  }
  std::vector<double> acov;
  fft.inv(acov, spectrum);
  acov.resize(n);
  for (auto& a : acov) {
    a /= static_cast<double>(n);
  }
  return acov;
}

// Split every chain into two halves, dropping the middle draw when odd.
std::vector<std::span<const double>> split_halves(std::span<const double> chain_major,
                                                  std::size_t n_chains)
{
  if (n_chains < 1 || chain_major.size() % n_chains != 0) {
    throw DomainError("draws do not divide evenly into chains");
  }
  const std::size_t n = chain_major.size() / n_chains;
  if (n < 4) {
    throw DomainError("convergence diagnostics need at least 4 draws per chain");
  }
  const std::size_t half = n / 2;
  std::vector<std::span<const double>> halves;
  for (std::size_t c = 0; c < n_chains; ++c) {
    auto chain = chain_major.subspan(c * n, n);
    halves.push_back(chain.subspan(0, half));
    halves.push_back(chain.subspan(n - half, half));
  }
  return halves;
}

double sample_mean(std::span<const double> x)
{
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x)
{
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) {
    s += (v - m) * (v - m);
  }
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

Rng chain_rng(std::uint64_t seed, std::size_t chain)
{
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (static_cast<std::uint64_t>(chain) + 1));
  std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state), splitmix64(state)};
  return Rng(seq);
}

void ChainConfig::validate() const
{
  if (n_chains < 1) {
    throw DomainError("need at least one chain");
  }
  if (!(n_warmup < n_samples)) {
    throw DomainError("n_warmup must be smaller than n_samples");
  }
  if (thin < 1 || thin > n_samples - n_warmup) {
    throw DomainError("thin must lie in [1, n_samples - n_warmup]");
  }
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw DomainError("target acceptance must lie in (0, 1)");
  }
  for (const auto& interval : init_intervals) {
    if (!(interval.lower < interval.upper)) {
      throw DomainError("init interval needs lower < upper");
    }
    if (interval.kind == InitKind::positive && !(interval.lower >= 0.0)) {
      throw DomainError("positive init interval must lie in [0, inf)");
    }
    if (interval.kind == InitKind::unit_interval &&
        !(interval.lower >= 0.0 && interval.upper <= 1.0)) {
      throw DomainError("unit-interval init interval must lie in [0, 1]");
    }
  }
}

std::vector<double> init_point(const ChainConfig& cfg, std::size_t dim, Rng& rng)
{
  if (!cfg.init_intervals.empty() && cfg.init_intervals.size() != dim) {
    throw DomainError("init interval table has " + std::to_string(cfg.init_intervals.size()) +
                      " entries for a " + std::to_string(dim) + "-dimensional target");
  }
  const InitInterval fallback{};
  std::vector<double> u(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto& interval = cfg.init_intervals.empty() ? fallback : cfg.init_intervals[i];
    std::uniform_real_distribution<double> draw(interval.lower, interval.upper);
    double x = draw(rng);
    // keep the constrained draw strictly inside the open support
    if (interval.kind != InitKind::unconstrained && x <= 0.0) {
      x = interval.upper * 1e-12;
    }
    if (interval.kind == InitKind::unit_interval && x >= 1.0) {
      x = 1.0 - 1e-12;
    }
    u[i] = transform_init(interval, x);
  }
  return u;
}

std::vector<double> PosteriorDraws::parameter(std::size_t k) const
{
  std::vector<double> out;
  out.reserve(total());
  for (std::size_t c = 0; c < n_chains; ++c) {
    for (std::size_t i = 0; i < n_draws; ++i) {
      out.push_back(at(c, i, k));
    }
  }
  return out;
}

std::vector<std::string> PosteriorDraws::warnings() const
{
  std::vector<std::string> out;
  for (const auto& c : chains) {
    out.insert(out.end(), c.warnings.begin(), c.warnings.end());
  }
  return out;
}

PosteriorDraws run_chains(const LogDensity& log_density, std::size_t dim, const ChainConfig& cfg)
{
  cfg.validate();
  if (dim == 0) {
    throw DomainError("target dimension must be positive");
  }
  std::vector<ChainResult> results(cfg.n_chains);
  std::vector<std::exception_ptr> errors(cfg.n_chains);

  std::size_t threads = cfg.max_threads == 0 ? std::thread::hardware_concurrency() : cfg.max_threads;
  threads = std::clamp<std::size_t>(threads, 1, cfg.n_chains);

  std::atomic<std::size_t> next_chain{0};
  auto worker = [&] {
    for (std::size_t c = next_chain++; c < cfg.n_chains; c = next_chain++) {
      try {
        results[c] = run_one_chain(log_density, dim, cfg, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  PosteriorDraws out;
  out.n_chains = cfg.n_chains;
  out.n_draws = cfg.n_retained();
  out.dim = dim;
  out.values.reserve(out.total() * dim);
  out.log_density.reserve(out.total());
  for (auto& r : results) {
    out.values.insert(out.values.end(), r.draws.begin(), r.draws.end());
    out.log_density.insert(out.log_density.end(), r.log_density.begin(), r.log_density.end());
    out.chains.push_back(std::move(r.stats));
  }
  if (out.n_chains >= 2 && out.n_draws >= 4) {
    const auto rhat = split_rhat(out);
    const auto n_eff = ess(out);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto r = split_rhat(out.parameter(k), out.n_chains);
      out.diagnostics.push_back({rhat[k], n_eff[k], r.degenerate});
    }
  }
  return out;
}

RhatResult split_rhat(std::span<const double> chain_major, std::size_t n_chains)
{
  const auto halves = split_halves(chain_major, n_chains);
  const double n = static_cast<double>(halves.front().size());
  const std::size_t m = halves.size();

  std::vector<double> means(m);
  double within = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = sample_mean(halves[j]);
    within += sample_variance(halves[j]);
  }
  within /= static_cast<double>(m);
  const double between = n * sample_variance(means);

  if (within <= 0.0) {
    if (between <= 0.0) {
      return {1.0, true};
    }
    return {std::numeric_limits<double>::infinity(), true};
  }
  const double var_plus = (n - 1.0) / n * within + between / n;
  return {std::sqrt(var_plus / within), false};
}

double ess(std::span<const double> chain_major, std::size_t n_chains)
{
  const auto halves = split_halves(chain_major, n_chains);
  const std::size_t n = halves.front().size();
  const std::size_t m = halves.size();
  const double nd = static_cast<double>(n);

  std::vector<std::vector<double>> acov;
  std::vector<double> means;
  for (const auto& h : halves) {
    acov.push_back(autocovariance(h));
    means.push_back(sample_mean(h));
  }
  double mean_var = 0.0;
  for (const auto& a : acov) {
    mean_var += a[0];
  }
  mean_var = mean_var / static_cast<double>(m) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) {
    var_plus += sample_variance(means);
  }
  const double total_draws = static_cast<double>(n * m);
  if (!(var_plus > 0.0)) {
    return total_draws;
  }

  auto rho = [&](std::size_t t) {
    double a = 0.0;
    for (const auto& series : acov) {
      a += series[t];
    }
    a /= static_cast<double>(m);
    return 1.0 - (mean_var - a) / var_plus;
  };

  // Geyer's initial positive sequence, stopping at the first negative pair.
  std::vector<double> rho_hat(n, 0.0);
  rho_hat[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = n > 1 ? rho(1) : 0.0;
  if (n > 1) {
    rho_hat[1] = rho_odd;
  }
  std::size_t t = 1;
  while (t + 2 < n && rho_even + rho_odd > 0.0) {
    rho_even = rho(t + 1);
    rho_odd = rho(t + 2);
    if (rho_even + rho_odd >= 0.0) {
      rho_hat[t + 1] = rho_even;
      rho_hat[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = std::min(t, n - 1);
  if (rho_even > 0.0 && max_t + 1 < n) {
    rho_hat[max_t + 1] = rho_even;
  }
  // initial monotone sequence
  for (std::size_t s = 1; s + 3 <= max_t; s += 2) {
    const double prev = rho_hat[s - 1] + rho_hat[s];
    if (rho_hat[s + 1] + rho_hat[s + 2] > prev) {
      rho_hat[s + 1] = prev / 2.0;
      rho_hat[s + 2] = rho_hat[s + 1];
    }
  }
  double sum = 0.0;
  for (std::size_t s = 0; s <= max_t; ++s) {
    sum += rho_hat[s];
  }
  const double tail = max_t + 1 < n ? rho_hat[max_t + 1] : 0.0;
  const double tau = std::max(-1.0 + 2.0 * sum + tail, 1.0 / std::log10(total_draws));
  return total_draws / tau;
}

std::vector<double> split_rhat(const PosteriorDraws& draws)
{
  std::vector<double> out;
  for (std::size_t k = 0; k < draws.dim; ++k) {
    out.push_back(split_rhat(draws.parameter(k), draws.n_chains).value);
  }
  return out;
}

std::vector<double> ess(const PosteriorDraws& draws)
{
  std::vector<double> out;
  for (std::size_t k = 0; k < draws.dim; ++k) {
    out.push_back(ess(draws.parameter(k), draws.n_chains));
  }
  return out;
}

}  // namespace seiprd
