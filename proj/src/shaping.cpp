#include "arcvc/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "arcvc/errors.hpp"
#include "arcvc/nn.hpp"
#include "arcvc/trajectory.hpp"

namespace arcvc {

void validate(const ShapingConfig& cfg) {
  validate(cfg.ruin);
  if (cfg.fortune_lo < 1) throw ConfigError("shaping: fortunes start at 1 (0 is terminal)");
  if (cfg.fortune_hi < cfg.fortune_lo) throw ConfigError("shaping: empty fortune range");
  if (cfg.n_per_state < 1) throw ConfigError("shaping: n_per_state must be >= 1");
  if (cfg.j_episodes < 1) throw ConfigError("shaping: j_episodes must be >= 1");
}

std::vector<ShapingSample> collect_shaping_samples(const ShapingConfig& cfg,
                                                   std::mt19937_64& rng) {
  validate(cfg);
  GamblersRuin env(cfg.ruin);
  // The ruin process has a single dummy action; a softmax over one output is
  // the identity policy.
  Mlp policy({env.feature_dim(), 1}, Head::softmax);

  std::vector<ShapingSample> out;
  out.reserve(static_cast<std::size_t>(cfg.fortune_hi - cfg.fortune_lo + 1) *
              cfg.n_per_state);
  for (int m = cfg.fortune_lo; m <= cfg.fortune_hi; ++m) {
    const auto j = monte_carlo_value(env, policy, {m, 0}, cfg.j_episodes,
                                     cfg.ruin.gamma, cfg.ruin.t_max, rng);
    double y;
    if (cfg.empirical_targets) {
      int ruined = 0;
      for (int i = 0; i < cfg.empirical_episodes; ++i) {
        int fortune = m;
        for (int s = 0; s < cfg.ruin.risk_lookahead && fortune > 0; ++s)
          fortune = ruin_step(fortune, rng).next_fortune;
        if (fortune == 0) ++ruined;
      }
      y = static_cast<double>(ruined) / cfg.empirical_episodes;
    } else {
      y = bankruptcy_probability(m, cfg.ruin.risk_lookahead);
    }
    for (int i = 0; i < cfg.n_per_state; ++i) {
      env.set_state({m, 0});
      const auto episode =
          rollout(env, policy, rng, cfg.ruin.t_max, cfg.ruin.gamma, cfg.ruin.t_max);
      out.push_back({episode.b0() - j.mean, y, m});
    }
  }
  return out;
}

double shaped_model(double b, double c, double z) {
  const double s = z - c;
  return 1.0 / (1.0 + b * s * s);
}

namespace {

double rss_at(const std::vector<ShapingSample>& samples, double b, double c) {
  double rss = 0.0;
  for (const auto& s : samples) {
    const double r = s.y - shaped_model(b, c, s.z);
    rss += r * r;
  }
  return rss;
}

}  // namespace

ShapedFit fit_shaped_model(const std::vector<ShapingSample>& samples) {
  if (samples.size() < 3) throw FitError("fit: need at least 3 samples");
  double z_lo = samples[0].z, z_hi = samples[0].z;
  for (const auto& s : samples) {
    z_lo = std::min(z_lo, s.z);
    z_hi = std::max(z_hi, s.z);
  }
  if (z_hi - z_lo <= 0.0) throw FitError("fit: all z values are identical");

  // Coarse grid: b log-spaced over [1e-3, 1e3], c over the sample range.
  double best_logb = 0.0, best_c = 0.0, best_rss = std::numeric_limits<double>::max();
  constexpr int kBGrid = 25, kCGrid = 41;
  for (int i = 0; i < kBGrid; ++i) {
    const double logb = -3.0 * std::log(10.0) +
                        i * (6.0 * std::log(10.0) / (kBGrid - 1));
    for (int j = 0; j < kCGrid; ++j) {
      const double c = z_lo + j * ((z_hi - z_lo) / (kCGrid - 1));
      const double rss = rss_at(samples, std::exp(logb), c);
      if (rss < best_rss) {
        best_rss = rss;
        best_logb = logb;
        best_c = c;
      }
    }
  }

  // Levenberg-damped Gauss-Newton on (log b, c); b > 0 by construction.
  double logb = best_logb, c = best_c;
  double rss = best_rss;
  double mu = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    const double b = std::exp(logb);
    // Normal equations for the 2-parameter Jacobian.
    double h11 = 0, h12 = 0, h22 = 0, g1 = 0, g2 = 0;
    for (const auto& smp : samples) {
      const double s = smp.z - c;
      const double denom = 1.0 + b * s * s;
      const double model = 1.0 / denom;
      const double r = smp.y - model;
      const double d_logb = -b * s * s / (denom * denom);  // dmodel/dlogb
      const double d_c = 2.0 * b * s / (denom * denom);    // dmodel/dc
      h11 += d_logb * d_logb;
      h12 += d_logb * d_c;
      h22 += d_c * d_c;
      g1 += d_logb * r;
      g2 += d_c * r;
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      const double a11 = h11 + mu, a22 = h22 + mu;
      const double det = a11 * a22 - h12 * h12;
      if (det <= 0.0 || !std::isfinite(det)) {
        mu *= 10.0;
        continue;
      }
      const double step_logb = (a22 * g1 - h12 * g2) / det;
      const double step_c = (a11 * g2 - h12 * g1) / det;
      const double cand_logb = logb + step_logb;
      const double cand_c = c + step_c;
      const double cand_rss = rss_at(samples, std::exp(cand_logb), cand_c);
      if (std::isfinite(cand_rss) && cand_rss <= rss) {
        const double improvement = rss - cand_rss;
        logb = cand_logb;
        c = cand_c;
        rss = cand_rss;
        mu = std::max(mu * 0.3, 1e-12);
        stepped = true;
        if (improvement < 1e-15 * (1.0 + rss)) iter = 200;  // converged
        break;
      }
      mu *= 10.0;
    }
    if (!stepped) break;
  }

  ShapedFit fit;
  fit.b = std::exp(logb);
  fit.c = c;
  fit.rss = rss;
  fit.samples = static_cast<int>(samples.size());
  return fit;
}

RiskFunction shaped_risk_from_fit(const ShapedFit& fit) {
  return RiskFunction::shaped(fit.b, fit.c);
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_samples_csv(const std::vector<ShapingSample>& samples, std::ostream& out) {
  out << "# schema=arcvc-shaping-samples-v1\n";
  out << "z,y,m\n";
  for (const auto& s : samples)
    out << fmt(s.z) << ',' << fmt(s.y) << ',' << s.m << '\n';
}

void write_fit_csv(const ShapedFit& fit, std::ostream& out) {
  out << "# schema=arcvc-shaping-fit-v1\n";
  out << "b,c,rss,n\n";
  out << fmt(fit.b) << ',' << fmt(fit.c) << ',' << fmt(fit.rss) << ','
      << fit.samples << '\n';
}

}  // namespace arcvc
