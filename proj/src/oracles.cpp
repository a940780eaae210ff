#include "tunefree/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace tunefree {

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian_spherical: return "gaussian_spherical";
    case NoiseKind::bernoulli_sign: return "bernoulli_sign";
    case NoiseKind::lb_mixture: return "lb_mixture";
  }
  return "?";
}

NoiseModel NoiseModel::None() { return NoiseModel{}; }

NoiseModel NoiseModel::GaussianSpherical(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
  NoiseModel n;
  n.kind = NoiseKind::gaussian_spherical;
  n.sigma = sigma;
  n.r_modulus = sigma;  // ||n|| is sub-gaussian at scale sigma
  return n;
}

NoiseModel NoiseModel::BernoulliSign(double sigma,
                                     std::function<Vec(const Vec&)> direction) {
  if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
  NoiseModel n;
  n.kind = NoiseKind::bernoulli_sign;
  n.sigma = sigma;
  n.r_modulus = sigma;  // ||n|| = sigma almost surely
  n.direction = std::move(direction);
  return n;
}

NoiseModel NoiseModel::LbMixture(double branch_prob) {
  if (!(branch_prob > 0.0 && branch_prob < 1.0))
    throw std::invalid_argument("noise: branch_prob must be in (0,1)");
  NoiseModel n;
  n.kind = NoiseKind::lb_mixture;
  n.branch_prob = branch_prob;
  return n;
}

BranchSequence make_coupled_branch_stream(RngStream& rng, int T,
                                          double branch_prob) {
  if (!(branch_prob > 0.0 && branch_prob < 1.0))
    throw std::invalid_argument("branch stream: branch_prob must be in (0,1)");
  auto seq = std::make_shared<std::vector<int>>();
  seq->reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t)
    seq->push_back(rng.uniform() < branch_prob ? 1 : 2);
  return seq;
}

Oracle::Oracle(Problem problem, NoiseModel noise)
    : problem_(std::move(problem)), noise_(noise) {
  if (noise_.kind == NoiseKind::lb_mixture)
    throw std::invalid_argument("oracle: lb_mixture needs branch problems");
}

Oracle::Oracle(Problem mean, Problem branch1, Problem branch2,
               double branch_prob)
    : problem_(std::move(mean)),
      noise_(NoiseModel::LbMixture(branch_prob)),
      branches_(std::make_pair(std::move(branch1), std::move(branch2))) {}

void Oracle::set_branch_sequence(BranchSequence seq) {
  branch_seq_ = std::move(seq);
  branch_cursor_ = 0;
}

OracleSample Oracle::sample(const Vec& x, RngStream& rng) {
  if (static_cast<int>(x.size()) != problem_.dim)
    throw std::invalid_argument("oracle: dimension mismatch");
  ++calls_;

  OracleSample s;
  switch (noise_.kind) {
    case NoiseKind::none: {
      s.value_est = problem_.value(x);
      s.grad_est = problem_.grad(x);
      break;
    }
    case NoiseKind::gaussian_spherical: {
      const double coord_sd = noise_.sigma / std::sqrt(problem_.dim);
      Vec n(problem_.dim);
      for (double& c : n) c = coord_sd * rng.normal();
      s.grad_est = problem_.grad(x);
      axpy(1.0, n, s.grad_est);
      s.value_est = problem_.value(x);
      if (noise_.value_noise == ValueNoise::matched)
        s.value_est += noise_.sigma * rng.normal();
      break;
    }
    case NoiseKind::bernoulli_sign: {
      Vec dir;
      if (noise_.direction) {
        dir = noise_.direction(x);
      } else {
        dir = zeros(problem_.dim);
        dir[0] = 1.0;
      }
      const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
      s.grad_est = problem_.grad(x);
      axpy(sign * noise_.sigma, dir, s.grad_est);
      s.value_est = problem_.value(x);
      if (noise_.value_noise == ValueNoise::matched)
        s.value_est += sign * noise_.sigma;
      break;
    }
    case NoiseKind::lb_mixture: {
      // One RNG draw per call even when a coupled stream overrides it, so
      // stream positions match between coupled and uncoupled runs.
      const double roll = rng.uniform();
      int branch;
      if (branch_seq_) {
        if (branch_cursor_ >= branch_seq_->size())
          throw std::runtime_error("oracle: coupled branch stream exhausted");
        branch = (*branch_seq_)[branch_cursor_++];
      } else {
        branch = roll < noise_.branch_prob ? 1 : 2;
      }
      const Problem& p = branch == 1 ? branches_->first : branches_->second;
      s.value_est = p.value(x);
      s.grad_est = p.grad(x);
      s.branch = branch;
      break;
    }
  }
  return s;
}

Oracle make_family_f_oracle(const LowerBoundFamily& fam) {
  return Oracle(fam.f, fam.f1, fam.f2, 1.0 / fam.T);
}

Oracle make_family_h_oracle(const LowerBoundFamily& fam) {
  return Oracle(fam.h, fam.h1, fam.h2, 1.0 / fam.T);
}

NoiseStats estimate_noise_stats(Oracle& oracle, const Vec& x, int m,
                                RngStream& rng) {
  if (m < 2) throw std::invalid_argument("estimate_noise_stats: m must be >= 2");
  const Vec g_true = oracle.problem().grad(x);
  double sum_sq = 0.0;
  double max_norm = 0.0;
  for (int i = 0; i < m; ++i) {
    OracleSample s = oracle.sample(x, rng);
    const double nn = norm(sub(s.grad_est, g_true));
    sum_sq += nn * nn;
    max_norm = std::max(max_norm, nn);
  }
  NoiseStats st;
  st.mean_norm_sq = sum_sq / m;
  st.max_norm = max_norm;
  st.ksnr_hat = max_norm > 0.0 ? std::sqrt(st.mean_norm_sq) / max_norm : 1.0;
  return st;
}

}  // namespace tunefree
