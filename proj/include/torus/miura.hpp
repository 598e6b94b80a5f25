#pragma once

#include <vector>

#include "torus/flows.hpp"
#include "torus/spectral.hpp"

namespace torus {

struct MiuraInverseFailure : std::runtime_error {
  MiuraInverseFailure(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
  double residual;
};

// B(q) = q' + q^2 - ||q||^2 for mean-zero q; n_out < 0 keeps all 2n modes
SpectralField miura_forward(const SpectralField& q, int n_out = -1);
// f -> f' + 2 q f - 2 <q, f>
SpectralField miura_jacobian_apply(const SpectralField& q, const SpectralField& f, int n_out = -1);

struct MiuraInverseOptions {
  double newton_tol = 1e-12;
  int max_iter = 30;
  int n_modes = -1;  // unknown's band limit, default w.n_modes()
};

struct MiuraInverseResult {
  SpectralField q;
  double residual = 0.0;
  int iterations = 0;
  bool continued = false;
};

// Newton on pi_n B(q) = pi_n w, with amplitude continuation when the cold start fails
MiuraInverseResult miura_inverse(const SpectralField& w, const MiuraInverseOptions& opt = {});

// q - alpha
SpectralField tau_shift(const SpectralField& w, double alpha);

struct ConjugatedTrajectory {
  Trajectory w;                   // snapshots of B(q(t))
  std::vector<double> to_direct;  // L2 distance to the direct KdV integrator per snapshot
};

// B o Phi_mKdV(t) o B^{-1} on mean-zero data, compared against the direct KdV solver
ConjugatedTrajectory kdv_conjugated(const SpectralField& w0, const FlowSpec& spec,
                                    const MiuraInverseOptions& opt = {});
// tau_{-alpha} o Phi_0 o tau_alpha with the Galilean drift, alpha = mean(w0)
ConjugatedTrajectory kdv_alpha(const SpectralField& w0, const FlowSpec& spec, const MiuraInverseOptions& opt = {});

}  // namespace torus
