#pragma once

#include "platelab/elastic.hpp"

namespace platelab {

// Quadratic certificate for the affine family at an optimal frame: with
// M = [[a,c],[c,b]], B = (a w13 + c w23, c w13 + b w23) and K = F(R W^2),
// the restriction of the total energy to affine profiles is
// J(L) = 1/2 L^T M L - B.L - K, minimized in the least-squares sense.
struct AffineCertificate {
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    Eigen::Vector2d B = Eigen::Vector2d::Zero();
    double K = 0;
    Eigen::Vector2d lambda_star = Eigen::Vector2d::Zero();
    double J_min = 0;
    double closed_form_value = 0;  // rank-one branch formula where available
    bool psd = false;
    bool degenerate = false;  // a + b at the noise floor
};

AffineCertificate affine_certificate(const Coefficients& co, const SkewMatrix& W,
                                     const OptimalRotationSet& set);

struct S2AffineResult {
    bool holds = false;
    bool degenerate = false;
    double min_value = 0;  // over the coordinate-unit sphere of normal directions
    SkewMatrix witness;
};

// Minimizes the affine certificate over the unit sphere of the normal space
// at the representative frame; positivity away from W = 0 is the affine
// stability statement.
S2AffineResult s2_affine_test(const Load& load, const OptimalRotationSet& set,
                              const ElasticModel& model);

struct CompensatedShift {
    ScalarField2D v;    // affine member, slope parametrized by lambda
    VectorField2D u;    // matched in-plane field, quadratic in lambda
    VectorField2D xi;   // cancels the cross term against the profile vbar
};

// v(x') = -lambda (c/a) x1 + lambda x2 (or the b-branch mirror),
// u = -1/2 (grad v (x) grad v) x', xi = -lambda vbar (-c/a, 1).
CompensatedShift build_vr_ur_xi(const Coefficients& co, double lambda,
                                const ScalarField2D& vbar);

// |J(u + ushift + xi, v + vshift, R, W) - J(u, v, R, W)| for the shift built
// from lambda; exact invariance holds when vbar is the quadruplet's own v.
double invariance_check(const AdmissibleQuadruplet& quad, double lambda,
                        const ScalarField2D& vbar, const Load& load,
                        const ElasticModel& model);

struct MinimizeOptions {
    int starts = 8;
    int max_iter = 500;
    double tau_grad = 1e-8;  // relative to the problem scale
    std::uint64_t seed = 0;
    double amplitude = 0.1;  // size of the random initial profiles
};

struct MinimizeResult {
    AdmissibleQuadruplet quad;
    double value = 0;
    bool converged = false;
    bool unbounded = false;
    std::vector<double> start_values;  // best value reached by each start
    std::vector<double> trace;         // accepted energies of the winning start
    int iterations = 0;                // of the winning start
    double grad_norm = 0;
};

// Joint quasi-Newton descent over (u, v, geodesic parameter, normal
// coordinates of W) with per-iteration gauge fixing of the invariant
// directions; multistart with deterministic seeds.
MinimizeResult minimize_total_vk(const Load& load, const OptimalRotationSet& set,
                                 const ElasticModel& model,
                                 const MinimizeOptions& options = {});

// J_eps(g^2 u, g v, R, g W)/g^2 for each g, where J_eps weights the load
// couplings by (1+eps).  Every term scales as g^2 on the linearized
// isometry set, so the sequence is constant there; a negative constant
// certifies divergence along the ray.
std::vector<double> divergence_probe(const AdmissibleQuadruplet& quad,
                                     const Load& load, const ElasticModel& model,
                                     double eps, const std::vector<double>& gammas);

struct S1ProbeResult {
    double min_value = 0;      // min of the surface total energy over the family
    double flat_floor = 0;     // -max F, the value of flat members at optimal frames
    int witness = -1;          // index attaining the minimum
    bool failure = false;      // below the floor, or on the floor while bent
};

// One-sided probe of surface stability over a sampled family of (approximate)
// isometric surfaces; positivity on the family proves nothing.
S1ProbeResult s1_probe(const Load& load, const ElasticModel& model,
                       const std::vector<VectorField2D>& family,
                       double tau_iso = 1e-4);

// Default probe family: flat frames on the optimal set plus bent embeddings
// of sinusoid and ridge profiles, composed with optimal-set rotations.
std::vector<VectorField2D> default_s1_family(const Load& load,
                                             const OptimalRotationSet& set,
                                             const Grid2D& grid);

struct StabilityReport {
    bool compatibility_ok = false;
    double compatibility_residual_max = 0;
    int dim = 0;
    bool special_regime = false;  // zero moment matrix: load functional vanishes
    S2AffineResult s2_affine;
    double s2_probe_min = 0;  // over sampled linearized-isometry quadruplets
    SkewMatrix s2_probe_witness;
    S1ProbeResult s1;
    std::vector<double> divergence_slopes;
};

StabilityReport stability_report(const Load& load, const ElasticModel& model,
                                 std::uint64_t seed = 0);

}  // namespace platelab
