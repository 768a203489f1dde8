//! Potential-well machinery on the discrete grid: the weighted energy
//! norm, variable-exponent modulars and the Luxemburg norm, the energy
//! and Nehari functionals, the Nehari projection scale, well-depth
//! estimates, and the closed-form constants of the blow-up, lifespan
//! and decay theorems.

use crate::error::{ModelError, Result};
use crate::grid::{gradient_magnitude_sq, ExponentField, Field, Grid2D};
use crate::schedule::CoefficientSchedule;
use crate::spectral::{dst_forward, mode_lambda, parseval_weight, SpectralField};
use crate::util::SplitMix64;

/// Snapshot of every scalar diagnostic tracked along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalReport {
    pub t: f64,
    /// Energy J = half the squared energy norm minus k(t) times the
    /// weighted modular.
    pub energy_j: f64,
    /// Nehari functional I = squared energy norm minus k(t) times the
    /// plain modular.
    pub nehari_i: f64,
    pub norm_alpha_sq: f64,
    /// Half the squared L2 norm.
    pub f1: f64,
    /// Integral of |grad u|^{p(x)}.
    pub modular: f64,
    /// Integral of (1/p(x)) |grad u|^{p(x)}.
    pub weighted_modular: f64,
    pub u_max: f64,
}

impl FunctionalReport {
    pub const CSV_HEADER: &'static str = "t,J,I,norm_alpha_sq,F1,modular,weighted_modular,umax";

    /// Assembles a report from raw ingredients; J and I are derived here
    /// so the two defining identities hold exactly by construction.
    pub fn from_parts(
        t: f64,
        norm_alpha_sq: f64,
        k_t: f64,
        modular: f64,
        weighted_modular: f64,
        f1: f64,
        u_max: f64,
    ) -> Self {
        Self {
            t,
            energy_j: 0.5 * norm_alpha_sq - k_t * weighted_modular,
            nehari_i: norm_alpha_sq - k_t * modular,
            norm_alpha_sq,
            f1,
            modular,
            weighted_modular,
            u_max,
        }
    }

    /// Computes the full report for a field at time t.
    pub fn compute(
        u: &Field,
        t: f64,
        p: &ExponentField,
        k: &CoefficientSchedule,
        alpha: f64,
        s: f64,
    ) -> Result<Self> {
        let f1 = 0.5 * quadrature_of_square(u)?;
        let (modular, weighted_modular) = modular_parts(u, p)?;
        let norm = norm_alpha_sq(u, alpha, s);
        if !norm.is_finite() {
            return Err(ModelError::NonFiniteIntegrand);
        }
        Ok(Self::from_parts(
            t,
            norm,
            k.k(t),
            modular,
            weighted_modular,
            f1,
            u.max_abs(),
        ))
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.energy_j,
            self.nehari_i,
            self.norm_alpha_sq,
            self.f1,
            self.modular,
            self.weighted_modular,
            self.u_max
        )
    }
}

/// Squared energy norm: sum over modes of (lambda + lambda^2 +
/// alpha lambda^{2s}) times the squared coefficient, Parseval-weighted.
pub fn norm_alpha_sq(u: &Field, alpha: f64, s: f64) -> f64 {
    norm_alpha_sq_spectral(&dst_forward(u), alpha, s)
}

/// As [`norm_alpha_sq`] from precomputed sine coefficients (the stepping
/// loop reuses the coefficients of the implicit solve).
pub fn norm_alpha_sq_spectral(v: &SpectralField, alpha: f64, s: f64) -> f64 {
    let grid = v.grid();
    let w = parseval_weight(grid);
    let mut acc = 0.0;
    for l in 1..=grid.ny() {
        for m in 1..=grid.nx() {
            let lam = mode_lambda(grid, m, l);
            let c = v.values()[(l - 1) * grid.nx() + (m - 1)];
            acc += (lam + lam * lam + alpha * lam.powf(2.0 * s)) * c * c;
        }
    }
    acc * w
}

/// Quadrature of u squared without materializing the squared field.
pub fn quadrature_of_square(u: &Field) -> Result<f64> {
    let mut acc = 0.0;
    for v in u.values() {
        acc += v * v;
    }
    if !acc.is_finite() {
        return Err(ModelError::NonFiniteIntegrand);
    }
    Ok(acc * u.grid().cell_area())
}

/// Plain and (1/p)-weighted modulars of the gradient:
/// (sum over interior nodes of |grad u|^{p}, sum of (1/p)|grad u|^{p}),
/// both times the cell area.
pub fn modular_parts(u: &Field, p: &ExponentField) -> Result<(f64, f64)> {
    let g = gradient_magnitude_sq(u);
    let grid = u.grid();
    let (mut plain, mut weighted) = (0.0, 0.0);
    for j in 1..=grid.ny() {
        for i in 1..=grid.nx() {
            let q = p.at(i, j);
            let v = g.at(i, j).powf(0.5 * q);
            plain += v;
            weighted += v / q;
        }
    }
    if !(plain.is_finite() && weighted.is_finite()) {
        return Err(ModelError::NonFiniteIntegrand);
    }
    let a = grid.cell_area();
    Ok((a * plain, a * weighted))
}

/// Energy functional J(u;t).
pub fn energy_j(
    u: &Field,
    t: f64,
    p: &ExponentField,
    k: &CoefficientSchedule,
    alpha: f64,
    s: f64,
) -> Result<f64> {
    Ok(FunctionalReport::compute(u, t, p, k, alpha, s)?.energy_j)
}

/// Nehari functional I(u;t).
pub fn nehari_i(
    u: &Field,
    t: f64,
    p: &ExponentField,
    k: &CoefficientSchedule,
    alpha: f64,
    s: f64,
) -> Result<f64> {
    Ok(FunctionalReport::compute(u, t, p, k, alpha, s)?.nehari_i)
}

/// Luxemburg norm of a nonnegative node sample g: the unique scale
/// lam with modular(g/lam) = 1, found by bisection to 1e-10 relative.
/// Returns 0 for the zero input.
pub fn luxemburg_norm(g: &crate::grid::NodeField, p: &ExponentField) -> f64 {
    let grid = g.grid();
    let area = grid.cell_area();
    let rho = |lam: f64| -> f64 {
        let mut acc = 0.0;
        for j in 1..=grid.ny() {
            for i in 1..=grid.nx() {
                let v = g.at(i, j);
                if v != 0.0 {
                    acc += (v / lam).powf(p.at(i, j));
                }
            }
        }
        acc * area
    };
    if rho(1.0) == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while rho(hi) > 1.0 {
        hi *= 2.0;
    }
    while rho(lo) < 1.0 {
        lo *= 0.5;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Nehari projection scale and its proof brackets.
#[derive(Clone, Copy, Debug)]
pub struct MuStar {
    pub mu_star: f64,
    pub mu_hat_1: f64,
    pub mu_hat_2: f64,
}

/// Per-node data for fast evaluation of mu -> I(mu u; t) and
/// mu -> J(mu u; t): coefficient a = area * |grad u|^{p} and the local
/// exponent, for nodes with nonzero gradient.
struct ScalingProfile {
    norm_alpha_sq: f64,
    coeff: Vec<f64>,
    expo: Vec<f64>,
}

impl ScalingProfile {
    fn build(u: &Field, p: &ExponentField, alpha: f64, s: f64) -> Self {
        let g = gradient_magnitude_sq(u);
        let grid = u.grid();
        let area = grid.cell_area();
        let mut coeff = Vec::new();
        let mut expo = Vec::new();
        for j in 1..=grid.ny() {
            for i in 1..=grid.nx() {
                let gij = g.at(i, j);
                if gij != 0.0 {
                    let q = p.at(i, j);
                    coeff.push(area * gij.powf(0.5 * q));
                    expo.push(q);
                }
            }
        }
        Self {
            norm_alpha_sq: norm_alpha_sq(u, alpha, s),
            coeff,
            expo,
        }
    }

    /// I(mu u; t) = mu^2 A - k sum a mu^{p}.
    fn nehari_at(&self, mu: f64, k_t: f64) -> f64 {
        let mut modular = 0.0;
        for (a, q) in self.coeff.iter().zip(&self.expo) {
            modular += a * mu.powf(*q);
        }
        mu * mu * self.norm_alpha_sq - k_t * modular
    }

    /// J(mu u; t) = mu^2 A / 2 - k sum (a/p) mu^{p}.
    fn energy_at(&self, mu: f64, k_t: f64) -> f64 {
        let mut weighted = 0.0;
        for (a, q) in self.coeff.iter().zip(&self.expo) {
            weighted += a / q * mu.powf(*q);
        }
        0.5 * mu * mu * self.norm_alpha_sq - k_t * weighted
    }
}

/// Finds the scale mu* with I(mu* u; t) = 0 by bisection on the
/// bracket [mu_hat_1 (1 - eps), mu_hat_2 (1 + eps)], eps = 1e-6, where
///
/// mu_hat_1 = min{ (A/(k L^{p-}))^{1/(p- - 2)}, (A/(k L^{p+}))^{1/(p+ - 2)} },
/// mu_hat_2 = the matching max,
///
/// with A the squared energy norm and L the Luxemburg norm of |grad u|.
/// Converges to |I(mu* u; t)| <= 1e-8 A; in practice the bracket is
/// polished to machine width, so the residual lands far below that.
pub fn nehari_scale_mu_star(
    u: &Field,
    t: f64,
    p: &ExponentField,
    k: &CoefficientSchedule,
    alpha: f64,
    s: f64,
) -> Result<MuStar> {
    let profile = ScalingProfile::build(u, p, alpha, s);
    let a = profile.norm_alpha_sq;
    if a == 0.0 {
        return Err(ModelError::ZeroField);
    }
    if !(a > 0.0) {
        return Err(ModelError::Invalid {
            what: "nehari scale",
            why: format!("energy norm squared is {a}, not positive"),
        });
    }
    let g = gradient_magnitude_sq(u);
    let mut mag = g.clone();
    for v in mag.values_mut() {
        *v = v.sqrt();
    }
    let lux = luxemburg_norm(&mag, p);
    let k_t = k.k(t);
    let (p_minus, p_plus) = (p.p_min(), p.p_max());
    let b1 = (a / (k_t * lux.powf(p_minus))).powf(1.0 / (p_minus - 2.0));
    let b2 = (a / (k_t * lux.powf(p_plus))).powf(1.0 / (p_plus - 2.0));
    let (mu_hat_1, mu_hat_2) = (b1.min(b2), b1.max(b2));
    if !(mu_hat_1 > 0.0 && mu_hat_2.is_finite()) {
        return Err(ModelError::NoSignChange {
            lo: mu_hat_1,
            hi: mu_hat_2,
        });
    }
    let eps = 1e-6;
    let (mut lo, mut hi) = (mu_hat_1 * (1.0 - eps), mu_hat_2 * (1.0 + eps));
    if !(profile.nehari_at(lo, k_t) >= 0.0 && profile.nehari_at(hi, k_t) <= 0.0) {
        return Err(ModelError::NoSignChange { lo, hi });
    }
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let h = profile.nehari_at(mu, k_t);
        // Polishing to bracket exhaustion keeps the practical residual
        // far below the guaranteed ceiling, which matters when I is
        // re-evaluated from the scaled field rather than this profile.
        if h == 0.0 || hi - lo <= 2.0 * f64::EPSILON * mu {
            break;
        }
        if h > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        mu = 0.5 * (lo + hi);
    }
    Ok(MuStar {
        mu_star: mu,
        mu_hat_1,
        mu_hat_2,
    })
}

/// Upper estimate of the potential-well depth d(t).
#[derive(Clone, Copy, Debug)]
pub struct WellDepthBound {
    /// min over trials v of J(mu*(v) v; t), a certified discrete upper
    /// bound for d(t).
    pub trial_bound: f64,
    /// Closed-form bound
    /// ((p+ - 2)/(2 p+)) max{(k S^{p-})^{2/(2-p-)}, (k S^{p+})^{2/(2-p+)}}
    /// when the embedding constant S is supplied.
    pub closed_form: Option<f64>,
}

/// Projects each trial field onto the Nehari set and takes the smallest
/// energy there. The optional embedding constant adds the closed-form
/// bound of the same quantity.
pub fn well_depth_upper(
    t: f64,
    trials: &[Field],
    p: &ExponentField,
    k: &CoefficientSchedule,
    alpha: f64,
    s: f64,
    s_p: Option<f64>,
) -> Result<WellDepthBound> {
    if trials.is_empty() {
        return Err(ModelError::EmptyTrialSet);
    }
    let k_t = k.k(t);
    let mut best = f64::INFINITY;
    for v in trials {
        let mu = nehari_scale_mu_star(v, t, p, k, alpha, s)?;
        let profile = ScalingProfile::build(v, p, alpha, s);
        best = best.min(profile.energy_at(mu.mu_star, k_t));
    }
    let closed_form = s_p.map(|sp| {
        let (pm, pp) = (p.p_min(), p.p_max());
        let lo = (k_t * sp.powf(pm)).powf(2.0 / (2.0 - pm));
        let hi = (k_t * sp.powf(pp)).powf(2.0 / (2.0 - pp));
        (pp - 2.0) / (2.0 * pp) * lo.max(hi)
    });
    Ok(WellDepthBound {
        trial_bound: best,
        closed_form,
    })
}

/// Scalar constants shared by the theorem-bound evaluators. The grid
/// quantities come from [`TheoremConstants::from_setup`]; the embedding
/// and interpolation constants have no computable discrete handle and
/// stay user-supplied.
#[derive(Clone, Copy, Debug)]
pub struct TheoremConstants {
    pub p_minus: f64,
    pub p_plus: f64,
    /// Domain measure Lx * Ly.
    pub omega_measure: f64,
    /// Principal Dirichlet eigenvalue (pi/Lx)^2 + (pi/Ly)^2.
    pub lambda1: f64,
    /// Discrete min over modes of lambda + lambda^2 + alpha lambda^{2s},
    /// the sharp constant in norm_alpha_sq >= B2_sq * ||u||_2^2.
    pub b2_sq: f64,
    /// Coefficient value at t = 0.
    pub k0: f64,
    /// Embedding constant for the gradient Luxemburg norm (optional,
    /// user-supplied or heuristically sampled).
    pub s_p: Option<f64>,
    /// Interpolation constants of the lifespan estimate (user-supplied).
    pub c3_tilde: Option<f64>,
    pub c4_tilde: Option<f64>,
    /// Bound for the coefficient over the guaranteed existence window.
    pub kappa_star: Option<f64>,
}

impl TheoremConstants {
    /// Fills the computable fields from a concrete setup; the optional
    /// analytic constants start empty.
    pub fn from_setup(
        grid: Grid2D,
        p: &ExponentField,
        k: &CoefficientSchedule,
        alpha: f64,
        s: f64,
    ) -> Self {
        Self {
            p_minus: p.p_min(),
            p_plus: p.p_max(),
            omega_measure: grid.lx() * grid.ly(),
            lambda1: grid.lambda1(),
            b2_sq: b2_sq_discrete(grid, alpha, s),
            k0: k.k(0.0),
            s_p: None,
            c3_tilde: None,
            c4_tilde: None,
            kappa_star: None,
        }
    }
}

/// Sharp discrete constant of norm_alpha_sq >= B2_sq ||u||_2^2: the
/// minimum of the norm symbol over all sine modes of the grid.
pub fn b2_sq_discrete(grid: Grid2D, alpha: f64, s: f64) -> f64 {
    let mut min_sym = f64::INFINITY;
    for l in 1..=grid.ny() {
        for m in 1..=grid.nx() {
            let lam = mode_lambda(grid, m, l);
            min_sym = min_sym.min(lam + lam * lam + alpha * lam.powf(2.0 * s));
        }
    }
    min_sym
}

/// Constant chain and lifespan upper bound of the low/negative-energy
/// blow-up theorem.
#[derive(Clone, Copy, Debug)]
pub struct BlowupBound {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub t_star: f64,
}

/// Evaluates C0..C3 and T* <= 2/(C3 (p- - 2)) F1(0)^{1 - p-/2}.
///
/// The d_lower branch needs J0 < d_lower; with d_lower absent or zero
/// the hypothesis is J0 < 0.
pub fn blowup_upper_bound_t(
    c: &TheoremConstants,
    j0: f64,
    f10: f64,
    d_lower: Option<f64>,
) -> Result<BlowupBound> {
    if !(f10 > 0.0) {
        return Err(ModelError::Hypothesis(format!(
            "F1(0) = {f10} must be positive"
        )));
    }
    let (pm, pp) = (c.p_minus, c.p_plus);
    let base = c.k0 * (pm - 2.0) / pm;
    let c0 = match d_lower {
        Some(d) if d > 0.0 => {
            if !(j0 < d) {
                return Err(ModelError::Hypothesis(format!(
                    "blow-up route needs J0 < d_lower, got J0 = {j0}, d_lower = {d}"
                )));
            }
            base * (1.0 - j0 / d)
        }
        Some(d) if d < 0.0 => {
            return Err(ModelError::Invalid {
                what: "d_lower",
                why: format!("{d} is negative"),
            });
        }
        _ => {
            if !(j0 < 0.0) {
                return Err(ModelError::Hypothesis(format!(
                    "blow-up route needs J0 < 0 when no well depth is given, got J0 = {j0}"
                )));
            }
            base
        }
    };
    let om = c.omega_measure;
    let c1 = c.lambda1
        * (c0.powf(2.0 / pp) * om.powf((2.0 - pp) / pp))
            .min(c0.powf(2.0 / pm) * om.powf((2.0 - pm) / pm));
    let c2 = (c1 * f10).powf(0.5 * pp).min((c1 * f10).powf(0.5 * pm));
    let c3 = (c1 / (1.0 + c2.powf(2.0 / pp - 2.0 / pm))).powf(2.0 / pm);
    let t_star = 2.0 / (c3 * (pm - 2.0)) * f10.powf(1.0 - 0.5 * pm);
    Ok(BlowupBound {
        c0,
        c1,
        c2,
        c3,
        t_star,
    })
}

/// Lifespan upper bound of the arbitrarily-high-energy blow-up theorem:
/// T* <= 8 (p- - 1) n2 / ((p- - 2)^2 ((p- - 2) B2^2 n2 - 2 p- J0)) where
/// n2 = ||u0||_2^2, under 0 < J0 < ((p- - 2)/(2 p-)) B2^2 n2.
pub fn blowup_upper_bound_high_energy(
    c: &TheoremConstants,
    j0: f64,
    u0_norm2_sq: f64,
) -> Result<f64> {
    let pm = c.p_minus;
    let threshold = (pm - 2.0) / (2.0 * pm) * c.b2_sq * u0_norm2_sq;
    if !(j0 > 0.0 && j0 < threshold) {
        return Err(ModelError::Hypothesis(format!(
            "high energy route needs 0 < J0 < {threshold}, got J0 = {j0}"
        )));
    }
    let denom = (pm - 2.0) * (pm - 2.0) * ((pm - 2.0) * c.b2_sq * u0_norm2_sq - 2.0 * pm * j0);
    Ok(8.0 * (pm - 1.0) * u0_norm2_sq / denom)
}

/// Exponents and constants of the lifespan lower bound together with the
/// integral value.
#[derive(Clone, Copy, Debug)]
pub struct LifespanBound {
    pub r_plus: f64,
    pub r_minus: f64,
    pub c4: f64,
    pub c5: f64,
    pub t_lower: f64,
}

/// Lifespan lower bound T* >= integral over (F1(0), infinity) of
/// dy / (C4 y^{r+} + C5 y^{r-}), with
///
/// r(+/-) = (2N - (N-2) p)/(2N + 8 - (N+2) p),
/// C4 = (2^{p+/2} kappa* C3~)^{2/(2 - theta(p+))},
/// C5 = (2^{p-/2} kappa* C4~)^{2/(2 - theta(p-))},
/// theta(p) = ((N+2) p - 2N)/4,
///
/// valid for p+ < 2(N+4)/(N+2). The improper integral is evaluated by
/// adaptive Simpson quadrature in log space plus the analytic tail of
/// the dominant power once C4 y^{r+} >= 1e6 C5 y^{r-}.
pub fn lifespan_lower_bound(c: &TheoremConstants, n_dim: usize, f10: f64) -> Result<LifespanBound> {
    let (pm, pp) = (c.p_minus, c.p_plus);
    let n = n_dim as f64;
    let (kappa, c3t, c4t) = match (c.kappa_star, c.c3_tilde, c.c4_tilde) {
        (Some(k), Some(a), Some(b)) => (k, a, b),
        _ => {
            return Err(ModelError::Hypothesis(
                "lifespan bound needs kappa_star, c3_tilde and c4_tilde".into(),
            ))
        }
    };
    if !(pp < 2.0 * (n + 4.0) / (n + 2.0)) {
        return Err(ModelError::Hypothesis(format!(
            "subcritical exponent range needed: p+ = {pp} >= 2(N+4)/(N+2) = {}",
            2.0 * (n + 4.0) / (n + 2.0)
        )));
    }
    if !(f10 > 0.0) {
        return Err(ModelError::Hypothesis(format!(
            "F1(0) = {f10} must be positive"
        )));
    }
    let theta = |p: f64| ((n + 2.0) * p - 2.0 * n) / 4.0;
    let r_of = |p: f64| (2.0 * n - (n - 2.0) * p) / (2.0 * n + 8.0 - (n + 2.0) * p);
    let c4 = (2.0_f64.powf(0.5 * pp) * kappa * c3t).powf(2.0 / (2.0 - theta(pp)));
    let c5 = (2.0_f64.powf(0.5 * pm) * kappa * c4t).powf(2.0 / (2.0 - theta(pm)));
    let (r_plus, r_minus) = (r_of(pp), r_of(pm));
    if !(r_plus >= r_minus && r_minus > 1.0) {
        return Err(ModelError::Invalid {
            what: "lifespan exponents",
            why: format!("expected r+ >= r- > 1, got r+ = {r_plus}, r- = {r_minus}"),
        });
    }

    // Integrand after y = e^z: 1/(C4 e^{(r+ - 1) z} + C5 e^{(r- - 1) z});
    // each term saturates to infinity gracefully, so overflow just
    // flushes the integrand to zero.
    let f = |z: f64| 1.0 / (c4 * ((r_plus - 1.0) * z).exp() + c5 * ((r_minus - 1.0) * z).exp());
    let z_a = f10.ln();
    let (z_b, tail) = if r_plus == r_minus {
        // Equal exponents: the whole integrand is one power law with the
        // exact antiderivative, no dominance cutoff exists.
        let y = f10 * 10.0_f64.powf(3.0 / (r_plus - 1.0));
        (y.ln(), y.powf(1.0 - r_plus) / ((c4 + c5) * (r_plus - 1.0)))
    } else {
        let y_dom = (1e6 * c5 / c4).powf(1.0 / (r_plus - r_minus));
        let y = y_dom.max(f10 * 10.0_f64.powf(3.0 / (r_plus - 1.0)));
        (y.ln(), y.powf(1.0 - r_plus) / (c4 * (r_plus - 1.0)))
    };
    let mut finite = 0.0;
    if z_b > z_a {
        // Coarse estimate sets the absolute tolerance for the adaptive
        // pass; panels are capped at width 2 so very long log spans
        // cannot hide structure from the first refinement level.
        let panels = ((z_b - z_a) / 2.0).ceil().max(1.0) as usize;
        let width = (z_b - z_a) / panels as f64;
        let mut rough = 0.0;
        for k in 0..panels {
            let a = z_a + k as f64 * width;
            rough += simpson(&f, a, a + width);
        }
        let eps = 1e-10 * rough.abs().max(tail.abs()).max(1e-300);
        for k in 0..panels {
            let a = z_a + k as f64 * width;
            finite += adaptive_simpson(&f, a, a + width, eps / panels as f64, 60);
        }
    }
    Ok(LifespanBound {
        r_plus,
        r_minus,
        c4,
        c5,
        t_lower: finite + tail,
    })
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let whole = simpson(f, a, b);
    let m = 0.5 * (a + b);
    let halves = simpson(f, a, m) + simpson(f, m, b);
    if depth == 0 || (halves - whole).abs() <= 15.0 * eps {
        halves + (halves - whole) / 15.0
    } else {
        adaptive_simpson(f, a, m, 0.5 * eps, depth - 1)
            + adaptive_simpson(f, m, b, 0.5 * eps, depth - 1)
    }
}

/// Decay exponent of the low-energy global regime.
#[derive(Clone, Copy, Debug)]
pub struct DecayRate {
    /// delta0 = (J0/d_lower)^{(p- - 2)/2}.
    pub delta0: f64,
    /// delta1 = B2^2 p+ (p- - 2)(1 - delta0) / (2 p- (p+ - 2 delta0)).
    pub delta1: f64,
    /// Amplitude of the predicted envelope
    /// ||u(t)||_alpha <= envelope * exp(-delta1 t).
    pub envelope: f64,
}

/// Exponential decay constants under 0 < J0 < d_lower.
pub fn decay_rate_delta1(c: &TheoremConstants, j0: f64, d_lower: f64) -> Result<DecayRate> {
    if !(j0 > 0.0 && j0 < d_lower) {
        return Err(ModelError::Hypothesis(format!(
            "decay route needs 0 < J0 < d_lower, got J0 = {j0}, d_lower = {d_lower}"
        )));
    }
    let (pm, pp) = (c.p_minus, c.p_plus);
    let delta0 = (j0 / d_lower).powf(0.5 * (pm - 2.0));
    let delta1 =
        c.b2_sq * pp * (pm - 2.0) * (1.0 - delta0) / (2.0 * pm * (pp - 2.0 * delta0));
    let envelope = (2.0 * std::f64::consts::E * pm * d_lower / (pm - 2.0)).sqrt();
    Ok(DecayRate {
        delta0,
        delta1,
        envelope,
    })
}

/// Heuristic sampler for the embedding constant: maximizes the ratio
/// Luxemburg(|grad v|) / ||v||_alpha over random low-mode fields. The
/// result is a LOWER bound on S and not certified; bounds derived from
/// it are labeled accordingly by callers.
pub fn estimate_embedding_constant(
    grid: Grid2D,
    p: &ExponentField,
    alpha: f64,
    s: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(ModelError::EmptyTrialSet);
    }
    let mut rng = SplitMix64::new(seed);
    let modes = grid.nx().min(grid.ny()).min(8);
    let pi = std::f64::consts::PI;
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let mut amps = Vec::with_capacity(modes * modes);
        for _ in 0..modes * modes {
            amps.push(rng.next_gauss());
        }
        let u = Field::from_fn(grid, |x, y| {
            let mut acc = 0.0;
            for l in 1..=modes {
                for m in 1..=modes {
                    let damp = 1.0 / ((m * m + l * l) as f64);
                    acc += amps[(l - 1) * modes + (m - 1)]
                        * damp
                        * (pi * m as f64 * x / grid.lx()).sin()
                        * (pi * l as f64 * y / grid.ly()).sin();
                }
            }
            acc
        });
        let a = norm_alpha_sq(&u, alpha, s);
        if !(a > 0.0) {
            continue;
        }
        let mut mag = gradient_magnitude_sq(&u);
        for v in mag.values_mut() {
            *v = v.sqrt();
        }
        let ratio = luxemburg_norm(&mag, p) / a.sqrt();
        best = best.max(ratio);
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(ModelError::ZeroField)
    }
}
