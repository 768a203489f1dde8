//! The variable-exponent nonlinear divergence B(u), its diffusion
//! coefficient field, and the forward/backward threshold map.

use crate::error::{ModelError, Result};
use crate::grid::{gradient_magnitude_sq, ExponentField, Field, NodeField};

/// Diffusion coefficient c = (|grad u|^2)^{p/2 - 1} on all nodes.
///
/// With p > 2 the exponent is positive, so c = 0 where the gradient
/// vanishes; no epsilon floor is applied (a floor would perturb the
/// reference functional values).
pub fn coefficient_c(u: &Field, p: &ExponentField) -> NodeField {
    let mut c = gradient_magnitude_sq(u);
    for (v, q) in c.values_mut().iter_mut().zip(p.values()) {
        let e = 0.5 * q - 1.0;
        *v = if *v == 0.0 && e != 0.0 { 0.0 } else { v.powf(e) };
    }
    c
}

/// Divergence-form nonlinearity on the interior nodes:
///
/// (Bu)_ij = (1/(2 dx^2)) [ (c_{i+1,j}+c_ij) u_{i+1,j}
///           - (c_{i+1,j}+2c_ij+c_{i-1,j}) u_ij + (c_ij+c_{i-1,j}) u_{i-1,j} ]
///           + the analogous y term,
///
/// the expanded half-point-average stencil.
pub fn nonlinear_divergence(u: &Field, p: &ExponentField) -> Result<Field> {
    let c = coefficient_c(u, p);
    nonlinear_divergence_with(u, &c)
}

/// As [`nonlinear_divergence`] with a precomputed coefficient field (the
/// stepping loop reuses it for diagnostics).
pub fn nonlinear_divergence_with(u: &Field, c: &NodeField) -> Result<Field> {
    if !c.is_finite() {
        return Err(ModelError::DivergedCoefficient);
    }
    let grid = u.grid();
    let half_inv_dx2 = 0.5 / (grid.dx() * grid.dx());
    let half_inv_dy2 = 0.5 / (grid.dy() * grid.dy());
    let mut out = Field::zeros(grid);
    for j in 1..=grid.ny() {
        for i in 1..=grid.nx() {
            let (ii, jj) = (i as i64, j as i64);
            let c0 = c.at(i, j);
            let (ce, cw) = (c.at(i + 1, j), c.at(i - 1, j));
            let (cn, cs) = (c.at(i, j + 1), c.at(i, j - 1));
            let bx = (ce + c0) * u.at(ii + 1, jj) - (ce + 2.0 * c0 + cw) * u.at(ii, jj)
                + (c0 + cw) * u.at(ii - 1, jj);
            let by = (cn + c0) * u.at(ii, jj + 1) - (cn + 2.0 * c0 + cs) * u.at(ii, jj)
                + (c0 + cs) * u.at(ii, jj - 1);
            let k = out.idx(i, j);
            out.values_mut()[k] = half_inv_dx2 * bx + half_inv_dy2 * by;
        }
    }
    Ok(out)
}

/// Threshold map T_ij = k_t^{1/(2 - p_ij)} separating forward from
/// backward diffusion: the effective coefficient 1 - k_t |grad u|^{p-2}
/// is positive where |grad u| < T and negative where |grad u| > T.
pub fn threshold_map(k_t: f64, p: &ExponentField) -> Result<NodeField> {
    if !(k_t > 0.0) {
        return Err(ModelError::Invalid {
            what: "threshold",
            why: format!("k_t = {k_t} must be positive"),
        });
    }
    let grid = p.grid();
    let mut out = NodeField::zeros(grid);
    for j in 0..=grid.ny() + 1 {
        for i in 0..=grid.nx() + 1 {
            let q = p.at(i, j);
            if q == 2.0 {
                return Err(ModelError::DegenerateExponent { i, j });
            }
            let k = out.idx(i, j);
            out.values_mut()[k] = k_t.powf(1.0 / (2.0 - q));
        }
    }
    Ok(out)
}
