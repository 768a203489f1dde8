//! Rectangular grid geometry and grid functions with zero-extension
//! boundary semantics, plus finite-difference and quadrature primitives.
//!
//! Interior-valued functions ([`Field`]) store the Nx x Ny interior nodes
//! only; reads outside that range return exactly 0 (homogeneous Dirichlet
//! data extended by zero). All-node functions ([`NodeField`]) additionally
//! carry the boundary ring, which the diffusion coefficient and the
//! variable exponent both need.

use std::io::{Read, Write};

use crate::error::{ModelError, Result};

/// Uniform grid on (0, Lx) x (0, Ly) with Nx x Ny interior nodes.
///
/// Spacings are dx = Lx/(Nx+1), dy = Ly/(Ny+1); node coordinates are
/// x_i = i dx for i = 0..Nx+1 and y_j = j dy for j = 0..Ny+1, so i = 0 and
/// i = Nx+1 are the boundary lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(ModelError::Invalid {
                what: "grid",
                why: format!("need at least 2 interior nodes per axis, got {nx} x {ny}"),
            });
        }
        if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(ModelError::Invalid {
                what: "grid",
                why: format!("domain lengths must be positive and finite, got {lx} x {ly}"),
            });
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / (self.nx + 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / (self.ny + 1) as f64
    }

    /// x-coordinate of node column i, valid for i = 0..Nx+1.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// y-coordinate of node row j, valid for j = 0..Ny+1.
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    /// Area weight of the rectangle rule, dx * dy.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Number of interior nodes.
    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Principal Dirichlet eigenvalue of -Laplace on the continuum domain,
    /// (pi/Lx)^2 + (pi/Ly)^2.
    pub fn lambda1(&self) -> f64 {
        let pi = std::f64::consts::PI;
        (pi / self.lx).powi(2) + (pi / self.ly).powi(2)
    }
}

/// Grid function on the interior nodes with zero extension outside.
///
/// Storage is row-major with j outer and i inner, both 1-based on the
/// interior: `values[(j-1)*nx + (i-1)]`.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid2D,
    values: Vec<f64>,
    diverged: bool,
}

impl Field {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.interior_len()],
            diverged: false,
        }
    }

    /// Samples `f(x_i, y_j)` at every interior node.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.interior_len());
        for j in 1..=grid.ny() {
            let y = grid.y(j);
            for i in 1..=grid.nx() {
                values.push(f(grid.x(i), y));
            }
        }
        Self {
            grid,
            values,
            diverged: false,
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.interior_len() {
            return Err(ModelError::Invalid {
                what: "field",
                why: format!(
                    "expected {} interior values, got {}",
                    grid.interior_len(),
                    values.len()
                ),
            });
        }
        Ok(Self {
            grid,
            values,
            diverged: false,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Linear index of interior node (i, j), both 1-based.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!((1..=self.grid.nx()).contains(&i));
        debug_assert!((1..=self.grid.ny()).contains(&j));
        (j - 1) * self.grid.nx() + (i - 1)
    }

    /// Value at node (i, j) under zero extension: any index outside the
    /// interior range (including the declared ghost layers) reads as 0.
    #[inline]
    pub fn at(&self, i: i64, j: i64) -> f64 {
        if i < 1 || j < 1 || i > self.grid.nx() as i64 || j > self.grid.ny() as i64 {
            0.0
        } else {
            self.values[(j as usize - 1) * self.grid.nx() + (i as usize - 1)]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    /// Flags the field as diverged; values are kept for inspection.
    pub fn mark_diverged(&mut self) {
        self.diverged = true;
    }

    /// Writes the TFF1 snapshot format: one ASCII header line
    /// `TFF1 <Nx> <Ny> <Lx> <Ly>\n` followed by Nx*Ny little-endian f64
    /// values, row-major (j outer, i inner).
    pub fn write_tff<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "TFF1 {} {} {} {}",
            self.grid.nx(),
            self.grid.ny(),
            self.grid.lx(),
            self.grid.ly()
        )?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a TFF1 snapshot; the round-trip with [`Field::write_tff`] is
    /// bit-exact (the header floats use the shortest round-trip decimal
    /// representation).
    pub fn read_tff<R: Read>(r: &mut R) -> Result<Self> {
        let mut header = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            let n = r.read(&mut byte)?;
            if n == 0 {
                return Err(ModelError::Malformed {
                    what: "TFF1 header",
                    why: "unexpected end of data".into(),
                });
            }
            if byte[0] == b'\n' {
                break;
            }
            if header.len() > 256 {
                return Err(ModelError::Malformed {
                    what: "TFF1 header",
                    why: "header line too long".into(),
                });
            }
            header.push(byte[0]);
        }
        let header = String::from_utf8(header).map_err(|_| ModelError::Malformed {
            what: "TFF1 header",
            why: "not valid UTF-8".into(),
        })?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("TFF1") {
            return Err(ModelError::Malformed {
                what: "TFF1 header",
                why: "missing TFF1 magic".into(),
            });
        }
        let mut next = |name: &'static str| -> Result<String> {
            parts
                .next()
                .map(str::to_owned)
                .ok_or(ModelError::Malformed {
                    what: "TFF1 header",
                    why: format!("missing {name}"),
                })
        };
        let nx: usize = next("Nx")?.parse().map_err(|e| ModelError::Malformed {
            what: "TFF1 header",
            why: format!("Nx: {e}"),
        })?;
        let ny: usize = next("Ny")?.parse().map_err(|e| ModelError::Malformed {
            what: "TFF1 header",
            why: format!("Ny: {e}"),
        })?;
        let lx: f64 = next("Lx")?.parse().map_err(|e| ModelError::Malformed {
            what: "TFF1 header",
            why: format!("Lx: {e}"),
        })?;
        let ly: f64 = next("Ly")?.parse().map_err(|e| ModelError::Malformed {
            what: "TFF1 header",
            why: format!("Ly: {e}"),
        })?;
        let grid = Grid2D::new(nx, ny, lx, ly)?;
        let mut buf = vec![0u8; grid.interior_len() * 8];
        r.read_exact(&mut buf).map_err(|_| ModelError::Malformed {
            what: "TFF1 payload",
            why: format!("expected {} bytes of field data", buf.len()),
        })?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Field::from_values(grid, values)
    }
}

/// Grid function stored on all nodes i = 0..Nx+1, j = 0..Ny+1, boundary
/// ring included. Layout is row-major: `values[j*(nx+2) + i]`.
#[derive(Clone, Debug)]
pub struct NodeField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl NodeField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; (grid.nx() + 2) * (grid.ny() + 2)],
        }
    }

    /// Samples `f(x_i, y_j)` at every node including the boundary ring.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity((grid.nx() + 2) * (grid.ny() + 2));
        for j in 0..=grid.ny() + 1 {
            let y = grid.y(j);
            for i in 0..=grid.nx() + 1 {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.grid.nx() + 1);
        debug_assert!(j <= self.grid.ny() + 1);
        j * (self.grid.nx() + 2) + i
    }

    /// Value at node (i, j), i = 0..Nx+1, j = 0..Ny+1.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Variable exponent p defined on all nodes, with cached bounds.
///
/// The admissible range is 2 < p- <= p+ < infinity; the constructor
/// rejects anything else. [`ExponentField::new_unchecked`] exists for
/// controlled experiments that deliberately relax the lower bound (for
/// example the p = 2 Laplacian-collapse test).
#[derive(Clone, Debug)]
pub struct ExponentField {
    inner: NodeField,
    p_min: f64,
    p_max: f64,
}

impl ExponentField {
    pub fn new(inner: NodeField) -> Result<Self> {
        let field = Self::new_unchecked(inner);
        if !field.p_min.is_finite() || !field.p_max.is_finite() || field.p_min <= 2.0 {
            return Err(ModelError::Invalid {
                what: "exponent field",
                why: format!(
                    "need 2 < p- <= p+ < infinity, got p- = {}, p+ = {}",
                    field.p_min, field.p_max
                ),
            });
        }
        Ok(field)
    }

    pub fn from_fn(grid: Grid2D, f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        Self::new(NodeField::from_fn(grid, f))
    }

    pub fn constant(grid: Grid2D, q: f64) -> Result<Self> {
        Self::from_fn(grid, |_, _| q)
    }

    /// Builds the field without the p > 2 check. Intended for tests that
    /// exercise degenerate exponents; everything else should use
    /// [`ExponentField::new`].
    pub fn new_unchecked(inner: NodeField) -> Self {
        let (mut p_min, mut p_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &p in inner.values() {
            p_min = p_min.min(p);
            p_max = p_max.max(p);
        }
        Self { inner, p_min, p_max }
    }

    pub fn grid(&self) -> Grid2D {
        self.inner.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.inner.values()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.inner.at(i, j)
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }
}

/// |grad u|^2 at every node by central differences with ghost zeros.
///
/// The output is all-node shaped so the diffusion coefficient can be
/// averaged onto half points next to the boundary.
pub fn gradient_magnitude_sq(u: &Field) -> NodeField {
    let grid = u.grid();
    let (inv2dx, inv2dy) = (0.5 / grid.dx(), 0.5 / grid.dy());
    let mut out = NodeField::zeros(grid);
    for j in 0..=grid.ny() + 1 {
        for i in 0..=grid.nx() + 1 {
            let (ii, jj) = (i as i64, j as i64);
            let gx = (u.at(ii + 1, jj) - u.at(ii - 1, jj)) * inv2dx;
            let gy = (u.at(ii, jj + 1) - u.at(ii, jj - 1)) * inv2dy;
            let k = out.idx(i, j);
            out.values_mut()[k] = gx * gx + gy * gy;
        }
    }
    out
}

/// Interior rectangle rule: dx * dy * sum over interior nodes.
///
/// Boundary nodes carry no mass (Dirichlet data); all-node inputs are
/// integrated over their interior part for consistency.
pub fn quadrature(f: &Field) -> Result<f64> {
    let mut sum = 0.0;
    for v in f.values() {
        sum += v;
    }
    if !sum.is_finite() {
        return Err(ModelError::NonFiniteIntegrand);
    }
    Ok(sum * f.grid().cell_area())
}

/// Interior rectangle rule for all-node arrays; the boundary ring is
/// excluded, matching [`quadrature`].
pub fn quadrature_nodes(f: &NodeField) -> Result<f64> {
    let grid = f.grid();
    let mut sum = 0.0;
    for j in 1..=grid.ny() {
        for i in 1..=grid.nx() {
            sum += f.at(i, j);
        }
    }
    if !sum.is_finite() {
        return Err(ModelError::NonFiniteIntegrand);
    }
    Ok(sum * grid.cell_area())
}
