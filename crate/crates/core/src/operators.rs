//! Discrete differential and convolution operators with exact adjoints.
//!
//! The staggering is fixed once for the whole library:
//!   * `grad_forward`: forward differences, zero on the last row/column
//!     (Neumann / replicate boundary),
//!   * `sym_grad`: backward differences, zero on the first row/column,
//! and the divergences are defined as the exact negative adjoints of the
//! respective gradients under the cell-weighted inner products (with the
//! doubled xy channel on the tensor side). Forward first-order plus
//! backward second-order differences make the composite stencil
//! centered-like, and constants lie in the kernel of `sym_grad` exactly.
//!
//! Convolution maps a field on the full grid to its interior crop, so the
//! operator stays linear without inventing boundary data; its adjoint is
//! the zero-padded correlation.

use crate::error::{Result, TgvError};
use crate::fields::{GridGeometry, InnerSpace, ScalarField, SymTensorField, VectorField};
use crate::rng::SplitMix64;

/// Forward-difference gradient with Neumann boundary:
/// `(dx u)[i,j] = (u[i,j+1] - u[i,j]) / h` for `j < nx-1`, else 0,
/// and analogously in y.
pub fn grad_forward(u: &ScalarField) -> VectorField {
    let geom = *u.geometry();
    let (nx, ny, h) = (geom.width(), geom.height(), geom.spacing());
    let mut out = VectorField::zeros(geom);
    let vals = u.values();
    let (gx, gy) = out.channels_mut();
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx - 1 {
            gx[row + j] = (vals[row + j + 1] - vals[row + j]) / h;
        }
    }
    for i in 0..ny.saturating_sub(1) {
        let row = i * nx;
        for j in 0..nx {
            gy[row + j] = (vals[row + nx + j] - vals[row + j]) / h;
        }
    }
    out
}

/// Negative adjoint of [`grad_forward`]: `<grad u, p> = -<u, div p>` exactly
/// for all fields. Backward differences with the first/last rows and
/// columns adjusted so the identity holds.
pub fn div_vec(p: &VectorField) -> ScalarField {
    let geom = *p.geometry();
    let (nx, ny, h) = (geom.width(), geom.height(), geom.spacing());
    let mut out = ScalarField::zeros(geom);
    let (px, py) = (p.x(), p.y());
    let d = out.values_mut();
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx {
            let mut acc = 0.0;
            if j < nx - 1 {
                acc += px[row + j];
            }
            if j >= 1 {
                acc -= px[row + j - 1];
            }
            if i < ny - 1 {
                acc += py[row + j];
            }
            if i >= 1 {
                acc -= py[row - nx + j];
            }
            d[row + j] = acc / h;
        }
    }
    out
}

/// Symmetrized gradient `E w = (grad w + grad w^T) / 2` via backward
/// differences that vanish on the first row/column:
/// `t_xx = dx- w1`, `t_yy = dy- w2`, `t_xy = (dy- w1 + dx- w2) / 2`.
pub fn sym_grad(w: &VectorField) -> SymTensorField {
    let geom = *w.geometry();
    let (nx, ny, h) = (geom.width(), geom.height(), geom.spacing());
    let mut out = SymTensorField::zeros(geom);
    let (w1, w2) = (w.x(), w.y());
    let (txx, tyy, txy) = out.channels_mut();
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx {
            let k = row + j;
            let dx_w1 = if j >= 1 { (w1[k] - w1[k - 1]) / h } else { 0.0 };
            let dy_w2 = if i >= 1 { (w2[k] - w2[k - nx]) / h } else { 0.0 };
            let dy_w1 = if i >= 1 { (w1[k] - w1[k - nx]) / h } else { 0.0 };
            let dx_w2 = if j >= 1 { (w2[k] - w2[k - 1]) / h } else { 0.0 };
            txx[k] = dx_w1;
            tyy[k] = dy_w2;
            txy[k] = 0.5 * (dy_w1 + dx_w2);
        }
    }
    out
}

/// Negative adjoint of [`sym_grad`] under the xy-doubled pairing:
/// `<sym_grad w, q> = -<w, sym_div q>` exactly for all fields.
pub fn sym_div(q: &SymTensorField) -> VectorField {
    let geom = *q.geometry();
    let (nx, ny, h) = (geom.width(), geom.height(), geom.spacing());
    let mut out = VectorField::zeros(geom);
    let (qxx, qyy, qxy) = (q.xx(), q.yy(), q.xy());
    let (v1, v2) = out.channels_mut();
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx {
            let k = row + j;
            let mut a = 0.0;
            if j < nx - 1 {
                a += qxx[k + 1];
            }
            if j >= 1 {
                a -= qxx[k];
            }
            if i < ny - 1 {
                a += qxy[k + nx];
            }
            if i >= 1 {
                a -= qxy[k];
            }
            v1[k] = a / h;

            let mut b = 0.0;
            if i < ny - 1 {
                b += qyy[k + nx];
            }
            if i >= 1 {
                b -= qyy[k];
            }
            if j < nx - 1 {
                b += qxy[k + 1];
            }
            if j >= 1 {
                b -= qxy[k];
            }
            v2[k] = b / h;
        }
    }
    out
}

/// Blurring kernel on a small odd-sized support, origin at the center tap.
/// `spacing` must match the image grid it is applied to; tap weights are
/// densities, so the kernel mass is `sum(weights) * h^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionKernel {
    width: usize,
    height: usize,
    spacing: f64,
    weights: Vec<f64>,
}

impl ConvolutionKernel {
    pub fn new(width: usize, height: usize, spacing: f64, weights: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width % 2 == 0 || height % 2 == 0 {
            return Err(TgvError::ContractViolation(format!(
                "kernel dimensions must be odd and positive, got {width}x{height}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(TgvError::ContractViolation(format!(
                "kernel spacing must be positive and finite, got {spacing}"
            )));
        }
        if weights.len() != width * height {
            return Err(TgvError::ContractViolation(format!(
                "kernel has {} weights, wants {}",
                weights.len(),
                width * height
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(TgvError::ContractViolation(
                "kernel weights must be finite".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            spacing,
            weights,
        })
    }

    /// Unit-mass delta at the center: convolution with it is the identity
    /// (up to the interior crop).
    pub fn delta(size: usize, spacing: f64) -> Result<Self> {
        let mut weights = vec![0.0; size * size];
        if size > 0 {
            weights[(size / 2) * size + size / 2] = 1.0 / (spacing * spacing);
        }
        Self::new(size, size, spacing, weights)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn radius_x(&self) -> usize {
        self.width / 2
    }

    #[inline]
    pub fn radius_y(&self) -> usize {
        self.height / 2
    }

    /// Geometry of the interior crop produced by convolving an image of
    /// geometry `input` with this kernel.
    pub fn output_geometry(&self, input: &GridGeometry) -> Result<GridGeometry> {
        if (input.spacing() - self.spacing).abs() > 1e-12 * self.spacing.max(1.0) {
            return Err(TgvError::ContractViolation(format!(
                "kernel spacing {} does not match image spacing {}",
                self.spacing,
                input.spacing()
            )));
        }
        if input.width() < self.width || input.height() < self.height {
            return Err(TgvError::ContractViolation(format!(
                "kernel {}x{} larger than image {}x{}",
                self.width,
                self.height,
                input.width(),
                input.height()
            )));
        }
        GridGeometry::new(
            input.width() - 2 * self.radius_x(),
            input.height() - 2 * self.radius_y(),
            input.spacing(),
        )
    }
}

/// Discrete convolution `(Ku)[x] = sum_y u[x - y] k[y] h^2`, evaluated only
/// where the full stencil lies inside the image; the output is the interior
/// crop of the input grid.
pub fn convolve(u: &ScalarField, kernel: &ConvolutionKernel) -> Result<ScalarField> {
    let out_geom = kernel.output_geometry(u.geometry())?;
    let (nx, _ny) = (u.geometry().width(), u.geometry().height());
    let (kw, kh) = (kernel.width, kernel.height);
    let (rx, ry) = (kernel.radius_x(), kernel.radius_y());
    let area = u.geometry().cell_area();
    let vals = u.values();
    let mut out = ScalarField::zeros(out_geom);
    let (onx, ony) = (out_geom.width(), out_geom.height());
    let ov = out.values_mut();
    for oi in 0..ony {
        for oj in 0..onx {
            // output pixel (oi, oj) sits at input pixel (oi + ry, oj + rx)
            let mut acc = 0.0;
            for a in 0..kh {
                let ui = oi + 2 * ry - a;
                let urow = ui * nx;
                let krow = a * kw;
                for b in 0..kw {
                    let uj = oj + 2 * rx - b;
                    acc += vals[urow + uj] * kernel.weights[krow + b];
                }
            }
            ov[oi * onx + oj] = acc * area;
        }
    }
    Ok(out)
}

/// Exact adjoint of [`convolve`]: `<convolve(u, k), r> = <u, adjoint_convolve(r, k)>`
/// for all `u`, `r`; realized as zero-padded correlation with the kernel.
/// `full_geometry` is the grid of `u` the result should live on.
pub fn adjoint_convolve(
    r: &ScalarField,
    kernel: &ConvolutionKernel,
    full_geometry: &GridGeometry,
) -> Result<ScalarField> {
    let expected = kernel.output_geometry(full_geometry)?;
    if expected != *r.geometry() {
        return Err(TgvError::GeometryMismatch(format!(
            "adjoint_convolve: residual grid is {}x{}, convolve output would be {}x{}",
            r.geometry().width(),
            r.geometry().height(),
            expected.width(),
            expected.height()
        )));
    }
    let (kw, kh) = (kernel.width, kernel.height);
    let (rx, ry) = (kernel.radius_x(), kernel.radius_y());
    let (onx, ony) = (expected.width(), expected.height());
    let area = full_geometry.cell_area();
    let rv = r.values();
    let mut out = ScalarField::zeros(*full_geometry);
    let nx = full_geometry.width();
    let ny = full_geometry.height();
    let ov = out.values_mut();
    for m in 0..ny {
        for n in 0..nx {
            let mut acc = 0.0;
            for a in 0..kh {
                // contribution of output rows oi = m + a - 2*ry
                let oi = m as isize + a as isize - 2 * ry as isize;
                if oi < 0 || oi >= ony as isize {
                    continue;
                }
                let orow = oi as usize * onx;
                let krow = a * kw;
                for b in 0..kw {
                    let oj = n as isize + b as isize - 2 * rx as isize;
                    if oj < 0 || oj >= onx as isize {
                        continue;
                    }
                    acc += kernel.weights[krow + b] * rv[orow + oj as usize];
                }
            }
            ov[m * nx + n] = acc * area;
        }
    }
    Ok(out)
}

/// A linear operator between two inner-product spaces together with its
/// adjoint. The defining contract is `<apply(x), y> = <x, adjoint_apply(y)>`
/// for all `x`, `y`.
pub trait LinearOperator {
    type Domain: InnerSpace;
    type Range: InnerSpace;

    fn apply(&self, x: &Self::Domain) -> Self::Range;
    fn adjoint_apply(&self, y: &Self::Range) -> Self::Domain;
    /// Zero element of the domain (fixes the geometry for iterations).
    fn domain_zero(&self) -> Self::Domain;
}

/// Operator norm estimate by power iteration on `A* A` from a seeded random
/// start. Rayleigh quotients of a positive semidefinite operator are
/// nondecreasing along the iteration, and the run is deterministic for a
/// fixed seed. A degenerate start (annihilated by the operator) is retried
/// with the next seed.
pub fn estimate_operator_norm<Op: LinearOperator>(op: &Op, iterations: usize, seed: u64) -> f64 {
    assert!(iterations >= 1, "power iteration needs at least one step");
    let mut seed = seed;
    'restart: loop {
        let mut rng = SplitMix64::new(seed);
        let mut x = op.domain_zero();
        x.fill_randn(&mut rng);
        let n = x.norm();
        if !(n > 0.0) {
            seed = seed.wrapping_add(1);
            continue 'restart;
        }
        x.scale_mut(1.0 / n);
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let y = op.apply(&x);
            let z = op.adjoint_apply(&y);
            lambda = x.dot(&z);
            let zn = z.norm();
            if !(zn > 1e-300) {
                // operator annihilates the current vector; try a fresh start
                seed = seed.wrapping_add(1);
                continue 'restart;
            }
            let mut next = z;
            next.scale_mut(1.0 / zn);
            x = next;
        }
        return lambda.max(0.0).sqrt();
    }
}

/// Identity on scalar fields.
#[derive(Debug, Clone)]
pub struct IdentityOp {
    pub geometry: GridGeometry,
}

impl LinearOperator for IdentityOp {
    type Domain = ScalarField;
    type Range = ScalarField;

    fn apply(&self, x: &ScalarField) -> ScalarField {
        x.clone()
    }

    fn adjoint_apply(&self, y: &ScalarField) -> ScalarField {
        y.clone()
    }

    fn domain_zero(&self) -> ScalarField {
        ScalarField::zeros(self.geometry)
    }
}

/// `grad_forward` / `-div` as an operator pair.
#[derive(Debug, Clone)]
pub struct GradOp {
    pub geometry: GridGeometry,
}

impl LinearOperator for GradOp {
    type Domain = ScalarField;
    type Range = VectorField;

    fn apply(&self, x: &ScalarField) -> VectorField {
        grad_forward(x)
    }

    fn adjoint_apply(&self, y: &VectorField) -> ScalarField {
        let mut d = div_vec(y);
        d.scale_mut(-1.0);
        d
    }

    fn domain_zero(&self) -> ScalarField {
        ScalarField::zeros(self.geometry)
    }
}

/// `sym_grad` / `-sym_div` as an operator pair.
#[derive(Debug, Clone)]
pub struct SymGradOp {
    pub geometry: GridGeometry,
}

impl LinearOperator for SymGradOp {
    type Domain = VectorField;
    type Range = SymTensorField;

    fn apply(&self, x: &VectorField) -> SymTensorField {
        sym_grad(x)
    }

    fn adjoint_apply(&self, y: &SymTensorField) -> VectorField {
        let mut d = sym_div(y);
        d.scale_mut(-1.0);
        d
    }

    fn domain_zero(&self) -> VectorField {
        VectorField::zeros(self.geometry)
    }
}

/// Convolution from the full grid to its interior crop.
#[derive(Debug, Clone)]
pub struct ConvOp {
    kernel: ConvolutionKernel,
    domain: GridGeometry,
    range: GridGeometry,
}

impl ConvOp {
    pub fn new(kernel: ConvolutionKernel, domain: GridGeometry) -> Result<Self> {
        let range = kernel.output_geometry(&domain)?;
        Ok(Self {
            kernel,
            domain,
            range,
        })
    }

    pub fn kernel(&self) -> &ConvolutionKernel {
        &self.kernel
    }

    pub fn range_geometry(&self) -> &GridGeometry {
        &self.range
    }
}

impl LinearOperator for ConvOp {
    type Domain = ScalarField;
    type Range = ScalarField;

    fn apply(&self, x: &ScalarField) -> ScalarField {
        convolve(x, &self.kernel).expect("domain geometry validated at construction")
    }

    fn adjoint_apply(&self, y: &ScalarField) -> ScalarField {
        adjoint_convolve(y, &self.kernel, &self.domain)
            .expect("range geometry validated at construction")
    }

    fn domain_zero(&self) -> ScalarField {
        ScalarField::zeros(self.domain)
    }
}
