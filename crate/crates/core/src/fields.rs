//! Grid-based field types and the inner products / norms built on them.
//!
//! All fields live on a regular pixel grid. Values are stored row-major
//! (`index = row * width + col`); the x axis runs along columns, y along
//! rows. Every integral-type quantity is a cell-weighted sum: the cell
//! area `h^2` multiplies all inner products and norms, so grid-refinement
//! experiments are meaningful.
//!
//! A symmetric 2x2 tensor field stores three channels (xx, yy, xy); the
//! off-diagonal channel is stored once and counted twice in inner products
//! and norms. Keeping that factor in exactly one place is what makes the
//! primal norms and the dual-ball projections polar to each other.

use crate::error::{Result, TgvError};
use crate::rng::SplitMix64;

/// Regular 2-D pixel grid: `width x height` cells of side length `spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    width: usize,
    height: usize,
    spacing: f64,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, spacing: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(TgvError::ContractViolation(format!(
                "grid dimensions must be >= 1, got {width}x{height}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(TgvError::ContractViolation(format!(
                "grid spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(Self {
            width,
            height,
            spacing,
        })
    }

    /// Grid with unit spacing.
    pub fn unit(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, 1.0)
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

    /// Quadrature weight of one cell.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // width, height >= 1 by construction
    }

    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    fn ensure_matches(&self, other: &GridGeometry, what: &str) -> Result<()> {
        if self != other {
            return Err(TgvError::GeometryMismatch(format!(
                "{what}: {}x{} (h={}) vs {}x{} (h={})",
                self.width, self.height, self.spacing, other.width, other.height, other.spacing
            )));
        }
        Ok(())
    }
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(TgvError::ContractViolation(format!(
            "{what} contains a non-finite value at flat index {pos}"
        )));
    }
    Ok(())
}

/// Real-valued function on the grid (an image `u` or data `f`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            values: vec![0.0; geometry.len()],
            geometry,
        }
    }

    pub fn constant(geometry: GridGeometry, value: f64) -> Self {
        Self {
            values: vec![value; geometry.len()],
            geometry,
        }
    }

    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(TgvError::ContractViolation(format!(
                "value buffer has length {}, geometry wants {}",
                values.len(),
                geometry.len()
            )));
        }
        ensure_finite(&values, "scalar field")?;
        Ok(Self { geometry, values })
    }

    /// Builds a field from `f(row, col)`.
    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(geometry.len());
        for i in 0..geometry.height() {
            for j in 0..geometry.width() {
                values.push(f(i, j));
            }
        }
        Self { geometry, values }
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[self.geometry.idx(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let idx = self.geometry.idx(row, col);
        self.values[idx] = value;
    }

    /// `h^2 * sum_i a_i b_i`; symmetric and bilinear.
    pub fn inner_product(&self, other: &ScalarField) -> Result<f64> {
        self.geometry
            .ensure_matches(&other.geometry, "scalar inner product")?;
        Ok(self.dot(other))
    }

    /// Weighted L2 norm `h * sqrt(sum a_i^2)`.
    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Interior crop: drops `margin_x` columns on the left and right and
    /// `margin_y` rows on the top and bottom.
    pub fn interior_crop(&self, margin_x: usize, margin_y: usize) -> Result<ScalarField> {
        let (nx, ny) = (self.geometry.width(), self.geometry.height());
        if nx <= 2 * margin_x || ny <= 2 * margin_y {
            return Err(TgvError::ContractViolation(format!(
                "crop margins ({margin_x}, {margin_y}) leave no pixels of a {nx}x{ny} grid"
            )));
        }
        let geom = GridGeometry::new(nx - 2 * margin_x, ny - 2 * margin_y, self.geometry.spacing())?;
        Ok(ScalarField::from_fn(geom, |i, j| {
            self.at(i + margin_y, j + margin_x)
        }))
    }

    /// Quarter-turn counterclockwise; an `nx x ny` grid becomes `ny x nx`.
    pub fn rotated90(&self) -> ScalarField {
        let (nx, ny) = (self.geometry.width(), self.geometry.height());
        let geom = GridGeometry::new(ny, nx, self.geometry.spacing())
            .expect("rotated geometry is valid");
        ScalarField::from_fn(geom, |i, j| self.at(j, nx - 1 - i))
    }
}

/// Two scalar channels per pixel: the auxiliary field `w` or the dual `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    geometry: GridGeometry,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            x: vec![0.0; geometry.len()],
            y: vec![0.0; geometry.len()],
            geometry,
        }
    }

    pub fn from_channels(geometry: GridGeometry, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != geometry.len() || y.len() != geometry.len() {
            return Err(TgvError::ContractViolation(format!(
                "channel lengths ({}, {}) do not match geometry ({})",
                x.len(),
                y.len(),
                geometry.len()
            )));
        }
        ensure_finite(&x, "vector field x channel")?;
        ensure_finite(&y, "vector field y channel")?;
        Ok(Self { geometry, x, y })
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    #[inline]
    pub fn y_mut(&mut self) -> &mut [f64] {
        &mut self.y
    }

    #[inline]
    pub fn channels_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.x, &mut self.y)
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> (f64, f64) {
        let idx = self.geometry.idx(row, col);
        (self.x[idx], self.y[idx])
    }

    pub fn inner_product(&self, other: &VectorField) -> Result<f64> {
        self.geometry
            .ensure_matches(&other.geometry, "vector inner product")?;
        Ok(self.dot(other))
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_pointwise_norm(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(&a, &b)| a.hypot(b))
            .fold(0.0, f64::max)
    }
}

/// Symmetric 2x2 tensor field: channels (xx, yy, xy), xy stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    geometry: GridGeometry,
    xx: Vec<f64>,
    yy: Vec<f64>,
    xy: Vec<f64>,
}

impl SymTensorField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            xx: vec![0.0; geometry.len()],
            yy: vec![0.0; geometry.len()],
            xy: vec![0.0; geometry.len()],
            geometry,
        }
    }

    pub fn from_channels(
        geometry: GridGeometry,
        xx: Vec<f64>,
        yy: Vec<f64>,
        xy: Vec<f64>,
    ) -> Result<Self> {
        if xx.len() != geometry.len() || yy.len() != geometry.len() || xy.len() != geometry.len() {
            return Err(TgvError::ContractViolation(format!(
                "channel lengths ({}, {}, {}) do not match geometry ({})",
                xx.len(),
                yy.len(),
                xy.len(),
                geometry.len()
            )));
        }
        ensure_finite(&xx, "tensor field xx channel")?;
        ensure_finite(&yy, "tensor field yy channel")?;
        ensure_finite(&xy, "tensor field xy channel")?;
        Ok(Self {
            geometry,
            xx,
            yy,
            xy,
        })
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn xx(&self) -> &[f64] {
        &self.xx
    }

    #[inline]
    pub fn yy(&self) -> &[f64] {
        &self.yy
    }

    #[inline]
    pub fn xy(&self) -> &[f64] {
        &self.xy
    }

    #[inline]
    pub fn channels_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.xx, &mut self.yy, &mut self.xy)
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> (f64, f64, f64) {
        let idx = self.geometry.idx(row, col);
        (self.xx[idx], self.yy[idx], self.xy[idx])
    }

    /// `h^2 * sum (a_xx b_xx + a_yy b_yy + 2 a_xy b_xy)`.
    pub fn inner_product(&self, other: &SymTensorField) -> Result<f64> {
        self.geometry
            .ensure_matches(&other.geometry, "tensor inner product")?;
        Ok(self.dot(other))
    }

    /// Largest pointwise tensor magnitude `sqrt(xx^2 + yy^2 + 2 xy^2)`.
    pub fn max_pointwise_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.xx.len() {
            let n = (self.xx[i] * self.xx[i]
                + self.yy[i] * self.yy[i]
                + 2.0 * self.xy[i] * self.xy[i])
                .sqrt();
            m = m.max(n);
        }
        m
    }
}

/// Discrete Radon norm of a vector measure: `h^2 * sum sqrt(px^2 + py^2)`.
pub fn norm_21_vec(p: &VectorField) -> f64 {
    let mut sum = 0.0;
    for i in 0..p.x.len() {
        sum += p.x[i].hypot(p.y[i]);
    }
    sum * p.geometry.cell_area()
}

/// Discrete Radon norm of a symmetric tensor measure:
/// `h^2 * sum sqrt(xx^2 + yy^2 + 2 xy^2)`.
pub fn norm_21_sym(q: &SymTensorField) -> f64 {
    let mut sum = 0.0;
    for i in 0..q.xx.len() {
        sum += (q.xx[i] * q.xx[i] + q.yy[i] * q.yy[i] + 2.0 * q.xy[i] * q.xy[i]).sqrt();
    }
    sum * q.geometry.cell_area()
}

/// Vector-space operations shared by all field kinds (and stacked tuples of
/// them). `dot` carries the `h^2` cell weight and the doubled xy channel;
/// `sum_sq`/`entry_count` are unweighted and feed RMS-style residual norms.
///
/// Geometry agreement is a precondition here (checked in debug builds);
/// the fallible public entry points live on the field types themselves.
pub trait InnerSpace: Clone {
    fn zeros_like(&self) -> Self;
    fn dot(&self, other: &Self) -> f64;
    fn scale_mut(&mut self, c: f64);
    /// `self += c * other`
    fn axpy(&mut self, c: f64, other: &Self);
    fn fill_randn(&mut self, rng: &mut SplitMix64);
    fn sum_sq(&self) -> f64;
    fn entry_count(&self) -> usize;

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Root mean square over all stored entries.
    fn rms(&self) -> f64 {
        (self.sum_sq() / self.entry_count() as f64).sqrt()
    }
}

fn slice_axpy(dst: &mut [f64], c: f64, src: &[f64]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += c * s;
    }
}

impl InnerSpace for ScalarField {
    fn zeros_like(&self) -> Self {
        ScalarField::zeros(self.geometry)
    }

    fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.geometry, other.geometry);
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s * self.geometry.cell_area()
    }

    fn scale_mut(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.geometry, other.geometry);
        slice_axpy(&mut self.values, c, &other.values);
    }

    fn fill_randn(&mut self, rng: &mut SplitMix64) {
        for v in &mut self.values {
            *v = rng.next_normal();
        }
    }

    fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn entry_count(&self) -> usize {
        self.values.len()
    }
}

impl InnerSpace for VectorField {
    fn zeros_like(&self) -> Self {
        VectorField::zeros(self.geometry)
    }

    fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.geometry, other.geometry);
        let mut s = 0.0;
        for i in 0..self.x.len() {
            s += self.x[i] * other.x[i] + self.y[i] * other.y[i];
        }
        s * self.geometry.cell_area()
    }

    fn scale_mut(&mut self, c: f64) {
        for v in self.x.iter_mut().chain(self.y.iter_mut()) {
            *v *= c;
        }
    }

    fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.geometry, other.geometry);
        slice_axpy(&mut self.x, c, &other.x);
        slice_axpy(&mut self.y, c, &other.y);
    }

    fn fill_randn(&mut self, rng: &mut SplitMix64) {
        for v in self.x.iter_mut().chain(self.y.iter_mut()) {
            *v = rng.next_normal();
        }
    }

    fn sum_sq(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|v| v * v).sum()
    }

    fn entry_count(&self) -> usize {
        2 * self.x.len()
    }
}

impl InnerSpace for SymTensorField {
    fn zeros_like(&self) -> Self {
        SymTensorField::zeros(self.geometry)
    }

    fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.geometry, other.geometry);
        let mut s = 0.0;
        for i in 0..self.xx.len() {
            s += self.xx[i] * other.xx[i]
                + self.yy[i] * other.yy[i]
                + 2.0 * self.xy[i] * other.xy[i];
        }
        s * self.geometry.cell_area()
    }

    fn scale_mut(&mut self, c: f64) {
        for v in self
            .xx
            .iter_mut()
            .chain(self.yy.iter_mut())
            .chain(self.xy.iter_mut())
        {
            *v *= c;
        }
    }

    fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.geometry, other.geometry);
        slice_axpy(&mut self.xx, c, &other.xx);
        slice_axpy(&mut self.yy, c, &other.yy);
        slice_axpy(&mut self.xy, c, &other.xy);
    }

    fn fill_randn(&mut self, rng: &mut SplitMix64) {
        for v in self
            .xx
            .iter_mut()
            .chain(self.yy.iter_mut())
            .chain(self.xy.iter_mut())
        {
            *v = rng.next_normal();
        }
    }

    fn sum_sq(&self) -> f64 {
        self.xx
            .iter()
            .chain(self.yy.iter())
            .chain(self.xy.iter())
            .map(|v| v * v)
            .sum()
    }

    fn entry_count(&self) -> usize {
        3 * self.xx.len()
    }
}

impl<A: InnerSpace, B: InnerSpace> InnerSpace for (A, B) {
    fn zeros_like(&self) -> Self {
        (self.0.zeros_like(), self.1.zeros_like())
    }

    fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0) + self.1.dot(&other.1)
    }

    fn scale_mut(&mut self, c: f64) {
        self.0.scale_mut(c);
        self.1.scale_mut(c);
    }

    fn axpy(&mut self, c: f64, other: &Self) {
        self.0.axpy(c, &other.0);
        self.1.axpy(c, &other.1);
    }

    fn fill_randn(&mut self, rng: &mut SplitMix64) {
        self.0.fill_randn(rng);
        self.1.fill_randn(rng);
    }

    fn sum_sq(&self) -> f64 {
        self.0.sum_sq() + self.1.sum_sq()
    }

    fn entry_count(&self) -> usize {
        self.0.entry_count() + self.1.entry_count()
    }
}

impl<A: InnerSpace, B: InnerSpace, C: InnerSpace> InnerSpace for (A, B, C) {
    fn zeros_like(&self) -> Self {
        (
            self.0.zeros_like(),
            self.1.zeros_like(),
            self.2.zeros_like(),
        )
    }

    fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0) + self.1.dot(&other.1) + self.2.dot(&other.2)
    }

    fn scale_mut(&mut self, c: f64) {
        self.0.scale_mut(c);
        self.1.scale_mut(c);
        self.2.scale_mut(c);
    }

    fn axpy(&mut self, c: f64, other: &Self) {
        self.0.axpy(c, &other.0);
        self.1.axpy(c, &other.1);
        self.2.axpy(c, &other.2);
    }

    fn fill_randn(&mut self, rng: &mut SplitMix64) {
        self.0.fill_randn(rng);
        self.1.fill_randn(rng);
        self.2.fill_randn(rng);
    }

    fn sum_sq(&self) -> f64 {
        self.0.sum_sq() + self.1.sum_sq() + self.2.sum_sq()
    }

    fn entry_count(&self) -> usize {
        self.0.entry_count() + self.1.entry_count() + self.2.entry_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(nx: usize, ny: usize) -> GridGeometry {
        GridGeometry::unit(nx, ny).unwrap()
    }

    #[test]
    fn geometry_rejects_bad_arguments() {
        assert!(GridGeometry::new(0, 3, 1.0).is_err());
        assert!(GridGeometry::new(3, 0, 1.0).is_err());
        assert!(GridGeometry::new(3, 3, 0.0).is_err());
        assert!(GridGeometry::new(3, 3, -1.0).is_err());
        assert!(GridGeometry::new(3, 3, f64::NAN).is_err());
    }

    #[test]
    fn from_values_rejects_non_finite() {
        let g = geom(2, 2);
        assert!(ScalarField::from_values(g, vec![0.0, 1.0, f64::NAN, 2.0]).is_err());
        assert!(ScalarField::from_values(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn inner_product_constant_ones_2x2() {
        let g = geom(2, 2);
        let a = ScalarField::constant(g, 1.0);
        assert_eq!(a.inner_product(&a).unwrap(), 4.0);
    }

    #[test]
    fn inner_product_with_zero_field() {
        let g = geom(3, 2);
        let z = ScalarField::zeros(g);
        let b = ScalarField::from_fn(g, |i, j| (i * 3 + j) as f64);
        assert_eq!(z.inner_product(&b).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_doubles_xy_channel() {
        let g = geom(1, 1);
        let q = SymTensorField::from_channels(g, vec![0.0], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(q.inner_product(&q).unwrap(), 2.0);
    }

    #[test]
    fn inner_product_rejects_geometry_mismatch() {
        let a = ScalarField::zeros(geom(2, 2));
        let b = ScalarField::zeros(geom(3, 2));
        assert!(matches!(
            a.inner_product(&b),
            Err(TgvError::GeometryMismatch(_))
        ));
        let c = ScalarField::zeros(GridGeometry::new(2, 2, 0.5).unwrap());
        assert!(a.inner_product(&c).is_err(), "spacing is part of geometry");
    }

    #[test]
    fn norm_21_vec_single_pixel() {
        let g = geom(1, 1);
        let p = VectorField::from_channels(g, vec![3.0], vec![4.0]).unwrap();
        assert_eq!(norm_21_vec(&p), 5.0);
    }

    #[test]
    fn norm_21_vec_zero() {
        assert_eq!(norm_21_vec(&VectorField::zeros(geom(4, 5))), 0.0);
    }

    #[test]
    fn norm_21_vec_cell_area_weighting() {
        let g = GridGeometry::new(3, 2, 0.5).unwrap();
        let p = VectorField::from_channels(g, vec![1.0; 6], vec![0.0; 6]).unwrap();
        assert!((norm_21_vec(&p) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn norm_21_sym_examples() {
        let g = geom(1, 1);
        let q = SymTensorField::from_channels(g, vec![1.0], vec![1.0], vec![1.0]).unwrap();
        assert!((norm_21_sym(&q) - 2.0).abs() < 1e-15);
        let z = SymTensorField::zeros(geom(2, 3));
        assert_eq!(norm_21_sym(&z), 0.0);
        let q = SymTensorField::from_channels(g, vec![0.0], vec![0.0], vec![1.0]).unwrap();
        assert!((norm_21_sym(&q) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rotated90_maps_pixels_correctly() {
        // 2x3 grid (width 2, height 3), values row-major 0..6
        let g = geom(2, 3);
        let u = ScalarField::from_values(g, (0..6).map(f64::from).collect()).unwrap();
        let r = u.rotated90();
        assert_eq!(r.geometry().width(), 3);
        assert_eq!(r.geometry().height(), 2);
        // column nx-1 of u becomes row 0 of r
        assert_eq!(r.at(0, 0), u.at(0, 1));
        assert_eq!(r.at(0, 1), u.at(1, 1));
        assert_eq!(r.at(0, 2), u.at(2, 1));
        assert_eq!(r.at(1, 0), u.at(0, 0));
        // four quarter turns restore the field
        let back = r.rotated90().rotated90().rotated90();
        assert_eq!(back, u);
    }

    #[test]
    fn interior_crop_extracts_center() {
        let g = geom(5, 4);
        let u = ScalarField::from_fn(g, |i, j| (10 * i + j) as f64);
        let c = u.interior_crop(1, 1).unwrap();
        assert_eq!(c.geometry().width(), 3);
        assert_eq!(c.geometry().height(), 2);
        assert_eq!(c.at(0, 0), u.at(1, 1));
        assert_eq!(c.at(1, 2), u.at(2, 3));
        assert!(u.interior_crop(3, 0).is_err());
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric(seed in 0u64..1000) {
            let g = geom(5, 4);
            let mut rng = SplitMix64::new(seed);
            let mut a = VectorField::zeros(g);
            let mut b = VectorField::zeros(g);
            a.fill_randn(&mut rng);
            b.fill_randn(&mut rng);
            let ab = a.inner_product(&b).unwrap();
            let ba = b.inner_product(&a).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn norm_21_vec_is_one_homogeneous(seed in 0u64..1000, c in -8.0f64..8.0) {
            let g = geom(4, 4);
            let mut rng = SplitMix64::new(seed);
            let mut p = VectorField::zeros(g);
            p.fill_randn(&mut rng);
            let base = norm_21_vec(&p);
            let mut scaled = p.clone();
            scaled.scale_mut(c);
            let rel = (norm_21_vec(&scaled) - c.abs() * base).abs() / (1.0 + base);
            prop_assert!(rel <= 1e-12);
        }

        #[test]
        fn norms_satisfy_triangle_inequality(seed in 0u64..1000) {
            let g = geom(4, 3);
            let mut rng = SplitMix64::new(seed);
            let mut p = VectorField::zeros(g);
            let mut q = VectorField::zeros(g);
            p.fill_randn(&mut rng);
            q.fill_randn(&mut rng);
            let mut sum = p.clone();
            sum.axpy(1.0, &q);
            prop_assert!(norm_21_vec(&sum) <= norm_21_vec(&p) + norm_21_vec(&q) + 1e-12);

            let mut s = SymTensorField::zeros(g);
            let mut t = SymTensorField::zeros(g);
            s.fill_randn(&mut rng);
            t.fill_randn(&mut rng);
            let mut st = s.clone();
            st.axpy(1.0, &t);
            prop_assert!(norm_21_sym(&st) <= norm_21_sym(&s) + norm_21_sym(&t) + 1e-12);
        }
    }
}
