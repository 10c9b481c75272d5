//! Uniform-grid scalar fields on a box in one or two dimensions, with the
//! De Giorgi annular domains and cutoff functions.

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

/// Node layout of a uniform grid. One-dimensional grids use `shape[1] == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    shape: [usize; 2],
    h: f64,
    origin: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, shape: [usize; 2], h: f64, origin: [f64; 2]) -> Result<Self, FieldError> {
        if dim != 1 && dim != 2 {
            return Err(FieldError::Dimension(dim));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(FieldError::Spacing(h));
        }
        let shape = if dim == 1 { [shape[0], 1] } else { shape };
        let origin = if dim == 1 { [origin[0], 0.0] } else { origin };
        for &n in &shape[..dim] {
            if n == 0 {
                return Err(FieldError::GridTooSmall { needed: 1, got: 0 });
            }
        }
        Ok(Self {
            dim,
            shape,
            h,
            origin,
        })
    }

    pub fn line(n: usize, h: f64, x0: f64) -> Result<Self, FieldError> {
        Self::new(1, [n, 1], h, [x0, 0.0])
    }

    /// Box grid with nodes at integer multiples of `h`. The walls sit at
    /// `±k h` with `k = ceil(L / h)`, so the box covers `[-L, L]^dim`.
    pub fn centered_box(dim: usize, half_width: f64, h: f64) -> Result<Self, FieldError> {
        if !(h > 0.0) {
            return Err(FieldError::Spacing(h));
        }
        let k = (half_width / h - 1e-9).ceil().max(1.0) as usize;
        let x0 = -(k as f64) * h;
        Self::new(dim, [2 * k + 1, 2 * k + 1], h, [x0, x0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape[0], idx / self.shape[0])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ij(idx);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    /// Euclidean distance of node `idx` from the origin of coordinates.
    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.coords(idx);
        norm(&x[..self.dim])
    }

    /// Whether node `idx` lies on a wall of the box.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        let on_x = i == 0 || i + 1 == self.shape[0];
        if self.dim == 1 {
            on_x
        } else {
            on_x || j == 0 || j + 1 == self.shape[1]
        }
    }

    /// Node nearest to `x`, clamped into the grid; the flag is false when `x`
    /// lies outside the cells covered by the grid.
    pub fn nearest(&self, x: &[f64]) -> (usize, bool) {
        let mut inside = true;
        let mut ij = [0usize; 2];
        for a in 0..self.dim {
            let s = ((x[a] - self.origin[a]) / self.h).round();
            let n = self.shape[a] as f64;
            if !(s >= 0.0 && s <= n - 1.0) {
                inside = false;
            }
            ij[a] = s.clamp(0.0, n - 1.0) as usize;
        }
        (self.index(ij[0], ij[1]), inside)
    }

    /// Whether `x` lies inside the closed box spanned by the nodes.
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| {
            let lo = self.origin[a];
            let hi = lo + (self.shape[a] - 1) as f64 * self.h;
            x[a] >= lo && x[a] <= hi
        })
    }

    fn check_min_nodes(&self, needed: usize) -> Result<(), FieldError> {
        for &n in &self.shape[..self.dim] {
            if n < needed {
                return Err(FieldError::GridTooSmall { needed, got: n });
            }
        }
        Ok(())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Nonnegative nodal density on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    /// Wall nodes carry the homogeneous Dirichlet value.
    pub dirichlet: bool,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            dirichlet: true,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            dirichlet: true,
        })
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|k| {
                let x = grid.coords(k);
                f(&x[..dim])
            })
            .collect();
        Self {
            grid,
            values,
            dirichlet: true,
        }
    }

    pub fn with_dirichlet(mut self, dirichlet: bool) -> Self {
        self.dirichlet = dirichlet;
        self
    }

    /// Zero the wall nodes when the Dirichlet flag is set.
    pub fn enforce_dirichlet(&mut self) {
        if !self.dirichlet {
            return;
        }
        let [nx, ny] = self.grid.shape;
        let v = &mut self.values;
        if self.grid.dim == 1 {
            v[0] = 0.0;
            v[nx - 1] = 0.0;
            return;
        }
        v[..nx].fill(0.0);
        v[nx * (ny - 1)..].fill(0.0);
        for j in 1..ny - 1 {
            v[nx * j] = 0.0;
            v[nx * j + nx - 1] = 0.0;
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise map onto the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            dirichlet: self.dirichlet,
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            dirichlet: self.dirichlet,
        })
    }

    /// Value at the node nearest to `x`.
    pub fn nearest_value(&self, x: &[f64]) -> f64 {
        self.values[self.grid.nearest(x).0]
    }

    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Nodal gradient of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// One component vector per axis.
    pub components: Vec<Vec<f64>>,
    /// `|grad u| = sqrt(sum_i (du/dx_i)^2)`.
    pub norm: Vec<f64>,
}

/// Central differences in the interior and second-order one-sided
/// differences on the walls.
pub fn gradient(f: &ScalarField) -> Result<Gradient, FieldError> {
    let grid = f.grid();
    grid.check_min_nodes(3)?;
    let h = grid.h();
    let [nx, ny] = grid.shape();
    let v = f.values();
    let mut components = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let (n_axis, stride) = if axis == 0 { (nx, 1) } else { (ny, nx) };
        let mut comp = vec![0.0; v.len()];
        for (k, c) in comp.iter_mut().enumerate() {
            let (i, j) = grid.ij(k);
            let pos = if axis == 0 { i } else { j };
            *c = if pos == 0 {
                (-3.0 * v[k] + 4.0 * v[k + stride] - v[k + 2 * stride]) / (2.0 * h)
            } else if pos + 1 == n_axis {
                (3.0 * v[k] - 4.0 * v[k - stride] + v[k - 2 * stride]) / (2.0 * h)
            } else {
                (v[k + stride] - v[k - stride]) / (2.0 * h)
            };
        }
        components.push(comp);
    }
    let norm = (0..v.len())
        .map(|k| components.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt())
        .collect();
    Ok(Gradient { components, norm })
}

/// Integration region, selected by node centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Full,
    /// `Omega \ B_radius`: nodes with `|x| >= radius`.
    Exterior { radius: f64 },
    /// Nodes with `inner <= |x| < outer`.
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    #[inline]
    pub fn contains_radius(&self, rho: f64) -> bool {
        match *self {
            Region::Full => true,
            Region::Exterior { radius } => rho >= radius,
            Region::Annulus { inner, outer } => rho >= inner && rho < outer,
        }
    }
}

/// Midpoint-rule quadrature `sum values * h^dim` over the nodes in `region`.
pub fn integrate(f: &ScalarField, region: Region) -> f64 {
    integrate_values(f.grid(), f.values(), region)
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64], region: Region) -> f64 {
    if region == Region::Full {
        return values.iter().sum::<f64>() * grid.cell_volume();
    }
    let sum: f64 = values
        .iter()
        .enumerate()
        .filter(|(k, _)| region.contains_radius(grid.radius(*k)))
        .map(|(_, v)| *v)
        .sum();
    sum * grid.cell_volume()
}

/// Largest `|x|` over nodes where `f > threshold`; zero if there are none.
pub fn support_radius(f: &ScalarField, threshold: f64) -> f64 {
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > threshold)
        .map(|(k, _)| f.grid().radius(k))
        .fold(0.0, f64::max)
}

/// Default absolute threshold for [`support_radius`].
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Radii of the nested annular domains `Omega_n = Omega \ B_{r_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeGiorgiGeometry {
    pub r0: f64,
    pub r: f64,
    pub n_max: usize,
}

impl DeGiorgiGeometry {
    pub fn new(r0: f64, r: f64, n_max: usize) -> Self {
        Self { r0, r, n_max }
    }

    /// `r_n = 2r (1 - 2^-(n+1))`.
    pub fn radius(&self, n: usize) -> f64 {
        2.0 * self.r * (1.0 - 0.5f64.powi(n as i32 + 1))
    }

    /// `(r_n + r_{n+1}) / 2`.
    pub fn mid_radius(&self, n: usize) -> f64 {
        0.5 * (self.radius(n) + self.radius(n + 1))
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.n_max + 1).map(|n| self.radius(n)).collect()
    }

    pub fn mid_radii(&self) -> Vec<f64> {
        (0..=self.n_max).map(|n| self.mid_radius(n)).collect()
    }

    pub fn omega(&self, n: usize) -> Region {
        Region::Exterior {
            radius: self.radius(n),
        }
    }

    /// Largest `n` (capped at `n_max + 1`) with `|x| >= r_n`, or `None` inside `B_{r_0}`.
    pub fn level(&self, rho: f64) -> Option<usize> {
        let mut level = None;
        for n in 0..=self.n_max + 1 {
            if rho >= self.radius(n) {
                level = Some(n);
            } else {
                break;
            }
        }
        level
    }
}

/// Piecewise-linear radial cutoff: 0 on `B_{r_n}`, 1 outside `B_{mid r_n}`.
pub fn cutoff_eta(geom: &DeGiorgiGeometry, n: usize, x: &[f64]) -> f64 {
    let rho = norm(x);
    let (lo, hi) = (geom.radius(n), geom.mid_radius(n));
    if rho <= lo {
        0.0
    } else if rho >= hi {
        1.0
    } else {
        (rho - lo) / (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, h: f64, x0: f64, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_fn(Grid::line(n, h, x0).unwrap(), |x| f(x[0]))
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = line(11, 0.1, 0.0, |_| 2.5);
        let g = gradient(&f).unwrap();
        assert!(g.norm.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let f = line(21, 0.25, -2.0, |x| 3.0 * x);
        let g = gradient(&f).unwrap();
        for &d in &g.components[0] {
            assert!((d - 3.0).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn gradient_of_square_at_one() {
        // nodes 0.0, 0.1, ..., 2.0; node 10 sits at x = 1
        let f = line(21, 0.1, 0.0, |x| x * x);
        let g = gradient(&f).unwrap();
        assert!((g.components[0][10] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_needs_three_nodes() {
        let f = line(2, 0.1, 0.0, |x| x);
        assert!(matches!(gradient(&f), Err(FieldError::GridTooSmall { .. })));
    }

    #[test]
    fn gradient_two_dimensional_linear() {
        let grid = Grid::centered_box(2, 1.0, 0.25).unwrap();
        let f = ScalarField::from_fn(grid, |x| 2.0 * x[0] - x[1]);
        let g = gradient(&f).unwrap();
        for k in 0..f.values().len() {
            assert!((g.components[0][k] - 2.0).abs() < 1e-12);
            assert!((g.components[1][k] + 1.0).abs() < 1e-12);
            assert!((g.norm[k] - 5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_values() {
        let geom = DeGiorgiGeometry::new(1.0, 4.0, 4);
        assert_eq!(cutoff_eta(&geom, 0, &[0.0]), 0.0);
        assert_eq!(cutoff_eta(&geom, 0, &[geom.mid_radius(0)]), 1.0);
        assert_eq!(cutoff_eta(&geom, 0, &[7.9]), 1.0);
        // r_0 = r = 4 and mid radius 5
        assert_eq!(geom.radius(0), 4.0);
        assert_eq!(geom.mid_radius(0), 5.0);
        assert!((cutoff_eta(&geom, 0, &[4.5]) - 0.5).abs() < 1e-15);
        assert!((cutoff_eta(&geom, 0, &[0.0, -4.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radii_increase_to_two_r() {
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 30);
        let radii = geom.radii();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
        assert!(radii.iter().all(|&r| r < 5.0));
        assert!((radii[30] - 5.0).abs() < 1e-8);
    }

    #[test]
    fn integrate_examples() {
        let zero = line(101, 0.01, 0.0, |_| 0.0);
        assert_eq!(integrate(&zero, Region::Full), 0.0);
        let one = line(101, 0.01, 0.0, |_| 1.0);
        assert!((integrate(&one, Region::Full) - 1.0).abs() <= 0.01 + 1e-12);
        let x = line(101, 0.01, 0.0, |x| x);
        assert!((integrate(&x, Region::Full) - 0.5).abs() <= 0.01 + 1e-12);
        // empty region
        assert_eq!(integrate(&one, Region::Exterior { radius: 5.0 }), 0.0);
    }

    #[test]
    fn support_radius_examples() {
        let zero = line(41, 0.1, -2.0, |_| 0.0);
        assert_eq!(support_radius(&zero, 0.0), 0.0);
        let h = 0.05;
        let ind = line(81, h, -2.0, |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 });
        assert!((support_radius(&ind, 0.5) - 1.0).abs() <= h);
    }

    #[test]
    fn nearest_node_flags_outside_points() {
        let grid = Grid::line(11, 0.1, 0.0).unwrap();
        assert_eq!(grid.nearest(&[0.31]), (3, true));
        assert_eq!(grid.nearest(&[-0.5]), (0, false));
        assert_eq!(grid.nearest(&[2.0]), (10, false));
    }

    #[test]
    fn dirichlet_zeroes_walls() {
        let grid = Grid::centered_box(2, 1.0, 0.5).unwrap();
        let mut f = ScalarField::from_fn(grid, |_| 1.0);
        f.enforce_dirichlet();
        let inner: f64 = f.values().iter().sum();
        assert_eq!(inner, 9.0);
    }

    #[test]
    fn level_matches_exterior_regions() {
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 8);
        for &rho in &[0.0, 2.49, 2.5, 3.0, 3.75, 4.9, 4.999, 6.0] {
            let level = geom.level(rho);
            for n in 0..=geom.n_max + 1 {
                let inside = geom.omega(n).contains_radius(rho);
                assert_eq!(inside, level.is_some_and(|l| l >= n), "rho {rho} n {n}");
            }
        }
    }
}
