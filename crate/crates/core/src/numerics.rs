//! Uniform grids, complex fields, finite differences and quadrature.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Half-width of the centered derivative stencil.
const HALF: usize = 4;
const WIDTH: usize = 2 * HALF + 1;

/// Uniform grid on `[-L, L]` with `N` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {l}")));
        }
        if n < 16 {
            return Err(Error::InvalidGrid(format!("need at least 16 nodes, got {n}")));
        }
        Ok(Grid { l, n, h: 2.0 * l / (n - 1) as f64 })
    }

    /// Default experiment grid, `L = 40`, `N = 4096`.
    pub fn standard() -> Self {
        Grid::new(40.0, 4096).expect("standard grid is valid")
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.l
        } else {
            -self.l + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.l) / self.h).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Same interval with the spacing halved (every old node is kept).
    pub fn refined(&self) -> Grid {
        Grid::new(self.l, 2 * self.n - 1).expect("refinement of a valid grid")
    }

    /// Grid with the same spacing ratio on twice the half-width.
    pub fn doubled(&self) -> Grid {
        Grid::new(2.0 * self.l, 2 * self.n - 1).expect("doubling of a valid grid")
    }
}

/// Complex samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![C64::new(0.0, 0.0); grid.n()] }
    }

    pub fn constant(grid: Grid, c: C64) -> Self {
        Field { grid, values: vec![c; grid.n()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> C64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Field { grid, values }
    }

    pub fn from_real_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Field::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Field::new(grid, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(C64, C64) -> C64) -> Field {
        assert_same_grid(self, other);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field { grid: self.grid, values }
    }

    pub fn conj(&self) -> Field {
        self.map(|z| z.conj())
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn real_part(&self) -> Field {
        self.map(|z| C64::new(z.re, 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn sup_im(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Discrete L2 norm, trapezoid weights.
    pub fn l2_norm(&self) -> f64 {
        integrate(&self.map(|z| C64::new(z.norm_sqr(), 0.0))).re.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest modulus over the outer `fraction` of nodes on either side.
    pub fn edge_sup(&self, fraction: f64) -> f64 {
        let k = ((self.len() as f64 * fraction).ceil() as usize).max(1);
        let n = self.len();
        self.values[..k]
            .iter()
            .chain(&self.values[n - k..])
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Samples taken at every `step`-th node, for comparison across refined grids.
    pub fn subsample(&self, step: usize, coarse: Grid) -> Result<Field> {
        Field::new(coarse, self.values.iter().step_by(step).copied().collect())
    }
}

fn assert_same_grid(a: &Field, b: &Field) {
    assert!(a.grid == b.grid, "field arithmetic across different grids");
}

macro_rules! field_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<&Field> for Field {
            type Output = Field;
            fn $method(mut self, rhs: &Field) -> Field {
                assert_same_grid(&self, rhs);
                for (a, &b) in self.values.iter_mut().zip(&rhs.values) {
                    *a = *a $op b;
                }
                self
            }
        }
        impl $tr<Field> for Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                self $op &rhs
            }
        }
        impl $tr<Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                self $op &rhs
            }
        }
        impl $tr<C64> for &Field {
            type Output = Field;
            fn $method(self, rhs: C64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<C64> for Field {
            type Output = Field;
            fn $method(mut self, rhs: C64) -> Field {
                for a in self.values.iter_mut() {
                    *a = *a $op rhs;
                }
                self
            }
        }
        impl $tr<f64> for &Field {
            type Output = Field;
            fn $method(self, rhs: f64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<f64> for Field {
            type Output = Field;
            fn $method(mut self, rhs: f64) -> Field {
                for a in self.values.iter_mut() {
                    *a = *a $op rhs;
                }
                self
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);
field_binop!(Mul, mul, *);
field_binop!(Div, div, /);

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|a| -a)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        -&self
    }
}

/// A state `(phi, phi_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub phi: Field,
    pub phi_t: Field,
}

impl FieldPair {
    pub fn new(phi: Field, phi_t: Field) -> Result<Self> {
        if phi.grid() != phi_t.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(FieldPair { phi, phi_t })
    }

    pub fn zeros(grid: Grid) -> Self {
        FieldPair { phi: Field::zeros(grid), phi_t: Field::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn scale(&self, c: f64) -> FieldPair {
        FieldPair { phi: &self.phi * c, phi_t: &self.phi_t * c }
    }

    pub fn conj(&self) -> FieldPair {
        FieldPair { phi: self.phi.conj(), phi_t: self.phi_t.conj() }
    }
}

impl Add<&FieldPair> for &FieldPair {
    type Output = FieldPair;
    fn add(self, rhs: &FieldPair) -> FieldPair {
        FieldPair { phi: &self.phi + &rhs.phi, phi_t: &self.phi_t + &rhs.phi_t }
    }
}

impl Sub<&FieldPair> for &FieldPair {
    type Output = FieldPair;
    fn sub(self, rhs: &FieldPair) -> FieldPair {
        FieldPair { phi: &self.phi - &rhs.phi, phi_t: &self.phi_t - &rhs.phi_t }
    }
}

/// First-derivative weights for nodes `0..WIDTH` evaluated at node `j` (unit spacing).
fn stencils() -> &'static [[f64; WIDTH]; WIDTH] {
    static WEIGHTS: OnceLock<[[f64; WIDTH]; WIDTH]> = OnceLock::new();
    WEIGHTS.get_or_init(|| {
        let mut w = [[0.0; WIDTH]; WIDTH];
        let xs: Vec<f64> = (0..WIDTH).map(|i| i as f64).collect();
        for (j, row) in w.iter_mut().enumerate() {
            row.copy_from_slice(&fornberg(j as f64, &xs, 1));
        }
        w
    })
}

/// Fornberg's recursion for finite-difference weights of the `m`-th derivative at `z`.
pub fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Spatial derivative by centered finite differences with one-sided stencils of the
/// same order at the two ends.
///
/// The stencil is 8th order, which is the smallest order that resolves the kink
/// profiles of the default grid to the residual levels used in the test suites.
pub fn differentiate(f: &Field) -> Field {
    let g = *f.grid();
    let n = g.n();
    let v = f.values();
    let w = stencils();
    let inv_h = 1.0 / g.h();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        let (start, j) = if i < HALF {
            (0, i)
        } else if i + HALF >= n {
            (n - WIDTH, i - (n - WIDTH))
        } else {
            (i - HALF, HALF)
        };
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..WIDTH {
            acc += v[start + k] * w[j][k];
        }
        *o = acc * inv_h;
    }
    Field { grid: g, values: out }
}

/// Trapezoid rule, `h * (f_0/2 + f_1 + ... + f_{N-1}/2)`.
pub fn integrate(f: &Field) -> C64 {
    let v = f.values();
    let n = v.len();
    let inner: C64 = v[1..n - 1].iter().sum();
    (inner + (v[0] + v[n - 1]) * 0.5) * f.grid().h()
}

/// Bilinear pairing `∫ f g` (no conjugation).
pub fn pairing(f: &Field, g: &Field) -> C64 {
    integrate(&(f * g))
}

/// Where a running integral is anchored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    LeftEdge,
    /// The node nearest to `x = 0`.
    Zero,
    RightEdge,
}

/// Running integral from the chosen origin, zero at the origin.
///
/// Trapezoid partial sums with the endpoint-derivative (Euler-Maclaurin) correction,
/// which makes the running integral 4th-order accurate.
pub fn cumulative_integral(f: &Field, origin: Origin) -> Field {
    let g = *f.grid();
    let h = g.h();
    let v = f.values();
    let n = v.len();
    let fp = differentiate(f);
    let fp = fp.values();
    let mut t = vec![C64::new(0.0, 0.0); n];
    for i in 1..n {
        t[i] = t[i - 1] + (v[i] + v[i - 1]) * (0.5 * h);
    }
    let corr = h * h / 12.0;
    for i in 0..n {
        t[i] -= fp[i] * corr;
    }
    let o = match origin {
        Origin::LeftEdge => 0,
        Origin::Zero => g.nearest_index(0.0),
        Origin::RightEdge => n - 1,
    };
    let base = t[o];
    for z in t.iter_mut() {
        *z -= base;
    }
    Field { grid: g, values: t }
}

/// `sqrt(∫ |phi|^2 + |phi_x|^2 + |phi_t|^2)`.
pub fn energy_norm(p: &FieldPair) -> f64 {
    let dx = differentiate(&p.phi);
    let s = p
        .phi
        .values()
        .iter()
        .zip(dx.values())
        .zip(p.phi_t.values())
        .map(|((a, b), c)| C64::new(a.norm_sqr() + b.norm_sqr() + c.norm_sqr(), 0.0))
        .collect();
    let dens = Field { grid: *p.grid(), values: s };
    integrate(&dens).re.max(0.0).sqrt()
}

/// `energy_norm` of `(phi, phi_t)` given as separate fields.
pub fn energy_norm_of(phi: &Field, phi_t: &Field) -> f64 {
    energy_norm(&FieldPair { phi: phi.clone(), phi_t: phi_t.clone() })
}
