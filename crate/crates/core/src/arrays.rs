//! Array geometries, steering vectors, the DFT grid of orthogonal beam
//! directions, and the unitary lens transform.
//!
//! Directions are normalized spatial frequencies `φ = (d/λ)·sinθ` with
//! half-wavelength spacing, so the physical range maps into `[-1/2, 1/2)`.
//! Beam and element indices are 0-based. For a planar array the flat index of
//! the pair `(az, el)` is `az * n2 + el`, the order produced by `a_az ⊗ a_el`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrayGeometry {
    Ula { n: usize },
    Upa { n1: usize, n2: usize },
}

impl ArrayGeometry {
    pub fn ula(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("ULA needs at least 2 elements, got {n}")));
        }
        Ok(ArrayGeometry::Ula { n })
    }

    pub fn upa(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::Domain(format!(
                "UPA needs at least 2 elements per dimension, got {n1}x{n2}"
            )));
        }
        Ok(ArrayGeometry::Upa { n1, n2 })
    }

    /// Re-checks the size invariants, for values that bypassed the constructors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrayGeometry::Ula { n } => Self::ula(n).map(|_| ()),
            ArrayGeometry::Upa { n1, n2 } => Self::upa(n1, n2).map(|_| ()),
        }
    }

    pub fn num_elements(&self) -> usize {
        match *self {
            ArrayGeometry::Ula { n } => n,
            ArrayGeometry::Upa { n1, n2 } => n1 * n2,
        }
    }

    /// Per-dimension sizes `(azimuth, elevation)`; a ULA has a trivial
    /// elevation dimension of size 1.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            ArrayGeometry::Ula { n } => (n, 1),
            ArrayGeometry::Upa { n1, n2 } => (n1, n2),
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, ArrayGeometry::Upa { .. })
    }

    pub fn flat_index(&self, az: usize, el: usize) -> usize {
        let (n1, n2) = self.dims();
        debug_assert!(az < n1 && el < n2);
        az * n2 + el
    }

    pub fn beam_coords(&self, flat: usize) -> (usize, usize) {
        let (_, n2) = self.dims();
        (flat / n2, flat % n2)
    }

    pub fn grid_directions(&self) -> GridDirections {
        match *self {
            ArrayGeometry::Ula { n } => GridDirections::Linear(grid_axis(n)),
            ArrayGeometry::Upa { n1, n2 } => GridDirections::Planar {
                az: grid_axis(n1),
                el: grid_axis(n2),
            },
        }
    }

    /// Direction of the grid beam with the given flat index.
    pub fn grid_direction(&self, flat: usize) -> Direction {
        match *self {
            ArrayGeometry::Ula { n } => Direction::Linear(SpatialDirection(grid_point(n, flat))),
            ArrayGeometry::Upa { n1, n2 } => {
                let (a, e) = self.beam_coords(flat);
                Direction::Planar {
                    az: SpatialDirection(grid_point(n1, a)),
                    el: SpatialDirection(grid_point(n2, e)),
                }
            }
        }
    }

    pub fn steering_vector(&self, dir: Direction) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.num_elements()];
        self.accumulate_steering(dir, C64::new(1.0, 0.0), &mut out)?;
        Ok(out)
    }

    /// Adds `weight · a(dir)` into `acc` without allocating the vector.
    pub(crate) fn accumulate_steering(&self, dir: Direction, weight: C64, acc: &mut [C64]) -> Result<()> {
        debug_assert_eq!(acc.len(), self.num_elements());
        match (*self, dir) {
            (ArrayGeometry::Ula { n }, Direction::Linear(phi)) => {
                let scale = weight / (n as f64).sqrt();
                for_each_axis_phase(n, phi.0, |s, z| acc[s] += scale * z);
                Ok(())
            }
            (ArrayGeometry::Upa { n1, n2 }, Direction::Planar { az, el }) => {
                let mut el_vec = Vec::with_capacity(n2);
                for_each_axis_phase(n2, el.0, |_, z| el_vec.push(z));
                let scale = weight / ((n1 * n2) as f64).sqrt();
                for_each_axis_phase(n1, az.0, |a, za| {
                    let w = scale * za;
                    for (dst, &ze) in acc[a * n2..(a + 1) * n2].iter_mut().zip(&el_vec) {
                        *dst += w * ze;
                    }
                });
                Ok(())
            }
            (g, d) => Err(Error::Dimension(format!("direction {d:?} does not match geometry {g}"))),
        }
    }
}

impl fmt::Display for ArrayGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayGeometry::Ula { n } => write!(f, "ula:{n}"),
            ArrayGeometry::Upa { n1, n2 } => write!(f, "upa:{n1}x{n2}"),
        }
    }
}

impl std::str::FromStr for ArrayGeometry {
    type Err = Error;

    /// Parses `ula:<n>` or `upa:<n1>x<n2>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse geometry {s:?}; expected ula:N or upa:N1xN2"));
        let (kind, dims) = s.split_once(':').ok_or_else(bad)?;
        match kind.to_ascii_lowercase().as_str() {
            "ula" => ArrayGeometry::ula(dims.trim().parse().map_err(|_| bad())?),
            "upa" => {
                let (a, b) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
                ArrayGeometry::upa(
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                )
            }
            _ => Err(bad()),
        }
    }
}

/// A normalized spatial direction in `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpatialDirection(f64);

impl SpatialDirection {
    pub fn new(phi: f64) -> Result<Self> {
        if (-0.5..0.5).contains(&phi) {
            Ok(Self(phi))
        } else {
            Err(Error::Domain(format!("spatial direction {phi} outside [-1/2, 1/2)")))
        }
    }

    /// Wraps any finite value onto the period-1 circle `[-1/2, 1/2)`.
    pub fn wrapped(phi: f64) -> Self {
        let mut w = phi - phi.round();
        // round() sends +0.5 up, so w lands in [-0.5, 0.5]; fold the closed end
        if w >= 0.5 {
            w -= 1.0;
        }
        if w < -0.5 {
            w += 1.0;
        }
        Self(w)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SpatialDirection {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpatialDirection> for f64 {
    fn from(d: SpatialDirection) -> f64 {
        d.0
    }
}

/// Circular distance between two directions on the unit-period circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// A path or cluster direction for either array kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Direction {
    Linear(SpatialDirection),
    Planar { az: SpatialDirection, el: SpatialDirection },
}

impl Direction {
    pub fn azimuth(&self) -> SpatialDirection {
        match *self {
            Direction::Linear(p) => p,
            Direction::Planar { az, .. } => az,
        }
    }

    pub fn elevation(&self) -> Option<SpatialDirection> {
        match *self {
            Direction::Linear(_) => None,
            Direction::Planar { el, .. } => Some(el),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridDirections {
    Linear(Vec<f64>),
    Planar { az: Vec<f64>, el: Vec<f64> },
}

/// Antenna index set `{s - (m-1)/2 : s = 0..m}`.
pub fn element_indices(m: usize) -> Vec<f64> {
    let c = (m as f64 - 1.0) / 2.0;
    (0..m).map(|s| s as f64 - c).collect()
}

fn grid_point(m: usize, i: usize) -> f64 {
    (i as f64 - (m as f64 - 1.0) / 2.0) / m as f64
}

/// Grid beam directions of one dimension, strictly increasing.
pub fn grid_axis(m: usize) -> Vec<f64> {
    (0..m).map(|i| grid_point(m, i)).collect()
}

/// Visits `e^{-j2πφ·idx_s}` for every element of an `m`-element axis, using a
/// phase recursion renormalized every few steps.
fn for_each_axis_phase(m: usize, phi: f64, mut f: impl FnMut(usize, C64)) {
    let c = (m as f64 - 1.0) / 2.0;
    let step = C64::from_polar(1.0, -2.0 * PI * phi);
    let mut z = C64::from_polar(1.0, 2.0 * PI * phi * c);
    for s in 0..m {
        if s % 32 == 0 {
            z = C64::from_polar(1.0, -2.0 * PI * phi * (s as f64 - c));
        }
        f(s, z);
        z *= step;
    }
}

/// Unit-norm steering vector of an `m`-element uniform axis.
pub fn axis_steering_vector(m: usize, phi: f64) -> Vec<C64> {
    let scale = 1.0 / (m as f64).sqrt();
    let mut v = Vec::with_capacity(m);
    for_each_axis_phase(m, phi, |_, z| v.push(z * scale));
    v
}

/// `sin(Mπx) / (M·sin(πx))`, continuously extended to integer `x`.
///
/// At `x = k` the value is `(-1)^{k(M-1)}`. The kernel satisfies
/// `D(x + 1) = (-1)^{M-1} D(x)`, so `|D|` and `D²` have period 1.
pub fn dirichlet_kernel(m: usize, x: f64) -> f64 {
    assert!(m >= 1, "kernel order must be positive");
    let k = x.round();
    let r = x - k;
    let sign = if (k as i64 * (m as i64 - 1)).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let mf = m as f64;
    let core = if r.abs() < 1e-8 {
        // Taylor expansion about the peak; the next term is O((Mr)^4)
        1.0 - (mf * mf - 1.0) * (PI * r).powi(2) / 6.0
    } else {
        (mf * PI * r).sin() / (mf * (PI * r).sin())
    };
    sign * core
}

/// Unitary DFT ("lens") transform `U` whose rows are `aᴴ(φ̂_i)`.
///
/// `apply` runs through an FFT with pre/post twiddles; `matrix` materializes the
/// dense form. For a planar array `U = U_az ⊗ U_el`.
#[derive(Clone)]
pub struct LensTransform {
    geometry: ArrayGeometry,
    az: AxisTransform,
    el: Option<AxisTransform>,
}

impl fmt::Debug for LensTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LensTransform")
            .field("geometry", &self.geometry)
            .finish()
    }
}

#[derive(Clone)]
struct AxisTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<C64>,
    post: Vec<C64>,
}

impl AxisTransform {
    // (U h)_i = m^{-1/2} Σ_s e^{j2π(i-c)(s-c)/m} h_s,  c = (m-1)/2
    //         = post_i · Σ_s e^{+j2π i s/m} (pre_s h_s)
    fn new(m: usize, planner: &mut FftPlanner<f64>) -> Self {
        let mf = m as f64;
        let c = (mf - 1.0) / 2.0;
        let pre = (0..m)
            .map(|s| C64::from_polar(1.0, -2.0 * PI * c * s as f64 / mf))
            .collect();
        let post = (0..m)
            .map(|i| C64::from_polar(1.0 / mf.sqrt(), 2.0 * PI * (c * c - c * i as f64) / mf))
            .collect();
        Self {
            m,
            fft: planner.plan_fft_inverse(m),
            pre,
            post,
        }
    }

    fn apply_in_place(&self, buf: &mut [C64]) {
        for (x, p) in buf.iter_mut().zip(&self.pre) {
            *x *= p;
        }
        self.fft.process(buf);
        for (x, p) in buf.iter_mut().zip(&self.post) {
            *x *= p;
        }
    }

    fn dense(&self) -> CMatrix {
        let grid = grid_axis(self.m);
        let idx = element_indices(self.m);
        let scale = 1.0 / (self.m as f64).sqrt();
        CMatrix::from_fn(self.m, self.m, |i, s| {
            C64::from_polar(scale, 2.0 * PI * grid[i] * idx[s])
        })
    }
}

impl LensTransform {
    pub fn new(geometry: ArrayGeometry) -> Self {
        let mut planner = FftPlanner::new();
        let (n1, n2) = geometry.dims();
        let az = AxisTransform::new(n1, &mut planner);
        let el = geometry.is_planar().then(|| AxisTransform::new(n2, &mut planner));
        Self { geometry, az, el }
    }

    pub fn geometry(&self) -> ArrayGeometry {
        self.geometry
    }

    /// Computes `U·h`.
    pub fn apply(&self, h: &[C64]) -> Vec<C64> {
        let mut out = h.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, h: &mut [C64]) {
        assert_eq!(
            h.len(),
            self.geometry.num_elements(),
            "vector length differs from array size"
        );
        let (n1, n2) = self.geometry.dims();
        match &self.el {
            None => self.az.apply_in_place(h),
            Some(el) => {
                for block in h.chunks_exact_mut(n2) {
                    el.apply_in_place(block);
                }
                let mut column = vec![C64::new(0.0, 0.0); n1];
                for e in 0..n2 {
                    for a in 0..n1 {
                        column[a] = h[a * n2 + e];
                    }
                    self.az.apply_in_place(&mut column);
                    for a in 0..n1 {
                        h[a * n2 + e] = column[a];
                    }
                }
            }
        }
    }

    /// Applies `U` to every column of a spatial matrix.
    pub fn apply_matrix(&self, h: &CMatrix) -> CMatrix {
        let mut out = h.clone();
        for k in 0..out.cols() {
            self.apply_in_place(out.col_mut(k));
        }
        out
    }

    /// Dense `N×N` form of `U`.
    pub fn matrix(&self) -> CMatrix {
        let ua = self.az.dense();
        match &self.el {
            None => ua,
            Some(el) => {
                let ue = el.dense();
                let (n1, n2) = self.geometry.dims();
                CMatrix::from_fn(n1 * n2, n1 * n2, |r, c| ua[(r / n2, c / n2)] * ue[(r % n2, c % n2)])
            }
        }
    }
}

/// Convenience wrapper matching the free-function form of the other modules.
pub fn lens_transform(geometry: ArrayGeometry) -> LensTransform {
    LensTransform::new(geometry)
}
