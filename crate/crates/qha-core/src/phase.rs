//! The finite phase space `Z_L x Z_L`, its points, sublattices and regions.

use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};

/// Discretization parameter: signals have length `L` and phase space is
/// `Z_L x Z_L` with `L^2` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpace {
    l: usize,
}

impl PhaseSpace {
    pub fn new(l: usize) -> Self {
        assert!(l >= 1, "phase space requires L >= 1");
        PhaseSpace { l }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reduce an integer mod L into `0..L`.
    #[inline]
    pub fn reduce(&self, i: i64) -> usize {
        i.rem_euclid(self.l as i64) as usize
    }

    /// Signed representative in `(-L/2, L/2]`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        let l = self.l as i64;
        let i = i as i64;
        if 2 * i > l {
            i - l
        } else {
            i
        }
    }

    /// Haar weight turning counting sums into integrals: `1/L`.
    #[inline]
    pub fn haar(&self) -> f64 {
        1.0 / self.l as f64
    }

    /// All `L^2` phase-space points in row-major `(k, l)` order.
    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        let l = self.l;
        (0..l).flat_map(move |k| (0..l).map(move |f| PhasePoint { k, l: f }))
    }
}

/// A point `z = (k, l)` of phase space: `k` is the time shift, `l` the
/// frequency shift, both reduced mod L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhasePoint {
    pub k: usize,
    pub l: usize,
}

impl PhasePoint {
    pub fn new(space: &PhaseSpace, k: i64, l: i64) -> Self {
        PhasePoint {
            k: space.reduce(k),
            l: space.reduce(l),
        }
    }

    pub fn origin() -> Self {
        PhasePoint { k: 0, l: 0 }
    }

    #[inline]
    pub fn neg(&self, space: &PhaseSpace) -> Self {
        PhasePoint::new(space, -(self.k as i64), -(self.l as i64))
    }

    #[inline]
    pub fn add(&self, space: &PhaseSpace, other: &PhasePoint) -> Self {
        PhasePoint::new(space, (self.k + other.k) as i64, (self.l + other.l) as i64)
    }

    #[inline]
    pub fn sub(&self, space: &PhaseSpace, other: &PhasePoint) -> Self {
        PhasePoint::new(
            space,
            self.k as i64 - other.k as i64,
            self.l as i64 - other.l as i64,
        )
    }
}

/// Standard symplectic form on the finite phase space,
/// `sigma(z, z') = l k' - l' k  (mod L)` for `z = (k, l)`, `z' = (k', l')`.
pub fn symplectic_form(z: &PhasePoint, zp: &PhasePoint, space: &PhaseSpace) -> usize {
    space.reduce(z.l as i64 * zp.k as i64 - zp.l as i64 * z.k as i64)
}

/// Rectangular sublattice `aZ_L x bZ_L` where `a | L` and `b | L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    a: usize,
    b: usize,
}

impl LatticeSpec {
    pub fn new(space: &PhaseSpace, a: usize, b: usize) -> Result<Self> {
        let l = space.len();
        if a == 0 || b == 0 || l % a != 0 || l % b != 0 {
            return Err(QhaError::NonDivisorLattice(a, b, l));
        }
        Ok(LatticeSpec { a, b })
    }

    pub fn full(_space: &PhaseSpace) -> Self {
        LatticeSpec { a: 1, b: 1 }
    }

    #[inline]
    pub fn a(&self) -> usize {
        self.a
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of lattice points, `(L/a) * (L/b)`.
    pub fn count(&self, space: &PhaseSpace) -> usize {
        (space.len() / self.a) * (space.len() / self.b)
    }

    pub fn points(&self, space: &PhaseSpace) -> Vec<PhasePoint> {
        let l = space.len();
        let mut out = Vec::with_capacity(self.count(space));
        for k in (0..l).step_by(self.a) {
            for f in (0..l).step_by(self.b) {
                out.push(PhasePoint { k, l: f });
            }
        }
        out
    }

    pub fn contains(&self, z: &PhasePoint) -> bool {
        z.k % self.a == 0 && z.l % self.b == 0
    }
}

/// Phase-space subset: centered box, centered disc or an explicit point list.
///
/// Box and disc membership use the signed representatives of the coordinates;
/// boundary points (distance exactly `R`) are included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    CenteredBox { radius: f64 },
    Disc { radius: f64 },
    Explicit { points: Vec<PhasePoint> },
}

impl RegionSpec {
    /// Checks the no-wrap-around invariant `R < L/2` for box and disc regions.
    pub fn validate(&self, space: &PhaseSpace) -> Result<()> {
        let half = space.len() as f64 / 2.0;
        match self {
            RegionSpec::CenteredBox { radius } | RegionSpec::Disc { radius } => {
                if *radius >= half {
                    return Err(QhaError::RegionTooLarge(*radius, half));
                }
            }
            RegionSpec::Explicit { .. } => {}
        }
        Ok(())
    }

    pub fn contains(&self, space: &PhaseSpace, z: &PhasePoint) -> bool {
        match self {
            RegionSpec::CenteredBox { radius } => {
                let k = space.signed(z.k).abs() as f64;
                let l = space.signed(z.l).abs() as f64;
                k <= *radius && l <= *radius
            }
            RegionSpec::Disc { radius } => {
                let k = space.signed(z.k) as f64;
                let l = space.signed(z.l) as f64;
                k * k + l * l <= radius * radius
            }
            RegionSpec::Explicit { points } => points.contains(z),
        }
    }

    /// Grid points of the region, in row-major order.
    pub fn grid_points(&self, space: &PhaseSpace) -> Vec<PhasePoint> {
        space.points().filter(|z| self.contains(space, z)).collect()
    }

    /// Lattice points of the region, in lattice order.
    pub fn lattice_points(&self, space: &PhaseSpace, lattice: &LatticeSpec) -> Vec<PhasePoint> {
        lattice
            .points(space)
            .into_iter()
            .filter(|z| self.contains(space, z))
            .collect()
    }
}
