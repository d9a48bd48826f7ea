//! Signals of length `L` and the standard window constructions.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QhaError, Result};
use crate::phase::PhaseSpace;

/// A complex vector of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub values: DVector<C64>,
}

impl Signal {
    pub fn new(values: DVector<C64>) -> Self {
        Signal { values }
    }

    pub fn zeros(space: &PhaseSpace) -> Self {
        Signal {
            values: DVector::zeros(space.len()),
        }
    }

    pub fn basis(space: &PhaseSpace, n: usize) -> Self {
        let mut v = DVector::zeros(space.len());
        v[n] = C64::new(1.0, 0.0);
        Signal { values: v }
    }

    pub fn from_slice(values: &[C64]) -> Self {
        Signal {
            values: DVector::from_column_slice(values),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// Inner product `<self, other>`, linear in `self` and antilinear in
    /// `other`. (`dotc` conjugates its receiver, hence the argument order.)
    pub fn inner(&self, other: &Signal) -> C64 {
        other.values.dotc(&self.values)
    }

    pub fn check_len(&self, other: &Signal) -> Result<()> {
        if self.len() != other.len() {
            return Err(QhaError::LengthMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> Signal {
        Signal {
            values: &self.values * c,
        }
    }

    pub fn normalized(&self) -> Signal {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero signal");
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// Reflection `(P psi)[n] = psi[(-n) mod L]`.
    pub fn reflect(&self, space: &PhaseSpace) -> Signal {
        let l = space.len();
        Signal {
            values: DVector::from_fn(l, |n, _| self.values[(l - n) % l]),
        }
    }
}

/// Periodized Gaussian `g[n] = sum_{|j| <= 3} exp(-pi (n + jL)^2 / (w L))`,
/// normalized. `width = 1` is the standard choice.
pub fn gaussian_window(space: &PhaseSpace, width: f64) -> Signal {
    assert!(width > 0.0, "gaussian width must be positive");
    let l = space.len() as f64;
    let v = DVector::from_fn(space.len(), |n, _| {
        let mut s = 0.0;
        for j in -3i64..=3 {
            let t = n as f64 + j as f64 * l;
            s += (-std::f64::consts::PI * t * t / (width * l)).exp();
        }
        C64::new(s, 0.0)
    });
    Signal { values: v }.normalized()
}

/// Hermite-function-like window: the physicists' Hermite polynomial of the
/// given order times a periodized Gaussian, normalized. Order 0 recovers the
/// Gaussian window.
pub fn hermite_window(space: &PhaseSpace, order: usize) -> Signal {
    let l = space.len() as f64;
    let scale = (2.0 * std::f64::consts::PI / l).sqrt();
    let v = DVector::from_fn(space.len(), |n, _| {
        let mut s = 0.0;
        for j in -3i64..=3 {
            let t = n as f64 + j as f64 * l;
            s += hermite_poly(order, scale * t) * (-std::f64::consts::PI * t * t / l).exp();
        }
        C64::new(s, 0.0)
    });
    Signal { values: v }.normalized()
}

fn hermite_poly(order: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if order == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for n in 1..order {
        let h2 = 2.0 * x * h1 - 2.0 * n as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Random complex signal from a seeded generator, normalized.
pub fn random_signal(space: &PhaseSpace, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_signal_with(space, &mut rng)
}

/// Random complex signal drawn from the supplied generator, normalized.
pub fn random_signal_with<R: Rng>(space: &PhaseSpace, rng: &mut R) -> Signal {
    let v = DVector::from_fn(space.len(), |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    Signal { values: v }.normalized()
}
