use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{haar_unitary, AlgebraElement, Field, ModulePoint, PointShape, Unitary};

/// Default half-width of the sampling box `[-10, 10]`.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

/// Uniform sampler of module points in a coordinate box, plus unitaries of the
/// matching algebra. The stream is a pure function of the seed.
#[derive(Debug, Clone)]
pub struct BoxSampler {
    shape: PointShape,
    half_width: f64,
    rng: ChaCha8Rng,
}

impl BoxSampler {
    pub fn new(shape: PointShape, half_width: f64, seed: u64) -> Self {
        assert!(half_width > 0.0 && half_width.is_finite());
        Self {
            shape,
            half_width,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_default_box(shape: PointShape, seed: u64) -> Self {
        Self::new(shape, DEFAULT_HALF_WIDTH, seed)
    }

    pub fn shape(&self) -> PointShape {
        self.shape
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn scalar(&mut self) -> Complex64 {
        let h = self.half_width;
        let re = self.rng.random_range(-h..=h);
        let im = match self.shape.field {
            Field::Real => 0.0,
            Field::Complex => self.rng.random_range(-h..=h),
        };
        Complex64::new(re, im)
    }

    pub fn point(&mut self) -> ModulePoint {
        let PointShape { rank, k, .. } = self.shape;
        let coords = (0..rank)
            .map(|_| {
                let entries = (0..k * k).map(|_| self.scalar()).collect();
                AlgebraElement::from_entries(k, entries).expect("finite sample")
            })
            .collect();
        ModulePoint::new(coords).expect("rank >= 1")
    }

    pub fn tuple(&mut self, n: usize) -> Vec<ModulePoint> {
        (0..n).map(|_| self.point()).collect()
    }

    /// A unitary of the shape's algebra: `{+1, -1}` for the real scalars,
    /// Haar on `O(k)` / `U(k)` otherwise.
    pub fn unitary(&mut self) -> Unitary {
        if self.shape.k == 1 && self.shape.field == Field::Real {
            let s = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
            return Unitary::new(AlgebraElement::real(s)).expect("sign is unitary");
        }
        haar_unitary(self.shape.k, self.shape.field, &mut self.rng)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }
}
