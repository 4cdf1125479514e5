use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OperatorError, SpectrumSpec};

#[derive(Debug, Clone, Copy)]
struct Rotation {
    i: u32,
    j: u32,
    c: f64,
    s: f64,
}

/// `A = Q Λ Qᵗ` with `Q` a product of random Givens layers and a random sign
/// diagonal, applied implicitly in `O(n log n)`.
///
/// `Q = L_m ⋯ L_1 D`, where each layer `L_t` rotates `⌊n/2⌋` disjoint random
/// index pairs by independent uniform angles and `m = ⌈log2 n⌉`.
#[derive(Debug, Clone)]
pub struct SyntheticSpectral {
    eigenvalues: Vec<f64>,
    signs: Vec<f64>,
    layers: Vec<Vec<Rotation>>,
}

impl SyntheticSpectral {
    /// Builds the operator for `spec`. Deterministic for a fixed seed: the
    /// eigenvalues are drawn first, then the signs, then the rotation layers.
    pub fn generate(spec: &SpectrumSpec) -> Result<Self, OperatorError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let eigenvalues = spec.draw_eigenvalues(&mut rng);
        Ok(Self::with_eigenvalues(eigenvalues, &mut rng))
    }

    /// Random orthogonal factor around a caller-chosen spectrum.
    pub fn with_eigenvalues(eigenvalues: Vec<f64>, rng: &mut ChaCha8Rng) -> Self {
        let n = eigenvalues.len();
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let n_layers = if n <= 1 { 0 } else { usize::BITS - (n - 1).leading_zeros() } as usize;
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let layers = (0..n_layers)
            .map(|_| {
                perm.shuffle(rng);
                perm.chunks_exact(2)
                    .map(|p| {
                        let theta = rng.random_range(0.0..std::f64::consts::TAU);
                        Rotation { i: p[0], j: p[1], c: theta.cos(), s: theta.sin() }
                    })
                    .collect()
            })
            .collect();
        Self { eigenvalues, signs, layers }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// `v ← Q v`
    pub fn apply_q(&self, v: &mut [f64]) {
        for (vi, s) in v.iter_mut().zip(&self.signs) {
            *vi *= s;
        }
        for layer in &self.layers {
            for r in layer {
                let (i, j) = (r.i as usize, r.j as usize);
                let (a, b) = (v[i], v[j]);
                v[i] = r.c * a - r.s * b;
                v[j] = r.s * a + r.c * b;
            }
        }
    }

    /// `v ← Qᵗ v`
    pub fn apply_qt(&self, v: &mut [f64]) {
        for layer in self.layers.iter().rev() {
            for r in layer {
                let (i, j) = (r.i as usize, r.j as usize);
                let (a, b) = (v[i], v[j]);
                v[i] = r.c * a + r.s * b;
                v[j] = -r.s * a + r.c * b;
            }
        }
        for (vi, s) in v.iter_mut().zip(&self.signs) {
            *vi *= s;
        }
    }

    pub(crate) fn apply(&self, v: &[f64], y: &mut [f64]) {
        y.copy_from_slice(v);
        self.apply_qt(y);
        for (yi, l) in y.iter_mut().zip(&self.eigenvalues) {
            *yi *= l;
        }
        self.apply_q(y);
    }

    /// `Q f(Λ) Qᵗ v`
    pub fn apply_fn(&self, v: &[f64], f: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let mut y = v.to_vec();
        self.apply_qt(&mut y);
        for (yi, &l) in y.iter_mut().zip(&self.eigenvalues) {
            *yi *= f(l);
        }
        self.apply_q(&mut y);
        y
    }
}
