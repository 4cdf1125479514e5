use crate::operators::SpdOperator;
use crate::solvers::KrylovState;
use crate::vecops::norm;

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Entries of `Γ_k = H_k − H̆_k` strictly above the superdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub k: usize,
    pub ell: usize,
    /// `(i, j, Γ_ij)`, 1-based, `j ≥ i + 2`.
    pub entries: Vec<(usize, usize, f64)>,
    /// `‖Av_i‖ ‖v_j‖ / √ℓ` per entry.
    pub predicted_std: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub mean_predicted_std: f64,
    pub histogram: Vec<HistogramBin>,
}

impl NoiseReport {
    /// Statistics and histogram (bin width `std/2`, edges on multiples of it).
    pub fn from_entries(k: usize, ell: usize, entries: Vec<(usize, usize, f64)>, predicted_std: Vec<f64>) -> Self {
        let values: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let m = values.len() as f64;
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / m };
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        };
        let mean_predicted_std =
            if predicted_std.is_empty() { 0.0 } else { predicted_std.iter().sum::<f64>() / predicted_std.len() as f64 };
        Self { k, ell, histogram: histogram(&values, std / 2.0), entries, predicted_std, mean, std, mean_predicted_std }
    }

    /// `std / mean predicted std`.
    pub fn std_ratio(&self) -> f64 {
        self.std / self.mean_predicted_std
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.2).collect()
    }

    /// Index of the most populated bin (first one on ties).
    pub fn mode_bin(&self) -> Option<usize> {
        let max = self.histogram.iter().map(|b| b.count).max()?;
        self.histogram.iter().position(|b| b.count == max)
    }

    /// No bin is a strict local maximum except around the mode, allowing
    /// dips of at most `tolerance` counts.
    pub fn is_unimodal(&self, tolerance: usize) -> bool {
        let Some(m) = self.mode_bin() else { return true };
        let c: Vec<usize> = self.histogram.iter().map(|b| b.count).collect();
        let rising = c[..=m].windows(2).all(|w| w[1] + tolerance >= w[0]);
        let falling = c[m..].windows(2).all(|w| w[0] + tolerance >= w[1]);
        rising && falling
    }
}

fn histogram(values: &[f64], width: f64) -> Vec<HistogramBin> {
    if values.is_empty() {
        return Vec::new();
    }
    if !(width > 0.0) {
        let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        return vec![HistogramBin { lo, hi, count: values.len() }];
    }
    let idx = |v: f64| (v / width).floor() as i64;
    let first = values.iter().map(|&v| idx(v)).min().unwrap_or(0);
    let last = values.iter().map(|&v| idx(v)).max().unwrap_or(0);
    let mut bins: Vec<HistogramBin> = (first..=last)
        .map(|b| HistogramBin { lo: b as f64 * width, hi: (b + 1) as f64 * width, count: 0 })
        .collect();
    for &v in values {
        bins[(idx(v) - first) as usize].count += 1;
    }
    bins
}

/// Noise of the randomized Hessenberg matrix around the deterministic one, at step `k`.
pub fn hessenberg_noise(
    op: &SpdOperator,
    rand: &KrylovState,
    det: &KrylovState,
    ell: usize,
    k: usize,
) -> Result<NoiseReport, DiagnosticsError> {
    if k < 3 {
        return Err(DiagnosticsError::TooFewIterations { needed: 3, have: k });
    }
    let have = rand.iterations().min(det.iterations());
    if k > have {
        return Err(DiagnosticsError::TooFewIterations { needed: k, have });
    }
    let basis = rand.basis();
    let av_norms = basis[..k - 2].iter().map(|v| op.apply(v).map(|w| norm(&w))).collect::<Result<Vec<_>, _>>()?;
    let v_norms: Vec<f64> = basis[..k].iter().map(|v| norm(v)).collect();
    let scale = 1.0 / (ell as f64).sqrt();
    let mut entries = Vec::new();
    let mut predicted = Vec::new();
    for j in 3..=k {
        for i in 1..=j - 2 {
            entries.push((i, j, rand.h(i, j) - det.h(i, j)));
            predicted.push(av_norms[i - 1] * v_norms[j - 1] * scale);
        }
    }
    Ok(NoiseReport::from_entries(k, ell, entries, predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SpectrumSpec;
    use crate::sketch::SketchOperator;
    use crate::solvers::{lanczos_solve, rfom_solve, CoefficientMethod, SolveOptions};

    fn pair(n: usize, k: usize, omega: &SketchOperator) -> (SpdOperator, KrylovState, KrylovState) {
        let a = SpdOperator::generate(&SpectrumSpec::exp_decay(n, 1.0, 100.0, 2)).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).sin()).collect();
        let opts = SolveOptions { k_max: k, tol: 0.0, ..Default::default() };
        let det = lanczos_solve(&a, &b, &vec![0.0; n], &opts).unwrap();
        let rand = rfom_solve(&a, &b, &vec![0.0; n], omega, &opts, CoefficientMethod::Mgs).unwrap();
        (a, rand.state, det.state)
    }

    #[test]
    fn entry_count_is_triangular() {
        let omega = SketchOperator::gaussian(100, 50, 1).unwrap();
        let (a, r, d) = pair(100, 12, &omega);
        for k in [3, 4, 7, 12] {
            let rep = hessenberg_noise(&a, &r, &d, 50, k).unwrap();
            assert_eq!(rep.entries.len(), k * (k - 1) / 2 - (k - 1));
            assert!(rep.entries.iter().all(|&(i, j, _)| j >= i + 2));
        }
        assert!(matches!(hessenberg_noise(&a, &r, &d, 50, 2), Err(DiagnosticsError::TooFewIterations { .. })));
    }

    #[test]
    fn identity_sketch_has_no_noise() {
        let omega = SketchOperator::identity(80);
        let (a, r, d) = pair(80, 15, &omega);
        let rep = hessenberg_noise(&a, &r, &d, 80, 15).unwrap();
        assert!(rep.values().iter().all(|v| v.abs() <= 1e-8));
    }

    #[test]
    fn histogram_counts_and_width() {
        let vals = vec![(0, 0, -1.0), (0, 0, -0.2), (0, 0, 0.1), (0, 0, 0.3), (0, 0, 1.1)];
        let rep = NoiseReport::from_entries(5, 10, vals, vec![1.0; 5]);
        let w = rep.std / 2.0;
        assert_eq!(rep.histogram.iter().map(|b| b.count).sum::<usize>(), 5);
        for b in &rep.histogram {
            assert!((b.hi - b.lo - w).abs() < 1e-12);
        }
        assert!(rep.mean.abs() < 0.07);
        // sample std by hand
        let m = 0.3 / 5.0;
        let s = [-1.0f64, -0.2, 0.1, 0.3, 1.1].iter().map(|v| (v - m).powi(2)).sum::<f64>() / 4.0;
        assert!((rep.std - s.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn unimodality() {
        let mk = |counts: &[usize]| NoiseReport {
            k: 0,
            ell: 1,
            entries: vec![],
            predicted_std: vec![],
            mean: 0.0,
            std: 1.0,
            mean_predicted_std: 1.0,
            histogram: counts.iter().map(|&c| HistogramBin { lo: 0.0, hi: 1.0, count: c }).collect(),
        };
        assert!(mk(&[1, 3, 7, 4, 1]).is_unimodal(0));
        assert!(!mk(&[5, 1, 7, 4, 1]).is_unimodal(0));
        assert!(mk(&[1, 3, 2, 7, 1]).is_unimodal(1));
    }
}
