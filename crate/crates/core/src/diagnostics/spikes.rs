use num_complex::Complex64;

use crate::solvers::{ritz_values, IterationTrace, KrylovState};

use super::DiagnosticsError;

/// `|log₁₀ e_{k+1} − 2 log₁₀ e_k + log₁₀ e_{k−1}|` for each entry with two
/// neighbours and positive errors; `None` elsewhere.
pub fn second_difference_log(errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| {
            if i == 0 || i + 1 >= errors.len() {
                return None;
            }
            let (a, b, c) = (errors[i - 1], errors[i], errors[i + 1]);
            (a > 0.0 && b > 0.0 && c > 0.0).then(|| (c.log10() - 2.0 * b.log10() + a.log10()).abs())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeEntry {
    pub iter: usize,
    /// `‖x − x_k‖_A / ‖x − x̆_k‖_A`
    pub ratio: f64,
    /// Ritz values of `H_k`, sorted by real part.
    pub ritz_rand: Vec<Complex64>,
    pub ritz_det: Vec<Complex64>,
    /// Ritz value of `H_k` of smallest modulus.
    pub min_ritz_rand: Complex64,
    /// Smallest real part among the Ritz values of `H̆_k`.
    pub min_ritz_det: f64,
    /// `|D²(log₁₀ ‖x − x̆_k‖_A)|`
    pub d2_log_err_det: Option<f64>,
}

impl SpikeEntry {
    /// Non-real Ritz values of `H_k`.
    pub fn complex_outliers(&self) -> Vec<Complex64> {
        self.ritz_rand.iter().copied().filter(|z| z.im != 0.0).collect()
    }

    /// The smallest randomized Ritz value is below `factor · min Ritz(H̆_k)`
    /// in modulus, or is negative or complex.
    pub fn has_small_ritz_outlier(&self, factor: f64) -> bool {
        let z = self.min_ritz_rand;
        z.norm() < factor * self.min_ritz_det || z.re < 0.0 || z.im != 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeReport {
    pub threshold: f64,
    /// `(k, ratio_k)` for every iteration with both errors.
    pub ratios: Vec<(usize, f64)>,
    pub spikes: Vec<SpikeEntry>,
}

impl SpikeReport {
    /// Iteration and value of the largest error ratio.
    pub fn max_ratio(&self) -> Option<(usize, f64)> {
        self.ratios.iter().copied().fold(None, |best, r| match best {
            Some((_, v)) if v >= r.1 => best,
            _ => Some(r),
        })
    }
}

/// Iterations where the randomized error exceeds `threshold` times the
/// deterministic one, with the Ritz spectra of both Hessenberg matrices.
///
/// Both traces must carry `a_norm_error`.
pub fn spike_report(
    rand_trace: &IterationTrace,
    det_trace: &IterationTrace,
    rand_state: &KrylovState,
    det_state: &KrylovState,
    threshold: f64,
) -> Result<SpikeReport, DiagnosticsError> {
    let k_max = rand_trace.len().min(det_trace.len()).min(rand_state.iterations()).min(det_state.iterations());
    let det_errors: Vec<f64> = det_trace.rows[..k_max].iter().map(|r| r.a_norm_error.unwrap_or(f64::NAN)).collect();
    let d2 = second_difference_log(&det_errors);
    let mut ratios = Vec::new();
    let mut spikes = Vec::new();
    for k in 1..=k_max {
        let (Some(er), Some(ed)) = (rand_trace.rows[k - 1].a_norm_error, det_trace.rows[k - 1].a_norm_error) else {
            continue;
        };
        let ratio = er / ed;
        ratios.push((k, ratio));
        if !(ratio > threshold) {
            continue;
        }
        let ritz_rand = ritz_values(&rand_state.h_square(k))?;
        let ritz_det = ritz_values(&det_state.h_square(k))?;
        let min_ritz_rand = ritz_rand.iter().copied().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
        let min_ritz_det = ritz_det.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        spikes.push(SpikeEntry {
            iter: k,
            ratio,
            ritz_rand,
            ritz_det,
            min_ritz_rand,
            min_ritz_det,
            d2_log_err_det: d2[k - 1],
        });
    }
    Ok(SpikeReport { threshold, ratios, spikes })
}
