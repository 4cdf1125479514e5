use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::OperatorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Clusters,
    ExpDecay,
    LinearDecay,
}

impl SpectrumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumKind::Clusters => "clusters",
            SpectrumKind::ExpDecay => "exp-decay",
            SpectrumKind::LinearDecay => "linear-decay",
        }
    }
}

impl FromStr for SpectrumKind {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clusters" => Ok(SpectrumKind::Clusters),
            "exp-decay" => Ok(SpectrumKind::ExpDecay),
            "linear-decay" => Ok(SpectrumKind::LinearDecay),
            other => Err(OperatorError::InvalidSpectrum(format!("unknown kind '{other}'"))),
        }
    }
}

/// Parametric description of a synthetic spectrum.
///
/// For `Clusters`, `lambda_min` and `lambda_max` are the smallest and largest
/// cluster centers; individual eigenvalues spread up to `radius_ratio` times
/// their center on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_clusters: usize,
    pub radius_ratio: f64,
    pub seed: u64,
}

/// Preset names and the dimension used when none is given.
pub const PRESETS: &[&str] = &["G-c5-s25", "G-c5-s025", "G-exp2", "G-exp3", "G-clust2", "G-clust3"];
pub const PRESET_DEFAULT_N: usize = 100_000;

impl SpectrumSpec {
    pub fn exp_decay(n: usize, lambda_min: f64, lambda_max: f64, seed: u64) -> Self {
        Self { kind: SpectrumKind::ExpDecay, n, lambda_min, lambda_max, n_clusters: 1, radius_ratio: 0.0, seed }
    }

    pub fn linear_decay(n: usize, lambda_min: f64, lambda_max: f64, seed: u64) -> Self {
        Self { kind: SpectrumKind::LinearDecay, ..Self::exp_decay(n, lambda_min, lambda_max, seed) }
    }

    pub fn clusters(n: usize, lambda_min: f64, lambda_max: f64, n_clusters: usize, radius_ratio: f64, seed: u64) -> Self {
        Self { kind: SpectrumKind::Clusters, n, lambda_min, lambda_max, n_clusters, radius_ratio, seed }
    }

    /// The generated test matrices of the experiments, at dimension `n`.
    pub fn preset(name: &str, n: usize, seed: u64) -> Result<Self, OperatorError> {
        let spec = match name {
            "G-c5-s25" => Self::clusters(n, 1.0, 1e5, 5, 0.25, seed),
            "G-c5-s025" => Self::clusters(n, 1.0, 1e5, 5, 0.025, seed),
            "G-exp2" => Self::exp_decay(n, 1.0, 1e2, seed),
            "G-exp3" => Self::exp_decay(n, 1.0, 1e3, seed),
            "G-clust2" => Self::clusters(n, 1.0, 1e2, 2, 0.25, seed),
            "G-clust3" => Self::clusters(n, 1.0, 1e3, 2, 0.25, seed),
            other => {
                return Err(OperatorError::InvalidSpectrum(format!(
                    "unknown preset '{other}' (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |m: String| Err(OperatorError::InvalidSpectrum(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.lambda_min > 0.0 && self.lambda_min.is_finite()) {
            return bad(format!("lambda_min must be positive, got {}", self.lambda_min));
        }
        if !(self.lambda_max >= self.lambda_min && self.lambda_max.is_finite()) {
            return bad(format!("need lambda_min <= lambda_max, got {} > {}", self.lambda_min, self.lambda_max));
        }
        if !(0.0..1.0).contains(&self.radius_ratio) {
            return bad(format!("radius_ratio must lie in [0, 1), got {}", self.radius_ratio));
        }
        if self.n_clusters == 0 {
            return bad("n_clusters must be at least 1".into());
        }
        if self.kind == SpectrumKind::Clusters && self.n_clusters > self.n {
            return bad(format!("n_clusters = {} exceeds n = {}", self.n_clusters, self.n));
        }
        Ok(())
    }

    /// Cluster centers, geometrically spaced from `lambda_max` down to `lambda_min`.
    pub fn cluster_centers(&self) -> Vec<f64> {
        let m = self.n_clusters;
        if m == 1 {
            return vec![self.lambda_max];
        }
        let ratio = self.lambda_min / self.lambda_max;
        (0..m).map(|c| self.lambda_max * ratio.powf(c as f64 / (m - 1) as f64)).collect()
    }

    /// Cluster sizes, as equal as possible with the remainder going to the
    /// smallest-center (last) cluster.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let m = self.n_clusters;
        let mut sizes = vec![self.n / m; m];
        sizes[m - 1] += self.n % m;
        sizes
    }

    /// Draws the eigenvalue list. Decay profiles are deterministic; cluster
    /// members are uniform in `[c(1 - r), c(1 + r)]` and consume `rng`.
    pub(crate) fn draw_eigenvalues(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.n;
        let (lo, hi) = (self.lambda_min, self.lambda_max);
        let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        match self.kind {
            SpectrumKind::ExpDecay => (0..n).map(|i| hi * (lo / hi).powf(t(i))).collect(),
            SpectrumKind::LinearDecay => (0..n).map(|i| hi - (hi - lo) * t(i)).collect(),
            SpectrumKind::Clusters => {
                let r = self.radius_ratio;
                let mut out = Vec::with_capacity(n);
                for (c, size) in self.cluster_centers().into_iter().zip(self.cluster_sizes()) {
                    for _ in 0..size {
                        if r == 0.0 {
                            out.push(c);
                        } else {
                            out.push(rng.random_range(c * (1.0 - r)..=c * (1.0 + r)));
                        }
                    }
                }
                out
            }
        }
    }

    /// Plain `key=value` serialization, one pair per line.
    pub fn to_kv_string(&self) -> String {
        self.to_string()
    }

    /// Parses the `key=value` block written by [`SpectrumSpec::to_kv_string`].
    /// Pairs may be separated by newlines or commas; `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self, OperatorError> {
        let mut kind = None;
        let mut n = None;
        let mut lambda_min = None;
        let mut lambda_max = None;
        let mut n_clusters = 1usize;
        let mut radius_ratio = 0.0f64;
        let mut seed = 0u64;
        let bad = |k: &str, v: &str| OperatorError::InvalidSpectrum(format!("bad value for {k}: '{v}'"));
        for item in text.lines().flat_map(|l| l.split('#').next().unwrap_or("").split(',')) {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| OperatorError::InvalidSpectrum(format!("expected key=value, got '{item}'")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "kind" => kind = Some(v.parse::<SpectrumKind>()?),
                "n" => n = Some(v.parse().map_err(|_| bad(k, v))?),
                "lambda_min" => lambda_min = Some(v.parse().map_err(|_| bad(k, v))?),
                "lambda_max" => lambda_max = Some(v.parse().map_err(|_| bad(k, v))?),
                "n_clusters" => n_clusters = v.parse().map_err(|_| bad(k, v))?,
                "radius_ratio" => radius_ratio = v.parse().map_err(|_| bad(k, v))?,
                "seed" => seed = v.parse().map_err(|_| bad(k, v))?,
                other => return Err(OperatorError::InvalidSpectrum(format!("unknown key '{other}'"))),
            }
        }
        let missing = |k: &str| OperatorError::InvalidSpectrum(format!("missing key '{k}'"));
        let spec = Self {
            kind: kind.ok_or_else(|| missing("kind"))?,
            n: n.ok_or_else(|| missing("n"))?,
            lambda_min: lambda_min.ok_or_else(|| missing("lambda_min"))?,
            lambda_max: lambda_max.ok_or_else(|| missing("lambda_max"))?,
            n_clusters,
            radius_ratio,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind={}", self.kind.as_str())?;
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "lambda_min={}", self.lambda_min)?;
        writeln!(f, "lambda_max={}", self.lambda_max)?;
        writeln!(f, "n_clusters={}", self.n_clusters)?;
        writeln!(f, "radius_ratio={}", self.radius_ratio)?;
        writeln!(f, "seed={}", self.seed)
    }
}
