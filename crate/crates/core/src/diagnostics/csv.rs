use std::io::{self, Write};

use super::noise::HistogramBin;

pub const TRACE_HEADER: &str =
    "iter,err_det_A,err_rand_A,alpha,beta,quasi1,quasi2,res_norm,res_bound1,res_bound2,s_k1,gamma,delta,eps_tilde";

/// One CSV row; absent values are written as empty fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceCsvRow {
    pub iter: usize,
    pub err_det_a: Option<f64>,
    pub err_rand_a: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub quasi1: Option<f64>,
    pub quasi2: Option<f64>,
    pub res_norm: Option<f64>,
    pub res_bound1: Option<f64>,
    pub res_bound2: Option<f64>,
    pub s_k1: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub eps_tilde: Option<f64>,
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:e}")
}

impl TraceCsvRow {
    pub fn to_line(&self) -> String {
        let fields = [
            self.err_det_a,
            self.err_rand_a,
            self.alpha,
            self.beta,
            self.quasi1,
            self.quasi2,
            self.res_norm,
            self.res_bound1,
            self.res_bound2,
            self.s_k1,
            self.gamma,
            self.delta,
            self.eps_tilde,
        ];
        let mut line = self.iter.to_string();
        for f in fields {
            line.push(',');
            if let Some(v) = f {
                line.push_str(&format_float(v));
            }
        }
        line
    }
}

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceCsvRow]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn write_histogram_csv<W: Write>(mut w: W, bins: &[HistogramBin]) -> io::Result<()> {
    writeln!(w, "bin_lo,bin_hi,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", format_float(b.lo), format_float(b.hi), b.count)?;
    }
    Ok(())
}

/// `seed,value` rows for repeated-seed sampling of one entry.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[(u64, f64)]) -> io::Result<()> {
    writeln!(w, "seed,value")?;
    for (s, v) in samples {
        writeln!(w, "{s},{}", format_float(*v))?;
    }
    Ok(())
}
