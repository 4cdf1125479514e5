//! Matrix Market coordinate I/O for real symmetric matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{OperatorError, SpdOperator};

/// Symmetric sparse matrix storing the lower triangle (diagonal included) in CSR.
#[derive(Debug, Clone)]
pub struct SymmetricCsr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricCsr {
    /// Builds from 0-based triplets. Entries above the diagonal are folded onto
    /// the lower triangle; a repeated position must carry the same value.
    pub fn from_lower_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, OperatorError> {
        let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(OperatorError::Parse { line: 0, msg: format!("entry ({i}, {j}) outside {n} x {n}") });
            }
            let key = (i.max(j), i.min(j));
            if let Some(&prev) = entries.get(&key) {
                if (prev - v).abs() > 1e-12 * prev.abs().max(v.abs()) {
                    return Err(OperatorError::ConflictingEntry { i: key.0 + 1, j: key.1 + 1, first: prev, second: v });
                }
                continue;
            }
            entries.insert(key, v);
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (&(i, j), &v) in &entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (j, a) = (self.col_idx[k], self.values[k]);
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                m[(i, j)] = self.values[k];
                m[(j, i)] = self.values[k];
            }
        }
        m
    }

    pub(crate) fn diagonal_block(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let m = range.len();
        let mut b = DMatrix::zeros(m, m);
        for i in range.clone() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j >= range.start {
                    let (ii, jj) = (i - range.start, j - range.start);
                    b[(ii, jj)] = self.values[k];
                    b[(jj, ii)] = self.values[k];
                }
            }
        }
        b
    }
}

/// Parses a `coordinate real symmetric` (or `integer symmetric`) Matrix Market document.
pub fn parse_matrix_market(text: &str) -> Result<SymmetricCsr, OperatorError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(OperatorError::Parse { line: 1, msg: "empty file".into() })?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(OperatorError::UnsupportedHeader(header.to_string()));
    }
    if fields[2] != "coordinate" {
        return Err(OperatorError::UnsupportedHeader(format!("format '{}' (need coordinate)", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(OperatorError::UnsupportedHeader(format!("field '{}' (need real)", fields[3])));
    }
    if fields[4] != "symmetric" {
        return Err(OperatorError::UnsupportedHeader(format!("symmetry '{}' (need symmetric)", fields[4])));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let perr = |msg: String| OperatorError::Parse { line: lineno, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(perr(format!("expected 'rows cols nnz', got '{line}'")));
                }
                let p = |t: &str| t.parse::<usize>().map_err(|_| perr(format!("bad integer '{t}'")));
                let (rows, cols, nnz) = (p(toks[0])?, p(toks[1])?, p(toks[2])?);
                if rows != cols {
                    return Err(OperatorError::NotSquare { rows, cols });
                }
                triplets.reserve(nnz);
                size = Some((rows, cols, nnz));
            }
            Some((n, _, _)) => {
                if toks.len() != 3 {
                    return Err(perr(format!("expected 'i j value', got '{line}'")));
                }
                let i: usize = toks[0].parse().map_err(|_| perr(format!("bad row index '{}'", toks[0])))?;
                let j: usize = toks[1].parse().map_err(|_| perr(format!("bad column index '{}'", toks[1])))?;
                let v: f64 = toks[2].parse().map_err(|_| perr(format!("bad value '{}'", toks[2])))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(perr(format!("index ({i}, {j}) out of range for n = {n}")));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, _, nnz) = size.ok_or(OperatorError::Parse { line: 0, msg: "missing size line".into() })?;
    if triplets.len() != nnz {
        return Err(OperatorError::Parse {
            line: 0,
            msg: format!("header announces {nnz} entries, found {}", triplets.len()),
        });
    }
    SymmetricCsr::from_lower_triplets(n, &triplets)
}

/// Reads a symmetric Matrix Market file into a sparse operator.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SpdOperator, OperatorError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| OperatorError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    Ok(SpdOperator::sparse(parse_matrix_market(&text)?))
}

/// Writes the lower triangle of a symmetric matrix, zeros skipped.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<(), OperatorError> {
    let path = path.as_ref();
    let n = m.nrows();
    let mut body = String::new();
    let mut nnz = 0usize;
    for j in 0..n {
        for i in j..n {
            let v = m[(i, j)];
            if v != 0.0 {
                nnz += 1;
                let _ = writeln!(body, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
    }
    let text = format!("%%MatrixMarket matrix coordinate real symmetric\n{n} {n} {nnz}\n{body}");
    fs::write(path, text).map_err(|e| OperatorError::Io { path: path.display().to_string(), msg: e.to_string() })
}
