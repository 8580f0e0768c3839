use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix with nonnegative entries, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PayoffMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(n, data)
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix must have at least one action".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "entry ({}, {}) = {} is not a finite nonnegative number",
                k / n,
                k % n,
                data[k]
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::from_flat(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix must have at least one action");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Parses the plain-text matrix format: one row per line, entries separated by
    /// commas and/or whitespace, no header. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut first_line = 0;
        for (lineno, line) in text.lines().enumerate() {
            let tokens = tokenize(line);
            if tokens.is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(tokens.len());
            for (col, tok) in tokens {
                let value = parse_entry(tok).map_err(|message| Error::Parse {
                    line: lineno + 1,
                    column: col + 1,
                    message,
                })?;
                row.push(value);
            }
            if let Some(prev) = rows.first() {
                if prev.len() != row.len() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        column: 1,
                        message: format!(
                            "ragged row: {} entries, line {} has {}",
                            row.len(),
                            first_line + 1,
                            prev.len()
                        ),
                    });
                }
            } else {
                first_line = lineno;
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "empty matrix".into(),
            });
        }
        let width = rows[0].len();
        if rows.len() != width {
            return Err(Error::Parse {
                line: first_line + 1,
                column: 1,
                message: format!("matrix is {}x{}, expected square", rows.len(), width),
            });
        }
        Self::from_rows(rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(self.n, self.data.iter().map(|v| v * c).collect())
    }

    /// `M v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Mᵀ v`
    pub fn tmul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (row, &vi) in self.data.chunks(self.n).zip(v) {
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(self.data.chunks(self.n))
            .filter(|(xi, _)| **xi != 0.0)
            .map(|(xi, row)| xi * row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { n: k, data }
    }

    /// `P M Pᵀ` for the permutation sending action `perm[k]` to position `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.submatrix(perm)
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    /// Smallest strictly positive entry, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.data
            .iter()
            .copied()
            .filter(|v| *v > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn column_is_zero(&self, j: usize) -> bool {
        (0..self.n).all(|i| self.get(i, j) == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl TryFrom<Vec<Vec<f64>>> for PayoffMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<PayoffMatrix> for Vec<Vec<f64>> {
    fn from(m: PayoffMatrix) -> Self {
        m.rows()
    }
}

impl fmt::Display for PayoffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Splits on commas and whitespace, keeping the 0-based character column of each token.
pub(crate) fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, (byte, ch)) in line.char_indices().enumerate() {
        let sep = ch == ',' || ch.is_whitespace();
        match (sep, start) {
            (true, Some((col, b))) => {
                out.push((col, &line[b..byte]));
                start = None;
            }
            (false, None) => start = Some((pos, byte)),
            _ => {}
        }
    }
    if let Some((col, b)) = start {
        out.push((col, &line[b..]));
    }
    out
}

pub(crate) fn parse_entry(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok
        .parse()
        .map_err(|_| format!("'{tok}' is not a decimal number"))?;
    if !v.is_finite() {
        return Err(format!("'{tok}' is not finite"));
    }
    if v < 0.0 {
        return Err(format!("negative entry {tok}"));
    }
    Ok(v)
}

/// Parses a whitespace/comma separated list of nonnegative numbers spread over any number of lines.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for (col, tok) in tokenize(line) {
            out.push(parse_entry(tok).map_err(|message| Error::Parse {
                line: lineno + 1,
                column: col + 1,
                message,
            })?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty vector".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commas_and_whitespace() {
        let m = PayoffMatrix::parse("0, 1 2\n3\t4,5\n\n6 7 8\n").unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.row(2), &[6.0, 7.0, 8.0]);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = PayoffMatrix::parse("1 2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn negative_entry_reports_column() {
        let err = PayoffMatrix::parse("1 2\n3 -4\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(PayoffMatrix::parse("1 2 3\n4 5 6\n").is_err());
        assert!(PayoffMatrix::parse("").is_err());
        assert!(PayoffMatrix::parse("1 x\n2 3").is_err());
    }

    #[test]
    fn products_match_hand_values() {
        let m = PayoffMatrix::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.mul_vec(&[0.5, 0.5]), vec![1.0, 0.5]);
        assert_eq!(m.tmul_vec(&[0.5, 0.5]), vec![0.5, 1.0]);
        assert_eq!(m.bilinear(&[0.5, 0.5], &[0.5, 0.5]), 0.75);
        assert_eq!(m.transpose().get(0, 1), 1.0);
    }

    #[test]
    fn display_round_trips() {
        let m = PayoffMatrix::from_rows(vec![vec![0.25, 1.0], vec![3.5, 0.0]]).unwrap();
        assert_eq!(PayoffMatrix::parse(&m.to_string()).unwrap(), m);
    }
}
