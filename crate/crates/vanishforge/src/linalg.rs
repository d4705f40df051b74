//! Dense complex linear algebra at arbitrary precision: thresholded
//! rank/kernel by complete pivoting, and singular values by one-sided
//! Jacobi.

use rug::{Complex, Float};

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::num::{cabs, fmt_sci};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        CMatrix { rows, cols, data: vec![Complex::new(prec); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::arg("ragged matrix rows"));
        }
        Ok(CMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> CMatrix {
        let prec = self.data.first().map(|z| z.prec().0).unwrap_or(64);
        let mut t = CMatrix::zeros(self.cols, self.rows, prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.cols {
            return Err(Error::arg("matrix-vector length mismatch"));
        }
        let prec = v.first().map(|z| z.prec().0).unwrap_or(64);
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Complex::new(prec);
                for (a, x) in self.row(i).iter().zip(v) {
                    acc += Complex::with_val(prec, a * x);
                }
                acc
            })
            .collect())
    }

    pub fn max_abs(&self) -> Float {
        crate::num::max_abs(&self.data)
    }
}

#[derive(Clone, Debug)]
pub struct RankKernel {
    pub rank: usize,
    /// Basis of the right kernel, one vector per free column.
    pub kernel: Vec<Vec<Complex>>,
    /// Smallest accepted pivot relative to the largest entry.
    pub min_pivot: Option<Float>,
    /// Largest rejected pivot relative to the largest entry.
    pub max_rejected: Option<Float>,
}

/// Gauss-Jordan elimination with complete pivoting. A pivot below
/// `rank_threshold * max|a|` ends the elimination; one inside the band up
/// to the square root of the threshold is reported as ambiguous.
pub fn rank_kernel(m: &CMatrix, ctx: &PrecisionContext, what: &str) -> Result<RankKernel> {
    let prec = ctx.guarded();
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vec<Complex>> =
        (0..rows).map(|i| m.row(i).iter().map(|z| Complex::with_val(prec, z)).collect()).collect();
    let mut perm: Vec<usize> = (0..cols).collect();
    let scale = m.max_abs();
    if scale.is_zero() {
        let kernel = (0..cols).map(|f| unit(cols, f, ctx.prec())).collect();
        return Ok(RankKernel { rank: 0, kernel, min_pivot: None, max_rejected: None });
    }
    let lo = Float::with_val(prec, &scale * ctx.rank());
    let hi = Float::with_val(prec, &scale * ctx.rank_upper());

    let mut rank = 0;
    let mut min_pivot: Option<Float> = None;
    let mut max_rejected = None;
    while rank < rows.min(cols) {
        let (mut bi, mut bj, mut best) = (rank, rank, Float::new(prec));
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, z) in row.iter().enumerate().skip(rank) {
                let v = cabs(z);
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best <= lo {
            max_rejected = Some(best / &scale);
            break;
        }
        if best < hi {
            return Err(Error::Ambiguous(format!(
                "{what}: pivot {} relative to the largest entry lies between the rank thresholds",
                fmt_sci(&Float::with_val(53, &best / &scale), 6)
            )));
        }
        a.swap(rank, bi);
        for row in a.iter_mut() {
            row.swap(rank, bj);
        }
        perm.swap(rank, bj);

        let inv = Complex::with_val(prec, a[rank][rank].recip_ref());
        for z in a[rank].iter_mut() {
            *z *= &inv;
        }
        let pivot_row = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == rank {
                continue;
            }
            let f = row[rank].clone();
            if f.real().is_zero() && f.imag().is_zero() {
                continue;
            }
            for (z, p) in row.iter_mut().zip(&pivot_row).skip(rank) {
                *z -= Complex::with_val(prec, &f * p);
            }
        }
        let rel = best / &scale;
        min_pivot = Some(match min_pivot {
            Some(mp) if mp < rel => mp,
            _ => rel,
        });
        rank += 1;
    }

    let mut kernel = Vec::new();
    for f in rank..cols {
        let mut v = vec![Complex::new(ctx.prec()); cols];
        v[perm[f]] = Complex::with_val(ctx.prec(), 1);
        for (i, row) in a.iter().enumerate().take(rank) {
            v[perm[i]] = Complex::with_val(ctx.prec(), -&row[f]);
        }
        kernel.push(v);
    }
    Ok(RankKernel { rank, kernel, min_pivot, max_rejected })
}

fn unit(n: usize, k: usize, prec: u32) -> Vec<Complex> {
    let mut v = vec![Complex::new(prec); n];
    v[k] = Complex::with_val(prec, 1);
    v
}

/// Singular values in descending order (one-sided Jacobi on columns).
pub fn singular_values(m: &CMatrix, prec: u32) -> Vec<Float> {
    let (rows, cols) = (m.rows, m.cols);
    let mut c: Vec<Vec<Complex>> =
        (0..cols).map(|j| (0..rows).map(|i| Complex::with_val(prec, m.get(i, j))).collect()).collect();
    let eps = Float::with_val(prec, 1) >> (prec - 8);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = sq_norm(&c[p], prec);
                let beta = sq_norm(&c[q], prec);
                let mut gamma = Complex::new(prec);
                for (x, y) in c[p].iter().zip(&c[q]) {
                    gamma += Complex::with_val(prec, x.conj_ref()) * y;
                }
                let g = cabs(&gamma);
                let bound = Float::with_val(prec, &alpha * &beta).sqrt() * &eps;
                if g <= bound || g.is_zero() {
                    continue;
                }
                rotated = true;
                // rotate the phase away so that the pair becomes real symmetric
                let phase = Complex::with_val(prec, &gamma / &g);
                let phase_conj = Complex::with_val(prec, phase.conj_ref());
                for y in c[q].iter_mut() {
                    *y *= &phase_conj;
                }
                let zeta = Float::with_val(prec, &beta - &alpha) / Float::with_val(prec, &g * 2u32);
                let root = (Float::with_val(prec, zeta.square_ref()) + 1u32).sqrt();
                let t = if zeta.is_sign_negative() {
                    Float::with_val(prec, -1) / (Float::with_val(prec, zeta.abs_ref()) + root)
                } else {
                    Float::with_val(prec, 1) / (Float::with_val(prec, zeta.abs_ref()) + root)
                };
                let cs = Float::with_val(prec, 1) / (Float::with_val(prec, t.square_ref()) + 1u32).sqrt();
                let sn = Float::with_val(prec, &cs * &t);
                for i in 0..rows {
                    let xp = c[p][i].clone();
                    let xq = c[q][i].clone();
                    c[p][i] = Complex::with_val(prec, &xp * &cs) - Complex::with_val(prec, &xq * &sn);
                    c[q][i] = Complex::with_val(prec, &xp * &sn) + Complex::with_val(prec, &xq * &cs);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<Float> = c.iter().map(|col| sq_norm(col, prec).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv.truncate(rows.min(cols));
    sv
}

fn sq_norm(v: &[Complex], prec: u32) -> Float {
    let mut s = Float::new(prec);
    for z in v {
        s += Float::with_val(prec, z.norm_ref());
    }
    s
}

/// sigma_max / sigma_min, or None for a rank-deficient matrix.
pub fn condition_number(m: &CMatrix, prec: u32) -> Option<Float> {
    let sv = singular_values(m, prec);
    let (first, last) = (sv.first()?, sv.last()?);
    if last.is_zero() {
        return None;
    }
    Some(Float::with_val(prec, first / last))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(128, (re, im))
    }

    #[test]
    fn kernel_of_rank_one() {
        let ctx = PrecisionContext::with_bits(128).unwrap();
        let m = CMatrix::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)], vec![c(2.0, 0.0), c(4.0, 0.0), c(0.0, 2.0)]]).unwrap();
        let rk = rank_kernel(&m, &ctx, "test").unwrap();
        assert_eq!(rk.rank, 1);
        assert_eq!(rk.kernel.len(), 2);
        for v in &rk.kernel {
            let r = m.mul_vec(v).unwrap();
            assert!(crate::num::max_abs(&r) < 1e-30);
        }
    }

    #[test]
    fn ambiguous_pivot_is_an_error() {
        let ctx = PrecisionContext::with_bits(128).unwrap();
        let m = CMatrix::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1e-12, 0.0)]]).unwrap();
        assert!(matches!(rank_kernel(&m, &ctx, "test"), Err(Error::Ambiguous(_))));
        let m = CMatrix::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1e-30, 0.0)]]).unwrap();
        assert_eq!(rank_kernel(&m, &ctx, "test").unwrap().rank, 1);
    }

    #[test]
    fn singular_values_of_known_matrix() {
        // [[3, 0], [4, 5]] has singular values sqrt(45), sqrt(5)
        let m = CMatrix::from_rows(vec![vec![c(3.0, 0.0), c(0.0, 0.0)], vec![c(4.0, 0.0), c(5.0, 0.0)]]).unwrap();
        let sv = singular_values(&m, 128);
        assert!((sv[0].clone() - Float::with_val(128, 45).sqrt()).abs() < 1e-30);
        assert!((sv[1].clone() - Float::with_val(128, 5).sqrt()).abs() < 1e-30);
        // unitary phases do not change them
        let m = CMatrix::from_rows(vec![vec![c(0.0, 3.0), c(0.0, 0.0)], vec![c(0.0, 4.0), c(-5.0, 0.0)]]).unwrap();
        let sv2 = singular_values(&m, 128);
        assert!((sv2[0].clone() - &sv[0]).abs() < 1e-30);
        let k = condition_number(&m, 128).unwrap();
        assert!((k - 3u32).abs() < 1e-30);
    }
}
