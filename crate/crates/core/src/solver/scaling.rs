//! Geometric-mean equilibration with power-of-two factors, so scaling and
//! unscaling are exact in binary floating point.

use crate::scalar::Scalar;
use crate::solver::simplex::StdProblem;

const PASSES: usize = 6;

pub(crate) struct Scaling<T> {
    /// Row factors `R`: scaled rows are `R A`.
    pub row: Vec<T>,
    /// Column factors `C`: scaled columns are `A C`, `x = C x'`.
    pub col: Vec<T>,
}

fn pow2<T: Scalar>(v: f64) -> T {
    if !v.is_finite() || v <= 0.0 {
        return T::one();
    }
    let e = v.log2().round().clamp(-60.0, 60.0);
    T::lit(2f64.powi(e as i32))
}

fn range_factor(min: f64, max: f64) -> f64 {
    if max == 0.0 {
        1.0
    } else {
        1.0 / (min * max).sqrt()
    }
}

impl<T: Scalar> Scaling<T> {
    pub fn identity(m: usize, n: usize) -> Self {
        Self { row: vec![T::one(); m], col: vec![T::one(); n] }
    }

    pub fn compute(p: &StdProblem<T>) -> Self {
        let m = p.m;
        let n = p.cols.len();
        let mut row = vec![1.0f64; m];
        let mut col = vec![1.0f64; n];
        for _ in 0..PASSES {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for (j, c) in p.cols.iter().enumerate() {
                for &(r, v) in c {
                    let a = v.to_f64_lossless().abs() * row[r] * col[j];
                    rmin[r] = rmin[r].min(a);
                    rmax[r] = rmax[r].max(a);
                }
            }
            for i in 0..m {
                row[i] *= range_factor(rmin[i], rmax[i]);
            }
            for (j, c) in p.cols.iter().enumerate() {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for &(r, v) in c {
                    let a = v.to_f64_lossless().abs() * row[r] * col[j];
                    lo = lo.min(a);
                    hi = hi.max(a);
                }
                col[j] *= range_factor(lo, hi);
            }
        }
        Self { row: row.into_iter().map(pow2).collect(), col: col.into_iter().map(pow2).collect() }
    }

    pub fn apply(&self, p: &StdProblem<T>) -> StdProblem<T> {
        let cols = p
            .cols
            .iter()
            .enumerate()
            .map(|(j, c)| c.iter().map(|&(r, v)| (r, v * self.row[r] * self.col[j])).collect())
            .collect();
        StdProblem {
            m: p.m,
            cols,
            cost: p.cost.iter().zip(&self.col).map(|(&c, &s)| c * s).collect(),
            lower: p.lower.iter().zip(&self.col).map(|(&l, &s)| l / s).collect(),
            upper: p.upper.iter().zip(&self.col).map(|(&u, &s)| u / s).collect(),
            slack_lower: p.slack_lower.iter().zip(&self.row).map(|(&l, &s)| l * s).collect(),
            slack_upper: p.slack_upper.iter().zip(&self.row).map(|(&u, &s)| u * s).collect(),
            b: p.b.iter().zip(&self.row).map(|(&b, &s)| b * s).collect(),
        }
    }
}
