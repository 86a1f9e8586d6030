//! Dense row-major storage of a function on a box of Z^D, used by the norm
//! evaluators. The last axis is contiguous, so shifted products run over
//! contiguous slices.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub(crate) struct Grid {
    lo: Vec<i64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<Complex64>,
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Grid {
    pub(crate) fn zeros(lo: Vec<i64>, shape: Vec<usize>) -> Grid {
        let n = shape.iter().product();
        Grid {
            strides: strides_of(&shape),
            lo,
            shape,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub(crate) fn empty(dim: usize) -> Grid {
        Grid::zeros(vec![0; dim], vec![0; dim])
    }

    pub(crate) fn from_points<'a>(
        dim: usize,
        points: impl Iterator<Item = (&'a [i64], Complex64)> + Clone,
    ) -> Grid {
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        let mut any = false;
        for (p, _) in points.clone() {
            any = true;
            for i in 0..dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if !any {
            return Grid::empty(dim);
        }
        let shape = (0..dim).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
        let mut g = Grid::zeros(lo, shape);
        for (p, v) in points {
            let o = g.offset(p);
            g.data[o] += v;
        }
        g
    }

    pub(crate) fn dim(&self) -> usize {
        self.lo.len()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Bounding box `(lo, hi)`, inclusive; `None` when empty.
    pub(crate) fn bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        if self.is_empty() {
            return None;
        }
        Some((self.lo.clone(), (0..self.dim()).map(|i| self.hi(i)).collect()))
    }

    pub(crate) fn len(&self) -> usize {
        self.data.len()
    }

    fn hi(&self, i: usize) -> i64 {
        self.lo[i] + self.shape[i] as i64 - 1
    }

    fn contains(&self, p: &[i64]) -> bool {
        (0..self.dim()).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi(i))
    }

    fn offset(&self, p: &[i64]) -> usize {
        (0..self.dim())
            .map(|i| (p[i] - self.lo[i]) as usize * self.strides[i])
            .sum()
    }

    pub(crate) fn get(&self, p: &[i64]) -> Complex64 {
        if self.contains(p) {
            self.data[self.offset(p)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub(crate) fn sum(&self) -> Complex64 {
        self.data.iter().sum()
    }

    pub(crate) fn sum_norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Nonzero entries with their coordinates.
    pub(crate) fn entries(&self) -> Vec<(Vec<i64>, Complex64)> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim()];
        for (k, v) in self.data.iter().enumerate() {
            let mut rem = k;
            for i in 0..self.dim() {
                idx[i] = rem / self.strides[i];
                rem %= self.strides[i];
            }
            if *v != Complex64::new(0.0, 0.0) {
                out.push(((0..self.dim()).map(|i| self.lo[i] + idx[i] as i64).collect(), *v));
            }
        }
        out
    }

    /// Box of points `x` with `x + sa` in `a` and `x + sb` in `b`.
    fn overlap(a: &Grid, sa: &[i64], b: &Grid, sb: &[i64]) -> Option<(Vec<i64>, Vec<usize>)> {
        if a.is_empty() || b.is_empty() {
            return None;
        }
        let d = a.dim();
        let mut lo = vec![0; d];
        let mut shape = vec![0; d];
        for i in 0..d {
            let l = (a.lo[i] - sa[i]).max(b.lo[i] - sb[i]);
            let h = (a.hi(i) - sa[i]).min(b.hi(i) - sb[i]);
            if h < l {
                return None;
            }
            lo[i] = l;
            shape[i] = (h - l + 1) as usize;
        }
        Some((lo, shape))
    }

    /// Calls `f(row_start, a_offset, b_offset, len)` for every row of the
    /// overlap box.
    fn for_each_row(
        a: &Grid,
        sa: &[i64],
        b: &Grid,
        sb: &[i64],
        lo: &[i64],
        shape: &[usize],
        mut f: impl FnMut(usize, usize, usize, usize),
    ) {
        let d = lo.len();
        let len = shape[d - 1];
        let rows: usize = shape[..d - 1].iter().product();
        let mut idx = vec![0usize; d];
        let mut p = vec![0i64; d];
        for row in 0..rows {
            for i in 0..d {
                p[i] = lo[i] + idx[i] as i64;
            }
            let pa: Vec<i64> = (0..d).map(|i| p[i] + sa[i]).collect();
            let pb: Vec<i64> = (0..d).map(|i| p[i] + sb[i]).collect();
            f(row * len, a.offset(&pa), b.offset(&pb), len);
            for i in (0..d - 1).rev() {
                idx[i] += 1;
                if idx[i] < shape[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    /// `x ↦ a(x + sa) · conj(b(x + sb))`.
    pub(crate) fn shift_product(a: &Grid, sa: &[i64], b: &Grid, sb: &[i64]) -> Grid {
        let Some((lo, shape)) = Grid::overlap(a, sa, b, sb) else {
            return Grid::empty(a.dim());
        };
        let mut out = Grid::zeros(lo.clone(), shape.clone());
        Grid::for_each_row(a, sa, b, sb, &lo, &shape, |o, oa, ob, len| {
            let dst = &mut out.data[o..o + len];
            let xa = &a.data[oa..oa + len];
            let xb = &b.data[ob..ob + len];
            for k in 0..len {
                dst[k] = xa[k] * xb[k].conj();
            }
        });
        out
    }

    /// `Σ_x a(x + sa) · conj(b(x + sb))` without materializing the product.
    pub(crate) fn shift_product_sum(a: &Grid, sa: &[i64], b: &Grid, sb: &[i64]) -> Complex64 {
        let Some((lo, shape)) = Grid::overlap(a, sa, b, sb) else {
            return Complex64::new(0.0, 0.0);
        };
        let mut acc = Complex64::new(0.0, 0.0);
        Grid::for_each_row(a, sa, b, sb, &lo, &shape, |_, oa, ob, len| {
            let xa = &a.data[oa..oa + len];
            let xb = &b.data[ob..ob + len];
            for k in 0..len {
                acc += xa[k] * xb[k].conj();
            }
        });
        acc
    }

    /// `x ↦ Σ_{k=-h}^{h} g(x + k·beta)`.
    pub(crate) fn window_sum(&self, beta: &[i64], h: u64) -> Grid {
        if self.is_empty() {
            return self.clone();
        }
        let d = self.dim();
        if beta.iter().all(|&b| b == 0) {
            let mut out = self.clone();
            let k = (2 * h + 1) as f64;
            out.data.iter_mut().for_each(|v| *v *= k);
            return out;
        }
        // A lexicographically positive direction makes x - beta precede x
        // in row-major order.
        let first = beta.iter().position(|&b| b != 0).expect("nonzero");
        let beta: Vec<i64> = if beta[first] < 0 {
            beta.iter().map(|b| -b).collect()
        } else {
            beta.to_vec()
        };
        let h = h as i64;
        let lo: Vec<i64> = (0..d).map(|i| self.lo[i] - h * beta[i].abs()).collect();
        let shape: Vec<usize> = (0..d)
            .map(|i| self.shape[i] + 2 * (h * beta[i].abs()) as usize)
            .collect();
        let mut out = Grid::zeros(lo, shape);
        let n = out.data.len();
        let mut p = out.lo.clone();
        let mut q = vec![0i64; d];
        for k in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            for i in 0..d {
                q[i] = p[i] - beta[i];
            }
            if out.contains(&q) {
                v += out.data[out.offset(&q)];
            }
            for i in 0..d {
                q[i] = p[i] + h * beta[i];
            }
            v += self.get(&q);
            for i in 0..d {
                q[i] = p[i] - (h + 1) * beta[i];
            }
            v -= self.get(&q);
            out.data[k] = v;
            for i in (0..d).rev() {
                p[i] += 1;
                if p[i] <= out.hi(i) {
                    break;
                }
                p[i] = out.lo[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid_1d(lo: i64, vals: &[f64]) -> Grid {
        let pts: Vec<(Vec<i64>, Complex64)> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| (vec![lo + i as i64], c(v)))
            .collect();
        Grid::from_points(1, pts.iter().map(|(p, v)| (p.as_slice(), *v)))
    }

    #[test]
    fn shifted_products() {
        let g = grid_1d(0, &[1.0, 2.0, 3.0]);
        // Σ_x g(x) g(x+1) = 1*2 + 2*3
        assert_eq!(Grid::shift_product_sum(&g, &[0], &g, &[1]), c(8.0));
        let p = Grid::shift_product(&g, &[0], &g, &[1]);
        assert_eq!(p.entries(), vec![(vec![0], c(2.0)), (vec![1], c(6.0))]);
        assert_eq!(Grid::shift_product_sum(&g, &[0], &g, &[5]), c(0.0));
    }

    #[test]
    fn window_sums_match_naive() {
        let pts: Vec<(Vec<i64>, Complex64)> = (0..5)
            .flat_map(|x| (0..4).map(move |y| (vec![x, y], Complex64::new((x * 3 + y) as f64, (x - y) as f64))))
            .collect();
        let g = Grid::from_points(2, pts.iter().map(|(p, v)| (p.as_slice(), *v)));
        for beta in [[1i64, 0], [0, 1], [1, -2], [-2, 1], [0, 0]] {
            let w = g.window_sum(&beta, 2);
            for x in -8..14 {
                for y in -8..14 {
                    let naive: Complex64 = (-2..=2).map(|k| g.get(&[x + k * beta[0], y + k * beta[1]])).sum();
                    assert!((w.get(&[x, y]) - naive).norm() < 1e-9, "{beta:?} {x} {y}");
                }
            }
        }
    }
}
