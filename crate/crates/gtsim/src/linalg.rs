//! Small dense-matrix helpers shared by the topology and analysis layers.
//!
//! Everything here targets matrices of at most a few hundred rows, so the
//! implementations favor clarity and determinism over cache tricks. The one
//! nontrivial routine is the power iteration, which backs both the network
//! spectral gap and the spectral radii of the small comparison systems.

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Mat { rows, cols, data }
    }

    /// Matrix with every row equal to `row`.
    pub fn from_broadcast_row(rows: usize, row: &[f64]) -> Self {
        let mut data = Vec::with_capacity(rows * row.len());
        for _ in 0..rows {
            data.extend_from_slice(row);
        }
        Mat { rows, cols: row.len(), data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Column means, i.e. the network average when rows are node states.
    pub fn col_mean(&self, out: &mut [f64]) {
        assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..self.rows {
            let r = self.row(i);
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        let inv = 1.0 / self.rows as f64;
        out.iter_mut().for_each(|x| *x *= inv);
    }

    /// Squared Frobenius norm of the deviation from the row mean,
    /// i.e. `||X - JX||^2` for the stacked state.
    pub fn deviation_sq(&self) -> f64 {
        let mut mean = vec![0.0; self.cols];
        self.col_mean(&mut mean);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for (v, m) in self.row(i).iter().zip(&mean) {
                let d = v - m;
                acc += d * d;
            }
        }
        acc
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

/// Dense mat-vec: `out = a * v` for a square row-major matrix.
pub fn matvec(a: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for (w, x) in row.iter().zip(v) {
            acc += w * x;
        }
        out[i] = acc;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Deterministic start vector for the power iterations (splitmix64 fill).
fn seed_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        // map to (0, 1]; strictly positive so nonnegative matrices keep a
        // component along the Perron direction
        v.push((z >> 11) as f64 / (1u64 << 53) as f64 + 1e-3);
    }
    v
}

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITERS: usize = 100_000;

/// Largest singular value of a square matrix via power iteration on `AᵀA`.
///
/// Applies `A` and `Aᵀ` alternately, so `AᵀA` is never formed. Converges from
/// below; stops when the Rayleigh estimate changes by less than [`POWER_TOL`]
/// relative, or after [`POWER_MAX_ITERS`] sweeps.
pub fn spectral_norm(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut v = seed_vector(n);
    let mut av = vec![0.0; n];
    let mut atav = vec![0.0; n];
    let mut est = 0.0_f64;
    for _ in 0..POWER_MAX_ITERS {
        matvec(a, n, &v, &mut av);
        // atav = Aᵀ (A v)
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += a[i * n + j] * av[i];
            }
            atav[j] = acc;
        }
        let vn = norm(&v);
        if vn == 0.0 {
            return 0.0;
        }
        let next = norm(&av) / vn;
        let an = norm(&atav);
        if an == 0.0 {
            return 0.0;
        }
        for (x, y) in v.iter_mut().zip(&atav) {
            *x = y / an;
        }
        if (next - est).abs() <= POWER_TOL * est.max(1.0) {
            return next;
        }
        est = next;
    }
    est
}

/// Spectral radius of a small nonnegative matrix via power iteration.
///
/// The comparison systems built from the convergence propositions are
/// entry-wise nonnegative, so the dominant eigenvalue is real and a positive
/// start vector cannot be orthogonal to the Perron direction.
pub fn spectral_radius(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut v = seed_vector(n);
    let mut av = vec![0.0; n];
    let mut est = 0.0_f64;
    for _ in 0..POWER_MAX_ITERS {
        matvec(a, n, &v, &mut av);
        let vn = norm(&v);
        let an = norm(&av);
        if an == 0.0 || vn == 0.0 {
            return 0.0;
        }
        let next = an / vn;
        for (x, y) in v.iter_mut().zip(&av) {
            *x = y / an;
        }
        if (next - est).abs() <= POWER_TOL * est.max(1.0) {
            return next;
        }
        est = next;
    }
    est
}

/// Compensated (Kahan) accumulator for order-stable trial averaging.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_known_symmetric() {
        // [[0.75, 0.25], [0.25, 0.75]] deflated by J has eigenvalues {0, 0.5}
        let j = 0.5;
        let a = [0.75 - j, 0.25 - j, 0.25 - j, 0.75 - j];
        let s = spectral_norm(&a, 2);
        assert!((s - 0.5).abs() < 1e-10, "s = {s}");
    }

    #[test]
    fn spectral_norm_of_zero_matrix() {
        let a = [0.0; 9];
        assert_eq!(spectral_norm(&a, 3), 0.0);
    }

    #[test]
    fn spectral_radius_diagonal() {
        let a = [0.5, 0.0, 0.0, 0.5];
        assert!((spectral_radius(&a, 2) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_lower_triangular() {
        // eigenvalues on the diagonal; dominant is 0.9
        let a = [0.5, 0.0, 0.0, 0.3, 0.9, 0.0, 0.1, 0.2, 0.4];
        let r = spectral_radius(&a, 3);
        assert!((r - 0.9).abs() < 1e-9, "r = {r}");
    }

    #[test]
    fn kahan_beats_naive_on_small_increments() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..10_000_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-9)).abs() < 1e-12);
    }

    #[test]
    fn col_mean_and_deviation() {
        let m = Mat::from_rows(2, 1, vec![1.0, -1.0]);
        let mut mean = [0.0];
        m.col_mean(&mut mean);
        assert_eq!(mean[0], 0.0);
        assert!((m.deviation_sq() - 2.0).abs() < 1e-15);
    }
}
