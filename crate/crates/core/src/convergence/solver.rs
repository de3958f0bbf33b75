//! Direct solver for periodic banded operators with a one-dimensional kernel.
//!
//! The singular periodic system is bordered by a column `c` and a row `d`:
//!
//! ```text
//! [ A   c ] [u]   [f]
//! [ dᵀ  0 ] [λ] = [g]
//! ```
//!
//! Ordering the unknowns so that the last `b` atoms (b = stencil reach) and
//! the multiplier come last, the leading block is a plain band matrix and
//! every wrap-around entry sits in the trailing rows or columns. The band
//! block is factorised with partial pivoting and the small trailing system
//! is solved through its Schur complement.

use crate::chain::PeriodicField;
use crate::error::{QcError, Result};
use crate::model::LinearChainOperator;
use crate::scalar::{Real, Scalar};

/// Band LU with partial pivoting, LAPACK `gbtrf` layout.
struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            ab: vec![T::zero(); n * width],
            pivots: vec![0; n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.ab[self.idx(i, j)]
    }

    fn factor(&mut self, scale: T) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let tiny = scale * T::epsilon() * T::from_int(n as i64);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(QcError::RankDeficient(format!(
                    "band pivot {k} is {:e}",
                    Scalar::to_f64(&best)
                )));
            }
            self.pivots[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.ab.swap(a, b);
                }
            }
            let piv = self.get(k, k);
            for r in k + 1..=last {
                let l = self.get(r, k) / piv;
                self.set(r, k, l);
                if l != T::zero() {
                    for j in k + 1..=right {
                        let v = self.get(r, j) - l * self.get(k, j);
                        self.set(r, j, v);
                    }
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, b: &mut [T]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for r in k + 1..=last {
                let l = self.get(r, k);
                b[r] = b[r] - l * b[k];
            }
        }
        for k in (0..n).rev() {
            let right = (k + kl + ku).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=right {
                s = s - self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
    }
}

/// Dense LU with partial pivoting for the small trailing block.
struct DenseLu<T> {
    n: usize,
    a: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    fn factor(n: usize, mut a: Vec<T>, scale: T) -> Result<Self> {
        let tiny = scale * T::epsilon() * T::from_int(64);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > tiny) {
                return Err(QcError::RankDeficient(format!(
                    "trailing pivot {k} is {:e}",
                    Scalar::to_f64(&best)
                )));
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            for r in k + 1..n {
                let l = a[r * n + k] / a[k * n + k];
                a[r * n + k] = l;
                for j in k + 1..n {
                    a[r * n + j] = a[r * n + j] - l * a[k * n + j];
                }
            }
        }
        Ok(Self { n, a, pivots })
    }

    fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        // rows were swapped whole during factorisation, multipliers included
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            for r in k + 1..n {
                b[r] = b[r] - self.a[r * n + k] * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..n {
                s = s - self.a[k * n + j] * b[j];
            }
            b[k] = s / self.a[k * n + k];
        }
    }
}

/// Factorisation of the bordered system for one operator.
pub struct BorderedSolver<'a, T> {
    op: &'a LinearChainOperator<T>,
    border_col: Vec<T>,
    border_row: Vec<T>,
    head: usize,
    band: BandLu<T>,
    /// `P⁻¹ Q`, one vector per trailing column.
    coupling: Vec<Vec<T>>,
    /// `R`, one vector per trailing row.
    lower: Vec<Vec<T>>,
    schur: DenseLu<T>,
}

impl<'a, T: Real> BorderedSolver<'a, T> {
    /// Factorises `[[A, c], [dᵀ, 0]]` where `A` is the operator's linear part
    /// in ε²-units.
    pub fn new(
        op: &'a LinearChainOperator<T>,
        border_col: Vec<T>,
        border_row: Vec<T>,
    ) -> Result<Self> {
        let n = op.n();
        border_col_len(&border_col, n)?;
        border_col_len(&border_row, n)?;
        let b = op.max_reach().max(1) as usize;
        if n < 2 * b + 2 {
            return Err(QcError::RankDeficient(format!(
                "chain of {n} too short for reach {b}"
            )));
        }
        let head = n - b;
        let tail = b + 1;
        let scale = op
            .rows()
            .map(|r| r.coeffs().iter().fold(T::zero(), |a, c| a + c.abs()))
            .fold(T::zero(), T::max)
            .max(T::min_positive_value());
        let col = |i: usize, o: i64| crate::chain::wrap_index(i as i64 + 1 + o, n) - 1;

        let mut band = BandLu::new(head, b, b);
        let mut upper = vec![vec![T::zero(); head]; tail];
        for i in 0..head {
            for (o, &c) in op.row(i as i64 + 1).pairs() {
                let j = col(i, o);
                if j < head {
                    let v = band.get(i, j) + c;
                    band.set(i, j, v);
                } else {
                    upper[j - head][i] = upper[j - head][i] + c;
                }
            }
            upper[b][i] = border_col[i];
        }
        let mut lower = vec![vec![T::zero(); head]; tail];
        let mut corner = vec![T::zero(); tail * tail];
        for t in 0..b {
            let i = head + t;
            for (o, &c) in op.row(i as i64 + 1).pairs() {
                let j = col(i, o);
                if j < head {
                    lower[t][j] = lower[t][j] + c;
                } else {
                    corner[t * tail + (j - head)] = corner[t * tail + (j - head)] + c;
                }
            }
            corner[t * tail + b] = border_col[i];
        }
        lower[b].copy_from_slice(&border_row[..head]);
        corner[b * tail..b * tail + b].copy_from_slice(&border_row[head..]);

        band.factor(scale)?;
        for column in upper.iter_mut() {
            band.solve_in_place(column);
        }
        for a in 0..tail {
            for c in 0..tail {
                corner[a * tail + c] = corner[a * tail + c] - dot(&lower[a], &upper[c]);
            }
        }
        let schur = DenseLu::factor(tail, corner, scale)?;
        Ok(Self {
            op,
            border_col,
            border_row,
            head,
            band,
            coupling: upper,
            lower,
            schur,
        })
    }

    /// One pass of the block elimination.
    fn solve_once(&self, rhs: &[T], g: T) -> (Vec<T>, T) {
        let head = self.head;
        let tail = self.coupling.len();
        let mut y = rhs[..head].to_vec();
        self.band.solve_in_place(&mut y);
        let mut z: Vec<T> = rhs[head..].iter().copied().chain(std::iter::once(g)).collect();
        for (a, zi) in z.iter_mut().enumerate() {
            *zi = *zi - dot(&self.lower[a], &y);
        }
        self.schur.solve_in_place(&mut z);
        for (c, col) in self.coupling.iter().enumerate() {
            let zc = z[c];
            for (yi, &x) in y.iter_mut().zip(col) {
                *yi = *yi - x * zc;
            }
        }
        y.extend_from_slice(&z[..tail - 1]);
        (y, z[tail - 1])
    }

    fn residual(&self, u: &[T], lambda: T, rhs: &[T], g: T) -> (Vec<T>, T) {
        let field = PeriodicField::from_values(u.to_vec());
        let au = self.op.apply_scaled(&field).expect("length checked");
        let r = rhs
            .iter()
            .zip(au.values())
            .zip(&self.border_col)
            .map(|((&f, &a), &c)| f - a - c * lambda)
            .collect();
        (r, g - dot(&self.border_row, u))
    }

    /// Solves the bordered system with a few steps of iterative refinement;
    /// returns `(u, λ)`.
    pub fn solve(&self, rhs: &[T], g: T) -> (Vec<T>, T) {
        let (mut u, mut lambda) = self.solve_once(rhs, g);
        let target = rhs.iter().fold(T::zero(), |m, v| m.max(v.abs())) * T::epsilon();
        let sup = |r: &[T]| r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let (mut r, mut rg) = self.residual(&u, lambda, rhs, g);
        let mut best = (sup(&r), u.clone(), lambda);
        for _ in 0..6 {
            // the constraint row sums N values of size ‖u‖, so its rounding
            // floor is far above the force rows'; stop on the force rows only
            if best.0 <= target {
                break;
            }
            let (du, dl) = self.solve_once(&r, rg);
            for (x, d) in u.iter_mut().zip(du) {
                *x = *x + d;
            }
            lambda = lambda + dl;
            (r, rg) = self.residual(&u, lambda, rhs, g);
            let size = sup(&r);
            if size < best.0 {
                best = (size, u.clone(), lambda);
            }
        }
        (best.1, best.2)
    }
}

fn border_col_len<T>(v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(QcError::LengthMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Left null vector `w` of the operator's linear part (`wᵀA = 0`), scaled so
/// that its entries sum to `N`. Symmetric operators return the constant
/// vector directly.
pub fn left_null_vector<T: Real>(op: &LinearChainOperator<T>) -> Result<Vec<T>> {
    let n = op.n();
    let scale = op
        .rows()
        .map(|r| r.coeffs().iter().fold(T::zero(), |a, c| a + c.abs()))
        .fold(T::zero(), T::max);
    if op.symmetry_defect() <= T::rounding_tolerance() * scale {
        return Ok(vec![T::one(); n]);
    }
    // [[Aᵀ, 1], [1ᵀ, 0]] [w; λ] = [0; N]: A1 = 0 forces λ = 0.
    let transposed = op.without_ghost().transpose();
    let solver = BorderedSolver::new(&transposed, vec![T::one(); n], vec![T::one(); n])?;
    let (w, _) = solver.solve(&vec![T::zero(); n], T::from_int(n as i64));
    Ok(w)
}

/// Unique mean-zero `u` with `linear(u) = f − (wᵀf / wᵀw) w`, where `w`
/// spans the left kernel (the mean for symmetric operators).
///
/// The ghost field of `op` is ignored; callers move it to the right-hand
/// side. Fails when the kernel is larger than the constants or when the
/// residual exceeds `1e−10 ‖f‖_∞` plus the rounding floor
/// `4 ε_mach N² max_i Σ|c| ‖u‖_∞`.
pub fn solve_equilibrium<T: Real>(
    op: &LinearChainOperator<T>,
    f: &PeriodicField<T>,
) -> Result<PeriodicField<T>> {
    let n = op.n();
    f.check_len(n)?;
    op.check_shift_invariant()
        .map_err(|e| QcError::RankDeficient(format!("constants are not in the kernel: {e}")))?;
    let fmax = f.sup_norm();
    if fmax == T::zero() {
        return Ok(PeriodicField::zeros(n));
    }
    let w = left_null_vector(op)?;
    let projected = project_out(f.values(), &w);

    let linear = op.without_ghost();
    let solver = BorderedSolver::new(&linear, w, vec![T::one(); n])?;
    // the operator acts as (1/ε²)·A, so solve A u = ε² f
    let eps_sq = T::from_ratio(1, (n * n) as i64);
    let rhs: Vec<T> = projected.iter().map(|&v| v * eps_sq).collect();
    let (u, _) = solver.solve(&rhs, T::zero());
    let u = PeriodicField::from_values(u);
    let mean = u.mean();
    let u = u.map(|&v| v - mean);

    let applied = linear.apply_linear(&u)?;
    let residual = applied
        .values()
        .iter()
        .zip(&projected)
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    // 1e−10‖f‖ plus the backward-error floor of storing u in T: each u_i is
    // off by half an ulp and the operator multiplies that by N²·Σ|c|
    let row_l1 = linear
        .rows()
        .map(|r| r.coeffs().iter().fold(T::zero(), |a, c| a + c.abs()))
        .fold(T::zero(), T::max);
    let floor = T::from_int(4) * T::epsilon() * T::from_int((n * n) as i64) * row_l1 * u.sup_norm();
    let tolerance = T::from_f64(1e-10) * fmax + floor;
    if !(residual <= tolerance) {
        return Err(QcError::SolveResidual {
            residual: Scalar::to_f64(&residual),
            tolerance: Scalar::to_f64(&tolerance),
        });
    }
    Ok(u)
}

/// `f − (wᵀf / wᵀw) w`.
pub fn project_out<T: Real>(f: &[T], w: &[T]) -> Vec<T> {
    let coef = dot(w, f) / dot(w, w);
    f.iter().zip(w).map(|(&v, &x)| v - coef * x).collect()
}
