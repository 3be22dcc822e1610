//! Truncations of `W_{h,φ}` against normalized monomials and their spectra.

use std::sync::OnceLock;

use faer::{Col, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::series::{default_radius, taylor_coefficients, FftPair, PowerSeries, C64, ONE, ZERO};
use crate::spaces::{monomial_norms_sq, SpaceSpec};

/// Largest truncation order with dense decompositions.
pub const MAX_DENSE_ORDER: usize = 4096;

/// Cap on Golub–Kahan–Lanczos steps in [`operator_norm_estimate`].
const LANCZOS_MAX_STEPS: usize = 400;

/// `A_{m,n} = ⟨W e_n, e_m⟩` for `0 ≤ m, n ≤ N` with `e_n = zⁿ/‖zⁿ‖`.
#[derive(Debug)]
pub struct TruncationMatrix {
    space: SpaceSpec,
    order: usize,
    /// Column-major, `(N+1)²` entries.
    entries: Vec<C64>,
    /// Per column: energy of `hφⁿ` in degrees `N+1..2N` relative to degrees `0..2N`.
    column_tails: Vec<f64>,
    singular_values: OnceLock<Vec<f64>>,
}

impl Clone for TruncationMatrix {
    fn clone(&self) -> Self {
        Self {
            space: self.space,
            order: self.order,
            entries: self.entries.clone(),
            column_tails: self.column_tails.clone(),
            singular_values: self.singular_values.clone(),
        }
    }
}

impl TruncationMatrix {
    /// Wraps column-major entries. Used by tests and by callers that already
    /// hold a matrix in normalized-monomial coordinates.
    pub fn from_columns(space: SpaceSpec, order: usize, entries: Vec<C64>) -> Result<Self> {
        let dim = order + 1;
        if entries.len() != dim * dim {
            return Err(Error::Parameter(format!("expected {} entries, got {}", dim * dim, entries.len())));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        Ok(Self { space, order, entries, column_tails: vec![0.0; dim], singular_values: OnceLock::new() })
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn entry(&self, m: usize, n: usize) -> C64 {
        self.entries[m + n * self.dim()]
    }

    pub fn column(&self, n: usize) -> &[C64] {
        let d = self.dim();
        &self.entries[n * d..(n + 1) * d]
    }

    pub fn column_tails(&self) -> &[f64] {
        &self.column_tails
    }

    pub fn max_column_tail(&self) -> f64 {
        self.column_tails.iter().copied().fold(0.0, f64::max)
    }

    /// Leading `(k+1)×(k+1)` block, the truncation at order `k`.
    pub fn compression(&self, k: usize) -> TruncationMatrix {
        let k = k.min(self.order);
        let d = k + 1;
        let mut e = Vec::with_capacity(d * d);
        for n in 0..d {
            e.extend_from_slice(&self.column(n)[..d]);
        }
        Self {
            space: self.space,
            order: k,
            entries: e,
            column_tails: self.column_tails[..d].to_vec(),
            singular_values: OnceLock::new(),
        }
    }

    /// `A·x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut y = vec![ZERO; d];
        for (n, &xn) in x.iter().enumerate().take(d) {
            if xn == ZERO {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.column(n)) {
                *yi += a * xn;
            }
        }
        y
    }

    /// `A*·y`.
    pub fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|n| self.column(n).iter().zip(y).fold(ZERO, |acc, (a, yi)| acc + a.conj() * yi))
            .collect()
    }

    pub fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.dim(), self.dim(), |m, n| self.entry(m, n))
    }

    /// All singular values, nonincreasing; computed once.
    pub fn singular_values(&self) -> Result<&[f64]> {
        if let Some(s) = self.singular_values.get() {
            return Ok(s);
        }
        if self.order > MAX_DENSE_ORDER {
            return Err(Error::ResourceLimit(format!(
                "dense decomposition refused above order {MAX_DENSE_ORDER}, got {}",
                self.order
            )));
        }
        let s = self
            .to_faer()
            .singular_values()
            .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
        Ok(self.singular_values.get_or_init(|| s))
    }
}

/// Coefficients of `h` and `φ` through `order`, exact when possible.
fn symbol_coefficients(f: &FunctionSpec, order: usize) -> Result<PowerSeries> {
    taylor_coefficients(f, order, default_radius(order))
}

/// Runs `col ← col·φ` truncated at `order`, handing each column to `visit`.
/// The FFT of `φ` is computed once.
fn for_each_power_column(
    h: &PowerSeries,
    phi: &PowerSeries,
    columns: usize,
    order: usize,
    mut visit: impl FnMut(usize, &[C64]),
) {
    let len = (2 * (order + 1)).next_power_of_two();
    let fft = FftPair::new(len);
    let mut phat = vec![ZERO; len];
    phat[..=order].copy_from_slice(&phi.resized(order).coeffs()[..=order]);
    fft.forward(&mut phat);
    let scale = 1.0 / len as f64;
    let mut col: Vec<C64> = h.resized(order).coeffs().to_vec();
    let mut buf = vec![ZERO; len];
    for n in 0..=columns {
        visit(n, &col);
        if n == columns {
            break;
        }
        buf.fill(ZERO);
        buf[..=order].copy_from_slice(&col);
        fft.forward(&mut buf);
        for (b, p) in buf.iter_mut().zip(&phat) {
            *b *= p * scale;
        }
        fft.inverse(&mut buf);
        col.copy_from_slice(&buf[..=order]);
    }
}

/// Matrix of `W_{h,φ}` at truncation `N`; column `n` holds `hφⁿ` with
/// `A_{m,n} = ĉ_m·‖zᵐ‖/‖zⁿ‖`.
pub fn build_operator_matrix(h: &FunctionSpec, phi: &FunctionSpec, space: SpaceSpec, order: usize) -> Result<TruncationMatrix> {
    if order < 1 {
        return Err(Error::Parameter("truncation order must be at least 1".into()));
    }
    if order > MAX_DENSE_ORDER {
        return Err(Error::ResourceLimit(format!("truncation order {order} exceeds {MAX_DENSE_ORDER}")));
    }
    space.validate()?;
    phi.self_map_gate()?;
    let ext = 2 * order;
    let hs = symbol_coefficients(h, ext)?;
    let ps = symbol_coefficients(phi, ext)?;
    let nu = monomial_norms_sq(space, ext);
    let root: Vec<f64> = nu.iter().map(|v| v.sqrt()).collect();
    let dim = order + 1;
    let mut entries = vec![ZERO; dim * dim];
    let mut tails = vec![0.0; dim];
    for_each_power_column(&hs, &ps, order, ext, |n, col| {
        let out = &mut entries[n * dim..(n + 1) * dim];
        for m in 0..dim {
            out[m] = col[m] * (root[m] / root[n]);
        }
        let head: f64 = (0..dim).map(|m| col[m].norm_sqr() * nu[m]).sum();
        let tail: f64 = (dim..=ext).map(|m| col[m].norm_sqr() * nu[m]).sum();
        tails[n] = if head + tail > 0.0 { (tail / (head + tail)).sqrt() } else { 0.0 };
    });
    let mut a = TruncationMatrix::from_columns(space, order, entries)?;
    a.column_tails = tails;
    Ok(a)
}

fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of the bidiagonal `B` and the last entry of its left vector.
///
/// Works on the zero-diagonal tridiagonal with off-diagonals
/// `α₁, β₁, α₂, …, α_k`, whose eigenvalues are `±σᵢ`: bisection by Sturm
/// counts for the top eigenvalue, then inverse iteration for its vector.
fn bidiagonal_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, f64)> {
    let k = alpha.len();
    if k == 0 {
        return Ok((0.0, 0.0));
    }
    let n = 2 * k;
    let e: Vec<f64> = (0..n - 1).map(|i| if i % 2 == 0 { alpha[i / 2] } else { beta[i / 2] }).collect();
    let bound = (0..n)
        .map(|i| {
            let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { e[i].abs() } else { 0.0 };
            l + r
        })
        .fold(0.0, f64::max);
    if bound == 0.0 {
        return Ok((0.0, 0.0));
    }
    // Number of eigenvalues strictly below `x`.
    let below = |x: f64| {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0usize;
        let mut d = -x;
        for i in 0..n {
            if i > 0 {
                d = -x - e[i - 1] * e[i - 1] / d;
            }
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (0.0, bound * (1.0 + 4.0 * f64::EPSILON));
    while hi - lo > 2.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    if !s.is_finite() {
        return Err(Error::Numerical("bidiagonal bisection produced a non-finite value".into()));
    }
    let y = inverse_iteration(&e, s, bound);
    Ok((s, std::f64::consts::SQRT_2 * y[n - 1]))
}

/// Unit eigenvector of the zero-diagonal tridiagonal with off-diagonal `e`
/// for the eigenvalue closest to `shift`, by two steps of inverse iteration
/// with a partially pivoted LU factorisation.
fn inverse_iteration(e: &[f64], shift: f64, scale: f64) -> Vec<f64> {
    let n = e.len() + 1;
    let guard = f64::EPSILON * scale;
    let mut dl = e.to_vec();
    let mut d = vec![-shift; n];
    let mut du = e.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = guard;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let t = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t - f * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    for di in d.iter_mut() {
        if di.abs() < guard {
            *di = guard.copysign(*di);
        }
    }
    let mut y = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..2 {
        for i in 0..n - 1 {
            if swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= dl[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= du[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= du2[i] * y[i + 2];
            }
            y[i] = v / d[i];
        }
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > 0.0 && nrm.is_finite() {
            y.iter_mut().for_each(|v| *v /= nrm);
        }
    }
    y
}

/// `σ_max(A)` by Golub–Kahan–Lanczos bidiagonalization with full
/// reorthogonalization. Stops when the top Ritz residual falls below
/// `1e−10·σ`, when the estimate moves by less than `1e−12` relative between
/// checkpoints, or when the Krylov space is exhausted.
pub fn operator_norm_estimate(a: &TruncationMatrix) -> Result<f64> {
    let d = a.dim();
    let steps = d.min(LANCZOS_MAX_STEPS);
    let am = a.to_faer();
    let mut vs = Mat::<C64>::zeros(d, steps + 1);
    let mut us = Mat::<C64>::zeros(d, steps);
    let mut v: Col<C64> = Col::from_fn(d, |j| C64::from_polar(1.0 / ((j + 1) as f64).sqrt(), 0.618_033_988_75 * j as f64));
    let nv = v.norm_l2();
    v.iter_mut().for_each(|x| *x /= nv);
    vs.col_mut(0).copy_from(&v);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best: f64 = 0.0;
    let mut next_check = 0usize;
    for k in 0..steps {
        let mut u: Col<C64> = am.as_ref() * vs.col(k);
        reorthogonalize(&mut u, us.as_ref().subcols(0, k));
        let ak = u.norm_l2();
        alpha.push(ak);
        if ak <= 1e-300 {
            break;
        }
        u.iter_mut().for_each(|x| *x /= ak);
        us.col_mut(k).copy_from(&u);
        let mut w: Col<C64> = am.as_ref().adjoint() * us.col(k);
        reorthogonalize(&mut w, vs.as_ref().subcols(0, k + 1));
        let bk = w.norm_l2();
        if k >= next_check || k + 1 == steps || bk <= 1e-300 {
            let (s, x) = bidiagonal_top(&alpha, &beta)?;
            let stalled = k >= 8 && (s - best).abs() <= 1e-12 * s;
            best = s;
            if bk * x.abs() <= 1e-10 * s || bk <= 1e-14 * s || stalled {
                break;
            }
            next_check = if k < 8 { k + 1 } else { k + (k / 4).max(8) };
        }
        if bk <= 1e-300 || k + 1 == steps {
            break;
        }
        beta.push(bk);
        w.iter_mut().for_each(|x| *x /= bk);
        vs.col_mut(k + 1).copy_from(&w);
    }
    Ok(best)
}

/// Two passes of classical Gram–Schmidt against the columns of `q`.
fn reorthogonalize(x: &mut Col<C64>, q: MatRef<'_, C64>) {
    if q.ncols() == 0 {
        return;
    }
    for _ in 0..2 {
        let c: Col<C64> = q.adjoint() * x.as_ref();
        let p: Col<C64> = q * c.as_ref();
        *x -= &p;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConvergenceFlag {
    Converged,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenEstimate {
    pub p: f64,
    /// `‖A_N‖_{S_p}` at the full truncation.
    pub value: f64,
    /// `(order, value)` at `N/4`, `N/2`, `N`.
    pub truncation_trace: Vec<(usize, f64)>,
    pub flag: ConvergenceFlag,
    #[serde(with = "crate::criteria::extended_f64")]
    pub cauchy_gap: f64,
    #[serde(with = "crate::criteria::extended_f64")]
    pub growth: f64,
}

/// Cauchy gap below which a trace counts as converged.
pub const SCHATTEN_CAUCHY_GAP: f64 = 1e-6;
/// Ratio `S(N)/S(N/2)` at or above which a trace counts as divergent.
pub const SCHATTEN_GROWTH: f64 = 1.1;

pub fn schatten_from_singular_values(s: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return s.first().copied().unwrap_or(0.0);
    }
    let terms: Vec<f64> = s.iter().map(|x| x.powf(p)).collect();
    crate::series::pairwise_sum(&terms).powf(1.0 / p)
}

/// `(Σσᵢᵖ)^{1/p}` with the trace at `N/4`, `N/2`, `N` and a convergence flag.
pub fn schatten_norm(a: &TruncationMatrix, p: f64) -> Result<SchattenEstimate> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Schatten exponent needs p ≥ 1, got {p}")));
    }
    let n = a.order();
    let mut trace = Vec::new();
    for k in [n / 4, n / 2] {
        let s = a.compression(k).singular_values()?.to_vec();
        trace.push((k, schatten_from_singular_values(&s, p)));
    }
    let full = schatten_from_singular_values(a.singular_values()?, p);
    trace.push((n, full));
    let half = trace[1].1;
    let gap = (full - half).abs();
    let growth = if half > 0.0 { full / half } else if full > 0.0 { f64::INFINITY } else { 1.0 };
    let flag = if gap < SCHATTEN_CAUCHY_GAP {
        ConvergenceFlag::Converged
    } else if growth >= SCHATTEN_GROWTH {
        ConvergenceFlag::Divergent
    } else {
        ConvergenceFlag::Inconclusive
    };
    Ok(SchattenEstimate { p, value: full, truncation_trace: trace, flag, cauchy_gap: gap, growth })
}

/// Coordinates of `K_w` in the normalized monomial basis: `w̄ᵐ/‖zᵐ‖`.
fn kernel_coordinates(space: SpaceSpec, w: C64, order: usize) -> Vec<C64> {
    let nu = monomial_norms_sq(space, order);
    let mut p = ONE;
    let wb = w.conj();
    nu.iter()
        .map(|v| {
            let c = p / v.sqrt();
            p *= wb;
            c
        })
        .collect()
}

/// `‖A*κ_w − conj(h(w))·κ_{φ(w)}‖/‖κ_w‖` in normalized-monomial coordinates.
pub fn adjoint_kernel_check(a: &TruncationMatrix, h: &FunctionSpec, phi: &FunctionSpec, w: C64) -> Result<f64> {
    if !(w.norm() <= 0.9) {
        return Err(Error::Precondition(format!("adjoint check needs |w| ≤ 0.9, got {}", w.norm())));
    }
    let kw = kernel_coordinates(a.space(), w, a.order());
    let kp = kernel_coordinates(a.space(), phi.eval(w)?, a.order());
    let hw = h.eval(w)?.conj();
    let lhs = a.apply_adjoint(&kw);
    let diff: Vec<C64> = lhs.iter().zip(&kp).map(|(l, k)| l - hw * k).collect();
    Ok(vnorm(&diff) / vnorm(&kw))
}

/// Moment matrix `G_{m,n} = ⟨hφⁿ, hφᵐ⟩ = ∫ z̄ᵐzⁿ dμ` for `0 ≤ m, n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub order: usize,
    /// Row-major `(N+1)²`.
    pub entries: Vec<C64>,
    /// Largest relative tail of `hφⁿ` beyond the internal truncation.
    pub max_tail: f64,
}

impl GramMatrix {
    pub fn entry(&self, m: usize, n: usize) -> C64 {
        self.entries[m * (self.order + 1) + n]
    }

    pub fn to_faer(&self) -> Mat<C64> {
        let d = self.order + 1;
        Mat::from_fn(d, d, |m, n| self.entry(m, n))
    }

    /// Eigenvalues, nondecreasing.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let d = self.order + 1;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                m = m.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        m
    }
}

/// Tail share below which the Gram expansion order stops doubling.
const GRAM_TAIL_TARGET: f64 = 1e-12;
/// Cap on the Gram expansion order.
const GRAM_MAX_EXPANSION: usize = 1 << 15;

/// Moments of `μ` from the columns `hφⁿ`. Each column is expanded to an
/// internal order, starting at `4N` plus the degree of a polynomial weight and
/// doubling until the top quarter of every column carries less than `1e−12` of
/// its energy (or the cap is reached); `max_tail` reports that share.
pub fn gram_moments(h: &FunctionSpec, phi: &FunctionSpec, space: SpaceSpec, order: usize) -> Result<GramMatrix> {
    if order < 1 {
        return Err(Error::Parameter("truncation order must be at least 1".into()));
    }
    if order > MAX_DENSE_ORDER / 4 {
        return Err(Error::ResourceLimit(format!("Gram matrix order {order} exceeds {}", MAX_DENSE_ORDER / 4)));
    }
    space.validate()?;
    phi.self_map_gate()?;
    let h_degree = match h {
        FunctionSpec::Series { coeffs } => coeffs.order(),
        _ => 0,
    };
    let mut ext = (4 * order).max(64) + h_degree;
    loop {
        let (cols, nu, max_tail) = gram_columns(h, phi, space, order, ext)?;
        if max_tail <= GRAM_TAIL_TARGET || 2 * ext > GRAM_MAX_EXPANSION {
            let d = order + 1;
            let mut entries = vec![ZERO; d * d];
            for m in 0..d {
                for n in m..d {
                    let terms: Vec<C64> = (0..=ext).map(|k| cols[n][k] * cols[m][k].conj() * nu[k]).collect();
                    let g = crate::spaces::complex_sum(&terms);
                    entries[m * d + n] = g;
                    entries[n * d + m] = g.conj();
                }
            }
            return Ok(GramMatrix { order, entries, max_tail });
        }
        ext *= 2;
    }
}

type GramColumns = (Vec<Vec<C64>>, Vec<f64>, f64);

fn gram_columns(h: &FunctionSpec, phi: &FunctionSpec, space: SpaceSpec, order: usize, ext: usize) -> Result<GramColumns> {
    let hs = symbol_coefficients(h, ext)?;
    let ps = symbol_coefficients(phi, ext)?;
    let nu = monomial_norms_sq(space, ext);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(order + 1);
    let mut max_tail: f64 = 0.0;
    let cut = 3 * ext / 4;
    for_each_power_column(&hs, &ps, order, ext, |_, col| {
        let total: f64 = col.iter().zip(&nu).map(|(c, v)| c.norm_sqr() * v).sum();
        let tail: f64 = col[cut..].iter().zip(&nu[cut..]).map(|(c, v)| c.norm_sqr() * v).sum();
        if total > 0.0 {
            max_tail = max_tail.max((tail / total).sqrt());
        }
        cols.push(col.to_vec());
    });
    Ok((cols, nu, max_tail))
}
