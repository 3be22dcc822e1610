//! Gauss–Legendre rules and globally adaptive Gauss–Kronrod integration.

use std::f64::consts::{PI, TAU};

use crate::series::C64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// The Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// G7/K15 on `[a, b]`: (Kronrod value, |Kronrod − Gauss|).
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// How a panel's integration variable maps to the original one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelMap {
    Identity,
    /// `x = origin + len·t⁴`, `t ∈ [0, 1]`; clusters nodes at `origin`.
    PowerFrom { origin: f64, len: f64 },
}

impl PanelMap {
    fn apply(&self, t: f64) -> (f64, f64) {
        match *self {
            PanelMap::Identity => (t, 1.0),
            PanelMap::PowerFrom { origin, len } => {
                let t2 = t * t;
                (origin + len * t2 * t2, 4.0 * len.abs() * t2 * t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub map: PanelMap,
}

impl Panel {
    pub fn plain(a: f64, b: f64) -> Self {
        Self { a, b, map: PanelMap::Identity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-10, max_subdivisions: 4000 }
    }
}

/// Globally adaptive G7/K15 over a set of panels: the interval with the
/// largest error estimate is bisected until the total error meets tolerance.
pub fn integrate_panels(mut f: impl FnMut(f64) -> f64, panels: &[Panel], opts: QuadOptions) -> QuadResult {
    integrate_indexed(|_, x| f(x), panels, opts)
}

/// As [`integrate_panels`], but the integrand also receives the panel index,
/// so each panel may use its own local coordinate.
pub fn integrate_indexed(mut f: impl FnMut(usize, f64) -> f64, panels: &[Panel], opts: QuadOptions) -> QuadResult {
    struct Piece {
        map: usize,
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }
    let maps: Vec<PanelMap> = panels.iter().map(|p| p.map).collect();
    let mut evals = 0usize;
    let mut run = |m: usize, a: f64, b: f64, evals: &mut usize| {
        let map = maps[m];
        *evals += 15;
        gk15(
            &mut |t| {
                let (x, j) = map.apply(t);
                f(m, x) * j
            },
            a,
            b,
        )
    };
    let mut pieces: Vec<Piece> = Vec::new();
    for (m, p) in panels.iter().enumerate() {
        let (a, b) = match p.map {
            PanelMap::Identity => (p.a, p.b),
            PanelMap::PowerFrom { .. } => (0.0, 1.0),
        };
        let (value, error) = run(m, a, b, &mut evals);
        pieces.push(Piece { map: m, a, b, value, error });
    }
    let total = |ps: &[Piece]| {
        let v: Vec<f64> = ps.iter().map(|p| p.value).collect();
        let e: Vec<f64> = ps.iter().map(|p| p.error).collect();
        (crate::series::pairwise_sum(&v), crate::series::pairwise_sum(&e))
    };
    let mut splits = 0;
    loop {
        let (value, error) = total(&pieces);
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol || splits >= opts.max_subdivisions || !error.is_finite() {
            return QuadResult { value, error, evaluations: evals, converged: error <= tol };
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval exhausted in floating point; freeze its estimate.
            pieces.push(Piece { error: 0.0, ..p });
            splits += 1;
            continue;
        }
        let (v1, e1) = run(p.map, p.a, mid, &mut evals);
        let (v2, e2) = run(p.map, mid, p.b, &mut evals);
        pieces.push(Piece { map: p.map, a: p.a, b: mid, value: v1, error: e1 });
        pieces.push(Piece { map: p.map, a: mid, b: p.b, value: v2, error: e2 });
        splits += 1;
    }
}

/// Adaptive integral over `[a, b]` with interior breakpoints. Breakpoints flagged
/// singular get `t⁴`-graded panels on both sides.
pub fn integrate(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[(f64, bool)],
    opts: QuadOptions,
) -> QuadResult {
    let mut pts: Vec<(f64, bool)> = breakpoints.iter().copied().filter(|(x, _)| *x > a && *x < b).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    pts.dedup_by(|x, y| x.0 == y.0 && {
        y.1 |= x.1;
        true
    });
    let flagged = |e: f64| breakpoints.iter().any(|&(x, s)| s && x == e);
    let mut nodes = vec![(a, flagged(a))];
    nodes.extend(pts);
    nodes.push((b, flagged(b)));
    let mut panels = Vec::new();
    for w in nodes.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        match (s0, s1) {
            (false, false) => panels.push(Panel::plain(x0, x1)),
            (true, false) => panels.push(Panel { a: x0, b: x1, map: PanelMap::PowerFrom { origin: x0, len: x1 - x0 } }),
            (false, true) => panels.push(Panel { a: x0, b: x1, map: PanelMap::PowerFrom { origin: x1, len: x0 - x1 } }),
            (true, true) => {
                let m = 0.5 * (x0 + x1);
                panels.push(Panel { a: x0, b: m, map: PanelMap::PowerFrom { origin: x0, len: m - x0 } });
                panels.push(Panel { a: m, b: x1, map: PanelMap::PowerFrom { origin: x1, len: m - x1 } });
            }
        }
    }
    integrate_panels(f, &panels, opts)
}

/// `∫₀^{2π} f(e^{iθ}) dθ`. Singular angles anchor local offsets `u`, with
/// points written `e^{is}·e^{±iu}`, so nodes near a singularity keep full
/// relative precision in `u`. `peaks` are extra breakpoints.
pub fn integrate_circle(
    mut f: impl FnMut(C64) -> f64,
    singular: &[f64],
    peaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    let mut sing: Vec<f64> = singular.iter().map(|a| a.rem_euclid(TAU)).collect();
    sing.sort_by(f64::total_cmp);
    sing.dedup();
    let peaks: Vec<f64> = peaks.iter().map(|a| a.rem_euclid(TAU)).collect();
    if sing.is_empty() {
        return integrate(|t| f(C64::from_polar(1.0, t)), 0.0, TAU, &peaks.iter().map(|&p| (p, false)).collect::<Vec<_>>(), opts);
    }
    // (anchor e^{is}, direction) per panel
    let mut frames: Vec<(C64, f64)> = Vec::new();
    let mut panels = Vec::new();
    let m = sing.len();
    for k in 0..m {
        let s0 = sing[k];
        let s1 = if k + 1 < m { sing[k + 1] } else { sing[0] + TAU };
        let half = 0.5 * (s1 - s0);
        if half <= 0.0 {
            continue;
        }
        let s1_reduced = sing[(k + 1) % m];
        for (anchor, point, dir) in [(s0, s0, 1.0), (s1, s1_reduced, -1.0)] {
            let mut cuts: Vec<f64> = peaks
                .iter()
                .map(|&p| (dir * (p - anchor)).rem_euclid(TAU))
                .filter(|&u| u > 0.0 && u < half)
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.push(half);
            let frame = (C64::from_polar(1.0, point), dir);
            let mut a = 0.0;
            for (i, &b) in cuts.iter().enumerate() {
                frames.push(frame);
                panels.push(if i == 0 {
                    Panel { a: 0.0, b, map: PanelMap::PowerFrom { origin: 0.0, len: b } }
                } else {
                    Panel::plain(a, b)
                });
                a = b;
            }
        }
    }
    integrate_indexed(
        |i, u| {
            let (z0, dir) = frames[i];
            f(z0 * C64::from_polar(1.0, dir * u))
        },
        &panels,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gauss_legendre_on_interval() {
        let (x, w) = gauss_legendre_on(5, 1.0, 3.0);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((q - 26.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_integral() {
        let r = integrate(|x| x.sin(), 0.0, PI, &[], QuadOptions::default());
        assert!((r.value - 2.0).abs() < 1e-12 && r.converged);
    }

    #[test]
    fn endpoint_singularity_with_graded_panel() {
        // ∫₋₁¹ |x|^{-1/2} dx = 4
        let r = integrate(|x: f64| x.abs().powf(-0.5), -1.0, 1.0, &[(0.0, true)], QuadOptions::default());
        let want = 4.0;
        assert!(r.converged);
        assert!((r.value - want).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn circle_integral_with_boundary_singularity() {
        // (1/2π)∫|1 − e^{iθ}|^{−3/4} dθ = Γ(1/4)/Γ(5/8)²
        let want = TAU * statrs::function::gamma::gamma(0.25) / statrs::function::gamma::gamma(0.625).powi(2);
        let one = C64::new(1.0, 0.0);
        let r = integrate_circle(|z| (one - z).norm().powf(-0.75), &[0.0], &[], QuadOptions::default());
        assert!(r.converged, "{r:?}");
        assert!((r.value - want).abs() < 1e-9 * want, "{} vs {want}", r.value);
        let r = integrate_circle(|z| (z.re + 2.0).recip(), &[1.0, 4.0], &[2.0], QuadOptions::default());
        assert!((r.value - TAU / 3f64.sqrt()).abs() < 1e-12);
        let r = integrate_circle(|z| (z.re + 2.0).recip(), &[], &[2.0], QuadOptions::default());
        assert!((r.value - TAU / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sharp_peak_is_resolved() {
        let eps: f64 = 1e-4;
        let r = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, &[(0.0, false)], QuadOptions::default());
        let want = 2.0 * (1.0 / eps).atan();
        assert!((r.value - want).abs() < 1e-9 * want);
    }
}
