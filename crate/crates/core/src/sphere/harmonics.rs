//! Spherical-harmonic transforms on a Gauss-Legendre × uniform-longitude grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Nodal values of a function and its first and second angular derivatives.
#[derive(Debug, Clone, Default)]
pub struct AngularDerivatives {
    pub f: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub tt: Vec<f64>,
    pub tp: Vec<f64>,
    pub pp: Vec<f64>,
}

pub(crate) struct FullSpectral {
    nlat: usize,
    nlon: usize,
    lmax: usize,
    mmax: usize,
    gl_weights: Vec<f64>,
    /// Per latitude, `P̄_lm`, `dP̄_lm/dθ`, `d²P̄_lm/dθ²` packed by `(m, l)`.
    p: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
    d2p: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FullSpectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FullSpectral").field("lmax", &self.lmax).field("mmax", &self.mmax).finish()
    }
}

impl FullSpectral {
    /// `x` are `cos θ` at the latitudes, `w` the Gauss-Legendre weights.
    pub(crate) fn new(x: &[f64], w: &[f64], nlon: usize) -> Self {
        let nlat = x.len();
        let lmax = nlat - 1;
        let mmax = lmax.min(nlon / 2 - 1);
        let mut offsets = Vec::with_capacity(mmax + 2);
        let mut acc = 0;
        for m in 0..=mmax {
            offsets.push(acc);
            acc += lmax - m + 1;
        }
        offsets.push(acc);
        let mut p = Vec::with_capacity(nlat);
        let mut dp = Vec::with_capacity(nlat);
        let mut d2p = Vec::with_capacity(nlat);
        for &xi in x {
            let (a, b, c) = legendre_table(xi, lmax, mmax, &offsets);
            p.push(a);
            dp.push(b);
            d2p.push(c);
        }
        let mut planner = FftPlanner::new();
        Self {
            nlat,
            nlon,
            lmax,
            mmax,
            gl_weights: w.to_vec(),
            p,
            dp,
            d2p,
            offsets,
            forward: planner.plan_fft_forward(nlon),
            inverse: planner.plan_fft_inverse(nlon),
        }
    }

    pub(crate) fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    fn idx(&self, l: usize, m: usize) -> usize {
        self.offsets[m] + (l - m)
    }

    /// Complex coefficients `a_lm` (`m >= 0`) of a real field, packed by `(m, l)`.
    pub(crate) fn analyze(&self, f: &[f64]) -> Vec<Complex64> {
        let total = self.offsets[self.mmax + 1];
        let mut coef = vec![Complex64::new(0.0, 0.0); total];
        let scale = (2.0 * PI).sqrt() / self.nlon as f64;
        let mut row = vec![Complex64::new(0.0, 0.0); self.nlon];
        for i in 0..self.nlat {
            for (j, v) in row.iter_mut().enumerate() {
                *v = Complex64::new(f[i * self.nlon + j], 0.0);
            }
            self.forward.process(&mut row);
            let wi = self.gl_weights[i] * scale;
            let pi = &self.p[i];
            for m in 0..=self.mmax {
                let xm = row[m] * wi;
                for l in m..=self.lmax {
                    let k = self.idx(l, m);
                    coef[k] += xm * pi[k];
                }
            }
        }
        coef
    }

    fn synth_row(&self, g: &[Complex64], buf: &mut [Complex64], out: &mut [f64]) {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        buf[0] = Complex64::new(g[0].re, 0.0);
        for m in 1..=self.mmax {
            buf[m] = g[m];
            buf[self.nlon - m] = g[m].conj();
        }
        self.inverse.process(buf);
        let norm = 1.0 / (2.0 * PI).sqrt();
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o = v.re * norm;
        }
    }

    /// Nodal values of the band-limited field with the given coefficients.
    pub(crate) fn synthesize(&self, coef: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nlat * self.nlon];
        let mut g = vec![Complex64::new(0.0, 0.0); self.mmax + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nlon];
        for i in 0..self.nlat {
            for (m, gm) in g.iter_mut().enumerate() {
                *gm = (m..=self.lmax).map(|l| coef[self.idx(l, m)] * self.p[i][self.idx(l, m)]).sum();
            }
            self.synth_row(&g, &mut buf, &mut out[i * self.nlon..(i + 1) * self.nlon]);
        }
        out
    }

    pub(crate) fn derivatives(&self, f: &[f64]) -> AngularDerivatives {
        let coef = self.analyze(f);
        let size = self.nlat * self.nlon;
        let mut d = AngularDerivatives {
            f: vec![0.0; size],
            t: vec![0.0; size],
            p: vec![0.0; size],
            tt: vec![0.0; size],
            tp: vec![0.0; size],
            pp: vec![0.0; size],
        };
        let zero = Complex64::new(0.0, 0.0);
        let mut g0 = vec![zero; self.mmax + 1];
        let mut g1 = vec![zero; self.mmax + 1];
        let mut g2 = vec![zero; self.mmax + 1];
        let mut tmp = vec![zero; self.mmax + 1];
        let mut buf = vec![zero; self.nlon];
        for i in 0..self.nlat {
            for m in 0..=self.mmax {
                let (mut a, mut b, mut c) = (zero, zero, zero);
                for l in m..=self.lmax {
                    let k = self.idx(l, m);
                    a += coef[k] * self.p[i][k];
                    b += coef[k] * self.dp[i][k];
                    c += coef[k] * self.d2p[i][k];
                }
                g0[m] = a;
                g1[m] = b;
                g2[m] = c;
            }
            let row = i * self.nlon..(i + 1) * self.nlon;
            self.synth_row(&g0, &mut buf, &mut d.f[row.clone()]);
            self.synth_row(&g1, &mut buf, &mut d.t[row.clone()]);
            self.synth_row(&g2, &mut buf, &mut d.tt[row.clone()]);
            for m in 0..=self.mmax {
                tmp[m] = g0[m] * Complex64::new(0.0, m as f64);
            }
            self.synth_row(&tmp, &mut buf, &mut d.p[row.clone()]);
            for m in 0..=self.mmax {
                tmp[m] = g0[m] * (-((m * m) as f64));
            }
            self.synth_row(&tmp, &mut buf, &mut d.pp[row.clone()]);
            for m in 0..=self.mmax {
                tmp[m] = g1[m] * Complex64::new(0.0, m as f64);
            }
            self.synth_row(&tmp, &mut buf, &mut d.tp[row]);
        }
        d
    }

    /// Energy per degree `l` of a field, `Σ_m |a_lm|²` counting `±m`.
    pub(crate) fn degree_spectrum(&self, f: &[f64]) -> Vec<f64> {
        let coef = self.analyze(f);
        let mut e = vec![0.0; self.lmax + 1];
        for m in 0..=self.mmax {
            for l in m..=self.lmax {
                let factor = if m == 0 { 1.0 } else { 2.0 };
                e[l] += factor * coef[self.idx(l, m)].norm_sqr();
            }
        }
        e
    }

    /// Applies a per-degree multiplier to a field.
    pub(crate) fn filter(&self, f: &[f64], mult: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut coef = self.analyze(f);
        for m in 0..=self.mmax {
            for l in m..=self.lmax {
                let k = self.idx(l, m);
                coef[k] *= mult(l);
            }
        }
        self.synthesize(&coef)
    }
}

/// Orthonormal associated Legendre functions and their θ-derivatives at `x = cos θ`,
/// normalized so that `∫_{-1}^{1} P̄_lm² dx = 1`.
fn legendre_table(x: f64, lmax: usize, mmax: usize, offsets: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let total = offsets[mmax + 1];
    let mut p = vec![0.0; total];
    let mut dp = vec![0.0; total];
    let mut d2p = vec![0.0; total];
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..=mmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        let base = offsets[m];
        p[base] = pmm;
        if m < lmax {
            p[base + 1] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        let a = |l: usize| {
            let (lf, mf) = (l as f64, m as f64);
            ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt()
        };
        for l in (m + 2)..=lmax {
            let k = base + (l - m);
            p[k] = a(l) * (x * p[k - 1] - p[k - 2] / a(l - 1));
        }
        let mf = m as f64;
        for l in m..=lmax {
            let k = base + (l - m);
            let lf = l as f64;
            let prev = if l > m { p[k - 1] } else { 0.0 };
            let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0).max(1.0)).sqrt();
            dp[k] = (lf * x * p[k] - c * prev) / s;
            d2p[k] = -(x / s) * dp[k] - (lf * (lf + 1.0) - mf * mf / (s * s)) * p[k];
        }
    }
    (p, dp, d2p)
}

/// Real orthonormal spherical harmonic `Y_lm(θ, φ)` on `S²`; `m < 0` selects the sine branch.
pub fn real_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "order |m| = {am} exceeds degree l = {l}");
    let offsets: Vec<usize> = {
        let mut o = Vec::with_capacity(am + 2);
        let mut acc = 0;
        for mm in 0..=am {
            o.push(acc);
            acc += l - mm + 1;
        }
        o.push(acc);
        o
    };
    let (p, _, _) = legendre_table(theta.cos(), l, am, &offsets);
    let pl = p[offsets[am] + (l - am)];
    let norm = 1.0 / (2.0 * PI).sqrt();
    match m {
        0 => pl * norm,
        m if m > 0 => std::f64::consts::SQRT_2 * pl * norm * (m as f64 * phi).cos(),
        m => std::f64::consts::SQRT_2 * pl * norm * ((-m) as f64 * phi).sin(),
    }
}
