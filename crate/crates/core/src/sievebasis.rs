//! Orthonormal sieve bases on `[0, 1]`.
//!
//! * `Fourier`: `α₁ ≡ 1`, `α_{2m} = √2 cos(2πmt)`, `α_{2m+1} = √2 sin(2πmt)`.
//! * `LegendreShifted`: `α_k = √(2k-1) P_{k-1}(2t-1)`, orthonormal in `L²[0,1]`.
//! * `ChebyshevWeighted`: `α₁ ≡ 1`, `α_k = √2 T_{k-1}(2t-1)`, orthonormal under
//!   the arcsine weight `w(t) = 1 / (π √(t(1-t)))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of nodes of the composite midpoint rule used for `∫₀¹` checks.
pub const QUADRATURE_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    Fourier,
    LegendreShifted,
    ChebyshevWeighted,
}

impl BasisFamily {
    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Fourier => "fourier",
            BasisFamily::LegendreShifted => "legendre_shifted",
            BasisFamily::ChebyshevWeighted => "chebyshev_weighted",
        }
    }
}

/// The first `c` functions of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSet {
    pub family: BasisFamily,
    pub c: usize,
}

impl BasisSet {
    pub fn new(family: BasisFamily, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidArgument("basis size c must be positive".into()));
        }
        Ok(Self { family, c })
    }

    pub fn fourier(c: usize) -> Self {
        Self { family: BasisFamily::Fourier, c }
    }

    pub fn with_size(self, c: usize) -> Self {
        Self { family: self.family, c }
    }

    /// `(α₁(t), …, α_c(t))`; fails for `t ∉ [0, 1]`.
    pub fn evaluate<T: Real>(&self, t: T) -> Result<Vec<T>> {
        let tf = t.as_f64();
        if !(0.0..=1.0).contains(&tf) {
            return Err(Error::InvalidArgument(format!("t = {tf} outside [0, 1]")));
        }
        let mut out = vec![T::zero(); self.c];
        self.fill(tf, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out[..c]`; callers guarantee `t ∈ [0, 1]`.
    pub fn fill<T: Real>(&self, t: f64, out: &mut [T]) {
        let c = self.c;
        match self.family {
            BasisFamily::Fourier => {
                out[0] = T::one();
                let mut k = 1;
                let mut m = 1.0;
                while k < c {
                    let arg = 2.0 * PI * m * t;
                    out[k] = T::lit(SQRT_2 * arg.cos());
                    if k + 1 < c {
                        out[k + 1] = T::lit(SQRT_2 * arg.sin());
                    }
                    k += 2;
                    m += 1.0;
                }
            }
            BasisFamily::LegendreShifted => {
                let x = 2.0 * t - 1.0;
                let (mut p0, mut p1) = (1.0, x);
                for k in 0..c {
                    let pk = match k {
                        0 => 1.0,
                        1 => x,
                        _ => {
                            let kf = k as f64;
                            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                            p0 = p1;
                            p1 = p2;
                            p2
                        }
                    };
                    out[k] = T::lit((2.0 * k as f64 + 1.0).sqrt() * pk);
                }
            }
            BasisFamily::ChebyshevWeighted => {
                let x = 2.0 * t - 1.0;
                let (mut t0, mut t1) = (1.0, x);
                for k in 0..c {
                    let tk = match k {
                        0 => 1.0,
                        1 => x,
                        _ => {
                            let t2 = 2.0 * x * t1 - t0;
                            t0 = t1;
                            t1 = t2;
                            t2
                        }
                    };
                    out[k] = T::lit(if k == 0 { 1.0 } else { SQRT_2 * tk });
                }
            }
        }
    }

    /// Basis values at every point of `grid`, row-major `grid.len() × c`.
    pub fn table<T: Real>(&self, grid: impl Iterator<Item = f64>) -> Vec<T> {
        let mut out = Vec::new();
        let mut row = vec![T::zero(); self.c];
        for t in grid {
            self.fill(t, &mut row);
            out.extend_from_slice(&row);
        }
        out
    }

    /// Quadrature nodes and weights for `∫₀¹ f(t) w(t) dt` under this family's
    /// orthogonality weight.
    pub fn quadrature(&self, nodes: usize) -> Vec<(f64, f64)> {
        let h = 1.0 / nodes as f64;
        match self.family {
            BasisFamily::Fourier => (0..nodes).map(|i| ((i as f64 + 0.5) * h, h)).collect(),
            BasisFamily::LegendreShifted => gauss_legendre(nodes),
            // Midpoint rule in θ with t = (1 - cos πθ)/2 absorbs the arcsine weight.
            BasisFamily::ChebyshevWeighted => (0..nodes)
                .map(|i| ((1.0 - (PI * (i as f64 + 0.5) * h).cos()) / 2.0, h))
                .collect(),
        }
    }

    /// Gram matrix `∫ b(t) b(t)* w(t) dt` under [`Self::quadrature`].
    pub fn quadrature_gram(&self, nodes: usize) -> Vec<Vec<f64>> {
        let c = self.c;
        let mut g = vec![vec![0.0; c]; c];
        let mut row = vec![0.0f64; c];
        for (t, w) in self.quadrature(nodes) {
            self.fill(t, &mut row);
            for i in 0..c {
                for j in 0..c {
                    g[i][j] += w * row[i] * row[j];
                }
            }
        }
        g
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre(nodes: usize) -> Vec<(f64, f64)> {
    let m = nodes as f64;
    let mut out = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let mut x = (PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=nodes {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Free-function form of [`BasisSet::evaluate`].
pub fn evaluate_basis<T: Real>(basis: &BasisSet, t: T) -> Result<Vec<T>> {
    basis.evaluate(t)
}

/// Sup-norm diagnostics of a basis on the grid `{i/n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisDiagnostics {
    /// `max_i ‖b(i/n)‖`.
    pub zeta_c: f64,
    /// `max_{i,k} |α_k(i/n)|`.
    pub xi_c: f64,
}

pub fn basis_diagnostics(basis: &BasisSet, n: usize) -> Result<BasisDiagnostics> {
    if n < basis.c {
        return Err(Error::InvalidArgument(format!("need n >= c, got n = {n}, c = {}", basis.c)));
    }
    let mut row = vec![0.0f64; basis.c];
    let (mut zeta, mut xi) = (0.0f64, 0.0f64);
    for i in 1..=n {
        basis.fill(i as f64 / n as f64, &mut row);
        zeta = zeta.max(row.iter().map(|v| v * v).sum::<f64>().sqrt());
        xi = xi.max(row.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    Ok(BasisDiagnostics { zeta_c: zeta, xi_c: xi })
}
