//! Neumann Laplacian eigenpairs on intervals `(0, L)` and squares `(0, L)^2`.
//!
//! Interval modes are `sqrt(2/L) cos(k pi x / L)` with eigenvalue
//! `(k pi / L)^2`; square modes are products of axis cosines. Eigenvalues,
//! grid evaluation, L2 normalization and the closed-form self-integrals
//! entering the branch coefficients are all exact; no numerical
//! eigensolver is involved.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainKind {
    Interval,
    Square,
}

/// An interval `(0, L)` or square `(0, L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub length: f64,
}

impl DomainSpec {
    pub fn interval(length: f64) -> Self {
        assert!(length > 0.0, "domain length must be positive");
        Self { kind: DomainKind::Interval, length }
    }

    pub fn square(length: f64) -> Self {
        assert!(length > 0.0, "domain length must be positive");
        Self { kind: DomainKind::Square, length }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Square => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => self.length,
            DomainKind::Square => self.length * self.length,
        }
    }
}

/// Wavemode index: `k >= 1` on intervals, a pair `(m, n) != (0, 0)` on
/// squares. Square eigenvalues are degenerate under `m <-> n`; indices are
/// always enumerated as pairs so ties stay visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeIndex {
    K(u32),
    Pair(u32, u32),
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::K(k) => write!(out, "{k}"),
            ModeIndex::Pair(m, n) => write!(out, "({m},{n})"),
        }
    }
}

/// One Neumann eigenpair with its L2 normalization constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMode {
    pub domain: DomainSpec,
    pub index: ModeIndex,
    pub sigma: f64,
    pub norm_const: f64,
}

/// Closed-form integrals of a normalized mode over its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfIntegrals {
    /// `int Phi^3`; identically zero on intervals and rectangles.
    pub i3: f64,
    /// `int Phi^4`.
    pub i4: f64,
    /// `int |grad Phi|^4`, taken as `sigma^2 * i4`.
    pub igrad4: f64,
}

/// Eigenvalue of the given mode index, rejecting the constant mode.
pub fn eigenvalue(domain: DomainSpec, index: ModeIndex) -> Result<f64> {
    match (domain.kind, index) {
        (DomainKind::Interval, ModeIndex::K(0)) => Err(Error::ZeroModeExcluded(
            "interval mode k = 0".to_string(),
        )),
        (DomainKind::Interval, ModeIndex::K(k)) => {
            let w = k as f64 * PI / domain.length;
            Ok(w * w)
        }
        (DomainKind::Square, ModeIndex::Pair(0, 0)) => Err(Error::ZeroModeExcluded(
            "square mode (0, 0)".to_string(),
        )),
        (DomainKind::Square, ModeIndex::Pair(m, n)) => {
            let wm = m as f64 * PI / domain.length;
            let wn = n as f64 * PI / domain.length;
            Ok(wm * wm + wn * wn)
        }
        _ => Err(Error::InvalidParameter(format!(
            "mode index {index} does not fit domain {domain:?}"
        ))),
    }
}

impl EigenMode {
    pub fn new(domain: DomainSpec, index: ModeIndex) -> Result<Self> {
        let sigma = eigenvalue(domain, index)?;
        let l = domain.length;
        let norm_const = match index {
            ModeIndex::K(_) => (2.0 / l).sqrt(),
            // cos^2 integrates to L/2 per active axis, L for a zero index.
            ModeIndex::Pair(m, n) => match (m > 0, n > 0) {
                (true, true) => 2.0 / l,
                (true, false) | (false, true) => f64::sqrt(2.0) / l,
                (false, false) => unreachable!("(0,0) rejected above"),
            },
        };
        Ok(Self { domain, index, sigma, norm_const })
    }

    /// Mode value at a point of the closed domain (`y` ignored on intervals).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let l = self.domain.length;
        match self.index {
            ModeIndex::K(k) => self.norm_const * (k as f64 * PI * x / l).cos(),
            ModeIndex::Pair(m, n) => {
                self.norm_const * (m as f64 * PI * x / l).cos() * (n as f64 * PI * y / l).cos()
            }
        }
    }

    /// Sample an interval mode on the given coordinates.
    pub fn eval_on(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x, 0.0)).collect()
    }

    /// Sample a square mode on the tensor grid `xs x ys`, row-major with the
    /// x index fastest.
    pub fn eval_on_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &y in ys {
            for &x in xs {
                out.push(self.eval(x, y));
            }
        }
        out
    }

    /// Closed-form `int Phi^3`, `int Phi^4` and `int |grad Phi|^4`.
    ///
    /// Odd cosine powers integrate to zero, so `i3 = 0` for every interval
    /// or square mode; the quartic integral reduces to products of
    /// `int cos^4 = 3L/8` per active axis.
    pub fn self_integrals(&self) -> SelfIntegrals {
        let l = self.domain.length;
        let i4 = match self.index {
            ModeIndex::K(_) => 1.5 / l,
            ModeIndex::Pair(m, n) => match (m > 0, n > 0) {
                (true, true) => 2.25 / (l * l),
                _ => 1.5 / (l * l),
            },
        };
        SelfIntegrals { i3: 0.0, i4, igrad4: self.sigma * self.sigma * i4 }
    }
}

/// All modes of the domain with `sigma <= max_sigma`, sorted by eigenvalue
/// ascending with lexicographic tie-break, so scans and tables are
/// deterministic.
pub fn enumerate_modes(domain: DomainSpec, max_sigma: f64) -> Vec<EigenMode> {
    let l = domain.length;
    let mut modes = Vec::new();
    match domain.kind {
        DomainKind::Interval => {
            let kmax = (max_sigma.max(0.0).sqrt() * l / PI).floor() as u32;
            for k in 1..=kmax {
                modes.push(EigenMode::new(domain, ModeIndex::K(k)).expect("k >= 1"));
            }
        }
        DomainKind::Square => {
            let mmax = (max_sigma.max(0.0).sqrt() * l / PI).floor() as u32;
            for m in 0..=mmax {
                for n in 0..=mmax {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let mode = EigenMode::new(domain, ModeIndex::Pair(m, n)).expect("nonzero");
                    if mode.sigma <= max_sigma {
                        modes.push(mode);
                    }
                }
            }
        }
    }
    modes.sort_by(|a, b| {
        a.sigma
            .partial_cmp(&b.sigma)
            .expect("finite eigenvalues")
            .then_with(|| lex_key(a.index).cmp(&lex_key(b.index)))
    });
    modes
}

fn lex_key(index: ModeIndex) -> (u32, u32) {
    match index {
        ModeIndex::K(k) => (k, 0),
        ModeIndex::Pair(m, n) => (m, n),
    }
}

/// Trapezoid quadrature on a uniformly spaced node grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

/// Trapezoid quadrature on a tensor node grid (row-major, x fastest).
pub fn trapezoid_2d(values: &[f64], nx: usize, ny: usize, h: f64) -> f64 {
    assert_eq!(values.len(), nx * ny);
    let mut per_row = Vec::with_capacity(ny);
    for j in 0..ny {
        per_row.push(trapezoid(&values[j * nx..(j + 1) * nx], h));
    }
    trapezoid(&per_row, h)
}

/// Uniformly spaced nodes covering `[0, L]`, endpoints included.
pub fn node_grid(length: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
}
