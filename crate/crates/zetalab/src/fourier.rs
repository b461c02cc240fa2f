//! The Fourier system on `[0, 2l]` and its zeta-weighted transform.
//!
//! For a tower of depth k above T, the transformed inner product of two
//! modes is
//!
//! ```text
//! ∫_{T_k}^{(T+2l)_k} f_a(phi^k(t) - T) f_b(phi^k(t) - T)
//!                    prod_{r=0}^{k-1} |zeta(1/2 + i phi^r(t))|^2  dt
//! ```
//!
//! evaluated here along two independent routes:
//!
//! * [`ZetaTransform::ip_direct`] integrates the oscillatory form above,
//!   with forward iterates cached per quadrature node;
//! * [`ZetaTransform::ip_pullback`] substitutes `v = phi^k(t)`, under which
//!   the weight collapses (exactly, by the derivative identity of
//!   [`crate::ladder`]) to `prod_{r=1}^{k} omega_hat(phi^{-r}(v))`, a smooth
//!   slowly-varying factor on `[T, T+2l]`.
//!
//! Route agreement is the master correctness property of the transform; the
//! oscillation is genuinely absorbed by the change of variables, not
//! assumed away.

use std::cell::RefCell;
use std::collections::HashMap;
use thiserror::Error;

use crate::ladder::{Ladder, LadderError};
use crate::quad::{self, Interval, QuadError};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("invalid mode: {0}")]
    BadMode(String),
    #[error("invalid transform spec: {0}")]
    BadSpec(String),
    #[error("mode t = {t} outside [0, {hi}]")]
    ModeRange { t: f64, hi: f64 },
    #[error("gram matrix limited to 12 modes, got {0}")]
    TooManyModes(usize),
}

type Result<T> = std::result::Result<T, FourierError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ModeKind {
    Unit,
    Cosine,
    Sine,
}

/// One element of `{1, cos(pi m t / l), sin(pi m t / l)}` on `[0, 2l]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FourierMode {
    pub kind: ModeKind,
    pub m: u32,
    pub l: f64,
}

impl FourierMode {
    pub fn unit(l: f64) -> Result<Self> {
        Self::new(ModeKind::Unit, 1, l)
    }

    pub fn cosine(m: u32, l: f64) -> Result<Self> {
        Self::new(ModeKind::Cosine, m, l)
    }

    pub fn sine(m: u32, l: f64) -> Result<Self> {
        Self::new(ModeKind::Sine, m, l)
    }

    pub fn new(kind: ModeKind, m: u32, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(FourierError::BadMode(format!("l = {l} must be positive")));
        }
        if kind != ModeKind::Unit && m == 0 {
            return Err(FourierError::BadMode("m must be >= 1".into()));
        }
        Ok(FourierMode { kind, m, l })
    }

    /// Evaluate at `t` in `[0, 2l]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0 <= t && t <= 2.0 * self.l) {
            return Err(FourierError::ModeRange {
                t,
                hi: 2.0 * self.l,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    /// Same without the range check; used at quadrature nodes that may sit
    /// a solver tolerance outside the segment.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            ModeKind::Unit => 1.0,
            ModeKind::Cosine => (std::f64::consts::PI * self.m as f64 * t / self.l).cos(),
            ModeKind::Sine => (std::f64::consts::PI * self.m as f64 * t / self.l).sin(),
        }
    }

    /// `A = ∫_0^{2l} f^2`: 2l for the unit mode, l for cosine and sine.
    pub fn norm(&self) -> f64 {
        match self.kind {
            ModeKind::Unit => 2.0 * self.l,
            _ => self.l,
        }
    }

    /// Short label used in report headers: unit, cos1, sin1, ...
    pub fn label(&self) -> String {
        match self.kind {
            ModeKind::Unit => "unit".into(),
            ModeKind::Cosine => format!("cos{}", self.m),
            ModeKind::Sine => format!("sin{}", self.m),
        }
    }
}

/// The standard mode list of length `2M + 1`: unit, cos1, sin1, ..., cosM, sinM.
pub fn standard_modes(m_max: u32, l: f64) -> Result<Vec<FourierMode>> {
    let mut v = vec![FourierMode::unit(l)?];
    for m in 1..=m_max {
        v.push(FourierMode::cosine(m, l)?);
        v.push(FourierMode::sine(m, l)?);
    }
    Ok(v)
}

/// Which zeta weight multiplies the transformed integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum WeightKind {
    /// `prod |zeta(1/2 + i phi^r(t))|^2`; normalization divides by ln^k T.
    Raw,
    /// `prod |zeta|^2 / omega_hat(phi^r(t))`: the exactly-normalized form,
    /// whose pullback is the plain Fourier inner product.
    OmegaNormalized,
}

/// Base height, tower depth, and segment half-length of one transform.
///
/// `l` is a fixed segment parameter, independent of `t_base`. Depth k = 0
/// degenerates to the plain Fourier inner product on `[T, T+2l]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TransformSpec {
    pub t_base: f64,
    pub k: u32,
    pub l: f64,
    /// Relative quadrature tolerance.
    pub tol: f64,
}

impl TransformSpec {
    pub fn new(t_base: f64, k: u32, l: f64) -> Self {
        TransformSpec {
            t_base,
            k,
            l,
            tol: 1e-7,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(FourierError::BadSpec(format!("l = {}", self.l)));
        }
        if !(self.tol > 0.0) {
            return Err(FourierError::BadSpec(format!("tol = {}", self.tol)));
        }
        if !self.t_base.is_finite() {
            return Err(FourierError::BadSpec(format!("t_base = {}", self.t_base)));
        }
        Ok(())
    }
}

/// `prod_{r=0}^{k-1} |zeta(1/2 + i phi^r(t))|^2`; the empty product (k = 0)
/// is 1.
pub fn transformed_weight(ladder: &Ladder, t: f64, k: u32) -> Result<f64> {
    let mut w = 1.0;
    let mut x = t;
    for r in 0..k {
        w *= ladder.critical_sq(x);
        if r + 1 < k {
            x = ladder.phi(x)?;
        }
    }
    Ok(w)
}

/// One transform instance with per-node caches shared across mode pairs.
pub struct ZetaTransform<'a> {
    ladder: &'a Ladder,
    spec: TransformSpec,
    weight: WeightKind,
    /// Reverse-iterated integration bounds `[T_k, (T+2l)_k]`.
    lo: f64,
    hi: f64,
    /// node t -> (phi^k(t), weight product); keyed by bit pattern.
    direct_cache: RefCell<HashMap<u64, (f64, f64)>>,
    /// node v -> pullback weight.
    pullback_cache: RefCell<HashMap<u64, f64>>,
}

impl<'a> ZetaTransform<'a> {
    pub fn new(ladder: &'a Ladder, spec: TransformSpec, weight: WeightKind) -> Result<Self> {
        spec.validate()?;
        let (lo, hi) = if spec.k == 0 {
            (spec.t_base, spec.t_base + 2.0 * spec.l)
        } else {
            let lo = ladder.reverse_tower(spec.t_base, spec.k)?.top();
            let hi = ladder
                .reverse_tower(spec.t_base + 2.0 * spec.l, spec.k)?
                .top();
            (lo, hi)
        };
        Ok(ZetaTransform {
            ladder,
            spec,
            weight,
            lo,
            hi,
            direct_cache: RefCell::new(HashMap::new()),
            pullback_cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &TransformSpec {
        &self.spec
    }

    /// The reverse-iterated segment the direct route integrates over.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Forward-iterate chain at a quadrature node: returns
    /// `(phi^k(t), weight)`, cached per node across mode pairs since the k
    /// root solves dominate the node cost.
    fn direct_node(&self, t: f64) -> std::result::Result<(f64, f64), LadderError> {
        if let Some(&hit) = self.direct_cache.borrow().get(&t.to_bits()) {
            return Ok(hit);
        }
        let mut x = t;
        let mut w = 1.0;
        for _ in 0..self.spec.k {
            let fx = self.ladder.critical_sq(x);
            let next = self.ladder.phi(x)?;
            w *= match self.weight {
                WeightKind::Raw => fx,
                // omega_hat(x) = ln(phi(x)) + const
                WeightKind::OmegaNormalized => {
                    fx / (next.ln() + self.ladder.config().omega_const())
                }
            };
            x = next;
        }
        self.direct_cache.borrow_mut().insert(t.to_bits(), (x, w));
        Ok((x, w))
    }

    /// Pullback weight at v: `prod_{r=1}^{k} omega_hat(phi^{-r}(v))`, which
    /// equals `prod_{j=0}^{k-1} (ln phi^{-j}(v) + 1 + gamma - ln 2pi)`.
    /// For the omega-normalized weight the product cancels identically.
    fn pullback_node(&self, v: f64) -> std::result::Result<f64, LadderError> {
        if self.weight == WeightKind::OmegaNormalized {
            return Ok(1.0);
        }
        if let Some(&hit) = self.pullback_cache.borrow().get(&v.to_bits()) {
            return Ok(hit);
        }
        let c = self.ladder.config().omega_const();
        let mut x = v;
        let mut w = 1.0;
        for j in 0..self.spec.k {
            w *= x.ln() + c;
            if j + 1 < self.spec.k {
                x = self.ladder.phi_inverse(x)?;
            }
        }
        self.pullback_cache.borrow_mut().insert(v.to_bits(), w);
        Ok(w)
    }

    fn run_quadrature<G: Fn(f64) -> f64>(
        &self,
        g: G,
        a: f64,
        b: f64,
        hint: Option<f64>,
    ) -> Result<f64> {
        let iv = Interval::new(a, b)?;
        let r = quad::integrate_with_budget(g, iv, self.spec.tol, hint, 3_000_000)?;
        Ok(r.value)
    }

    /// Direct route with arbitrary continuous factors of `u = phi^k(t) - T`.
    pub fn ip_direct_fn(
        &self,
        fa: &dyn Fn(f64) -> f64,
        fb: &dyn Fn(f64) -> f64,
    ) -> Result<f64> {
        let t0 = self.spec.t_base;
        let err = RefCell::new(None::<LadderError>);
        let g = |t: f64| -> f64 {
            if err.borrow().is_some() {
                return 0.0;
            }
            match self.direct_node(t) {
                Ok((phi_k, w)) => {
                    let u = phi_k - t0;
                    fa(u) * fb(u) * w
                }
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        let v = self.run_quadrature(g, self.lo, self.hi, Some(self.hi))?;
        if let Some(e) = err.into_inner() {
            return Err(e.into());
        }
        Ok(v)
    }

    /// Pullback route with arbitrary continuous factors of `u = v - T`.
    pub fn ip_pullback_fn(
        &self,
        fa: &dyn Fn(f64) -> f64,
        fb: &dyn Fn(f64) -> f64,
    ) -> Result<f64> {
        let t0 = self.spec.t_base;
        let err = RefCell::new(None::<LadderError>);
        let g = |v: f64| -> f64 {
            if err.borrow().is_some() {
                return 0.0;
            }
            match self.pullback_node(v) {
                Ok(w) => {
                    let u = v - t0;
                    fa(u) * fb(u) * w
                }
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        // The integrand is smooth and non-oscillatory; no density hint.
        let v = self.run_quadrature(g, t0, t0 + 2.0 * self.spec.l, None)?;
        if let Some(e) = err.into_inner() {
            return Err(e.into());
        }
        Ok(v)
    }

    fn check_mode(&self, m: &FourierMode) -> Result<()> {
        if (m.l - self.spec.l).abs() > 1e-12 * self.spec.l {
            return Err(FourierError::BadMode(format!(
                "mode l = {} does not match spec l = {}",
                m.l, self.spec.l
            )));
        }
        Ok(())
    }

    /// Oscillatory-route inner product of two modes.
    pub fn ip_direct(&self, a: &FourierMode, b: &FourierMode) -> Result<f64> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        self.ip_direct_fn(&|u| a.eval_unchecked(u), &|u| b.eval_unchecked(u))
    }

    /// Smooth-route inner product of two modes.
    pub fn ip_pullback(&self, a: &FourierMode, b: &FourierMode) -> Result<f64> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        self.ip_pullback_fn(&|u| a.eval_unchecked(u), &|u| b.eval_unchecked(u))
    }

    /// Gram matrix `G[a][b] = ip(a, b) / (sqrt(A_a A_b) ln^k T)`, symmetric
    /// by construction (entries computed once for a <= b and mirrored).
    /// Under the omega-normalized weight the `ln^k` factor is already
    /// inside the integrand, so only the mode norms divide.
    pub fn gram(&self, modes: &[FourierMode]) -> Result<Vec<Vec<f64>>> {
        if modes.len() > 12 {
            return Err(FourierError::TooManyModes(modes.len()));
        }
        let n = modes.len();
        let lnk = match self.weight {
            WeightKind::Raw => self.spec.t_base.ln().powi(self.spec.k as i32),
            WeightKind::OmegaNormalized => 1.0,
        };
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let raw = self.ip_pullback(&modes[i], &modes[j])?;
                let val = raw / ((modes[i].norm() * modes[j].norm()).sqrt() * lnk);
                g[i][j] = val;
                g[j][i] = val;
            }
        }
        Ok(g)
    }

    /// The doubled-frequency functional
    /// `(1/ln^k T) ∫ weight · cos((2 pi m / l)(phi^k(t) - T)) dt`,
    /// whose limit is 0 by orthogonality of 1 and cos(2 pi m u / l).
    ///
    /// The pullback integrand is one full cosine period against the smooth
    /// weight, so the true value sits near the machine floor (the linear
    /// part of the weight integrates to zero by symmetry); the quadrature
    /// runs far below the transform's default tolerance so the surviving
    /// curvature term is signal rather than panel noise.
    pub fn cosine_diff(&self, m: u32) -> Result<f64> {
        let l = self.spec.l;
        let f = move |u: f64| (2.0 * std::f64::consts::PI * m as f64 * u / l).cos();
        let t0 = self.spec.t_base;
        let err = RefCell::new(None::<LadderError>);
        let g = |v: f64| -> f64 {
            if err.borrow().is_some() {
                return 0.0;
            }
            match self.pullback_node(v) {
                Ok(w) => f(v - t0) * w,
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        let iv = Interval::new(t0, t0 + 2.0 * l)?;
        let tol = self.spec.tol.min(1e-12);
        let raw = quad::integrate_with_budget(g, iv, tol, None, 3_000_000)?.value;
        if let Some(e) = err.into_inner() {
            return Err(e.into());
        }
        Ok(raw / self.spec.t_base.ln().powi(self.spec.k as i32))
    }
}

/// Free-function forms of the transform operations.
pub fn ip_direct(
    ladder: &Ladder,
    a: &FourierMode,
    b: &FourierMode,
    spec: TransformSpec,
) -> Result<f64> {
    ZetaTransform::new(ladder, spec, WeightKind::Raw)?.ip_direct(a, b)
}

pub fn ip_pullback(
    ladder: &Ladder,
    a: &FourierMode,
    b: &FourierMode,
    spec: TransformSpec,
) -> Result<f64> {
    ZetaTransform::new(ladder, spec, WeightKind::Raw)?.ip_pullback(a, b)
}

pub fn gram_matrix(
    ladder: &Ladder,
    modes: &[FourierMode],
    spec: TransformSpec,
) -> Result<Vec<Vec<f64>>> {
    ZetaTransform::new(ladder, spec, WeightKind::Raw)?.gram(modes)
}

pub fn cosine_diff_functional(
    ladder: &Ladder,
    m: u32,
    l: f64,
    spec: TransformSpec,
) -> Result<f64> {
    if (l - spec.l).abs() > 1e-12 * l {
        return Err(FourierError::BadSpec("l does not match spec".into()));
    }
    ZetaTransform::new(ladder, spec, WeightKind::Raw)?.cosine_diff(m)
}
