//! The monotone rescaling function `phi` and its iterates.
//!
//! `phi(T)` is defined as the unique root `y` of
//!
//! ```text
//! y ln y + (gamma - ln 2pi) y + c0 = J(T),    J(T) = ∫_0^T |zeta(1/2+it)|^2 dt
//! ```
//!
//! Differentiating the defining equation gives the exact weight identity
//! `phi'(t) * omega_hat(t) = |zeta(1/2+it)|^2` with
//! `omega_hat(t) = ln phi(t) + 1 + gamma - ln 2pi`, which is what makes the
//! change of variables in [`crate::fourier`] exact. Because the classical
//! main term of J is `T ln T + (2 gamma - 1 - ln 2pi) T`, the root satisfies
//! `T - phi(T) ~ (1 - gamma) T / ln T`, and the reverse iterates
//! `phi^{-r}(T)` climb in asymptotically equidistant steps of the same
//! size, with second-moment increments `~ (1 - gamma) T` per step.
//!
//! The constant `c0` selects one representative from the family of valid
//! rescalings; it defaults to zero and is exposed for sensitivity sweeps.

use serde::Serialize;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

use crate::quad::{self, CumulativeTable, QuadError};
use crate::zeta::{self, PrecisionPolicy, ZetaError};
use crate::{EULER_GAMMA, LN_2PI};

/// Heights below this are outside every ladder operation: the asymptotic
/// laws that justify the defining equation have no content there.
pub const LADDER_FLOOR: f64 = 100.0;

const CACHE_MAGIC: &[u8; 4] = b"ZLAD";
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LadderError {
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("t = {t} below the ladder floor {floor}")]
    Domain { t: f64, floor: f64 },
    #[error("operation needs heights up to ~{required:.3e} but the table covers only {domain_hi:.3e}; rebuild with a larger domain")]
    AboveDomain { required: f64, domain_hi: f64 },
    #[error("root solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonFailure { residual: f64, iterations: u32 },
    #[error("tower depth k = {k} insufficient; this report needs k >= {needed}")]
    InsufficientDepth { k: u32, needed: u32 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad cache file: {0}")]
    BadCache(String),
}

type Result<T> = std::result::Result<T, LadderError>;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct LadderConfig {
    /// The Euler–Mascheroni constant; configurable only so sensitivity
    /// experiments can perturb it.
    pub gamma: f64,
    /// Integration constant of the defining equation.
    pub c0: f64,
    /// Relative residual tolerance of the root solves.
    pub newton_tol: f64,
    pub max_newton_iters: u32,
    /// Largest height covered by the cumulative-J table.
    pub domain_hi: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            gamma: EULER_GAMMA,
            c0: 0.0,
            newton_tol: 1e-12,
            max_newton_iters: 100,
            domain_hi: 25_000.0,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(LadderError::InvalidConfig("newton_tol must be > 0".into()));
        }
        if !(self.domain_hi > 100.0) {
            return Err(LadderError::InvalidConfig(
                "domain_hi must exceed 100".into(),
            ));
        }
        if self.max_newton_iters < 8 {
            return Err(LadderError::InvalidConfig(
                "max_newton_iters must be at least 8".into(),
            ));
        }
        Ok(())
    }

    /// `gamma - ln 2pi`, the linear coefficient of the defining equation.
    fn lin_coef(&self) -> f64 {
        self.gamma - LN_2PI
    }

    /// `1 + gamma - ln 2pi`, the additive constant inside `omega_hat`.
    pub fn omega_const(&self) -> f64 {
        1.0 + self.gamma - LN_2PI
    }
}

/// The reverse-iterate sequence `T = levels[0] < levels[1] < ... < levels[k]`
/// with `phi(levels[r]) = levels[r-1]`.
#[derive(Debug, Clone, Serialize)]
pub struct ReverseTower {
    pub k: u32,
    pub levels: Vec<f64>,
}

impl ReverseTower {
    pub fn base(&self) -> f64 {
        self.levels[0]
    }

    pub fn top(&self) -> f64 {
        *self.levels.last().unwrap()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapLevel {
    pub r: u32,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    /// `(1 - gamma) * upper / ln(upper)`.
    pub prediction: f64,
    pub ratio_to_prediction: f64,
    /// `gap[r+1] / gap[r]`, absent at the top level.
    pub adjacent_gap_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub levels: Vec<GapLevel>,
    pub total_span: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementLevel {
    pub r: u32,
    pub lower: f64,
    pub upper: f64,
    /// `J(lower, upper)`.
    pub segment_integral: f64,
    /// `(1 - gamma) * lower`.
    pub prediction: f64,
    pub ratio_to_prediction: f64,
    pub adjacent_integral_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementReport {
    pub levels: Vec<IncrementLevel>,
    pub sum_of_segments: f64,
    pub total_integral: f64,
}

/// Immutable ladder state: configuration plus the cumulative-J table.
///
/// All operations are pure; the struct is safely shareable across threads.
#[derive(Debug, Clone)]
pub struct Ladder {
    config: LadderConfig,
    policy: PrecisionPolicy,
    resolution: f64,
    table: CumulativeTable,
}

impl Ladder {
    /// Build the cumulative-J table over `[0, domain_hi]` and wrap it.
    ///
    /// `resolution` is forwarded to [`quad::build_cumulative`]: nodes per
    /// unit mean zero-spacing.
    pub fn build(config: LadderConfig, policy: PrecisionPolicy, resolution: f64) -> Result<Self> {
        config.validate()?;
        policy.validate()?;
        let pol = policy.clone();
        let table = quad::build_cumulative(
            move |t| zeta::abs2_unchecked(t, &pol),
            0.0,
            config.domain_hi,
            resolution,
        )?;
        Ok(Ladder {
            config,
            policy,
            resolution,
            table,
        })
    }

    pub fn config(&self) -> &LadderConfig {
        &self.config
    }

    pub fn policy(&self) -> &PrecisionPolicy {
        &self.policy
    }

    pub fn table(&self) -> &CumulativeTable {
        &self.table
    }

    pub fn domain_hi(&self) -> f64 {
        self.config.domain_hi
    }

    /// The table integrand `|zeta(1/2+it)|^2` under this ladder's policy.
    pub fn critical_sq(&self, t: f64) -> f64 {
        zeta::abs2_unchecked(t, &self.policy)
    }

    /// `J(t) = ∫_0^t |zeta(1/2+iu)|^2 du`, node sums plus an exact
    /// within-segment panel (no interpolation error).
    pub fn j_at(&self, t: f64) -> Result<f64> {
        let f = |x: f64| self.critical_sq(x);
        Ok(self.table.query_refined(&f, t)?)
    }

    /// `J(b) - J(a)` for `0 <= a < b <= domain_hi`.
    pub fn hl_j(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a < b) {
            return Err(QuadError::BadInterval { a, b }.into());
        }
        if b > self.config.domain_hi {
            return Err(LadderError::AboveDomain {
                required: b,
                domain_hi: self.config.domain_hi,
            });
        }
        Ok((self.j_at(b)? - self.j_at(a)?).max(0.0))
    }

    /// The rescaling function: unique root of the defining equation at
    /// height `t`. Strictly increasing, with `phi(t) < t`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        let j = self.j_at(t)?;
        self.solve_defining(j, t)
    }

    /// `omega_hat(t) = ln phi(t) + 1 + gamma - ln 2pi`; satisfies
    /// `phi'(t) * omega_hat(t) = |zeta(1/2+it)|^2` identically.
    pub fn omega_hat(&self, t: f64) -> Result<f64> {
        Ok(self.phi(t)?.ln() + self.config.omega_const())
    }

    /// Single reverse step: the height `x` with `phi(x) = u`.
    ///
    /// Since `phi(x) = u` iff `J(x) = u ln u + (gamma - ln 2pi) u + c0`,
    /// this is a bracketed inversion of the tabulated J.
    pub fn phi_inverse(&self, u: f64) -> Result<f64> {
        self.check_floor(u)?;
        let jstar = u * u.ln() + self.config.lin_coef() * u + self.config.c0;
        if jstar > self.table.total() {
            return Err(LadderError::AboveDomain {
                required: self.required_height(jstar),
                domain_hi: self.config.domain_hi,
            });
        }
        self.invert_j(jstar)
    }

    /// `phi` applied r times; r = 0 is the identity.
    pub fn forward_iter(&self, t: f64, r: u32) -> Result<f64> {
        let mut x = t;
        for _ in 0..r {
            x = self.phi(x)?;
        }
        Ok(x)
    }

    /// The reverse-iterate tower of depth k above T.
    pub fn reverse_tower(&self, t: f64, k: u32) -> Result<ReverseTower> {
        self.check_range(t)?;
        let mut levels = Vec::with_capacity(k as usize + 1);
        levels.push(t);
        for _ in 0..k {
            let next = self.phi_inverse(*levels.last().unwrap())?;
            levels.push(next);
        }
        debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
        Ok(ReverseTower { k, levels })
    }

    /// Per-level gap geometry of a tower against the `(1-gamma) T / ln T`
    /// law. Needs k >= 2 so at least one adjacent ratio exists.
    pub fn gap_report(&self, tower: &ReverseTower) -> Result<GapReport> {
        if tower.k < 2 {
            return Err(LadderError::InsufficientDepth {
                k: tower.k,
                needed: 2,
            });
        }
        let g = 1.0 - self.config.gamma;
        let gaps: Vec<f64> = tower.levels.windows(2).map(|w| w[1] - w[0]).collect();
        let levels = gaps
            .iter()
            .enumerate()
            .map(|(i, &gap)| {
                let upper = tower.levels[i + 1];
                let prediction = g * upper / upper.ln();
                GapLevel {
                    r: i as u32 + 1,
                    lower: tower.levels[i],
                    upper,
                    gap,
                    prediction,
                    ratio_to_prediction: gap / prediction,
                    adjacent_gap_ratio: gaps.get(i + 1).map(|&next| next / gap),
                }
            })
            .collect();
        Ok(GapReport {
            levels,
            total_span: tower.top() - tower.base(),
        })
    }

    /// Per-level second-moment increments of a tower against the
    /// `(1-gamma) T` law.
    pub fn increment_report(&self, tower: &ReverseTower) -> Result<IncrementReport> {
        if tower.k < 1 {
            return Err(LadderError::InsufficientDepth {
                k: tower.k,
                needed: 1,
            });
        }
        let g = 1.0 - self.config.gamma;
        let mut segs = Vec::with_capacity(tower.k as usize);
        for w in tower.levels.windows(2) {
            segs.push(self.hl_j(w[0], w[1])?);
        }
        let levels = segs
            .iter()
            .enumerate()
            .map(|(i, &seg)| {
                let lower = tower.levels[i];
                let prediction = g * lower;
                IncrementLevel {
                    r: i as u32 + 1,
                    lower,
                    upper: tower.levels[i + 1],
                    segment_integral: seg,
                    prediction,
                    ratio_to_prediction: seg / prediction,
                    adjacent_integral_ratio: segs.get(i + 1).map(|&next| next / seg),
                }
            })
            .collect();
        Ok(IncrementReport {
            levels,
            sum_of_segments: quad::pairwise_sum(&segs),
            total_integral: self.hl_j(tower.base(), tower.top())?,
        })
    }

    // -- internals ----------------------------------------------------------

    fn check_floor(&self, t: f64) -> Result<()> {
        if !(t >= LADDER_FLOOR) {
            return Err(LadderError::Domain {
                t,
                floor: LADDER_FLOOR,
            });
        }
        Ok(())
    }

    fn check_range(&self, t: f64) -> Result<()> {
        self.check_floor(t)?;
        if t > self.config.domain_hi {
            return Err(LadderError::AboveDomain {
                required: t,
                domain_hi: self.config.domain_hi,
            });
        }
        Ok(())
    }

    /// Rough height whose J main term reaches `jstar`; reported in
    /// domain-growth errors.
    fn required_height(&self, jstar: f64) -> f64 {
        let mut x = self.config.domain_hi;
        for _ in 0..40 {
            let main = x * (x.ln() + 2.0 * self.config.gamma - 1.0 - LN_2PI);
            let dmain = x.ln() + 2.0 * self.config.gamma - LN_2PI;
            let step = (jstar - main) / dmain;
            x += step;
            if step.abs() < 1e-9 * x {
                break;
            }
        }
        x
    }

    /// Solve `y ln y + (gamma - ln 2pi) y + c0 = j` by safeguarded Newton.
    /// The start `y0 = T (1 - (1-gamma)/ln T)` lands within a step or two.
    fn solve_defining(&self, j: f64, t: f64) -> Result<f64> {
        let c = self.config.lin_coef();
        let g = |y: f64| y * y.ln() + c * y + self.config.c0 - j;
        let dg = |y: f64| y.ln() + 1.0 + c;
        let tol = self.config.newton_tol * j.abs().max(1.0);

        let mut lo = 2.0f64;
        let mut hi = t.max(4.0);
        let mut y = (t * (1.0 - (1.0 - self.config.gamma) / t.ln())).clamp(lo, hi);
        for _ in 0..self.config.max_newton_iters {
            let gy = g(y);
            if gy.abs() <= tol {
                return Ok(y);
            }
            if gy < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let step = gy / dg(y);
            let next = y - step;
            y = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(LadderError::NewtonFailure {
            residual: g(y).abs(),
            iterations: self.config.max_newton_iters,
        })
    }

    /// Invert the tabulated J: find x with J(x) = jstar.
    fn invert_j(&self, jstar: f64) -> Result<f64> {
        let cum = self.table.cumvals();
        let nodes = self.table.nodes();
        let i = cum
            .partition_point(|&v| v <= jstar)
            .saturating_sub(1)
            .min(nodes.len() - 2);
        let (t0, t1) = (nodes[i], nodes[i + 1]);
        let f = |x: f64| self.critical_sq(x);
        let jr = |x: f64| cum[i] + crate::quad::gl15(&f, t0, x);
        let tol = self.config.newton_tol * jstar.abs().max(1.0);

        let (mut lo, mut hi) = (t0, t1);
        let frac = ((jstar - cum[i]) / (cum[i + 1] - cum[i]).max(1e-300)).clamp(0.0, 1.0);
        let mut x = t0 + frac * (t1 - t0);
        let mut residual = f64::INFINITY;
        for _ in 0..self.config.max_newton_iters {
            let r = jr(x) - jstar;
            residual = r.abs();
            if residual <= tol || hi - lo < 1e-15 * hi.max(1.0) {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = f(x);
            let next = if d > 1e-12 { x - r / d } else { f64::NAN };
            x = if next.is_finite() && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(LadderError::NewtonFailure {
            residual,
            iterations: self.config.max_newton_iters,
        })
    }

    // -- cache io -----------------------------------------------------------

    /// Serialize config, policy, and the J table to a versioned binary
    /// cache so large domains need not be recomputed.
    pub fn save_cache<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        for v in [
            self.config.gamma,
            self.config.c0,
            self.config.newton_tol,
            self.config.max_newton_iters as f64,
            self.config.domain_hi,
            self.policy.rs_correction_terms as f64,
            self.policy.em_crossover,
            self.policy.em_terms as f64,
            self.policy.target_rel_err,
            self.resolution,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let n = self.table.nodes().len() as u64;
        w.write_all(&n.to_le_bytes())?;
        for arr in [self.table.nodes(), self.table.cumvals(), self.table.fvals()] {
            for v in arr {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_cache<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(LadderError::BadCache("wrong magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            return Err(LadderError::BadCache(format!(
                "unsupported version {version}"
            )));
        }
        let mut next = || -> std::result::Result<f64, std::io::Error> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let config = LadderConfig {
            gamma: next()?,
            c0: next()?,
            newton_tol: next()?,
            max_newton_iters: next()? as u32,
            domain_hi: next()?,
        };
        let policy = PrecisionPolicy {
            rs_correction_terms: next()? as u32,
            em_crossover: next()?,
            em_terms: next()? as u32,
            target_rel_err: next()?,
        };
        let resolution = next()?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut read_arr = |n: usize| -> std::result::Result<Vec<f64>, std::io::Error> {
            let mut out = Vec::with_capacity(n);
            let mut b = [0u8; 8];
            for _ in 0..n {
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        };
        let nodes = read_arr(n)?;
        let cumvals = read_arr(n)?;
        let fvals = read_arr(n)?;
        if nodes.len() != n || !nodes.iter().all(|v| v.is_finite()) {
            return Err(LadderError::BadCache("corrupt node array".into()));
        }
        config.validate()?;
        policy.validate()?;
        Ok(Ladder {
            config,
            policy,
            resolution,
            table: CumulativeTable::from_parts(nodes, cumvals, fvals),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{goldens, small_ladder};

    #[test]
    fn j_additivity_and_positivity() {
        let lad = small_ladder();
        let j1 = lad.hl_j(0.0, 700.0).unwrap();
        let j2 = lad.hl_j(700.0, 2100.0).unwrap();
        let whole = lad.hl_j(0.0, 2100.0).unwrap();
        assert!(j1 >= 0.0 && j2 >= 0.0);
        assert!((whole - (j1 + j2)).abs() < 1e-8 * whole);
        // vanishing-width limit
        let eps = lad.hl_j(0.0, 1e-6).unwrap();
        assert!(eps < 1e-5);
    }

    #[test]
    fn j_against_frozen_increment() {
        // [1000, 1010] increment, reference from 40-digit quadrature.
        let lad = small_ladder();
        let j = lad.hl_j(1000.0, 1010.0).unwrap();
        let want = goldens().j_1000_1010;
        assert!(
            (j - want).abs() < 2e-6 * want,
            "J(1000,1010) = {j}, want {want}"
        );
    }

    #[test]
    fn j_matches_classical_main_term_at_5000() {
        let lad = small_ladder();
        let t = 5000.0;
        let j = lad.hl_j(0.0, t).unwrap();
        let main = t * (t.ln() + 2.0 * EULER_GAMMA - 1.0 - LN_2PI);
        assert!(
            (j - main).abs() / main < 0.02,
            "J(5000) = {j} vs main term {main}"
        );
    }

    #[test]
    fn phi_is_monotone_and_below_identity() {
        let lad = small_ladder();
        let a = lad.phi(1e4).unwrap();
        let b = lad.phi(2e4).unwrap();
        assert!(b > a);
        assert!(a < 1e4 && b < 2e4);
    }

    #[test]
    fn phi_defining_residual_is_small() {
        let lad = small_ladder();
        let t = 1e4;
        let y = lad.phi(t).unwrap();
        let c = lad.config().gamma - LN_2PI;
        let residual = (y * y.ln() + c * y - lad.j_at(t).unwrap()).abs();
        assert!(residual < lad.config().newton_tol * lad.j_at(t).unwrap());
    }

    #[test]
    fn gap_law_improves_between_heights() {
        let lad = small_ladder();
        let ratio = |t: f64| {
            let phi = lad.phi(t).unwrap();
            (t - phi) * t.ln() / ((1.0 - EULER_GAMMA) * t)
        };
        let lo = ratio(1e3);
        let hi = ratio(2e4);
        assert!((0.7..1.3).contains(&hi), "ratio at 2e4: {hi}");
        assert!((hi - 1.0).abs() < (lo - 1.0).abs());
    }

    #[test]
    fn inverse_round_trips() {
        let lad = small_ladder();
        for &u in &[1e3, 1e4, 1.8e4] {
            let x = lad.phi_inverse(u).unwrap();
            assert!(x > u, "reverse step must climb");
            let back = lad.phi(x).unwrap();
            assert!(
                (back - u).abs() < 1e-9 * u,
                "round trip at {u}: {back}"
            );
        }
        // and the other way
        let t = 9000.0;
        let down = lad.phi(t).unwrap();
        let up = lad.phi_inverse(down).unwrap();
        assert!((up - t).abs() < 1e-9 * t);
    }

    #[test]
    fn reverse_gap_law() {
        let lad = small_ladder();
        let u = 1.5e4;
        let x = lad.phi_inverse(u).unwrap();
        let ratio = (x - u) * u.ln() / ((1.0 - EULER_GAMMA) * u);
        assert!((0.7..1.3).contains(&ratio));
        let u2 = 2e3;
        let x2 = lad.phi_inverse(u2).unwrap();
        let ratio2 = (x2 - u2) * u2.ln() / ((1.0 - EULER_GAMMA) * u2);
        assert!((ratio - 1.0).abs() < (ratio2 - 1.0).abs());
    }

    #[test]
    fn forward_iteration_composes() {
        let lad = small_ladder();
        let t = 1.2e4;
        assert_eq!(lad.forward_iter(t, 0).unwrap(), t);
        let two = lad.forward_iter(t, 2).unwrap();
        let composed = lad.phi(lad.phi(t).unwrap()).unwrap();
        assert!((two - composed).abs() < 1e-9 * t);
    }

    #[test]
    fn towers_invert_forward_iteration() {
        let lad = small_ladder();
        let t = 5e3;
        let k = 3;
        let tower = lad.reverse_tower(t, k).unwrap();
        assert_eq!(tower.levels.len(), 4);
        assert!(tower.levels.windows(2).all(|w| w[0] < w[1]));
        // phi(levels[r]) = levels[r-1]
        for r in 1..=k as usize {
            let down = lad.phi(tower.levels[r]).unwrap();
            assert!((down - tower.levels[r - 1]).abs() < 1e-8 * tower.levels[r - 1]);
        }
        let back = lad.forward_iter(tower.top(), k).unwrap();
        assert!((back - t).abs() < 1e-8 * t);
        // k = 0 tower is a single level
        let trivial = lad.reverse_tower(t, 0).unwrap();
        assert_eq!(trivial.levels, vec![t]);
    }

    #[test]
    fn gap_report_telescopes() {
        let lad = small_ladder();
        let tower = lad.reverse_tower(8e3, 3).unwrap();
        let rep = lad.gap_report(&tower).unwrap();
        let sum: f64 = rep.levels.iter().map(|l| l.gap).sum();
        assert!((sum - rep.total_span).abs() <= 1e-12 * rep.total_span);
        for l in &rep.levels {
            assert!((0.5..1.5).contains(&l.ratio_to_prediction), "level {l:?}");
        }
        let shallow = lad.reverse_tower(8e3, 1).unwrap();
        assert!(matches!(
            lad.gap_report(&shallow),
            Err(LadderError::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn increment_report_telescopes() {
        let lad = small_ladder();
        let tower = lad.reverse_tower(8e3, 3).unwrap();
        let rep = lad.increment_report(&tower).unwrap();
        assert!(
            (rep.sum_of_segments - rep.total_integral).abs() < 1e-7 * rep.total_integral
        );
        for l in &rep.levels {
            assert!((0.5..1.5).contains(&l.ratio_to_prediction), "level {l:?}");
        }
    }

    #[test]
    fn omega_hat_tracks_log_and_increases() {
        let lad = small_ladder();
        let w1 = lad.omega_hat(5e3).unwrap();
        let w2 = lad.omega_hat(1.8e4).unwrap();
        assert!(w2 > w1);
        let r = w2 / (1.8e4f64).ln();
        assert!((0.85..1.15).contains(&r), "omega_hat/ln t = {r}");
    }

    #[test]
    fn derivative_identity_by_central_difference() {
        // phi'(t) * omega_hat(t) = |zeta(1/2+it)|^2, finite-difference form,
        // away from a zero of Z.
        let lad = small_ladder();
        let t = 5000.0;
        let h = 3e-3;
        let d = (lad.phi(t + h).unwrap() - lad.phi(t - h).unwrap()) / (2.0 * h);
        let lhs = d * lad.omega_hat(t).unwrap();
        let rhs = lad.critical_sq(t);
        assert!(rhs > 0.2, "test point drifted onto a zero");
        assert!(
            (lhs - rhs).abs() / rhs < 1e-4,
            "chain identity: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn omega_product_tracks_log_power() {
        // prod_{r=0}^{k-1} omega_hat(phi^r(alpha)) / ln^k T for alpha in the
        // k-th reverse window.
        let lad = small_ladder();
        let t = 1.5e4;
        for k in 1u32..=3 {
            let tower = lad.reverse_tower(t, k).unwrap();
            let alpha = tower.top() + 0.3;
            let mut x = alpha;
            let mut prod = 1.0;
            for _ in 0..k {
                prod *= lad.omega_hat(x).unwrap();
                x = lad.phi(x).unwrap();
            }
            let ratio = prod / t.ln().powi(k as i32);
            assert!(
                (0.8..1.2).contains(&ratio),
                "k = {k}: omega product ratio {ratio}"
            );
        }
    }

    #[test]
    fn floor_and_domain_errors() {
        let lad = small_ladder();
        assert!(matches!(
            lad.phi(50.0),
            Err(LadderError::Domain { .. })
        ));
        assert!(matches!(
            lad.phi(1e6),
            Err(LadderError::AboveDomain { .. })
        ));
        match lad.phi_inverse(2.19e4) {
            Err(LadderError::AboveDomain { required, .. }) => {
                assert!(required > 2.19e4);
            }
            other => panic!("expected AboveDomain, got {other:?}"),
        }
    }

    #[test]
    fn cache_round_trip() {
        let config = LadderConfig {
            domain_hi: 600.0,
            ..LadderConfig::default()
        };
        let lad = Ladder::build(config, PrecisionPolicy::default(), 2.0).unwrap();
        let dir = std::env::temp_dir().join("zetalab-cache-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ladder.bin");
        lad.save_cache(&path).unwrap();
        let loaded = Ladder::load_cache(&path).unwrap();
        assert_eq!(lad.config(), loaded.config());
        assert_eq!(lad.policy(), loaded.policy());
        assert_eq!(lad.table(), loaded.table());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn cache_rejects_garbage() {
        let dir = std::env::temp_dir().join("zetalab-cache-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("garbage.bin");
        std::fs::write(&path, b"not a ladder cache").unwrap();
        assert!(matches!(
            Ladder::load_cache(&path),
            Err(LadderError::BadCache(_))
        ));
        std::fs::remove_file(&path).ok();
    }
}
