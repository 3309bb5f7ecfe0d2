//! Casimir integrands `Q(f, L)`, their derivatives, the inverse `q(e, L)` of
//! `dQ/df`, growth exponents, and a sampling-based validator for the
//! admissibility assumptions the rest of the toolkit relies on.

use crate::error::{Error, Result};
use crate::num::golden_min;

/// Angular-momentum weight `psi(L)`.
///
/// Either a positive constant or `a + b/(1+L)`. The latter is decreasing for
/// `b > 0`, which is the admissible case when the scaling exponent drops
/// below 1/2; `b < 0` (increasing, still positive when `a + b > 0`) is
/// accepted by the constructor so the assumption validator can flag it.
#[derive(Debug, Clone, PartialEq)]
pub enum LWeight {
    Constant { c: f64 },
    ShiftedInverse { a: f64, b: f64 },
}

impl LWeight {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("constant weight must be positive, got {c}")));
        }
        Ok(LWeight::Constant { c })
    }

    pub fn shifted_inverse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(a + b > 0.0) {
            return Err(Error::Domain(format!(
                "shifted-inverse weight needs a > 0 and a + b > 0, got a={a}, b={b}"
            )));
        }
        Ok(LWeight::ShiftedInverse { a, b })
    }

    pub fn eval(&self, l: f64) -> f64 {
        match *self {
            LWeight::Constant { c } => c,
            LWeight::ShiftedInverse { a, b } => a + b / (1.0 + l),
        }
    }

    /// Infimum over `L >= 0`.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            LWeight::Constant { c } => c,
            LWeight::ShiftedInverse { a, b } => {
                if b >= 0.0 {
                    a
                } else {
                    a + b
                }
            }
        }
    }

    /// Supremum over `L >= 0`.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            LWeight::Constant { c } => c,
            LWeight::ShiftedInverse { a, b } => {
                if b >= 0.0 {
                    a + b
                } else {
                    a
                }
            }
        }
    }

    /// Nonincreasing in `L`?
    pub fn is_nonincreasing(&self) -> bool {
        match *self {
            LWeight::Constant { .. } => true,
            LWeight::ShiftedInverse { b, .. } => b >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CasimirKind {
    /// `Q(f, L) = f^{1 + 1/mu}`.
    Polytrope { mu: f64 },
    /// `Q(f, L) = f^{1 + 1/mu1} psi1(L) + f^{1 + 1/mu2} psi2(L)`.
    Mixed { mu1: f64, mu2: f64, psi1: LWeight, psi2: LWeight },
}

/// A Casimir integrand together with its growth exponents and the constants
/// entering the lower-bound machinery.
///
/// `mu1` controls the large-`f` lower bound `Q >= C1 f^{1+1/mu1}` (f >= F0),
/// `mu2` the small-`f` upper bound `Q <= C2 f^{1+1/mu2}` (f <= F0), and
/// `mu3` the sublinear-scaling bound `Q(lambda f) >= lambda^{1+1/mu3} Q(f)`
/// for `lambda` in (0, 1].
#[derive(Debug, Clone)]
pub struct CasimirModel {
    kind: CasimirKind,
    mu1: f64,
    mu2: f64,
    mu3: f64,
    c1: f64,
    c2: f64,
    f0: f64,
}

fn check_mu(name: &str, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.5) {
        return Err(Error::Domain(format!("{name} must lie in (0, 3/2), got {mu}")));
    }
    Ok(())
}

/// `x^p` with fast paths for the exponents the polytrope family produces.
#[inline]
fn powq(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p == 3.0 {
        x * x * x
    } else if p == 0.5 {
        x.sqrt()
    } else if p == 1.5 {
        x * x.sqrt()
    } else {
        x.powf(p)
    }
}

impl CasimirModel {
    pub fn polytrope(mu: f64) -> Result<Self> {
        check_mu("mu", mu)?;
        Ok(CasimirModel {
            kind: CasimirKind::Polytrope { mu },
            mu1: mu,
            mu2: mu,
            mu3: mu,
            c1: 1.0,
            c2: 1.0,
            f0: 1.0,
        })
    }

    pub fn mixed(mu1: f64, mu2: f64, psi1: LWeight, psi2: LWeight) -> Result<Self> {
        check_mu("mu1", mu1)?;
        check_mu("mu2", mu2)?;
        // The term with the larger exponent base dominates both the large-f
        // lower bound and the small-f upper bound.
        let (mu_hi, psi_hi) = if mu1 >= mu2 { (mu1, &psi1) } else { (mu2, &psi2) };
        let c1 = psi_hi.lower_bound();
        let c2 = psi1.upper_bound() + psi2.upper_bound();
        Ok(CasimirModel {
            kind: CasimirKind::Mixed { mu1, mu2, psi1: psi1.clone(), psi2: psi2.clone() },
            mu1: mu_hi,
            mu2: mu_hi,
            mu3: mu1.min(mu2),
            c1,
            c2,
            f0: 1.0,
        })
    }

    pub fn kind(&self) -> &CasimirKind {
        &self.kind
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn mu3(&self) -> f64 {
        self.mu3
    }

    /// Constants `(C1, C2, F0)` of the growth bounds.
    pub fn growth_constants(&self) -> (f64, f64, f64) {
        (self.c1, self.c2, self.f0)
    }

    /// `Q(f, L)`; rejects negative arguments.
    pub fn casimir(&self, f: f64, l: f64) -> Result<f64> {
        if f < 0.0 || l < 0.0 {
            return Err(Error::Domain(format!("casimir requires f, L >= 0; got f={f}, L={l}")));
        }
        Ok(self.casimir_raw(f, l))
    }

    #[inline]
    pub(crate) fn casimir_raw(&self, f: f64, l: f64) -> f64 {
        match &self.kind {
            CasimirKind::Polytrope { mu } => powq(f, 1.0 + 1.0 / mu),
            CasimirKind::Mixed { mu1, mu2, psi1, psi2 } => {
                powq(f, 1.0 + 1.0 / mu1) * psi1.eval(l) + powq(f, 1.0 + 1.0 / mu2) * psi2.eval(l)
            }
        }
    }

    /// `dQ/df (f, L)`.
    #[inline]
    pub fn casimir_df(&self, f: f64, l: f64) -> f64 {
        match &self.kind {
            CasimirKind::Polytrope { mu } => {
                let p = 1.0 + 1.0 / mu;
                p * powq(f, 1.0 / mu)
            }
            CasimirKind::Mixed { mu1, mu2, psi1, psi2 } => {
                let p1 = 1.0 + 1.0 / mu1;
                let p2 = 1.0 + 1.0 / mu2;
                p1 * powq(f, 1.0 / mu1) * psi1.eval(l) + p2 * powq(f, 1.0 / mu2) * psi2.eval(l)
            }
        }
    }

    /// `d^2 Q/df^2 (f, L)` for `f > 0`.
    #[inline]
    pub fn casimir_d2f(&self, f: f64, l: f64) -> f64 {
        match &self.kind {
            CasimirKind::Polytrope { mu } => {
                let p = 1.0 + 1.0 / mu;
                p * (1.0 / mu) * powq(f, 1.0 / mu - 1.0)
            }
            CasimirKind::Mixed { mu1, mu2, psi1, psi2 } => {
                let p1 = 1.0 + 1.0 / mu1;
                let p2 = 1.0 + 1.0 / mu2;
                p1 * (1.0 / mu1) * powq(f, 1.0 / mu1 - 1.0) * psi1.eval(l)
                    + p2 * (1.0 / mu2) * powq(f, 1.0 / mu2 - 1.0) * psi2.eval(l)
            }
        }
    }

    /// The inverse `q(e, L)` of `f -> dQ/df(f, L)`, extended by zero for
    /// `e <= 0`. Closed form for polytropes, safeguarded Newton/bisection on
    /// the strictly increasing derivative otherwise.
    pub fn q(&self, e: f64, l: f64) -> Result<f64> {
        if l < 0.0 {
            return Err(Error::Domain(format!("q requires L >= 0, got {l}")));
        }
        self.q_checked(e, l)
    }

    #[inline]
    pub(crate) fn q_raw(&self, e: f64, l: f64) -> f64 {
        // Infallible for valid models; used on hot paths.
        match self.q_checked(e, l) {
            Ok(v) => v,
            Err(_) => f64::NAN,
        }
    }

    fn q_checked(&self, e: f64, l: f64) -> Result<f64> {
        if e <= 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            CasimirKind::Polytrope { mu } => Ok(powq(e / (1.0 + 1.0 / mu), *mu)),
            CasimirKind::Mixed { mu1, mu2, psi1, psi2 } => {
                // Each single term alone would need a larger f, so inverting
                // either gives an upper bracket.
                let p1 = 1.0 + 1.0 / mu1;
                let p2 = 1.0 + 1.0 / mu2;
                let f1 = powq(e / (p1 * psi1.eval(l)), *mu1);
                let f2 = powq(e / (p2 * psi2.eval(l)), *mu2);
                let mut hi = f1.min(f2);
                if !(hi > 0.0) {
                    return Ok(0.0);
                }
                let mut lo = hi;
                let mut guard = 0;
                while self.casimir_df(lo, l) > e {
                    lo *= 0.5;
                    guard += 1;
                    if guard > 2000 {
                        return Err(Error::Numerical(format!(
                            "q bracket failure at e={e:e}, L={l:e}: lo={lo:e}, hi={hi:e}"
                        )));
                    }
                }
                // Safeguarded Newton within [lo, hi].
                let mut f = 0.5 * (lo + hi);
                for _ in 0..200 {
                    let g = self.casimir_df(f, l) - e;
                    if g > 0.0 {
                        hi = f;
                    } else {
                        lo = f;
                    }
                    let dg = self.casimir_d2f(f, l);
                    let newton = f - g / dg;
                    f = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    if g.abs() <= 1e-14 * e || (hi - lo) <= 1e-15 * hi {
                        break;
                    }
                }
                let resid = (self.casimir_df(f, l) - e).abs() / e;
                if resid > 1e-12 {
                    return Err(Error::Numerical(format!(
                        "q inversion stalled at e={e:e}, L={l:e}: residual {resid:e}, bracket [{lo:e}, {hi:e}]"
                    )));
                }
                Ok(f)
            }
        }
    }

    /// The scaling exponent `alpha`: `4/(3 - 2 mu3)` when `mu3 < 1/2`, and 2
    /// otherwise.
    pub fn alpha(&self) -> f64 {
        if self.mu3 < 0.5 {
            4.0 / (3.0 - 2.0 * self.mu3)
        } else {
            2.0
        }
    }

    /// Numeric check of the admissibility assumptions on a probe grid.
    pub fn validate_assumptions(&self, spec: &ProbeGrid) -> AssumptionReport {
        validate(self, spec)
    }
}

/// Best constant `C` with `(1-x)^{1+alpha} + x^{1+alpha} - 1 <= -C x (1-x)`
/// on `[0, 1]`, obtained by minimizing the quotient on a fine grid plus local
/// golden-section refinement. Exactly 2 at `alpha = 1` and 3 at `alpha = 2`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("c_alpha requires alpha > 0, got {alpha}")));
    }
    let p = 1.0 + alpha;
    // Stable evaluation of [1 - (1-x)^p - x^p] / [x (1-x)]: the complement of
    // the larger power is computed via expm1 to avoid cancellation.
    let quotient = move |x: f64| -> f64 {
        let (big, small) = if x <= 0.5 { (x, 1.0 - x) } else { (1.0 - x, x) };
        // 1 - small^p, with small = 1 - big close to 1.
        let one_minus_small_p = -f64::exp_m1(p * f64::ln_1p(-big));
        let numerator = one_minus_small_p - big.powf(p);
        numerator / (x * (1.0 - x))
    };
    let mut xs: Vec<f64> = Vec::new();
    // Log-spaced points toward both endpoints catch infima attained in the
    // x -> 0 / x -> 1 limits, the linear sweep catches interior minima.
    let mut t = 1e-12;
    while t < 0.5 {
        xs.push(t);
        xs.push(1.0 - t);
        t *= 1.9;
    }
    for k in 1..2000 {
        xs.push(k as f64 / 2000.0);
    }
    let mut best_x = 0.5;
    let mut best = f64::INFINITY;
    for &x in &xs {
        if x <= 0.0 || x >= 1.0 {
            continue;
        }
        let v = quotient(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let lo = (best_x * 0.5).max(1e-13);
    let hi = (best_x * 1.5).min(1.0 - 1e-13);
    let (_, refined) = golden_min(quotient, lo, hi, 1e-13);
    Ok(best.min(refined))
}

/// Probe grid for [`CasimirModel::validate_assumptions`]: log-spaced `f` in
/// `(0, f_high]`, linear `L` in `[0, l_high]`, and `lambda` sweeps for the
/// scaling and curvature-comparability checks.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    pub f_high: f64,
    pub l_high: f64,
    pub n_f: usize,
    pub n_l: usize,
    pub n_lambda: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid { f_high: 1e3, l_high: 100.0, n_f: 48, n_l: 9, n_lambda: 16 }
    }
}

impl ProbeGrid {
    fn f_probes(&self) -> Vec<f64> {
        let lo: f64 = 1e-6;
        let hi = self.f_high;
        (0..self.n_f)
            .map(|i| lo * (hi / lo).powf(i as f64 / (self.n_f - 1) as f64))
            .collect()
    }

    fn l_probes(&self) -> Vec<f64> {
        (0..self.n_l)
            .map(|i| self.l_high * i as f64 / (self.n_l - 1) as f64)
            .collect()
    }
}

/// One validated assumption.
#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Worst signed margin observed (negative means violated).
    pub worst_margin: f64,
    pub note: String,
}

/// Outcome of the per-assumption sweep, plus the empirical curvature
/// comparability constants observed for `lambda` in `[1/2, 2]`.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub c3_empirical: f64,
    pub c4_empirical: f64,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<4} {}  worst margin {:+.3e}  {}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.worst_margin,
                c.note
            )?;
        }
        writeln!(f, "empirical C3={:.6e} C4={:.6e}", self.c3_empirical, self.c4_empirical)
    }
}

fn validate(model: &CasimirModel, spec: &ProbeGrid) -> AssumptionReport {
    let fs = spec.f_probes();
    let ls = spec.l_probes();
    let lambdas_q3: Vec<f64> = (1..=spec.n_lambda)
        .map(|i| i as f64 / spec.n_lambda as f64)
        .collect();
    let lambdas_q5: Vec<f64> = (0..spec.n_lambda)
        .map(|i| 0.5 + 1.5 * i as f64 / (spec.n_lambda - 1) as f64)
        .collect();
    let (c1, c2, f0) = model.growth_constants();
    let mut checks = Vec::new();

    // Q1: lower growth bound above F0.
    let mut worst = f64::INFINITY;
    for &f in fs.iter().filter(|&&f| f >= f0) {
        for &l in &ls {
            let q = model.casimir_raw(f, l);
            let bound = c1 * f.powf(1.0 + 1.0 / model.mu1);
            worst = worst.min((q - bound) / bound.max(1e-300));
        }
    }
    checks.push(AssumptionCheck {
        name: "Q1",
        pass: worst >= -1e-12,
        worst_margin: worst,
        note: format!("Q >= C1 f^(1+1/{:.3}) for f >= F0", model.mu1),
    });

    // Q2: upper growth bound below F0.
    let mut worst = f64::INFINITY;
    for &f in fs.iter().filter(|&&f| f <= f0) {
        for &l in &ls {
            let q = model.casimir_raw(f, l);
            let bound = c2 * f.powf(1.0 + 1.0 / model.mu2);
            worst = worst.min((bound - q) / bound.max(1e-300));
        }
    }
    checks.push(AssumptionCheck {
        name: "Q2",
        pass: worst >= -1e-12,
        worst_margin: worst,
        note: format!("Q <= C2 f^(1+1/{:.3}) for f <= F0", model.mu2),
    });

    // Q3: sublinear scaling, plus monotonicity in L when mu3 < 1/2.
    let mut worst = f64::INFINITY;
    for &f in &fs {
        for &l in &ls {
            let q = model.casimir_raw(f, l);
            for &lam in &lambdas_q3 {
                let lhs = model.casimir_raw(lam * f, l);
                let rhs = lam.powf(1.0 + 1.0 / model.mu3) * q;
                worst = worst.min((lhs - rhs) / rhs.max(1e-300));
            }
        }
    }
    let mut mono_ok = true;
    if model.mu3 < 0.5 {
        'outer: for &f in &fs {
            for w in ls.windows(2) {
                if model.casimir_raw(f, w[1]) > model.casimir_raw(f, w[0]) * (1.0 + 1e-12) {
                    mono_ok = false;
                    break 'outer;
                }
            }
        }
    }
    let scaling_ok = worst >= -1e-12;
    checks.push(AssumptionCheck {
        name: "Q3",
        pass: scaling_ok && mono_ok,
        worst_margin: worst,
        note: if mono_ok {
            format!("scaling exponent 1+1/{:.3}", model.mu3)
        } else {
            "monotonicity clause violated: Q(f, .) increasing in L with mu3 < 1/2".to_string()
        },
    });

    // Q4: strict convexity and flat derivative at f = 0.
    let mut min_d2 = f64::INFINITY;
    let mut max_df0: f64 = 0.0;
    for &l in &ls {
        max_df0 = max_df0.max(model.casimir_df(0.0, l).abs());
        for &f in &fs {
            min_d2 = min_d2.min(model.casimir_d2f(f, l));
        }
    }
    checks.push(AssumptionCheck {
        name: "Q4",
        pass: min_d2 > 0.0 && max_df0 == 0.0,
        worst_margin: min_d2,
        note: format!("min d2Q/df2 = {min_d2:.3e}, dQ/df(0, L) max = {max_df0:.3e}"),
    });

    // Q5: curvature comparable under bounded rescaling of f.
    let mut c3 = f64::INFINITY;
    let mut c4: f64 = 0.0;
    for &f in &fs {
        for &l in &ls {
            let d2 = model.casimir_d2f(f, l);
            for &lam in &lambdas_q5 {
                let ratio = model.casimir_d2f(lam * f, l) / d2;
                c3 = c3.min(ratio);
                c4 = c4.max(ratio);
            }
        }
    }
    checks.push(AssumptionCheck {
        name: "Q5",
        pass: c3 > 0.0 && c4.is_finite(),
        worst_margin: c3,
        note: format!("d2Q ratios in [{c3:.3e}, {c4:.3e}] for lambda in [0.5, 2]"),
    });

    AssumptionReport { checks, c3_empirical: c3, c4_empirical: c4 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polytrope_mu_one_squares_density() {
        let m = CasimirModel::polytrope(1.0).unwrap();
        assert_eq!(m.casimir(2.0, 7.5).unwrap(), 4.0);
        assert_eq!(m.casimir(0.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn mixed_direct_substitution() {
        let m = CasimirModel::mixed(
            1.0,
            1.0,
            LWeight::constant(1.0).unwrap(),
            LWeight::shifted_inverse(1.0, 1.0).unwrap(),
        )
        .unwrap();
        // f=1, L=0: 1*1 + 1*(1 + 1/1) = 3.
        assert!((m.casimir(1.0, 0.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_arguments_rejected() {
        let m = CasimirModel::polytrope(1.0).unwrap();
        assert!(m.casimir(-1.0, 0.0).is_err());
        assert!(m.casimir(1.0, -1.0).is_err());
        assert!(m.q(1.0, -2.0).is_err());
    }

    #[test]
    fn q_closed_form_and_zero_extension() {
        let m = CasimirModel::polytrope(1.0).unwrap();
        assert!((m.q(1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.q(-3.0, 4.0).unwrap(), 0.0);
        let mx = CasimirModel::mixed(
            1.0,
            1.0,
            LWeight::constant(1.0).unwrap(),
            LWeight::constant(1.0).unwrap(),
        )
        .unwrap();
        // dQ/df = 4 f at L=0, so q(4) = 1.
        assert!((mx.q(4.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_range_enforced() {
        assert!(CasimirModel::polytrope(2.0).is_err());
        assert!(CasimirModel::polytrope(0.0).is_err());
        assert!(CasimirModel::mixed(
            1.6,
            1.0,
            LWeight::constant(1.0).unwrap(),
            LWeight::constant(1.0).unwrap()
        )
        .is_err());
    }

    #[test]
    fn alpha_branches() {
        let m = CasimirModel::polytrope(0.25).unwrap();
        assert!((m.alpha() - 1.6).abs() < 1e-15);
        let m = CasimirModel::polytrope(1.0).unwrap();
        assert_eq!(m.alpha(), 2.0);
        // Continuity across the branch point.
        let m = CasimirModel::polytrope(0.5 - 1e-9).unwrap();
        assert!((m.alpha() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn c_alpha_closed_forms() {
        assert!((c_alpha(1.0).unwrap() - 2.0).abs() < 1e-9);
        assert!((c_alpha(2.0).unwrap() - 3.0).abs() < 1e-9);
        let v = c_alpha(1.6).unwrap();
        assert!(v > 2.0 && v < 3.0, "c_alpha(1.6) = {v}");
        assert!(c_alpha(0.0).is_err());
    }

    #[test]
    fn polytrope_passes_all_assumptions() {
        let m = CasimirModel::polytrope(1.0).unwrap();
        let report = m.validate_assumptions(&ProbeGrid::default());
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn increasing_weight_flags_q3_monotonicity() {
        // psi2 increasing in L with mu2 < 1/2: the monotonicity clause of the
        // scaling assumption must be flagged.
        let m = CasimirModel::mixed(
            1.0,
            0.3,
            LWeight::constant(1.0).unwrap(),
            LWeight::shifted_inverse(1.0, -0.5).unwrap(),
        )
        .unwrap();
        let report = m.validate_assumptions(&ProbeGrid::default());
        let q3 = report.check("Q3").unwrap();
        assert!(!q3.pass);
        assert!(q3.note.contains("monotonicity"));
    }

    #[test]
    fn decreasing_mixed_model_passes() {
        let m = CasimirModel::mixed(
            1.0,
            0.3,
            LWeight::shifted_inverse(1.0, 0.5).unwrap(),
            LWeight::shifted_inverse(0.5, 1.0).unwrap(),
        )
        .unwrap();
        let report = m.validate_assumptions(&ProbeGrid::default());
        assert!(report.all_pass(), "{report}");
    }

    proptest! {
        #[test]
        fn q_roundtrip_inverts_derivative(e in 1e-6f64..1e3, l in 0.0f64..50.0) {
            let m = CasimirModel::mixed(
                0.8,
                1.2,
                LWeight::shifted_inverse(1.0, 0.7).unwrap(),
                LWeight::constant(0.4).unwrap(),
            ).unwrap();
            let f = m.q(e, l).unwrap();
            let back = m.casimir_df(f, l);
            prop_assert!((back - e).abs() <= 1e-10 * e);
        }

        #[test]
        fn q_nondecreasing_in_e(e1 in 0.0f64..100.0, de in 0.0f64..10.0, l in 0.0f64..20.0) {
            let m = CasimirModel::polytrope(0.7).unwrap();
            let a = m.q(e1, l).unwrap();
            let b = m.q(e1 + de, l).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn strict_convexity(f1 in 1e-3f64..10.0, df in 1e-3f64..10.0, t in 0.01f64..0.99, l in 0.0f64..20.0) {
            let m = CasimirModel::polytrope(1.3).unwrap();
            let f2 = f1 + df;
            let mid = m.casimir(t * f1 + (1.0 - t) * f2, l).unwrap();
            let chord = t * m.casimir(f1, l).unwrap() + (1.0 - t) * m.casimir(f2, l).unwrap();
            prop_assert!(mid < chord);
        }
    }

    #[test]
    fn q_continuous_at_zero() {
        let m = CasimirModel::polytrope(0.9).unwrap();
        for &l in &[0.0, 1.0, 10.0] {
            assert_eq!(m.q(0.0, l).unwrap(), 0.0);
            assert!(m.q(1e-14, l).unwrap() < 1e-10);
        }
    }
}
