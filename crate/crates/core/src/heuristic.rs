//! The rectangular rule `A(h, w)` and the closed-form bounds around the
//! optimal success probability.
//!
//! `A(h, w)` ignores rounds before `h`; from `h` on it stops on `x_t` when
//! `x_t` lands between the order statistics `y_(ceil(t/2) - w)` and
//! `y_(floor(t/2) + w)` of the earlier values, and otherwise takes `x_n`.
//! Its success probability is bounded below by `v(h, w)`; the select-at-end
//! problem bounds every rule from above. Both scale like `sqrt(2/pi)/sqrt(n)`.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{big_binomial, log_binomial, real_log_binomial};

const LN_2: f64 = std::f64::consts::LN_2;

/// `sqrt(2 / pi)`.
pub const ASYMPTOTIC_CONSTANT: f64 = 0.797_884_560_802_865_4;

/// Parameters of `A(h, w)`: first admissible round `h`, half-width `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeuristicParams {
    pub n: usize,
    pub h: usize,
    pub w: usize,
}

impl HeuristicParams {
    pub fn new(n: usize, h: usize, w: usize) -> Result<Self> {
        if h < 1 || h > n {
            return Err(Error::range("h", h, 1, n));
        }
        if w < 1 {
            return Err(Error::range("w", w, 1, usize::MAX));
        }
        Ok(HeuristicParams { n, h, w })
    }

    /// `4 w^2 < n`, required for `v(h, w)` to be a guaranteed lower bound.
    pub fn bound_precondition_holds(&self) -> bool {
        4 * self.w * self.w < self.n
    }

    /// Inclusive range of ranks (among the first `t`) accepted in round `t`
    /// once `t >= h`, clamped to `[1, t]`.
    pub fn accepted_ranks(&self, t: usize) -> (usize, usize) {
        let lo = (t.div_ceil(2) + 1).saturating_sub(self.w).max(1);
        let hi = (t / 2 + self.w).min(t);
        (lo, hi)
    }

    pub fn should_stop(&self, t: usize, r: usize) -> bool {
        heuristic_should_stop(t, r, self)
    }
}

/// Smallest `w` with `w^3 >= n`.
fn ceil_cbrt(n: usize) -> usize {
    let mut w = (n as f64).cbrt().round() as usize;
    while w.pow(3) < n {
        w += 1;
    }
    while w > 1 && (w - 1).pow(3) >= n {
        w -= 1;
    }
    w
}

/// `w = ceil(n^(1/3))`, `h = ceil(n (1 - sqrt(ln n) / n^(1/3)))`.
pub fn default_params(n: usize) -> Result<HeuristicParams> {
    if n < 3 {
        return Err(Error::range("n", n, 3, usize::MAX));
    }
    let nf = n as f64;
    let w = ceil_cbrt(n);
    let h = (nf * (1.0 - nf.ln().sqrt() / nf.cbrt())).ceil();
    let h = (h.max(1.0) as usize).min(n);
    HeuristicParams::new(n, h, w)
}

pub fn heuristic_should_stop(t: usize, r: usize, params: &HeuristicParams) -> bool {
    if t >= params.n {
        return true;
    }
    if t < params.h {
        return false;
    }
    let (lo, hi) = params.accepted_ranks(t);
    lo <= r && r <= hi
}

fn check_bound_precondition(params: &HeuristicParams) -> Result<()> {
    if !params.bound_precondition_holds() {
        return Err(Error::Precondition(format!(
            "4w^2 < n fails for n = {}, w = {}",
            params.n, params.w
        )));
    }
    Ok(())
}

/// `ln(1 - (1 - q)^k)` for `0 < q <= 1`.
fn ln_one_minus_pow(q: f64, k: usize) -> f64 {
    if k == 0 {
        return f64::NEG_INFINITY;
    }
    if q >= 1.0 {
        return 0.0;
    }
    (-(k as f64 * (-q).ln_1p()).exp_m1()).ln()
}

/// `ln(C(n-1, (n-1)/2 - w) / 2^(n-1))` with the gamma-extended binomial.
fn ln_central_term(n: usize, w: usize) -> Result<f64> {
    let top = (n - 1) as f64;
    Ok(real_log_binomial(top, top / 2.0 - w as f64)? - top * LN_2)
}

fn check_width(params: &HeuristicParams) -> Result<()> {
    if 2 * params.w > params.h {
        return Err(Error::Precondition(format!(
            "2w = {} exceeds h = {}",
            2 * params.w,
            params.h
        )));
    }
    Ok(())
}

/// `v(h, w) = (2w-1)/(n 2^(n-1)) C(n-1, (n-1)/2 - w) (h / 2w)
/// [1 - (1 - 2w/h)^(n-h+1)]` without the `4w^2 < n` check.
///
/// Outside that precondition the value is still computable but is no
/// longer a guaranteed lower bound.
pub fn v_closed_form(params: &HeuristicParams) -> Result<f64> {
    check_width(params)?;
    let HeuristicParams { n, h, w } = *params;
    let q = 2.0 * w as f64 / h as f64;
    let ln_v = ((2 * w - 1) as f64).ln() - (n as f64).ln()
        + ln_central_term(n, w)?
        + (h as f64).ln()
        - ((2 * w) as f64).ln()
        + ln_one_minus_pow(q, n - h + 1);
    Ok(ln_v.exp())
}

/// Guaranteed lower bound on the success probability of `A(h, w)`.
pub fn lower_bound_v(params: &HeuristicParams) -> Result<f64> {
    check_bound_precondition(params)?;
    v_closed_form(params)
}

/// `ṽ(h, w) = h/(n 2^(n-1)) C(n-1, (n-1)/2 - w) [1 - (1 - 2w/h)^(n-h)]`,
/// the large-`w` equivalent of `v`.
pub fn lower_bound_v_tilde(params: &HeuristicParams) -> Result<f64> {
    check_bound_precondition(params)?;
    v_tilde_closed_form(params)
}

pub fn v_tilde_closed_form(params: &HeuristicParams) -> Result<f64> {
    check_width(params)?;
    let HeuristicParams { n, h, w } = *params;
    let q = 2.0 * w as f64 / h as f64;
    let ln_v = (h as f64).ln() - (n as f64).ln() + ln_central_term(n, w)? + ln_one_minus_pow(q, n - h);
    Ok(ln_v.exp())
}

/// `C(n-1, floor((n-1)/2)) / 2^(n-1)`: the best success probability when the
/// choice may be made after all ranks are known.
pub fn upper_bound(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::range("n", n, 1, usize::MAX));
    }
    Ok((log_binomial(n - 1, ((n - 1) / 2) as i64) - (n - 1) as f64 * LN_2).exp())
}

/// `sqrt(2/pi) / sqrt(n)`.
pub fn asymptote(n: usize) -> f64 {
    ASYMPTOTIC_CONSTANT / (n as f64).sqrt()
}

/// Large-`n` approximation `n/2 - sqrt(n ln(2n/pi)) / 2` of the round-`(n-1)`
/// threshold.
pub fn r1_asymptotic(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::range("n", n, 2, usize::MAX));
    }
    let nf = n as f64;
    Ok(nf / 2.0 - 0.5 * (nf * (2.0 * nf / std::f64::consts::PI).ln()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub params: HeuristicParams,
    /// Whether `4w^2 < n`, i.e. whether `v` is a proven lower bound.
    pub guaranteed: bool,
    /// `None` when `2w > h` and the closed forms are undefined.
    pub v: Option<f64>,
    pub v_tilde: Option<f64>,
    pub ub: f64,
    pub asymptote: f64,
}

impl BoundsReport {
    pub fn new(params: HeuristicParams) -> Result<Self> {
        let n = params.n;
        Ok(BoundsReport {
            n,
            params,
            guaranteed: params.bound_precondition_holds(),
            v: v_closed_form(&params).ok(),
            v_tilde: v_tilde_closed_form(&params).ok(),
            ub: upper_bound(n)?,
            asymptote: asymptote(n),
        })
    }

    pub fn for_default_params(n: usize) -> Result<Self> {
        Self::new(default_params(n)?)
    }

    /// `(v, v_tilde, ub, asymptote)` multiplied by `sqrt(n)`.
    pub fn scaled(&self) -> [Option<f64>; 4] {
        let s = (self.n as f64).sqrt();
        [
            self.v.map(|x| x * s),
            self.v_tilde.map(|x| x * s),
            Some(self.ub * s),
            Some(self.asymptote * s),
        ]
    }
}

/// First `n` in `grid` (with `4w^2 < n` under default parameters) where
/// `sqrt(n) v` exceeds `target`.
pub fn first_n_with_scaled_v_above(target: f64, grid: impl IntoIterator<Item = usize>) -> Option<usize> {
    grid.into_iter().find(|&n| {
        default_params(n)
            .ok()
            .filter(HeuristicParams::bound_precondition_holds)
            .and_then(|p| v_closed_form(&p).ok())
            .is_some_and(|v| v * (n as f64).sqrt() > target)
    })
}

/// `(1 + w/s)^w <= C(2s,s)/C(2s,s-w) <= (1 + w/(s-w+1))^w`, decided with
/// exact integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma4Report {
    pub s: usize,
    pub w: usize,
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
    /// `e^(w^2 / s)`.
    pub reference: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl Lemma4Report {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

fn big_to_f64_ratio(num: &BigUint, den: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let (a, b) = ((num >> shift).to_f64(), (den >> shift).to_f64());
    match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => a / b,
        _ => f64::NAN,
    }
}

fn lemma4_from_binomials(s: usize, w: usize, central: &BigUint, shifted: &BigUint) -> Lemma4Report {
    let pow = |x: usize| BigUint::from(x).pow(w as u32);
    // ratio >= ((s+w)/s)^w  <=>  central * s^w >= shifted * (s+w)^w
    let lower_holds = central * pow(s) >= shifted * pow(s + w);
    // ratio <= ((s+1)/(s-w+1))^w  <=>  central * (s-w+1)^w <= shifted * (s+1)^w
    let upper_holds = central * pow(s - w + 1) <= shifted * pow(s + 1);
    let (sf, wf) = (s as f64, w as f64);
    Lemma4Report {
        s,
        w,
        lower: (1.0 + wf / sf).powf(wf),
        ratio: big_to_f64_ratio(central, shifted),
        upper: (1.0 + wf / (sf - wf + 1.0)).powf(wf),
        reference: (wf * wf / sf).exp(),
        lower_holds,
        upper_holds,
    }
}

pub fn check_lemma4_sandwich(s: usize, w: usize) -> Result<Lemma4Report> {
    if w < 1 || w > s {
        return Err(Error::range("w", w, 1, s));
    }
    let central = big_binomial(2 * s as u64, s as i64);
    let shifted = big_binomial(2 * s as u64, (s - w) as i64);
    Ok(lemma4_from_binomials(s, w, &central, &shifted))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GridSummary {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl GridSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sandwich check for `s in 2..=s_max`, `w in 1..=floor(sqrt(s))`.
pub fn check_lemma4_grid(s_max: usize) -> GridSummary {
    let mut summary = GridSummary::default();
    for s in 2..=s_max {
        let w_max = (s as f64).sqrt().floor() as usize;
        let two_s = 2 * s;
        let central = big_binomial(two_s as u64, s as i64);
        // Walk down the row: C(2s, k-1) = C(2s, k) * k / (2s - k + 1).
        let mut shifted = central.clone();
        for w in 1..=w_max {
            let k = s - w + 1;
            shifted = shifted * BigUint::from(k) / BigUint::from(two_s - k + 1);
            let report = lemma4_from_binomials(s, w, &central, &shifted);
            summary.checked += 1;
            if !report.holds() {
                summary.failures.push(format!("s={s} w={w}"));
            }
        }
    }
    summary
}

/// `ln a_s` with `a_s = C(s, s/2 - w) / 2^s`.
fn ln_a(s: usize, w: usize) -> Result<f64> {
    let sf = s as f64;
    Ok(real_log_binomial(sf, sf / 2.0 - w as f64)? - sf * LN_2)
}

/// Closed form of `a_(2m+3) / a_(2m+1)`:
/// `(2m^2 + 5m + 3) / (2m^2 + 6m - 2w^2 + 9/2)`.
pub fn seq_dec_ratio(m: usize, w: usize) -> f64 {
    let (m, w) = (m as f64, w as f64);
    (2.0 * m * m + 5.0 * m + 3.0) / (2.0 * m * m + 6.0 * m - 2.0 * w * w + 4.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqDecReport {
    pub w: usize,
    pub m_max: usize,
    pub checked: usize,
    /// `m` values where `a_(2m+2) < a_(2m)` or `a_(2m+3) < a_(2m+1)` failed.
    pub monotone_failures: Vec<usize>,
    /// Largest relative gap between the gamma ratio and [`seq_dec_ratio`].
    pub max_identity_error: f64,
}

impl SeqDecReport {
    pub const IDENTITY_TOLERANCE: f64 = 1e-10;

    pub fn holds(&self) -> bool {
        self.monotone_failures.is_empty() && self.max_identity_error <= Self::IDENTITY_TOLERANCE
    }
}

/// Monotonicity of `a_(2m)` and `a_(2m+1)` for `2w^2 - 1 < m <= m_max`.
pub fn check_seq_dec(w: usize, m_max: usize) -> Result<SeqDecReport> {
    if w < 1 {
        return Err(Error::range("w", w, 1, usize::MAX));
    }
    if m_max <= 2 * w * w {
        return Err(Error::Precondition(format!("m_max = {m_max} must exceed 2w^2 = {}", 2 * w * w)));
    }
    let mut report = SeqDecReport {
        w,
        m_max,
        checked: 0,
        monotone_failures: Vec::new(),
        max_identity_error: 0.0,
    };
    for m in 2 * w * w..=m_max {
        let even_ok = ln_a(2 * m + 2, w)? < ln_a(2 * m, w)?;
        let ln_odd_ratio = ln_a(2 * m + 3, w)? - ln_a(2 * m + 1, w)?;
        let odd_ok = ln_odd_ratio < 0.0;
        let closed = seq_dec_ratio(m, w);
        let err = (ln_odd_ratio.exp() - closed).abs() / closed;
        report.max_identity_error = report.max_identity_error.max(err);
        report.checked += 1;
        if !(even_ok && odd_ok) {
            report.monotone_failures.push(m);
        }
    }
    Ok(report)
}

/// `C(s-1, ceil(s/2) - w) / 2^(s-1) >= C(n-1, (n-1)/2 - w) / 2^(n-1)` for
/// `n > s > 4w^2`.
pub fn check_cor_dec(s: usize, w: usize, n: usize) -> Result<bool> {
    if w < 1 || s <= 4 * w * w || n <= s {
        return Err(Error::Precondition(format!(
            "need n > s > 4w^2, got s = {s}, w = {w}, n = {n}"
        )));
    }
    let left = log_binomial(s - 1, (s.div_ceil(2) - w) as i64) - (s - 1) as f64 * LN_2;
    let right = ln_central_term(n, w)?;
    Ok(left >= right)
}

/// `count` random `(s, w, n)` triples with `w in 1..=5`, drawn from a fixed
/// seed, each satisfying `n > s > 4w^2`.
pub fn check_cor_dec_random(count: usize, seed: u64) -> Result<GridSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = GridSummary::default();
    for _ in 0..count {
        let w = rng.random_range(1..=5usize);
        let s = rng.random_range(4 * w * w + 1..=4 * w * w + 400);
        let n = rng.random_range(s + 1..=s + 2000);
        summary.checked += 1;
        if !check_cor_dec(s, w, n)? {
            summary.failures.push(format!("s={s} w={w} n={n}"));
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_params_examples() {
        let p = default_params(1000).unwrap();
        assert_eq!((p.w, p.h), (10, 738));
        let p = default_params(27).unwrap();
        assert_eq!((p.w, p.h), (3, 11));
        assert_eq!(default_params(8).unwrap().w, 2);
        assert_eq!(default_params(9).unwrap().w, 3);
        assert!(default_params(2).is_err());
    }

    #[test]
    fn default_params_precondition_range() {
        // Holds on 101..=125 and from 145 on; fails everywhere else below.
        for n in 3..=3000 {
            let ok = default_params(n).unwrap().bound_precondition_holds();
            let want = (101..=125).contains(&n) || n >= 145;
            assert_eq!(ok, want, "n = {n}");
        }
    }

    #[test]
    fn stop_rule_examples() {
        let p = HeuristicParams::new(20, 8, 2).unwrap();
        for r in 1..=7 {
            assert!(!p.should_stop(7, r));
        }
        assert!(p.should_stop(10, 5));
        assert_eq!(p.accepted_ranks(10), (4, 7));
        let p = HeuristicParams::new(20, 11, 2).unwrap();
        assert!(!p.should_stop(11, 3));
        assert_eq!(p.accepted_ranks(11), (5, 7));
        for r in 1..=20 {
            assert!(p.should_stop(20, r));
        }
    }

    #[test]
    fn stop_rule_clamps_to_existing_ranks() {
        let p = HeuristicParams::new(50, 1, 4).unwrap();
        assert_eq!(p.accepted_ranks(3), (1, 3));
        assert_eq!(p.accepted_ranks(1), (1, 1));
        for t in 1..50 {
            let (lo, hi) = p.accepted_ranks(t);
            assert!(1 <= lo && lo <= hi && hi <= t);
            assert!(hi - lo < 2 * p.w);
        }
    }

    #[test]
    fn v_against_mpmath() {
        // 50-digit mpmath values (tests/oracle/gen_values.py).
        let p = HeuristicParams::new(64, 40, 3).unwrap();
        assert_relative_eq!(lower_bound_v(&p).unwrap(), 0.038671988262441868679, max_relative = 1e-11);
        assert_relative_eq!(
            lower_bound_v_tilde(&p).unwrap(),
            0.046263082312550110821,
            max_relative = 1e-11
        );
        let p = default_params(1000).unwrap();
        assert_relative_eq!(lower_bound_v(&p).unwrap(), 0.014475975057273463207, max_relative = 1e-11);
        assert_relative_eq!(
            lower_bound_v_tilde(&p).unwrap(),
            0.015237559415102644305,
            max_relative = 1e-11
        );
    }

    #[test]
    fn v_with_single_geometric_term() {
        // h = n leaves one term: v = (2w-1) C(n-1, (n-1)/2 - w) / (n 2^(n-1)).
        let p = HeuristicParams::new(9, 9, 1).unwrap();
        let v = lower_bound_v(&p).unwrap();
        let want = 56.0 / (9.0 * 256.0);
        assert_relative_eq!(v, want, max_relative = 1e-12);
        assert_eq!(lower_bound_v_tilde(&p).unwrap(), 0.0);
    }

    #[test]
    fn v_precondition() {
        let p = HeuristicParams::new(100, 54, 5).unwrap();
        assert!(matches!(lower_bound_v(&p), Err(Error::Precondition(_))));
        assert!(matches!(lower_bound_v_tilde(&p), Err(Error::Precondition(_))));
        assert!(v_closed_form(&p).unwrap() > 0.0);
        assert!(HeuristicParams::new(10, 0, 1).is_err());
        assert!(HeuristicParams::new(10, 11, 1).is_err());
        assert!(HeuristicParams::new(10, 5, 0).is_err());
    }

    #[test]
    fn v_tilde_tracks_v() {
        for n in [1000usize, 4000, 20000] {
            let p = default_params(n).unwrap();
            let ratio = lower_bound_v_tilde(&p).unwrap() / lower_bound_v(&p).unwrap();
            assert!((0.9..=1.3).contains(&ratio), "n = {n}: {ratio}");
        }
        let scaled = lower_bound_v_tilde(&default_params(1000).unwrap()).unwrap() * 1000f64.sqrt();
        assert!(scaled > 0.4 && scaled < 0.7979);
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(upper_bound(1).unwrap(), 1.0);
        assert_relative_eq!(upper_bound(10).unwrap(), 126.0 / 512.0, max_relative = 1e-14);
        let at_million = upper_bound(1_000_000).unwrap() * 1000.0;
        assert!((at_million - ASYMPTOTIC_CONSTANT).abs() < 1e-3);
        let mut last = 0.0;
        for n in [10usize, 100, 1000, 10_000, 100_000] {
            let scaled = upper_bound(n).unwrap() * (n as f64).sqrt();
            assert!(scaled > last && scaled < 0.7978845609);
            last = scaled;
        }
    }

    #[test]
    fn asymptote_examples() {
        assert_relative_eq!(asymptote(1), 0.7978845608, epsilon = 1e-10);
        assert_relative_eq!(asymptote(4), asymptote(1) / 2.0, max_relative = 1e-15);
        assert_relative_eq!(asymptote(10_000), 0.007978845608, epsilon = 1e-12);
        assert_relative_eq!(ASYMPTOTIC_CONSTANT, (2.0 / std::f64::consts::PI).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn r1_asymptotic_examples() {
        let offset = 2500.0 - r1_asymptotic(5000).unwrap();
        assert!((offset - 100.4).abs() < 0.05, "{offset}");
        let small = r1_asymptotic(10).unwrap();
        assert!((small - 2.85).abs() < 0.01);
        assert!(r1_asymptotic(1).is_err());
    }

    #[test]
    fn lemma4_examples() {
        let r = check_lemma4_sandwich(100, 5).unwrap();
        assert!(r.holds());
        assert!(r.ratio >= r.reference * 0.9 && r.ratio <= r.reference * 1.1);
        let r = check_lemma4_sandwich(1, 1).unwrap();
        assert!(r.holds());
        assert_eq!((r.lower, r.ratio, r.upper), (2.0, 2.0, 2.0));
        let r = check_lemma4_sandwich(10_000, 10).unwrap();
        assert!(r.holds());
        assert!((0.999..=1.001).contains(&(r.ratio / r.reference)));
        assert!(check_lemma4_sandwich(3, 4).is_err());
    }

    #[test]
    fn lemma4_grid_matches_direct_checks() {
        let grid = check_lemma4_grid(60);
        assert!(grid.passed());
        let direct: usize = (2..=60usize).map(|s| (s as f64).sqrt().floor() as usize).sum();
        assert_eq!(grid.checked, direct);
        for (s, w) in [(2, 1), (17, 4), (60, 7)] {
            assert!(check_lemma4_sandwich(s, w).unwrap().holds());
        }
    }

    #[test]
    fn seq_dec_examples() {
        let r = check_seq_dec(2, 200).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.checked, 200 - 8 + 1);
        assert_relative_eq!(seq_dec_ratio(2, 1), 21.0 / 22.5, max_relative = 1e-15);
        assert!(seq_dec_ratio(18, 3) < 1.0);
        assert!(check_seq_dec(3, 18).is_err());
        assert!(check_seq_dec(1, 3).unwrap().holds());
    }

    #[test]
    fn cor_dec_examples() {
        assert!(check_cor_dec(50, 3, 200).unwrap());
        assert!(check_cor_dec(17, 2, 18).unwrap());
        assert!(check_cor_dec(16, 2, 40).is_err());
        assert!(check_cor_dec(20, 2, 20).is_err());
    }

    #[test]
    fn cor_dec_parity_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for w in 1..=4usize {
            for s_parity in 0..2 {
                for n_parity in 0..2 {
                    let mut done = 0;
                    while done < 100 {
                        let s = rng.random_range(4 * w * w + 1..=4 * w * w + 200);
                        let n = rng.random_range(s + 1..=s + 500);
                        if s % 2 != s_parity || n % 2 != n_parity {
                            continue;
                        }
                        assert!(check_cor_dec(s, w, n).unwrap(), "s={s} w={w} n={n}");
                        done += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_v_threshold_is_reported() {
        let grid = (0..40).map(|k| (200.0 * 1.25f64.powi(k)) as usize);
        let first = first_n_with_scaled_v_above(0.45, grid);
        assert!(first.is_some());
        assert!(first_n_with_scaled_v_above(0.8, [1000, 2000]).is_none());
    }

    #[test]
    fn bounds_report_shape() {
        let b = BoundsReport::for_default_params(1000).unwrap();
        assert!(b.guaranteed);
        for x in [b.v.unwrap(), b.v_tilde.unwrap(), b.ub, b.asymptote] {
            assert!((0.0..=1.0).contains(&x));
        }
        assert!(b.v.unwrap() <= b.ub);
        let scaled = b.scaled();
        assert_relative_eq!(scaled[3].unwrap(), ASYMPTOTIC_CONSTANT, max_relative = 1e-14);
        assert!(!BoundsReport::for_default_params(100).unwrap().guaranteed);
        // n = 3: h = 1, w = 2, so 2w > h.
        let tiny = BoundsReport::for_default_params(3).unwrap();
        assert_eq!(tiny.v, None);
        assert_eq!(tiny.ub, 0.5);
    }
}
