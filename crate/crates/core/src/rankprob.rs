//! Probability that the rank-`r` arrival at round `t` finishes closest to
//! `1/2` among all `n` values, written `P_r^(t)`.
//!
//! Two transition models are supported:
//!
//! * [`Mode::Paper`] treats each of the `n - t` later arrivals as landing
//!   below the tracked value independently with the fixed probability
//!   `r / (t + 1)`, giving a binomial displacement law.
//! * [`Mode::Exact`] follows the actual sequential-rank Markov chain, where
//!   the tracked rank moves from `r` to `r + 1` with probability
//!   `r / (t + 1)` using the *current* `r` and `t`.
//!
//! The two agree for `t >= n - 1` and differ below that.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_add_exp, log_binomial, logsumexp, LogProb};

/// Rank-transition model used for `P_r^(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Paper,
    Exact,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Paper, Mode::Exact];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Exact => "exact",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Mode::Paper),
            "exact" => Ok(Mode::Exact),
            other => Err(Error::Domain(format!("unknown mode {other:?}"))),
        }
    }
}

/// A validated `(n, t, r)` triple with `1 <= r <= t <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankTime {
    pub n: usize,
    pub t: usize,
    pub r: usize,
}

impl RankTime {
    pub fn new(n: usize, t: usize, r: usize) -> Result<Self> {
        if t < 1 || t > n {
            return Err(Error::range("t", t, 1, n));
        }
        if r < 1 || r > t {
            return Err(Error::range("r", r, 1, t));
        }
        Ok(RankTime { n, t, r })
    }
}

/// Default largest `n` for a full paper-mode matrix (`O(n^3)` work).
pub const DEFAULT_PAPER_CAP: usize = 2000;

const LN_2: f64 = std::f64::consts::LN_2;

/// `ln Pr(rank r of n is the best) = ln C(n-1, r-1) - (n-1) ln 2`.
pub fn log_best_prob_final(n: usize, r: usize) -> Result<LogProb> {
    if n < 1 || r < 1 || r > n {
        return Err(Error::range("r", r, 1, n));
    }
    Ok(LogProb::from_ln(
        log_binomial(n - 1, r as i64 - 1) - (n - 1) as f64 * LN_2,
    ))
}

/// `C(n-1, r-1) / 2^(n-1)`.
pub fn best_prob_final(n: usize, r: usize) -> Result<f64> {
    log_best_prob_final(n, r).map(LogProb::prob)
}

fn paper_log_value(n: usize, t: usize, r: usize) -> f64 {
    let steps = n - t;
    let ln_r = (r as f64).ln();
    let ln_rest = ((t + 1 - r) as f64).ln();
    let shift = steps as f64 * ((t + 1) as f64).ln() + (n - 1) as f64 * LN_2;
    let terms: Vec<f64> = (0..=steps)
        .map(|j| {
            log_binomial(n - 1, (r - 1 + j) as i64)
                + log_binomial(steps, j as i64)
                + j as f64 * ln_r
                + (steps - j) as f64 * ln_rest
        })
        .collect();
    logsumexp(&terms) - shift
}

/// `P_r^(t)` from the binomial displacement sum, evaluated term by term in
/// log space.
pub fn will_best_paper(n: usize, t: usize, r: usize) -> Result<LogProb> {
    let rt = RankTime::new(n, t, r)?;
    Ok(LogProb::from_ln(paper_log_value(rt.n, rt.t, rt.r)))
}

fn mirror_upper_half(row: &mut [f64]) {
    let len = row.len();
    for i in len.div_ceil(2)..len {
        row[i] = row[len - 1 - i];
    }
}

fn final_row(n: usize) -> Vec<f64> {
    let shift = (n - 1) as f64 * LN_2;
    let mut row: Vec<f64> = (0..n)
        .map(|k| log_binomial(n - 1, k as i64) - shift)
        .collect();
    mirror_upper_half(&mut row);
    row
}

fn paper_row(n: usize, t: usize) -> Vec<f64> {
    let half = t.div_ceil(2);
    let mut row: Vec<f64> = if n - t > 64 {
        (1..=half)
            .into_par_iter()
            .map(|r| paper_log_value(n, t, r))
            .collect()
    } else {
        (1..=half).map(|r| paper_log_value(n, t, r)).collect()
    };
    row.resize(t, 0.0);
    mirror_upper_half(&mut row);
    row
}

/// One backward step of the sequential-rank chain: row `t` from row `t + 1`.
fn exact_step(next: &[f64]) -> Vec<f64> {
    let t = next.len() - 1;
    let ln_gaps = ((t + 1) as f64).ln();
    let mut row: Vec<f64> = (1..=t)
        .map(|q| {
            let up = (q as f64).ln() - ln_gaps + next[q];
            let stay = ((t + 1 - q) as f64).ln() - ln_gaps + next[q - 1];
            ln_add_exp(up, stay)
        })
        .collect();
    mirror_upper_half(&mut row);
    row
}

/// Streams rows of `P^(t)` (log scale, index `r - 1`) from `t = n` down to
/// `t = 1` without materialising the whole triangle.
pub struct WillBestRows {
    n: usize,
    mode: Mode,
    next_t: usize,
    last: Option<Vec<f64>>,
}

impl WillBestRows {
    pub fn new(n: usize, mode: Mode) -> Result<Self> {
        Self::with_cap(n, mode, DEFAULT_PAPER_CAP)
    }

    /// `cap` bounds paper mode only; exact mode is `O(n^2)` and uncapped.
    pub fn with_cap(n: usize, mode: Mode, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::range("n", n, 1, usize::MAX));
        }
        if mode == Mode::Paper && n > cap {
            return Err(Error::Size {
                what: "paper-mode matrix",
                n,
                cap,
            });
        }
        Ok(WillBestRows {
            n,
            mode,
            next_t: n,
            last: None,
        })
    }
}

impl Iterator for WillBestRows {
    type Item = (usize, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        let t = self.next_t;
        if t == 0 {
            return None;
        }
        self.next_t -= 1;
        let row = match (&self.last, self.mode) {
            (None, _) => final_row(self.n),
            (Some(prev), Mode::Exact) => exact_step(prev),
            (Some(_), Mode::Paper) => paper_row(self.n, t),
        };
        self.last = Some(row.clone());
        Some((t, row))
    }
}

/// `P_r^(t)` for every `1 <= r <= t <= n`, stored as log probabilities in a
/// triangle indexed by 1-based `(t, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WillBestMatrix {
    n: usize,
    mode: Mode,
    rows: Vec<Vec<f64>>,
}

impl WillBestMatrix {
    fn collect(rows: WillBestRows) -> Self {
        let (n, mode) = (rows.n, rows.mode);
        let mut out = vec![Vec::new(); n];
        for (t, row) in rows {
            out[t - 1] = row;
        }
        WillBestMatrix { n, mode, rows: out }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// # Panics
    ///
    /// Unless `1 <= r <= t <= n`.
    pub fn get(&self, t: usize, r: usize) -> LogProb {
        assert!(r >= 1 && r <= t && t <= self.n, "({t}, {r}) out of range");
        LogProb::from_ln(self.rows[t - 1][r - 1])
    }

    pub fn prob(&self, t: usize, r: usize) -> f64 {
        self.get(t, r).prob()
    }

    /// Log values of row `t`, index `r - 1`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t - 1]
    }
}

/// Full exact-mode matrix by backward recursion from the final row.
pub fn will_best_exact_matrix(n: usize) -> Result<WillBestMatrix> {
    Ok(WillBestMatrix::collect(WillBestRows::new(n, Mode::Exact)?))
}

/// Full paper-mode matrix, capped at [`DEFAULT_PAPER_CAP`].
pub fn will_best_paper_matrix(n: usize) -> Result<WillBestMatrix> {
    will_best_paper_matrix_with_cap(n, DEFAULT_PAPER_CAP)
}

pub fn will_best_paper_matrix_with_cap(n: usize, cap: usize) -> Result<WillBestMatrix> {
    Ok(WillBestMatrix::collect(WillBestRows::with_cap(
        n,
        Mode::Paper,
        cap,
    )?))
}

pub fn will_best_matrix(n: usize, mode: Mode) -> Result<WillBestMatrix> {
    match mode {
        Mode::Paper => will_best_paper_matrix(n),
        Mode::Exact => will_best_exact_matrix(n),
    }
}
