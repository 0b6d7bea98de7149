//! Backward induction for the optimal rank-only rule.
//!
//! `values[t]` is the success probability of the best rule that may only stop
//! in rounds `t..=n`. Round `t` stops on rank `r` iff
//! `P_r^(t) >= values[t + 1]`, and the resulting stopping set is checked to
//! be a symmetric interval `[lo, t + 1 - lo]`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_binomial;
use crate::rankprob::{Mode, WillBestRows, DEFAULT_PAPER_CAP};

/// Slack on ties in `P_r^(t) >= values[t + 1]`, in log units. Ties stop.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Ranks accepted in round `t`; `lo`/`hi` are both `None` when the rule
/// never stops in that round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRegion {
    pub t: usize,
    pub lo: Option<usize>,
    pub hi: Option<usize>,
}

impl StoppingRegion {
    pub fn empty(t: usize) -> Self {
        StoppingRegion { t, lo: None, hi: None }
    }

    pub fn interval(t: usize, lo: usize, hi: usize) -> Result<Self> {
        if lo < 1 || lo > hi || hi > t {
            return Err(Error::Structural {
                t,
                ranks: (lo..=hi).collect(),
            });
        }
        Ok(StoppingRegion {
            t,
            lo: Some(lo),
            hi: Some(hi),
        })
    }

    /// Builds a region from an explicit rank set, which must be empty or a
    /// contiguous run with `lo + hi = t + 1`.
    pub fn from_ranks(t: usize, ranks: &[usize]) -> Result<Self> {
        let (Some(&lo), Some(&hi)) = (ranks.first(), ranks.last()) else {
            return Ok(Self::empty(t));
        };
        let contiguous = ranks.windows(2).all(|w| w[1] == w[0] + 1);
        if !contiguous || lo + hi != t + 1 {
            return Err(Error::Structural {
                t,
                ranks: ranks.to_vec(),
            });
        }
        Self::interval(t, lo, hi)
    }

    pub fn bounds(&self) -> Option<(usize, usize)> {
        self.lo.zip(self.hi)
    }

    pub fn contains(&self, r: usize) -> bool {
        self.bounds().is_some_and(|(lo, hi)| lo <= r && r <= hi)
    }

    pub fn width(&self) -> usize {
        self.bounds().map_or(0, |(lo, hi)| hi - lo + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_none()
    }
}

/// Stopping regions and continuation values for `t = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    n: usize,
    mode: Mode,
    regions: Vec<StoppingRegion>,
    values: Vec<f64>,
}

impl PolicyTable {
    /// Reassembles a table (e.g. from a serialized file) and checks its
    /// structural invariants.
    pub fn from_parts(
        n: usize,
        mode: Mode,
        regions: Vec<StoppingRegion>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n < 1 || regions.len() != n || values.len() != n {
            return Err(Error::Precondition(format!(
                "policy for n = {n} needs n regions and n values, got {} and {}",
                regions.len(),
                values.len()
            )));
        }
        for (i, region) in regions.iter().enumerate() {
            if region.t != i + 1 {
                return Err(Error::Precondition(format!(
                    "region {i} is labelled t = {}",
                    region.t
                )));
            }
            if let Some((lo, hi)) = region.bounds() {
                StoppingRegion::interval(region.t, lo, hi)?;
                if lo + hi != region.t + 1 {
                    return Err(Error::Structural {
                        t: region.t,
                        ranks: (lo..=hi).collect(),
                    });
                }
            } else if region.hi.is_some() {
                return Err(Error::Precondition(format!(
                    "region t = {} has hi without lo",
                    region.t
                )));
            }
        }
        if regions[n - 1].bounds() != Some((1, n)) {
            return Err(Error::Precondition("last round must accept every rank".into()));
        }
        Ok(PolicyTable {
            n,
            mode,
            regions,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn regions(&self) -> &[StoppingRegion] {
        &self.regions
    }

    pub fn region(&self, t: usize) -> &StoppingRegion {
        &self.regions[t - 1]
    }

    /// `values[t - 1]` is the success probability of the optimal rule
    /// restricted to rounds `t..=n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    /// Overall success probability, `values[1]`.
    pub fn success(&self) -> f64 {
        self.values[0]
    }

    pub fn should_stop(&self, t: usize, r: usize) -> bool {
        t >= self.n || self.regions[t - 1].contains(r)
    }

    /// First round with a nonempty stopping region.
    pub fn first_active_round(&self) -> usize {
        self.regions
            .iter()
            .find(|r| !r.is_empty())
            .map_or(self.n, |r| r.t)
    }

    /// Rounds `t` after the first active round whose region is narrower than
    /// the region at `t - 1`.
    pub fn widening_violations(&self) -> Vec<usize> {
        let start = self.first_active_round();
        (start + 1..=self.n)
            .filter(|&t| self.region(t).width() < self.region(t - 1).width())
            .collect()
    }
}

pub fn backward_induction(n: usize, mode: Mode) -> Result<PolicyTable> {
    backward_induction_with_cap(n, mode, DEFAULT_PAPER_CAP)
}

pub fn backward_induction_with_cap(n: usize, mode: Mode, paper_cap: usize) -> Result<PolicyTable> {
    let mut rows = WillBestRows::with_cap(n, mode, paper_cap)?;
    let mut regions = vec![StoppingRegion::empty(0); n];
    let mut values = vec![0.0; n];
    regions[n - 1] = StoppingRegion::interval(n, 1, n)?;
    values[n - 1] = 1.0 / n as f64;
    rows.next();

    let mut ranks = Vec::with_capacity(n);
    for (t, row) in rows {
        let next = values[t];
        let cutoff = next.ln() - TIE_TOLERANCE;
        ranks.clear();
        let mut stop_mass = 0.0;
        for (i, &lp) in row.iter().enumerate() {
            if lp >= cutoff {
                ranks.push(i + 1);
                stop_mass += lp.exp();
            }
        }
        regions[t - 1] = StoppingRegion::from_ranks(t, &ranks)?;
        values[t - 1] = stop_mass / t as f64 + (t - ranks.len()) as f64 / t as f64 * next;
    }

    Ok(PolicyTable {
        n,
        mode,
        regions,
        values,
    })
}

/// Smallest `r <= n/2` with `C(n-2, r-1) >= 2^(n-2) / (n-1)`: the lower end
/// of the stopping interval in round `n - 1`.
pub fn first_stop_threshold(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::range("n", n, 3, usize::MAX));
    }
    let target = (n - 2) as f64 * std::f64::consts::LN_2 - ((n - 1) as f64).ln();
    (1..=n / 2)
        .find(|&r| log_binomial(n - 2, r as i64 - 1) >= target - TIE_TOLERANCE)
        .ok_or_else(|| Error::Contract(format!("no threshold found for n = {n}")))
}

/// One row of the reference table for `n = 10`: round, stopping interval,
/// success value to four decimals.
pub type Table1Entry = (usize, Option<(usize, usize)>, f64);

pub const TABLE1_REFERENCE: [Table1Entry; 10] = [
    (1, None, 0.1893),
    (2, None, 0.1893),
    (3, Some((2, 2)), 0.1893),
    (4, None, 0.1858),
    (5, Some((3, 3)), 0.1858),
    (6, Some((3, 4)), 0.1798),
    (7, Some((3, 5)), 0.1701),
    (8, Some((4, 5)), 0.1585),
    (9, Some((4, 6)), 0.1378),
    (10, Some((1, 10)), 0.1),
];

pub const TABLE1_N: usize = 10;

/// Largest accepted `|value - reference|` for a row to count as a match.
pub const TABLE1_TOLERANCE: f64 = 5e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub t: usize,
    pub region: StoppingRegion,
    pub value: f64,
    pub interval_matches: bool,
    pub value_matches: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Replica {
    pub paper: Vec<Table1Row>,
    pub exact: Vec<Table1Row>,
}

impl Table1Replica {
    pub fn rows(&self, mode: Mode) -> &[Table1Row] {
        match mode {
            Mode::Paper => &self.paper,
            Mode::Exact => &self.exact,
        }
    }

    pub fn match_count(&self, mode: Mode) -> usize {
        self.rows(mode).iter().filter(|r| r.matches).count()
    }

    pub fn all_rows_match(&self, mode: Mode) -> bool {
        self.match_count(mode) == TABLE1_REFERENCE.len()
    }

    /// Among modes reproducing every reference interval, the one with the
    /// most matching rows.
    pub fn adjudicated(&self) -> Option<Mode> {
        Mode::ALL
            .into_iter()
            .filter(|&m| self.rows(m).iter().all(|r| r.interval_matches))
            .max_by_key(|&m| self.match_count(m))
    }

    pub fn render(&self) -> String {
        fn interval(region: &StoppingRegion) -> String {
            match region.bounds() {
                None => "-".into(),
                Some((lo, hi)) if lo == hi => format!("{{{lo}}}"),
                Some((lo, hi)) => format!("[{lo},{hi}]"),
            }
        }
        fn threshold(region: &StoppingRegion) -> String {
            region.lo.map_or_else(|| "-".into(), |lo| lo.to_string())
        }
        let mut out = String::new();
        let _ = writeln!(out, "stopping intervals and success values, n = {TABLE1_N}");
        let _ = writeln!(
            out,
            "{:>3} {:>4} | {:>5} {:>8} {:>8} {:>7} | {:>5} {:>8} {:>8} {:>7} | {:>8} {:>7}",
            "t", "n-t", "r", "paper", "value", "", "r", "exact", "value", "", "ref", "value"
        );
        for (i, (t, reference, ref_value)) in TABLE1_REFERENCE.iter().enumerate() {
            let p = &self.paper[i];
            let e = &self.exact[i];
            let ref_interval = match reference {
                None => "-".to_string(),
                Some((lo, hi)) if lo == hi => format!("{{{lo}}}"),
                Some((lo, hi)) => format!("[{lo},{hi}]"),
            };
            let mark = if *t == 1 { "*" } else { "" };
            let verdict = |row: &Table1Row| match (row.interval_matches, row.value_matches) {
                (true, true) => "MATCH",
                (true, false) => "DIFFER:v",
                (false, true) => "DIFFER:i",
                (false, false) => "DIFFER",
            };
            let _ = writeln!(
                out,
                "{:>3} {:>4} | {:>5} {:>8} {:>8} {:>7} | {:>5} {:>8} {:>8} {:>7} | {:>8} {:>7}",
                t,
                TABLE1_N - t,
                threshold(&p.region),
                interval(&p.region),
                format!("{:.4}{mark}", p.value),
                verdict(p),
                threshold(&e.region),
                interval(&e.region),
                format!("{:.4}{mark}", e.value),
                verdict(e),
                ref_interval,
                format!("{ref_value:.4}{mark}"),
            );
        }
        let _ = writeln!(out, "* overall success probability; DIFFER:v value only, DIFFER:i interval only");
        for mode in Mode::ALL {
            let _ = writeln!(
                out,
                "{mode}: {}/{} rows match",
                self.match_count(mode),
                TABLE1_REFERENCE.len()
            );
        }
        match self.adjudicated() {
            Some(mode) => {
                let _ = writeln!(out, "adjudicated mode: {mode}");
            }
            None => {
                let _ = writeln!(out, "adjudicated mode: none");
            }
        }
        out
    }
}

/// Solves `n = 10` in both modes and compares every row against
/// [`TABLE1_REFERENCE`].
pub fn table1_replica() -> Result<Table1Replica> {
    let build = |mode| -> Result<Vec<Table1Row>> {
        let table = backward_induction(TABLE1_N, mode)?;
        Ok(TABLE1_REFERENCE
            .iter()
            .map(|&(t, reference, ref_value)| {
                let region = *table.region(t);
                let value = table.value(t);
                let interval_matches = region.bounds() == reference;
                let value_matches = (value - ref_value).abs() <= TABLE1_TOLERANCE;
                Table1Row {
                    t,
                    region,
                    value,
                    interval_matches,
                    value_matches,
                    matches: interval_matches && value_matches,
                }
            })
            .collect())
    };
    Ok(Table1Replica {
        paper: build(Mode::Paper)?,
        exact: build(Mode::Exact)?,
    })
}
