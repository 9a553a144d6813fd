//! ±1 walks on the cycle `ℤ/M` and the zig-zag / confinement dichotomy.
//!
//! Time indices are 0-based: `values()[0]` is the first position of the walk.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance on the `m`-cycle.
pub fn cycle_dist(m: u32, a: u32, b: u32) -> u32 {
    let d = a.abs_diff(b) % m;
    d.min(m - d)
}

fn cycle_add(m: u32, a: u32, k: i64) -> u32 {
    (a as i64 + k).rem_euclid(m as i64) as u32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWalk {
    m: u32,
    values: Vec<u32>,
}

impl CycleWalk {
    pub fn new(m: u32, values: Vec<u32>) -> Result<Self> {
        if m < 3 {
            return Err(Error::Parameter(format!(
                "cycle size must be at least 3, got {m}"
            )));
        }
        if values.is_empty() {
            return Err(Error::Parameter(
                "walk must have at least one position".into(),
            ));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= m) {
            return Err(Error::Parameter(format!(
                "residue {v} out of range for M={m}"
            )));
        }
        if let Some(k) = values
            .windows(2)
            .position(|w| cycle_dist(m, w[0], w[1]) != 1)
        {
            return Err(Error::Parameter(format!(
                "step {k} goes from {} to {}, not ±1",
                values[k],
                values[k + 1]
            )));
        }
        Ok(CycleWalk { m, values })
    }

    pub fn from_steps(m: u32, start: u32, steps: &[i8]) -> Result<Self> {
        if m < 3 || start >= m {
            return Err(Error::Parameter(format!("bad start {start} for M={m}")));
        }
        let mut values = Vec::with_capacity(steps.len() + 1);
        let mut cur = start;
        values.push(cur);
        for (k, &s) in steps.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::Parameter(format!("step {k} is {s}, not ±1")));
            }
            cur = cycle_add(m, cur, s as i64);
            values.push(cur);
        }
        Ok(CycleWalk { m, values })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn steps(&self) -> Vec<i8> {
        self.values
            .windows(2)
            .map(|w| {
                if cycle_add(self.m, w[0], 1) == w[1] {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    /// Lifted positions in `ℤ`, starting at `values()[0]`.
    pub fn unwrapped(&self) -> Vec<i64> {
        let mut u = Vec::with_capacity(self.len());
        let mut cur = self.values[0] as i64;
        u.push(cur);
        for s in self.steps() {
            cur += s as i64;
            u.push(cur);
        }
        u
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Oscillation {
    None,
    Small,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OscillationTag {
    pub tag: Oscillation,
    pub next_visit: Option<usize>,
    /// First time after this one at cycle distance `delta + 1` from its value.
    pub first_exit: Option<usize>,
}

/// Tags every time as a time of no, small or large oscillation for window `delta`.
///
/// Between a time and the next visit to the same residue the lifted walk
/// stays strictly on one side, so the window is left exactly when the lift
/// first reaches `±(delta+1)`; that hitting time is found with a backward
/// scan over lifted values.
pub fn classify_times(w: &CycleWalk, delta: u32) -> Result<Vec<OscillationTag>> {
    if delta == 0 {
        return Err(Error::Parameter(
            "oscillation window must be at least 1".into(),
        ));
    }
    let m = w.m;
    let u = w.unwrapped();
    let n = u.len();
    let base = u.iter().copied().min().unwrap_or(0) - delta as i64 - 1;
    let top = u.iter().copied().max().unwrap_or(0) + delta as i64 + 1;
    let mut next_at_level = vec![usize::MAX; (top - base + 1) as usize];
    let mut next_residue = vec![usize::MAX; m as usize];
    let can_exit = 2 * delta as u64 + 2 <= m as u64;
    let mut tags = vec![
        OscillationTag {
            tag: Oscillation::None,
            next_visit: None,
            first_exit: None,
        };
        n
    ];
    let d = delta as i64 + 1;
    for j in (0..n).rev() {
        let next = next_residue[w.values[j] as usize];
        let up = next_at_level[(u[j] + d - base) as usize];
        let down = next_at_level[(u[j] - d - base) as usize];
        let exit = up.min(down);
        let first_exit = (can_exit && exit != usize::MAX).then_some(exit);
        let tag = match next {
            usize::MAX => Oscillation::None,
            nv if first_exit.is_some_and(|e| e < nv) => Oscillation::Large,
            _ => Oscillation::Small,
        };
        tags[j] = OscillationTag {
            tag,
            next_visit: (next != usize::MAX).then_some(next),
            first_exit,
        };
        next_at_level[(u[j] - base) as usize] = j;
        next_residue[w.values[j] as usize] = j;
    }
    Ok(tags)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "lowercase")]
pub enum DichotomyOutcome {
    /// The walk alternates `m` times between `a` (at times `i`) and a value at
    /// distance `s²` from `a` (at times `j`).
    ZigZag {
        a: u32,
        i: Vec<usize>,
        j: Vec<usize>,
        both_values_attained: bool,
    },
    /// During `start..start+len` the walk visits `a` at each of `visits`.
    Confined {
        start: usize,
        len: usize,
        a: u32,
        visits: Vec<usize>,
        diameter: u32,
        /// Whether the diameter also meets the tighter `3s²+1`.
        tight_diameter: bool,
    },
}

impl DichotomyOutcome {
    pub fn is_zigzag(&self) -> bool {
        matches!(self, DichotomyOutcome::ZigZag { .. })
    }

    pub fn multiplicity(&self) -> usize {
        match self {
            DichotomyOutcome::ZigZag { i, .. } => i.len(),
            DichotomyOutcome::Confined { visits, .. } => visits.len(),
        }
    }

    /// Checks every claim of the outcome against the walk.
    ///
    /// For a walk of length `N` the zig-zag needs `m > N/(M·s)` (that is
    /// `m > M/s` when `N = M²`); the confinement window has at most `s³`
    /// times and at least `⌈s/7⌉` visits.
    pub fn validate(&self, w: &CycleWalk, s: u32) -> Result<()> {
        let (m, n) = (w.m, w.len());
        let s2 = s as i64 * s as i64;
        let bad = |msg: String| Err(Error::Witness(msg));
        match self {
            DichotomyOutcome::ZigZag { a, i, j, .. } => {
                if i.len() != j.len() || i.is_empty() {
                    return bad(format!("{} i-times vs {} j-times", i.len(), j.len()));
                }
                let count = i.len() as u128;
                if count * m as u128 * s as u128 <= n as u128 {
                    return bad(format!("m={count} does not exceed N/(M s) = {n}/({m}·{s})"));
                }
                let mut prev: Option<usize> = None;
                for (&x, &y) in i.iter().zip(j) {
                    if prev.is_some_and(|p| p >= x) || x >= y || y >= n {
                        return bad(format!("times {x}, {y} break the interleaving"));
                    }
                    prev = Some(y);
                    if w.values[x] != *a {
                        return bad(format!("a at time {x} is {}, expected {a}", w.values[x]));
                    }
                    let v = w.values[y];
                    if v != cycle_add(m, *a, s2) && v != cycle_add(m, *a, -s2) {
                        return bad(format!("value {v} at time {y} is not {a} ± {s2}"));
                    }
                }
                Ok(())
            }
            DichotomyOutcome::Confined {
                start,
                len,
                a,
                visits,
                ..
            } => {
                let s3 = s as usize * s as usize * s as usize;
                if *len == 0 || *len > s3 || start + len > n {
                    return bad(format!("window {start}+{len} invalid for s³={s3}, N={n}"));
                }
                if visits.len() * 7 < s as usize {
                    return bad(format!(
                        "{} visits, need at least s/7 = {s}/7",
                        visits.len()
                    ));
                }
                if visits.windows(2).any(|p| p[0] >= p[1]) {
                    return bad("visit times must be strictly increasing".into());
                }
                for &t in visits {
                    if t < *start || t >= start + len || w.values[t] != *a {
                        return bad(format!("time {t} is not a visit to {a} inside the window"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Most frequent value, ties to the lowest residue.
fn most_frequent(m: u32, vals: impl Iterator<Item = u32>) -> Option<(u32, usize)> {
    let mut count = vec![0usize; m as usize];
    for v in vals {
        count[v as usize] += 1;
    }
    let (a, &c) = count
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))?;
    (c > 0).then_some((a as u32, c))
}

/// Diameter (cycle metric) of the values visited during `range`.
pub fn window_diameter(w: &CycleWalk, u: &[i64], range: std::ops::Range<usize>) -> u32 {
    let lo = u[range.clone()].iter().min().copied().unwrap_or(0);
    let hi = u[range].iter().max().copied().unwrap_or(0);
    let spread = (hi - lo) as u64;
    spread.min(w.m as u64 / 2) as u32
}

/// Splits a walk into the two scenarios using window `Δ = s²`.
///
/// With `|ℒ|` large the most frequent residue among large-oscillation times
/// yields a zig-zag; otherwise the aligned block of `s³` times holding the
/// fewest no/large-oscillation times is confined. Walks shorter than `M²`
/// are accepted (thresholds scale with `N`); the returned witness is always
/// re-validated.
pub fn dichotomy(w: &CycleWalk, s: u32) -> Result<DichotomyOutcome> {
    let m = w.m;
    let n = w.len();
    let s3 = s as u64 * s as u64 * s as u64;
    if s == 0 || s3 > m as u64 {
        return Err(Error::Parameter(format!(
            "need 1 <= s <= M^(1/3), got s={s}, M={m}"
        )));
    }
    if (n as u64) < s3 {
        return Err(Error::Parameter(format!(
            "walk of length {n} is shorter than s³={s3}"
        )));
    }
    let delta = s * s;
    let tags = classify_times(w, delta)?;
    let large: Vec<usize> = (0..n)
        .filter(|&t| tags[t].tag == Oscillation::Large)
        .collect();

    let outcome = if large.len() as u64 * s as u64 > n as u64 {
        let (a, _) = most_frequent(m, large.iter().map(|&t| w.values[t])).expect("non-empty");
        let i: Vec<usize> = large
            .iter()
            .copied()
            .filter(|&t| w.values[t] == a)
            .collect();
        // the walk is at distance exactly s² one step before it leaves the window
        let j: Vec<usize> = i
            .iter()
            .map(|&t| tags[t].first_exit.expect("large times leave the window") - 1)
            .collect();
        let hi = cycle_add(m, a, delta as i64);
        let lo = cycle_add(m, a, -(delta as i64));
        let both = j.iter().any(|&t| w.values[t] == hi) && j.iter().any(|&t| w.values[t] == lo);
        DichotomyOutcome::ZigZag {
            a,
            i,
            j,
            both_values_attained: both,
        }
    } else {
        let block = s3 as usize;
        let blocks = n / block;
        let bad_in = |b: usize| {
            (b * block..(b + 1) * block)
                .filter(|&t| tags[t].tag != Oscillation::Small)
                .count()
        };
        let best = (0..blocks)
            .min_by_key(|&b| (bad_in(b), b))
            .expect("at least one block");
        let range = best * block..(best + 1) * block;
        let (a, _) = most_frequent(m, w.values[range.clone()].iter().copied()).expect("non-empty");
        let visits: Vec<usize> = range.clone().filter(|&t| w.values[t] == a).collect();
        let u = w.unwrapped();
        let diameter = window_diameter(w, &u, range.clone());
        DichotomyOutcome::Confined {
            start: range.start,
            len: block,
            a,
            visits,
            diameter,
            tight_diameter: diameter <= 3 * delta + 1,
        }
    };
    outcome
        .validate(w, s)
        .map_err(|e| Error::Construction(format!("dichotomy produced an invalid witness: {e}")))?;
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Winding,
    Constant,
    Revolution,
    Tight,
    Random,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkKind::Winding => "winding",
            WalkKind::Constant => "constant",
            WalkKind::Revolution => "revolution",
            WalkKind::Tight => "tight",
            WalkKind::Random => "random",
        })
    }
}

impl FromStr for WalkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "winding" => WalkKind::Winding,
            "constant" => WalkKind::Constant,
            "revolution" => WalkKind::Revolution,
            "tight" => WalkKind::Tight,
            "random" => WalkKind::Random,
            other => return Err(Error::Parameter(format!("unknown walk kind `{other}`"))),
        })
    }
}

/// A walk of length `M²` starting at 0.
pub fn make_walk(kind: WalkKind, m: u32, s: u32, seed: u64) -> Result<CycleWalk> {
    make_walk_len(kind, m, s, seed, m as usize * m as usize)
}

pub fn make_walk_len(kind: WalkKind, m: u32, s: u32, seed: u64, n: usize) -> Result<CycleWalk> {
    if m < 3 || n == 0 {
        return Err(Error::Parameter(format!(
            "need M >= 3 and N >= 1, got M={m}, N={n}"
        )));
    }
    let count = n - 1;
    let steps: Vec<i8> = match kind {
        WalkKind::Winding => vec![1; count],
        // step k leads from time k+1 to k+2 (1-based); even times step up
        WalkKind::Constant => (0..count)
            .map(|k| if k % 2 == 1 { 1 } else { -1 })
            .collect(),
        WalkKind::Revolution => {
            // alternate, but every M steps insert an extra +1 without
            // flipping the phase: one revolution over M² steps
            let mut next = -1i8;
            (1..=count)
                .map(|k| {
                    if k % m as usize == 0 {
                        1
                    } else {
                        let v = next;
                        next = -next;
                        v
                    }
                })
                .collect()
        }
        WalkKind::Tight => {
            let s3 = s as u64 * s as u64 * s as u64;
            if s == 0 || s3 > m as u64 {
                return Err(Error::Parameter(format!(
                    "tight walk needs 1 <= s <= M^(1/3), got s={s}"
                )));
            }
            let s2 = (s * s) as usize;
            let mut sub = Vec::with_capacity(2 * s2 * s as usize + s2);
            for _ in 0..s {
                sub.extend(std::iter::repeat(1i8).take(s2));
                sub.extend(std::iter::repeat(-1i8).take(s2));
            }
            sub.extend(std::iter::repeat(1i8).take(s2));
            sub.iter().copied().cycle().take(count).collect()
        }
        WalkKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect()
        }
    };
    CycleWalk::from_steps(m, 0, &steps)
}

/// `M=<int> N=<int>`, the start residue, then one signed step per line.
pub fn format_walk(w: &CycleWalk) -> String {
    let mut out = format!("M={} N={}\n{}\n", w.m, w.len(), w.values[0]);
    for s in w.steps() {
        out.push_str(if s > 0 { "+1\n" } else { "-1\n" });
    }
    out
}

pub fn parse_walk(text: &str) -> Result<CycleWalk> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, msg: String| Error::Format { line, msg };
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty walk file".into()))?;
    let mut m = None;
    let mut n = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("M", v)) => m = v.parse::<u32>().ok(),
            Some(("N", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(err(1, format!("unexpected header field `{field}`"))),
        }
    }
    let (m, n) = m
        .zip(n)
        .ok_or_else(|| err(1, "header must be `M=<int> N=<int>`".into()))?;
    let (sl, start) = lines
        .next()
        .ok_or_else(|| err(2, "missing start residue".into()))?;
    let start: u32 = start
        .parse()
        .map_err(|_| err(sl, format!("bad start residue `{start}`")))?;
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    for (ln, l) in lines {
        if l.is_empty() {
            continue;
        }
        steps.push(match l {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(err(ln, format!("step must be +1 or -1, found `{other}`"))),
        });
    }
    if steps.len() + 1 != n {
        return Err(err(
            text.lines().count() + 1,
            format!(
                "header says N={n} but {} positions were given",
                steps.len() + 1
            ),
        ));
    }
    CycleWalk::from_steps(m, start, &steps).map_err(|e| err(2, e.to_string()))
}
