use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::orders::MAX_G;
use crate::{Error, Result};

/// Construction parameters. Lengths `l` and `w` are in units of the side of
/// the square being searched.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub r: u32,
    pub m: u32,
    pub l: f64,
    pub w: f64,
    pub c: u32,
    pub s: u32,
    pub g: u32,
    pub strict: bool,
    /// Set when the width formula gave `w ≥ l` and `w` was clamped to `l/2`.
    pub w_clamped: bool,
}

pub fn icbrt(m: u32) -> u32 {
    let mut s = (m as f64).cbrt().round() as u32;
    while (s as u64).pow(3) > m as u64 {
        s -= 1;
    }
    while ((s + 1) as u64).pow(3) <= m as u64 {
        s += 1;
    }
    s
}

fn check_angles(m: u32) -> Result<()> {
    if m < 8 || m % 4 != 0 {
        return Err(Error::Parameter(format!(
            "M must be a multiple of 4 and at least 8, got {m}"
        )));
    }
    Ok(())
}

/// Parameters from the asymptotic formulas (natural logarithm).
///
/// `g` is the coarsest grid meeting `2⁻ᵍ ≤ w·2⁻ʳᵐᵃˣ/4`; it usually exceeds
/// what a grid can hold, see [`Params::desk`] for runnable values.
pub fn default_params(r: u32, m: u32, strict: bool) -> Result<Params> {
    check_angles(m)?;
    if r < 4 {
        return Err(Error::Parameter(format!("r must be at least 4, got {r}")));
    }
    let (rf, mf) = (r as f64, m as f64);
    if strict {
        if m <= 180 * 180 {
            return Err(Error::Constraint(format!("180² < M fails for M={m}")));
        }
        let cap = 1e-5 * (rf / rf.ln()).powf(1.0 / 9.0);
        if mf > cap {
            return Err(Error::Constraint(format!(
                "M ≤ 1e-5·(r/ln r)^(1/9) fails: M={m}, bound={cap:.6e}"
            )));
        }
    }
    let l = 1.0 / (100.0 * mf.powi(4));
    let mut w = (4.0 * mf * rf.ln() / rf).sqrt();
    let c = (0.5 * rf.log2() + 0.5 * mf.log2() - 360f64.log2())
        .round()
        .max(1.0) as u32;
    let mut w_clamped = false;
    if w >= l {
        if strict {
            return Err(Error::Constraint(format!(
                "w < l fails: w={w:.6e}, l={l:.6e}"
            )));
        }
        w = l / 2.0;
        w_clamped = true;
    }
    let rmax = c * (r / c);
    let g = ((4.0 / w).log2().ceil() as i64 + rmax as i64).max(1) as u32;
    Ok(Params {
        r,
        m,
        l,
        w,
        c,
        s: icbrt(m),
        g,
        strict,
        w_clamped,
    })
}

impl Params {
    /// Grid-feasible parameters for scales `0..=r` on a `2ᵍ` grid: the width
    /// spans four grid cells at the deepest scale and `l = 1.5w`. Fails when
    /// the rectangles would be too long to sit beside the start point.
    pub fn desk(r: u32, m: u32, g: u32) -> Result<Params> {
        check_angles(m)?;
        if g == 0 || g > MAX_G {
            return Err(Error::Parameter(format!(
                "g must be in 1..={MAX_G}, got {g}"
            )));
        }
        let w = 4.0 * ((r as f64) - (g as f64)).exp2();
        let p = Params {
            r,
            m,
            l: 1.5 * w,
            w,
            c: 1,
            s: icbrt(m),
            g,
            strict: false,
            w_clamped: false,
        };
        if p.l / 2.0 >= p.min_arc_offset() {
            let need = (r as f64 + (12.0 / p.min_arc_offset()).log2()).ceil();
            return Err(Error::Resolution(format!(
                "l={:.4} too long for M={m}; with {r} scales this needs g ≥ {need}",
                p.l
            )));
        }
        Ok(p)
    }

    pub fn with_c(mut self, c: u32) -> Result<Params> {
        if c == 0 {
            return Err(Error::Parameter("c must be at least 1".into()));
        }
        self.c = c;
        Ok(self)
    }

    /// Used scales `0, c, 2c, …, c⌊r/c⌋`.
    pub fn scales(&self) -> Vec<u32> {
        (0..=self.r / self.c).map(|t| t * self.c).collect()
    }

    pub fn sec(&self) -> f64 {
        1.0 / (2.0 * PI / self.m as f64).cos()
    }

    /// `¼·tan(2π/M)`: the distance between the start anchor and its
    /// neighbours on the adjacent rays.
    pub fn min_arc_offset(&self) -> f64 {
        0.25 * (2.0 * PI / self.m as f64).tan()
    }

    pub fn validate(&self) -> Result<()> {
        check_angles(self.m)?;
        if !(self.w > 0.0 && self.w < self.l) {
            return Err(Error::Parameter(format!(
                "need 0 < w < l, got w={}, l={}",
                self.w, self.l
            )));
        }
        if self.c == 0 {
            return Err(Error::Parameter("c must be at least 1".into()));
        }
        if self.strict && self.l > 0.01 / (self.m as f64).powi(4) {
            return Err(Error::Constraint(format!(
                "l ≤ 0.01·M⁻⁴ fails: l={}",
                self.l
            )));
        }
        Ok(())
    }
}
