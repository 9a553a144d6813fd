use std::collections::BTreeMap;

use rayon::prelude::*;

use super::params::Params;
use super::spiral::{search_square, Backtrack, SpiralChain, Termination};
use crate::geometry::{dyadic_squares, DyadicSquare, ENUM_BUDGET};
use crate::orders::OrderOracle;
use crate::{Error, Result};

/// One backtrack per covered square; squares without one keep their chain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BacktrackAtlas {
    pub scales: Vec<u32>,
    pub backtracks: BTreeMap<DyadicSquare, Backtrack>,
    pub uncovered: BTreeMap<DyadicSquare, SpiralChain>,
}

impl BacktrackAtlas {
    pub fn total(&self) -> usize {
        self.backtracks.len() + self.uncovered.len()
    }

    pub fn covered(&self) -> usize {
        self.backtracks.len()
    }

    pub fn is_full(&self) -> bool {
        self.uncovered.is_empty()
    }

    /// Coarsest uncovered square, ties in row order.
    pub fn first_gap(&self) -> Option<DyadicSquare> {
        self.uncovered.keys().next().copied()
    }

    /// Backtracks at a given scale.
    pub fn at_scale(&self, t: u32) -> impl Iterator<Item = (&DyadicSquare, &Backtrack)> {
        self.backtracks.range(
            DyadicSquare {
                scale: t,
                ix: 0,
                iy: 0,
            }..=DyadicSquare {
                scale: t,
                ix: u32::MAX,
                iy: u32::MAX,
            },
        )
    }
}

/// Runs the spiral search on every square of the given scales in parallel.
/// A square is covered when any tie rule reaches a verified backtrack.
pub fn build_atlas(
    oracle: &OrderOracle,
    params: &Params,
    scales: &[u32],
) -> Result<BacktrackAtlas> {
    let allowed = params.scales();
    if let Some(t) = scales.iter().find(|t| !allowed.contains(t)) {
        return Err(Error::Parameter(format!(
            "scale {t} is not one of the used scales {allowed:?}"
        )));
    }
    let needed: u128 = scales.iter().map(|&t| 1u128 << (2 * t.min(63))).sum();
    if needed > ENUM_BUDGET {
        return Err(Error::Budget {
            what: "atlas squares",
            needed,
            budget: ENUM_BUDGET,
        });
    }
    let mut scales = scales.to_vec();
    scales.sort_unstable();
    scales.dedup();
    let mut squares = Vec::new();
    for &t in &scales {
        squares.extend(dyadic_squares(t)?);
    }
    let chains: Vec<Result<SpiralChain>> = squares
        .par_iter()
        .map(|&sq| search_square(oracle, sq, params))
        .collect();
    let mut atlas = BacktrackAtlas {
        scales,
        ..Default::default()
    };
    for (sq, chain) in squares.into_iter().zip(chains) {
        let chain = chain?;
        match chain.termination {
            Termination::BacktrackFound(bt) => {
                atlas.backtracks.insert(sq, bt);
            }
            _ => {
                atlas.uncovered.insert(sq, chain);
            }
        }
    }
    Ok(atlas)
}
