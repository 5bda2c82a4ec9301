//! Occupation-number basis of the truncated bosonic Fock space.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION_CEILING: usize = 200_000;

/// All occupation vectors over `mode_count` modes with total at most `n_max`,
/// ordered by total number and then lexicographically, so that every number
/// sector is a contiguous block.
#[derive(Debug, Clone)]
pub struct OccupationBasis {
    mode_count: usize,
    n_max: usize,
    occupations: Vec<u8>,
    totals: Vec<usize>,
    sector_offsets: Vec<usize>,
    index_of: HashMap<Vec<u8>, usize>,
}

pub fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of states with `Σ n_i <= n_max`: `C(M + n_max, M)`.
pub fn state_count(mode_count: usize, n_max: usize) -> u128 {
    binomial((mode_count + n_max) as u128, mode_count as u128)
}

pub fn enumerate_basis(mode_count: usize, n_max: usize) -> Result<OccupationBasis> {
    enumerate_basis_with_ceiling(mode_count, n_max, DEFAULT_DIMENSION_CEILING)
}

pub fn enumerate_basis_with_ceiling(mode_count: usize, n_max: usize, ceiling: usize) -> Result<OccupationBasis> {
    if n_max > u8::MAX as usize {
        return Err(Error::InvalidArgument(format!("n_max {n_max} exceeds 255")));
    }
    let count = state_count(mode_count, n_max);
    if count > ceiling as u128 {
        return Err(Error::DimensionCeiling { count, ceiling });
    }
    let count = count as usize;
    let mut occupations = Vec::with_capacity(count * mode_count);
    let mut totals = Vec::with_capacity(count);
    let mut sector_offsets = Vec::with_capacity(n_max + 2);
    let mut current = vec![0u8; mode_count];
    for total in 0..=n_max {
        sector_offsets.push(totals.len());
        compositions(&mut current, 0, total, &mut |n| {
            occupations.extend_from_slice(n);
            totals.push(total);
        });
    }
    sector_offsets.push(totals.len());
    debug_assert_eq!(totals.len(), count);
    let index_of = (0..count)
        .map(|i| (occupations[i * mode_count..(i + 1) * mode_count].to_vec(), i))
        .collect();
    Ok(OccupationBasis { mode_count, n_max, occupations, totals, sector_offsets, index_of })
}

/// Visits every composition of `remaining` into `slots[pos..]` in
/// lexicographic order.
fn compositions(slots: &mut [u8], pos: usize, remaining: usize, visit: &mut impl FnMut(&[u8])) {
    if pos == slots.len() {
        if remaining == 0 {
            visit(slots);
        }
        return;
    }
    if pos + 1 == slots.len() {
        slots[pos] = remaining as u8;
        visit(slots);
        slots[pos] = 0;
        return;
    }
    for v in 0..=remaining {
        slots[pos] = v as u8;
        compositions(slots, pos + 1, remaining - v, visit);
    }
    slots[pos] = 0;
}

impl OccupationBasis {
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.totals.len()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.occupations[i * self.mode_count..(i + 1) * self.mode_count]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }

    pub fn total(&self, i: usize) -> usize {
        self.totals[i]
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index_of.get(occupation).copied()
    }

    /// Index range of the sector with exactly `n` bosons.
    pub fn sector(&self, n: usize) -> std::ops::Range<usize> {
        if n > self.n_max {
            return self.dim()..self.dim();
        }
        self.sector_offsets[n]..self.sector_offsets[n + 1]
    }

    pub fn sector_offsets(&self) -> &[usize] {
        &self.sector_offsets
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    /// Index of `n + e_mode`, or `None` when it falls outside the cap.
    pub fn raised(&self, i: usize, mode: usize) -> Option<usize> {
        if self.totals[i] >= self.n_max {
            return None;
        }
        let mut n = self.state(i).to_vec();
        n[mode] += 1;
        self.index_of(&n)
    }
}
