use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Weakly increasing integer positions `x_1 <= ... <= x_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Configuration(Vec<i64>);

/// Inter-particle distances `η_i = x_{i+1} - x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct GapVector(Vec<i64>);

/// A contiguous block of particle labels `first..=last`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Club {
    pub first: usize,
    pub last: usize,
}

impl Club {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first == 0 || first > last {
            return Err(invalid(format!("bad label interval [{first}..{last}]")));
        }
        Ok(Self { first, last })
    }

    pub fn singleton(label: usize) -> Self {
        Self {
            first: label,
            last: label,
        }
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, label: usize) -> bool {
        (self.first..=self.last).contains(&label)
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if self.first == 0 || self.first > self.last || self.last > n {
            return Err(invalid(format!(
                "label interval [{}..{}] outside 1..={n}",
                self.first, self.last
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<i64>> for Configuration {
    type Error = crate::Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Configuration::new(v)
    }
}

impl From<Configuration> for Vec<i64> {
    fn from(c: Configuration) -> Self {
        c.0
    }
}

impl TryFrom<Vec<i64>> for GapVector {
    type Error = crate::Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        GapVector::new(v)
    }
}

impl From<GapVector> for Vec<i64> {
    fn from(g: GapVector) -> Self {
        g.0
    }
}

impl Configuration {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("a configuration needs at least one particle"));
        }
        if let Some(i) = positions.windows(2).position(|w| w[0] > w[1]) {
            return Err(invalid(format!(
                "positions must be weakly increasing: x_{} = {} > x_{} = {}",
                i + 1,
                positions[i],
                i + 2,
                positions[i + 1]
            )));
        }
        Ok(Self(positions))
    }

    /// All particles stacked at `site`.
    pub fn stacked(n: usize, site: i64) -> Self {
        assert!(n > 0);
        Self(vec![site; n])
    }

    pub(crate) fn from_sorted_unchecked(positions: Vec<i64>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] <= w[1]));
        Self(positions)
    }

    pub fn positions(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of particle `label` (1-based).
    pub fn at(&self, label: usize) -> i64 {
        self.0[label - 1]
    }

    pub fn gaps(&self) -> GapVector {
        GapVector(self.0.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// Inverse of [`Configuration::gaps`] anchored at `x_1 = leftmost`.
    pub fn from_gaps(leftmost: i64, gaps: &GapVector) -> Self {
        let mut positions = Vec::with_capacity(gaps.len() + 1);
        let mut x = leftmost;
        positions.push(x);
        for g in gaps.values() {
            x += g;
            positions.push(x);
        }
        Self(positions)
    }

    /// Single-occupancy image `x_i + i - 1`.
    pub fn expand(&self) -> Vec<i64> {
        self.0.iter().enumerate().map(|(i, x)| x + i as i64).collect()
    }

    /// Inverse of [`Configuration::expand`]; the input must be strictly increasing.
    pub fn contract(expanded: &[i64]) -> Result<Self> {
        if expanded.is_empty() {
            return Err(invalid("empty expanded configuration"));
        }
        if let Some(i) = expanded.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "expanded configuration must be strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self(
            expanded.iter().enumerate().map(|(i, y)| y - i as i64).collect(),
        ))
    }

    /// Span `x_last - x_first` of a club.
    pub fn span(&self, club: Club) -> Result<i64> {
        club.check(self.len())?;
        Ok(self.at(club.last) - self.at(club.first))
    }

    pub fn translate(&self, shift: i64) -> Self {
        Self(self.0.iter().map(|x| x + shift).collect())
    }

    /// Copy with particle `label` (1-based) moved by `step`, or `None` if
    /// the result leaves the ordered configuration space.
    pub fn moved(&self, label: usize, step: i64) -> Option<Self> {
        let i = label - 1;
        let target = self.0[i] + step;
        if i > 0 && self.0[i - 1] > target {
            return None;
        }
        if i + 1 < self.0.len() && self.0[i + 1] < target {
            return None;
        }
        let mut v = self.0.clone();
        v[i] = target;
        Some(Self(v))
    }

    /// Maximal runs of equal positions as 0-based inclusive index ranges.
    pub fn stacks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.0.len() {
            if i == self.0.len() || self.0[i] != self.0[start] {
                out.push((start, i - 1));
                start = i;
            }
        }
        out
    }
}

impl GapVector {
    pub fn new(gaps: Vec<i64>) -> Result<Self> {
        if let Some(i) = gaps.iter().position(|&g| g < 0) {
            return Err(invalid(format!("gap {} is negative ({})", i + 1, gaps[i])));
        }
        Ok(Self(gaps))
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
