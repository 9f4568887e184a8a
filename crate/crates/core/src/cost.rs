//! Event lists, integer cost vectors and capped cost shares.

use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// A derived event declared in a profile header, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedEvent {
    pub name: String,
    pub formula: String,
}

/// The ordered list of event names that lays out every [`CostVector`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub names: Vec<String>,
    #[serde(default)]
    pub derived: Vec<DerivedEvent>,
}

impl EventSpec {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        EventSpec {
            names: names.into_iter().map(Into::into).collect(),
            derived: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// A zero vector with one slot per event.
    pub fn zero(&self) -> CostVector {
        CostVector::zero(self.len())
    }
}

/// One non-negative count per event.
///
/// Costs are exact `u64` values; arithmetic saturates instead of wrapping,
/// which only matters for inputs no real profiler can produce.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostVector(Vec<u64>);

impl CostVector {
    pub fn zero(len: usize) -> Self {
        CostVector(vec![0; len])
    }

    pub fn from_values(values: Vec<u64>) -> Self {
        CostVector(values)
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value for one event, zero when the slot does not exist.
    pub fn get(&self, event: usize) -> u64 {
        self.0.get(event).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Right-pads with zeros (or truncates) to `len` slots.
    pub fn normalized(mut self, len: usize) -> Self {
        self.0.resize(len, 0);
        self
    }

    pub fn add(&mut self, other: &CostVector) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (slot, v) in self.0.iter_mut().zip(&other.0) {
            *slot = slot.saturating_add(*v);
        }
    }

    /// Adds `other`, reporting the first slot that would overflow.
    pub fn checked_add(&mut self, other: &CostVector) -> Result<(), usize> {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (i, (slot, v)) in self.0.iter_mut().zip(&other.0).enumerate() {
            *slot = slot.checked_add(*v).ok_or(i)?;
        }
        Ok(())
    }

    /// Scales every slot by a constant; used by property tests on matching.
    pub fn scaled(&self, factor: u64) -> CostVector {
        CostVector(self.0.iter().map(|v| v.saturating_mul(factor)).collect())
    }
}

impl AddAssign<&CostVector> for CostVector {
    fn add_assign(&mut self, rhs: &CostVector) {
        self.add(rhs);
    }
}

impl<'a> std::iter::Sum<&'a CostVector> for CostVector {
    fn sum<I: Iterator<Item = &'a CostVector>>(iter: I) -> Self {
        let mut acc = CostVector::default();
        for c in iter {
            acc.add(c);
        }
        acc
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// An exact fraction `part / whole` in lowest terms, capped so it never
/// exceeds one.
///
/// Recursive functions can carry raw inclusive costs above the program
/// total; shares clamp those to 100%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ShareRepr", from = "ShareRepr")]
pub struct Share {
    part: u64,
    whole: u64,
}

impl Share {
    pub const ZERO: Share = Share { part: 0, whole: 1 };
    pub const ONE: Share = Share { part: 1, whole: 1 };

    pub fn new(part: u64, whole: u64) -> Share {
        if whole == 0 {
            return Share::ZERO;
        }
        let part = part.min(whole);
        let g = gcd(part, whole);
        Share {
            part: part / g,
            whole: whole / g,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.part
    }

    pub fn denominator(&self) -> u64 {
        self.whole
    }

    pub fn as_f64(&self) -> f64 {
        self.part as f64 / self.whole as f64
    }

    pub fn percent(&self) -> f64 {
        self.as_f64() * 100.0
    }

    /// True when the share reaches `threshold` (a fraction in `[0, 1]`).
    pub fn at_least(&self, threshold: f64) -> bool {
        self.as_f64() >= threshold
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Serialize, Deserialize)]
struct ShareRepr {
    numerator: u64,
    denominator: u64,
}

impl From<Share> for ShareRepr {
    fn from(s: Share) -> Self {
        ShareRepr {
            numerator: s.part,
            denominator: s.whole,
        }
    }
}

impl From<ShareRepr> for Share {
    fn from(r: ShareRepr) -> Self {
        Share::new(r.numerator, r.denominator)
    }
}

impl PartialOrd for Share {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Share {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = u128::from(self.part) * u128::from(other.whole);
        let rhs = u128::from(other.part) * u128::from(self.whole);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}%", self.percent())
    }
}
