//! External clustering indices: Rand, adjusted Rand, normalized mutual
//! information.
//!
//! The noise label `-1` is an ordinary class here, so partitions that keep
//! noise separate can be scored like any other.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Per-object cluster labels; `-1` marks noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition(Vec<i64>);

impl Partition {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }
}

/// NMI normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNorm {
    /// `(H(a) + H(b)) / 2`
    #[default]
    Arithmetic,
    /// `sqrt(H(a) · H(b))`
    Geometric,
}

/// Contingency table between two labelings, with marginals.
struct Contingency {
    n: usize,
    cells: HashMap<(usize, usize), usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn dense_ids(labels: &[i64]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let ids = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

impl Contingency {
    fn new(a: &Partition, b: &Partition) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(Error::TooFewObjects { min: 2, n: a.len() });
        }
        let (ia, ka) = dense_ids(a.labels());
        let (ib, kb) = dense_ids(b.labels());
        let mut cells = HashMap::new();
        let mut rows = vec![0; ka];
        let mut cols = vec![0; kb];
        for (&x, &y) in ia.iter().zip(&ib) {
            *cells.entry((x, y)).or_insert(0) += 1;
            rows[x] += 1;
            cols[y] += 1;
        }
        Ok(Self {
            n: a.len(),
            cells,
            rows,
            cols,
        })
    }

    /// (pairs together in both, pairs together in a, pairs together in b, all pairs)
    fn pair_counts(&self) -> (f64, f64, f64, f64) {
        let c2 = |m: usize| (m * m.saturating_sub(1) / 2) as f64;
        let both = self.cells.values().map(|&m| c2(m)).sum();
        let in_a = self.rows.iter().map(|&m| c2(m)).sum();
        let in_b = self.cols.iter().map(|&m| c2(m)).sum();
        (both, in_a, in_b, c2(self.n))
    }
}

pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let (both, in_a, in_b, total) = Contingency::new(a, b)?.pair_counts();
    // agreements = together in both + apart in both
    Ok((total + 2.0 * both - in_a - in_b) / total)
}

/// Hubert–Arabie adjusted Rand index. When the expected and maximum index
/// coincide (both partitions trivial in the same way) the result is 1.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let (both, in_a, in_b, total) = Contingency::new(a, b)?.pair_counts();
    let expected = in_a * in_b / total;
    let max = 0.5 * (in_a + in_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((both - expected) / (max - expected))
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by `norm`; two constant partitions score 1.
pub fn nmi(a: &Partition, b: &Partition, norm: NmiNorm) -> Result<f64> {
    let t = Contingency::new(a, b)?;
    let n = t.n as f64;
    let ha = entropy(&t.rows, n);
    let hb = entropy(&t.cols, n);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = t
        .cells
        .iter()
        .map(|(&(i, j), &c)| {
            let c = c as f64;
            c / n * (c * n / (t.rows[i] as f64 * t.cols[j] as f64)).ln()
        })
        .sum();
    let denom = match norm {
        NmiNorm::Arithmetic => 0.5 * (ha + hb),
        NmiNorm::Geometric => (ha * hb).sqrt(),
    };
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// All three indices at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub ri: f64,
    pub ari: f64,
    pub nmi: f64,
}

pub fn score(pred: &Partition, truth: &Partition, norm: NmiNorm) -> Result<Scores> {
    Ok(Scores {
        ri: rand_index(pred, truth)?,
        ari: adjusted_rand_index(pred, truth)?,
        nmi: nmi(pred, truth, norm)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[i64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_partitions() {
        let a = p(&[0, 0, 1, 1]);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        assert!((nmi(&a, &a, NmiNorm::Arithmetic).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossed_partitions() {
        let a = p(&[0, 0, 1, 1]);
        let b = p(&[0, 1, 0, 1]);
        assert!((rand_index(&a, &b).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        assert!((adjusted_rand_index(&a, &b).unwrap() + 0.5).abs() < 1e-15);
        assert!(nmi(&a, &b, NmiNorm::Arithmetic).unwrap().abs() < 1e-15);
        assert!(nmi(&a, &b, NmiNorm::Geometric).unwrap().abs() < 1e-15);
    }

    #[test]
    fn constant_against_split() {
        let a = p(&[0, 0, 1, 1]);
        let b = p(&[7, 7, 7, 7]);
        assert!((rand_index(&a, &b).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 0.0);
        assert_eq!(nmi(&b, &b, NmiNorm::Arithmetic).unwrap(), 1.0);
        assert_eq!(nmi(&a, &b, NmiNorm::Arithmetic).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            rand_index(&p(&[0, 1]), &p(&[0, 1, 2])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            adjusted_rand_index(&p(&[0]), &p(&[0])),
            Err(Error::TooFewObjects { .. })
        ));
        assert!(nmi(&p(&[0]), &p(&[1]), NmiNorm::Arithmetic).is_err());
    }

    // Reference formulas evaluated by brute force over object pairs and
    // explicit label sets.
    fn pair_oracle(a: &[i64], b: &[i64]) -> (f64, f64) {
        let n = a.len();
        let (mut agree, mut pairs) = (0.0, 0.0);
        let (mut both, mut sa, mut sb) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                pairs += 1.0;
                let (x, y) = (a[i] == a[j], b[i] == b[j]);
                if x == y {
                    agree += 1.0;
                }
                both += f64::from(u8::from(x && y));
                sa += f64::from(u8::from(x));
                sb += f64::from(u8::from(y));
            }
        }
        let expected = sa * sb / pairs;
        let max = (sa + sb) / 2.0;
        let ari = if max == expected {
            1.0
        } else {
            (both - expected) / (max - expected)
        };
        (agree / pairs, ari)
    }

    fn nmi_oracle(a: &[i64], b: &[i64]) -> f64 {
        let n = a.len() as f64;
        let mut la: Vec<i64> = a.to_vec();
        la.sort();
        la.dedup();
        let mut lb: Vec<i64> = b.to_vec();
        lb.sort();
        lb.dedup();
        let count = |f: &dyn Fn(usize) -> bool| (0..a.len()).filter(|&i| f(i)).count() as f64;
        let (mut ha, mut hb, mut mi) = (0.0, 0.0, 0.0);
        for &x in &la {
            let px = count(&|i| a[i] == x) / n;
            ha -= px * px.ln();
        }
        for &y in &lb {
            let py = count(&|i| b[i] == y) / n;
            hb -= py * py.ln();
        }
        for &x in &la {
            for &y in &lb {
                let pxy = count(&|i| a[i] == x && b[i] == y) / n;
                if pxy > 0.0 {
                    let px = count(&|i| a[i] == x) / n;
                    let py = count(&|i| b[i] == y) / n;
                    mi += pxy * (pxy / (px * py)).ln();
                }
            }
        }
        if ha == 0.0 && hb == 0.0 {
            1.0
        } else {
            (mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0)
        }
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (2usize..=8).prop_flat_map(|n| {
            (
                prop::collection::vec(-1i64..4, n),
                prop::collection::vec(-1i64..4, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_reference_formulas((a, b) in arb_pair()) {
            let (ri, ari) = pair_oracle(&a, &b);
            let (pa, pb) = (p(&a), p(&b));
            prop_assert!((rand_index(&pa, &pb).unwrap() - ri).abs() <= 1e-12);
            prop_assert!((adjusted_rand_index(&pa, &pb).unwrap() - ari).abs() <= 1e-12);
            prop_assert!((nmi(&pa, &pb, NmiNorm::Arithmetic).unwrap() - nmi_oracle(&a, &b)).abs() <= 1e-12);
        }

        #[test]
        fn symmetric_and_permutation_invariant((a, b) in arb_pair(), shift in 1i64..10) {
            let (pa, pb) = (p(&a), p(&b));
            let relabeled = p(&b.iter().map(|l| (l + 1) * shift + 100).collect::<Vec<_>>());
            for norm in [NmiNorm::Arithmetic, NmiNorm::Geometric] {
                let s = score(&pa, &pb, norm).unwrap();
                let t = score(&pb, &pa, norm).unwrap();
                let r = score(&pa, &relabeled, norm).unwrap();
                prop_assert!((s.ri - t.ri).abs() <= 1e-12 && (s.ri - r.ri).abs() <= 1e-12);
                prop_assert!((s.ari - t.ari).abs() <= 1e-12 && (s.ari - r.ari).abs() <= 1e-12);
                prop_assert!((s.nmi - t.nmi).abs() <= 1e-12 && (s.nmi - r.nmi).abs() <= 1e-12);
            }
        }

        #[test]
        fn perfect_scores_coincide((a, b) in arb_pair()) {
            let (pa, pb) = (p(&a), p(&b));
            let ri = rand_index(&pa, &pb).unwrap();
            let ari = adjusted_rand_index(&pa, &pb).unwrap();
            // equal up to relabeling: the label bijection must be consistent both ways
            let mut fwd = HashMap::new();
            let mut bwd = HashMap::new();
            let same = a.iter().zip(&b).all(|(x, y)| {
                *fwd.entry(*x).or_insert(*y) == *y && *bwd.entry(*y).or_insert(*x) == *x
            });
            prop_assert_eq!(ri == 1.0, same);
            prop_assert_eq!(ari == 1.0, same);
        }
    }
}
