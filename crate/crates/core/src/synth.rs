//! Seeded generators for the standard 2-D benchmark shapes.
//!
//! Every generator draws from a ChaCha8 stream seeded by `GenSpec::seed`, so
//! a spec always yields bit-identical points. Positions along rings, arms and
//! lines are stratified (one jittered slot per point) so the largest gap
//! along a shape stays bounded.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataio::PointSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Isotropic Gaussian blobs with centers at least `separation` apart.
    /// `separation == 0` stacks every center on the origin.
    Blobs {
        clusters: usize,
        spread: f64,
        separation: f64,
    },
    /// Concentric rings with Gaussian radial noise.
    Circles { radii: Vec<f64>, noise: f64 },
    /// Interleaved Archimedean arms from radius `inner` to `outer`.
    Spiral {
        arms: usize,
        turns: f64,
        inner: f64,
        outer: f64,
        noise: f64,
    },
    /// Gaussian blobs whose sizes follow the given ratios.
    Unbalance {
        sizes: Vec<f64>,
        spread: f64,
        separation: f64,
    },
    /// Parallel horizontal segments `gap` apart.
    LineClusters {
        lines: usize,
        length: f64,
        gap: f64,
        noise: f64,
    },
}

impl Family {
    pub fn components(&self) -> usize {
        match self {
            Family::Blobs { clusters, .. } => *clusters,
            Family::Circles { radii, .. } => radii.len(),
            Family::Spiral { arms, .. } => *arms,
            Family::Unbalance { sizes, .. } => sizes.len(),
            Family::LineClusters { lines, .. } => *lines,
        }
    }

    pub fn circles() -> Self {
        Family::Circles {
            radii: vec![1.0, 3.0, 5.0],
            noise: 0.05,
        }
    }

    pub fn spiral() -> Self {
        Family::Spiral {
            arms: 3,
            turns: 1.5,
            inner: 1.0,
            outer: 10.0,
            noise: 0.05,
        }
    }

    pub fn blobs(clusters: usize) -> Self {
        Family::Blobs {
            clusters,
            spread: 1.0,
            separation: 10.0,
        }
    }

    pub fn unbalance() -> Self {
        Family::Unbalance {
            sizes: vec![2000.0, 100.0, 100.0],
            spread: 1.0,
            separation: 10.0,
        }
    }

    pub fn line_clusters() -> Self {
        Family::LineClusters {
            lines: 3,
            length: 10.0,
            gap: 2.0,
            noise: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and ≥ 0, got {v}")))
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let c = self.family.components();
        if c == 0 {
            return Err(invalid("need at least one component"));
        }
        if self.n < c {
            return Err(invalid(format!(
                "n = {} is below the {c} components",
                self.n
            )));
        }
        match &self.family {
            Family::Blobs {
                spread, separation, ..
            } => {
                check_scale("spread", *spread)?;
                check_scale("separation", *separation)?;
            }
            Family::Circles { radii, noise } => {
                check_scale("noise", *noise)?;
                for r in radii {
                    if !(r.is_finite() && *r > 0.0) {
                        return Err(invalid(format!("radius must be positive, got {r}")));
                    }
                }
            }
            Family::Spiral {
                turns,
                inner,
                outer,
                noise,
                ..
            } => {
                check_scale("noise", *noise)?;
                check_scale("inner", *inner)?;
                if !(turns.is_finite() && *turns > 0.0) {
                    return Err(invalid("turns must be positive"));
                }
                if !(outer.is_finite() && outer > inner) {
                    return Err(invalid("outer radius must exceed inner radius"));
                }
            }
            Family::Unbalance {
                sizes,
                spread,
                separation,
            } => {
                check_scale("spread", *spread)?;
                check_scale("separation", *separation)?;
                if sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(invalid("cluster sizes must be positive"));
                }
                if counts_by_ratio(self.n, sizes).contains(&0) {
                    return Err(invalid("n too small for the smallest size ratio"));
                }
            }
            Family::LineClusters {
                length, gap, noise, ..
            } => {
                check_scale("noise", *noise)?;
                check_scale("gap", *gap)?;
                if !(length.is_finite() && *length > 0.0) {
                    return Err(invalid("length must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Splits `n` evenly; the first `n % c` components get one extra point.
fn even_counts(n: usize, c: usize) -> Vec<usize> {
    (0..c).map(|i| n / c + usize::from(i < n % c)).collect()
}

/// Largest-remainder apportionment of `n` by `ratios`.
fn counts_by_ratio(n: usize, ratios: &[f64]) -> Vec<usize> {
    let total: f64 = ratios.iter().sum();
    let exact: Vec<f64> = ratios.iter().map(|r| r / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..ratios.len()).collect();
    rest.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &i in rest.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Jittered slot `i` of `m` in `[0, 1)`.
fn stratified(i: usize, m: usize, rng: &mut ChaCha8Rng) -> f64 {
    (i as f64 + 0.25 + 0.5 * rng.random::<f64>()) / m as f64
}

struct Noise(Option<Normal<f64>>);

impl Noise {
    fn new(sd: f64) -> Self {
        Self((sd > 0.0).then(|| Normal::new(0.0, sd).expect("validated sd")))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.0.as_ref().map_or(0.0, |d| d.sample(rng))
    }
}

fn place_centers(c: usize, separation: f64, rng: &mut ChaCha8Rng) -> Result<Vec<[f64; 2]>> {
    if separation == 0.0 {
        return Ok(vec![[0.0, 0.0]; c]);
    }
    let side = 2.0 * separation * (c as f64).sqrt();
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(c);
    while centers.len() < c {
        let mut placed = false;
        for _ in 0..10_000 {
            let p = [rng.random::<f64>() * side, rng.random::<f64>() * side];
            let far = centers
                .iter()
                .all(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() >= separation);
            if far {
                centers.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(invalid(
                "could not place blob centers at the requested separation",
            ));
        }
    }
    Ok(centers)
}

fn gaussian_blobs(
    counts: &[usize],
    spread: f64,
    separation: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<([f64; 2], i64)>,
) -> Result<()> {
    let centers = place_centers(counts.len(), separation, rng)?;
    let noise = Noise::new(spread);
    for (label, (&m, c)) in counts.iter().zip(&centers).enumerate() {
        for _ in 0..m {
            let p = [c[0] + noise.sample(rng), c[1] + noise.sample(rng)];
            out.push((p, label as i64));
        }
    }
    Ok(())
}

/// Draws a labeled point set; labels are component indices `0..c`.
pub fn generate(spec: &GenSpec) -> Result<PointSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.family.components();
    let mut pts: Vec<([f64; 2], i64)> = Vec::with_capacity(spec.n);

    match &spec.family {
        Family::Blobs {
            spread, separation, ..
        } => gaussian_blobs(
            &even_counts(spec.n, c),
            *spread,
            *separation,
            &mut rng,
            &mut pts,
        )?,
        Family::Unbalance {
            sizes,
            spread,
            separation,
        } => gaussian_blobs(
            &counts_by_ratio(spec.n, sizes),
            *spread,
            *separation,
            &mut rng,
            &mut pts,
        )?,
        Family::Circles { radii, noise } => {
            let noise = Noise::new(*noise);
            for (label, (&r, m)) in radii.iter().zip(even_counts(spec.n, c)).enumerate() {
                let phase = rng.random::<f64>() * TAU;
                for i in 0..m {
                    let a = phase + TAU * stratified(i, m, &mut rng);
                    let rr = r + noise.sample(&mut rng);
                    pts.push(([rr * a.cos(), rr * a.sin()], label as i64));
                }
            }
        }
        Family::Spiral {
            arms,
            turns,
            inner,
            outer,
            noise,
        } => {
            let noise = Noise::new(*noise);
            let sweep = TAU * turns;
            let grow = outer - inner;
            // arc length from the start of an arm, up to a constant factor
            let arc = |s: f64| inner * s + grow * s * s / 2.0;
            let total = arc(1.0);
            for (label, m) in even_counts(spec.n, c).into_iter().enumerate() {
                let offset = TAU * label as f64 / *arms as f64;
                for i in 0..m {
                    // invert arc(s) = target for equal spacing along the arm
                    let target = stratified(i, m, &mut rng) * total;
                    let s = if grow > 0.0 {
                        (-inner + (inner * inner + 2.0 * grow * target).sqrt()) / grow
                    } else {
                        target / inner
                    };
                    let r = inner + grow * s;
                    let a = offset + sweep * s;
                    let p = [
                        r * a.cos() + noise.sample(&mut rng),
                        r * a.sin() + noise.sample(&mut rng),
                    ];
                    pts.push((p, label as i64));
                }
            }
        }
        Family::LineClusters {
            length, gap, noise, ..
        } => {
            let noise = Noise::new(*noise);
            for (label, m) in even_counts(spec.n, c).into_iter().enumerate() {
                for i in 0..m {
                    let x = length * stratified(i, m, &mut rng);
                    let y = gap * label as f64 + noise.sample(&mut rng);
                    pts.push(([x, y], label as i64));
                }
            }
        }
    }

    let coords = pts.iter().flat_map(|(p, _)| *p).collect();
    let labels = pts.iter().map(|(_, l)| *l).collect();
    PointSet::new(2, coords, Some(labels))
}
