//! Connection functions and the kernel quantities derived from them.
//!
//! A [`ConnectionFunction`] binds a parameterized [`Kernel`] family to the
//! metric of a state space. All values lie in `[0, 1]` and are symmetric.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{mc_mean, McEstimate};
use crate::rng::random_state;
use crate::statespace::{unit_ball_volume, Point, ProbabilityMeasure, SpaceKind};

/// Nonincreasing radial profile `psi` with `psi(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-t^2)`
    Rayleigh,
    /// `exp(-t)`
    Exponential,
}

impl Profile {
    #[inline]
    fn eval(self, t: f64) -> f64 {
        match self {
            Profile::Rayleigh => (-t * t).exp(),
            Profile::Exponential => (-t).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaName {
    /// `exp(-|x-y|^2 / 2)`
    Gaussian,
    /// `|x-y|^(-beta)`
    InversePower,
}

/// Parameterized connection-function families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Kernel {
    Constant {
        p: f64,
    },
    HardDisk {
        r: f64,
    },
    SoftDisk {
        p: f64,
        r: f64,
    },
    Profile {
        profile: Profile,
        scale: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `min(a * kappa(x, y), cap)`
    KernelCapped {
        a: f64,
        kappa: KappaName,
        #[serde(default)]
        beta: Option<f64>,
        cap: f64,
    },
    /// Two-block kernel on the first coordinate: connect iff both points are
    /// in `[0, 1/s]` or both are in `(1/s, 1)`.
    PartitionCounterexample {
        s: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must lie in [0, 1]")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must be positive and finite")))
    }
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Constant { p } => unit_interval("p", p),
            Kernel::HardDisk { r } => positive("r", r),
            Kernel::SoftDisk { p, r } => {
                unit_interval("p", p)?;
                positive("r", r)
            }
            Kernel::Profile {
                scale, amplitude, ..
            } => {
                positive("scale", scale)?;
                unit_interval("amplitude", amplitude)
            }
            Kernel::KernelCapped { a, kappa, beta, cap } => {
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::config("a must be finite and >= 0"));
                }
                unit_interval("cap", cap)?;
                match (kappa, beta) {
                    (KappaName::InversePower, Some(b)) => positive("beta", b),
                    (KappaName::InversePower, None) => {
                        Err(Error::config("inverse-power kappa requires beta"))
                    }
                    (KappaName::Gaussian, None) => Ok(()),
                    (KappaName::Gaussian, Some(_)) => {
                        Err(Error::config("gaussian kappa takes no beta"))
                    }
                }
            }
            Kernel::PartitionCounterexample { s } => {
                if s > 1.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("partition parameter s must exceed 1"))
                }
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Kernel::Constant { .. } => "constant",
            Kernel::HardDisk { .. } => "hard-disk",
            Kernel::SoftDisk { .. } => "soft-disk",
            Kernel::Profile { .. } => "profile",
            Kernel::KernelCapped { .. } => "kernel-capped",
            Kernel::PartitionCounterexample { .. } => "partition-counterexample",
        }
    }

    /// The scalar knob that calibration adjusts. Connection probabilities
    /// are nondecreasing in it for every family that has one.
    pub fn knob(&self) -> Option<(&'static str, f64)> {
        match *self {
            Kernel::Constant { p } => Some(("p", p)),
            Kernel::HardDisk { r } => Some(("r", r)),
            Kernel::SoftDisk { r, .. } => Some(("r", r)),
            Kernel::Profile { scale, .. } => Some(("scale", scale)),
            Kernel::KernelCapped { a, .. } => Some(("a", a)),
            Kernel::PartitionCounterexample { .. } => None,
        }
    }

    pub fn with_knob(&self, v: f64) -> Result<Kernel> {
        let mut k = self.clone();
        match &mut k {
            Kernel::Constant { p } => *p = v,
            Kernel::HardDisk { r } | Kernel::SoftDisk { r, .. } => *r = v,
            Kernel::Profile { scale, .. } => *scale = v,
            Kernel::KernelCapped { a, .. } => *a = v,
            Kernel::PartitionCounterexample { .. } => {
                return Err(Error::config("partition family has no calibration knob"))
            }
        }
        Ok(k)
    }
}

/// Exact description of the law of `g(X)`, `X ~ mu`, as weighted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl MeanFieldLaw {
    pub fn constant(&self) -> Option<f64> {
        (self.atoms.len() == 1).then(|| self.atoms[0].1)
    }

    /// `E[f(g(X))]` as a finite sum.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(w, g)| w * f(g)).sum()
    }

    pub fn inf(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A symmetric kernel `phi: X x X -> [0, 1]` bound to a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionFunction {
    kernel: Kernel,
    torus: bool,
    dim: usize,
    mean_field: Option<MeanFieldLaw>,
}

/// Estimated `epsilon`-homogeneity of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub inf_g: f64,
    pub sup_g: f64,
    pub epsilon_hat: f64,
    pub sup_phi_hat: f64,
    pub probe_count: usize,
    pub inner_samples: usize,
    /// True when inf/sup come from an exact mean-field law rather than probes.
    pub certified: bool,
}

/// Algorithm for the connectedness probability `h_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectMethod {
    /// Sum over all `2^(k(k-1)/2)` graphs, `k <= 5`.
    Enumerate,
    /// Complement recursion over vertex subsets, `k <= 14`.
    SubsetRecursion,
    /// Fraction of connected samples among `samples` random edge sets.
    MonteCarlo { samples: usize, seed: u64 },
}

impl ConnectMethod {
    /// Exact method preferred for `k` points.
    pub fn default_for(k: usize) -> Self {
        if k <= 5 {
            ConnectMethod::Enumerate
        } else {
            ConnectMethod::SubsetRecursion
        }
    }
}

impl ConnectionFunction {
    pub fn new(kernel: Kernel, measure: &ProbabilityMeasure) -> Result<Self> {
        kernel.validate()?;
        if let Kernel::PartitionCounterexample { .. } = kernel {
            if !measure.has_unit_support() {
                return Err(Error::config(
                    "partition family requires a unit-cube or torus state space",
                ));
            }
        }
        let mean_field = exact_mean_field_law(&kernel, measure);
        Ok(ConnectionFunction {
            kernel,
            torus: measure.kind() == SpaceKind::Torus,
            dim: measure.dimension(),
            mean_field,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Whether distances wrap around the unit torus.
    pub fn is_torus(&self) -> bool {
        self.torus
    }

    #[inline]
    fn dist_sq(&self, x: &Point, y: &Point) -> f64 {
        let (a, b) = (x.coords(), y.coords());
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut d = (a[i] - b[i]).abs();
            if self.torus {
                d %= 1.0;
                if d > 0.5 {
                    d = 1.0 - d;
                }
            }
            acc += d * d;
        }
        acc
    }

    /// `phi(x, y)`.
    #[inline]
    pub fn evaluate(&self, x: &Point, y: &Point) -> f64 {
        match self.kernel {
            Kernel::Constant { p } => p,
            Kernel::HardDisk { r } => (self.dist_sq(x, y) <= r * r) as u8 as f64,
            Kernel::SoftDisk { p, r } => {
                if self.dist_sq(x, y) <= r * r {
                    p
                } else {
                    0.0
                }
            }
            Kernel::Profile {
                profile,
                scale,
                amplitude,
            } => amplitude * profile.eval(self.dist_sq(x, y).sqrt() / scale),
            Kernel::KernelCapped { a, kappa, beta, cap } => {
                let d2 = self.dist_sq(x, y);
                let k = match kappa {
                    KappaName::Gaussian => (-0.5 * d2).exp(),
                    KappaName::InversePower => d2.powf(-0.5 * beta.unwrap_or(1.0)),
                };
                let v = a * k;
                if v.is_nan() {
                    cap
                } else {
                    v.min(cap)
                }
            }
            Kernel::PartitionCounterexample { s } => {
                let t = 1.0 / s;
                let (u, v) = (x.coords()[0], y.coords()[0]);
                (u.max(v) <= t || u.min(v) > t) as u8 as f64
            }
        }
    }

    /// `sup phi`.
    pub fn sup_phi(&self) -> f64 {
        match self.kernel {
            Kernel::Constant { p } => p,
            Kernel::HardDisk { .. } => 1.0,
            Kernel::SoftDisk { p, .. } => p,
            Kernel::Profile { amplitude, .. } => amplitude,
            Kernel::KernelCapped { a, kappa, cap, .. } => match kappa {
                KappaName::Gaussian => a.min(cap),
                KappaName::InversePower => {
                    if a > 0.0 {
                        cap
                    } else {
                        0.0
                    }
                }
            },
            Kernel::PartitionCounterexample { .. } => 1.0,
        }
    }

    /// Distance beyond which `phi` vanishes, when finite.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kernel {
            Kernel::HardDisk { r } | Kernel::SoftDisk { r, .. } => Some(r),
            Kernel::Constant { p: 0.0 } => Some(0.0),
            _ => None,
        }
    }

    /// Threshold of the partition family, if this is one.
    pub fn partition_threshold(&self) -> Option<f64> {
        match self.kernel {
            Kernel::PartitionCounterexample { s } => Some(1.0 / s),
            _ => None,
        }
    }

    /// Exact law of `g(X)` when the family/measure pair admits one.
    pub fn mean_field_law(&self) -> Option<&MeanFieldLaw> {
        self.mean_field.as_ref()
    }

    /// Closed-form `g(x)`, if available.
    pub fn exact_mean_field(&self, x: &Point) -> Option<f64> {
        let law = self.mean_field.as_ref()?;
        if let Some(g) = law.constant() {
            return Some(g);
        }
        let t = self.partition_threshold()?;
        Some(if x.coords()[0] <= t { t } else { 1.0 - t })
    }

    /// `g(x) = int phi(x, y) mu(dy)`, exact when a closed form exists.
    pub fn mean_field(
        &self,
        measure: &ProbabilityMeasure,
        x: &Point,
        inner_samples: usize,
        seed: u64,
    ) -> McEstimate {
        if let Some(g) = self.exact_mean_field(x) {
            return McEstimate::exact(g);
        }
        mc_mean(inner_samples.max(1), seed, |rng| {
            self.evaluate(x, &measure.sample_point(rng))
        })
    }

    /// Probability of at least one edge between the two groups:
    /// `1 - prod_i prod_j (1 - phi(x_i, y_j))`.
    pub fn group_connect_prob(&self, xs: &[Point], ys: &[Point]) -> Result<f64> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::domain("group connection needs two nonempty groups"));
        }
        Ok(1.0 - self.cross_product(xs, ys))
    }

    #[inline]
    fn cross_product(&self, xs: &[Point], ys: &[Point]) -> f64 {
        let mut q = 1.0;
        for x in xs {
            for y in ys {
                q *= 1.0 - self.evaluate(x, y);
            }
        }
        q
    }

    /// Probability that no edge joins points of different groups.
    pub fn no_cross_edge_prob(&self, groups: &[Vec<Point>]) -> Result<f64> {
        if groups.len() < 2 {
            return Err(Error::domain("need at least two groups"));
        }
        let mut q = 1.0;
        for (a, ga) in groups.iter().enumerate() {
            for gb in &groups[a + 1..] {
                q *= self.cross_product(ga, gb);
            }
        }
        Ok(q)
    }

    /// `h_phi(x_1, ..., x_k)`: probability that the random graph on `xs` is connected.
    pub fn connectedness_prob(&self, xs: &[Point], method: ConnectMethod) -> Result<f64> {
        let k = xs.len();
        if k == 0 {
            return Err(Error::domain("connectedness of an empty vertex set"));
        }
        if k == 1 {
            return Ok(1.0);
        }
        let mut phi = vec![0.0; k * k];
        for i in 0..k {
            for j in i + 1..k {
                let v = self.evaluate(&xs[i], &xs[j]);
                phi[i * k + j] = v;
                phi[j * k + i] = v;
            }
        }
        connectedness_from_matrix(k, &phi, method)
    }

    /// Estimates inf/sup of `g` over the space and the implied homogeneity.
    pub fn homogeneity(
        &self,
        measure: &ProbabilityMeasure,
        probe_count: usize,
        inner_samples: usize,
        seed: u64,
    ) -> Result<HomogeneityReport> {
        if probe_count < 2 {
            return Err(Error::domain("homogeneity needs at least two probes"));
        }
        let (inf_g, sup_g, certified) = match &self.mean_field {
            Some(law) => (law.inf(), law.sup(), true),
            None => {
                let mut probes = extreme_probes(measure);
                let mut rng = random_state(seed);
                probes.extend((0..probe_count).map(|_| measure.sample_point(&mut rng)));
                let inner_seed = crate::rng::derive_seed(seed, "homogeneity-inner");
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in &probes {
                    // Same inner seed for every probe: common random numbers.
                    let g = self.mean_field(measure, p, inner_samples, inner_seed).value;
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
                (lo, hi, false)
            }
        };
        let epsilon_hat = if sup_g > 0.0 { inf_g / sup_g } else { 1.0 };
        Ok(HomogeneityReport {
            inf_g,
            sup_g,
            epsilon_hat,
            sup_phi_hat: self.sup_phi(),
            probe_count,
            inner_samples,
            certified,
        })
    }
}

fn exact_mean_field_law(kernel: &Kernel, measure: &ProbabilityMeasure) -> Option<MeanFieldLaw> {
    let d = measure.dimension();
    let constant = |g: f64| {
        Some(MeanFieldLaw {
            atoms: vec![(1.0, g)],
        })
    };
    match *kernel {
        Kernel::Constant { p } => constant(p),
        Kernel::HardDisk { r } if measure.is_uniform_torus() && r < 0.5 => {
            constant(unit_ball_volume(d) * r.powi(d as i32))
        }
        Kernel::SoftDisk { p, r } if measure.is_uniform_torus() && r < 0.5 => {
            constant(p * unit_ball_volume(d) * r.powi(d as i32))
        }
        Kernel::PartitionCounterexample { s } if measure.is_uniform_box() => {
            let t = 1.0 / s;
            Some(MeanFieldLaw {
                atoms: vec![(t, t), (1.0 - t, 1.0 - t)],
            })
        }
        _ => None,
    }
}

fn extreme_probes(measure: &ProbabilityMeasure) -> Vec<Point> {
    let d = measure.dimension();
    match measure.kind() {
        SpaceKind::UnitCube | SpaceKind::Torus => {
            let corner = Point::from_slice(&vec![0.0; d]);
            let center = Point::from_slice(&vec![0.5; d]);
            vec![corner, center]
        }
        SpaceKind::Euclidean => vec![Point::from_slice(&vec![0.0; d])],
    }
}

/// `h` of the random graph on `k` vertices whose edge `{i, j}` is present
/// with probability `phi[i * k + j]` (row-major, symmetric, diagonal ignored).
pub fn connectedness_from_matrix(k: usize, phi: &[f64], method: ConnectMethod) -> Result<f64> {
    if phi.len() != k * k {
        return Err(Error::domain(format!("expected a {k}x{k} matrix")));
    }
    if k <= 1 {
        return Ok(1.0);
    }
    match method {
        ConnectMethod::Enumerate => {
            if k > 5 {
                return Err(Error::capability(format!(
                    "enumeration supports k <= 5, got {k}"
                )));
            }
            Ok(connected_prob_enumerate(k, phi))
        }
        ConnectMethod::SubsetRecursion => {
            if k > 14 {
                return Err(Error::capability(format!(
                    "subset recursion supports k <= 14, got {k}"
                )));
            }
            Ok(connected_prob_recursion(k, phi))
        }
        ConnectMethod::MonteCarlo { samples, seed } => {
            if k > 64 {
                return Err(Error::capability("monte carlo supports k <= 64"));
            }
            if samples == 0 {
                return Err(Error::domain("monte carlo needs at least one sample"));
            }
            let mut rng = random_state(seed);
            let hits = (0..samples)
                .filter(|_| {
                    let mut adj = [0u64; 64];
                    for i in 0..k {
                        for j in i + 1..k {
                            if rng.random::<f64>() < phi[i * k + j] {
                                adj[i] |= 1 << j;
                                adj[j] |= 1 << i;
                            }
                        }
                    }
                    mask_connected(&adj[..k], full_mask(k))
                })
                .count();
            Ok(hits as f64 / samples as f64)
        }
    }
}


#[inline]
fn full_mask(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Whether the vertices in `mask` induce a connected subgraph of `adj`.
#[inline]
fn mask_connected(adj: &[u64], mask: u64) -> bool {
    if mask == 0 {
        return true;
    }
    let start = mask & mask.wrapping_neg();
    let mut seen = start;
    let mut frontier = start;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & mask & !seen;
        seen |= new;
        frontier |= new;
    }
    seen == mask
}

fn connected_prob_enumerate(k: usize, phi: &[f64]) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let mut total = 0.0;
    for edges in 0u32..(1u32 << m) {
        let mut adj = [0u64; 5];
        let mut w = 1.0;
        for (e, &(i, j)) in pairs.iter().enumerate() {
            let p = phi[i * k + j];
            if edges >> e & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
                w *= p;
            } else {
                w *= 1.0 - p;
            }
        }
        if w != 0.0 && mask_connected(&adj[..k], full_mask(k)) {
            total += w;
        }
    }
    total
}

/// `P_conn(S) = 1 - sum_{T < S, v0 in T} P_conn(T) * prod_{u in T, w in S\T} (1 - phi(u, w))`
/// over subsets containing vertex 0.
fn connected_prob_recursion(k: usize, phi: &[f64]) -> f64 {
    let n = 1usize << k;
    // stay[w][mask] = prod_{u in mask} (1 - phi(u, w))
    let mut stay = vec![1.0f64; k * n];
    for w in 0..k {
        let row = &mut stay[w * n..(w + 1) * n];
        for mask in 1..n {
            let u = mask.trailing_zeros() as usize;
            row[mask] = row[mask & (mask - 1)] * (1.0 - phi[u * k + w]);
        }
    }
    let mut conn = vec![0.0f64; n];
    conn[1] = 1.0;
    let mut mask = 3usize;
    while mask < n {
        if mask & 1 == 1 {
            let rest = mask & !1;
            let mut acc = 0.0;
            // proper subsets T of mask with 0 in T: T = 1 | sub, sub a proper subset of rest
            let mut sub = (rest.wrapping_sub(1)) & rest;
            loop {
                let t = sub | 1;
                let outside = mask & !t;
                let mut cut = 1.0;
                let mut o = outside;
                while o != 0 {
                    let w = o.trailing_zeros() as usize;
                    o &= o - 1;
                    cut *= stay[w * n + t];
                }
                acc += conn[t] * cut;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            conn[mask] = 1.0 - acc;
        }
        mask += 1;
    }
    conn[n - 1]
}
