//! Exact rejection sampling and birth-death-move Metropolis-Hastings for
//! finite-volume Gibbs measures, plus the two-type Widom–Rowlinson samplers.

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::energy::{self, boltzmann, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Move, Point, PointConfiguration, Window};

/// Proposals allowed before the rejection sampler gives up.
pub const MAX_REJECTION_PROPOSALS: u64 = 1_000_000;

/// Independent random stream `stream` of the generator seeded by `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f(0..n)` on the worker pool, keeping index order.
pub fn map_replicates<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub birth: f64,
    pub death: f64,
    pub translate: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        MoveMix {
            birth: 0.4,
            death: 0.4,
            translate: 0.2,
        }
    }
}

impl MoveMix {
    fn validate(&self) -> Result<()> {
        let p = [self.birth, self.death, self.translate];
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || ((p.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "move probabilities must be nonnegative and sum to 1, got {p:?}"
            )));
        }
        if (self.birth > 0.0) != (self.death > 0.0) {
            return Err(Error::InvalidParameter(
                "birth and death probabilities must be both positive or both zero".into(),
            ));
        }
        Ok(())
    }
}

/// Sweep schedule; one sweep is `max(1, ⌈z·|Λ|⌉)` proposals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub burn_in: usize,
    /// Sweeps run after burn-in.
    pub sweeps: usize,
    /// A state is retained every `thinning` sweeps.
    pub thinning: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            burn_in: 1000,
            sweeps: 1000,
            thinning: 10,
        }
    }
}

impl Schedule {
    pub fn new(burn_in: usize, sweeps: usize, thinning: usize) -> Self {
        Schedule {
            burn_in,
            sweeps,
            thinning,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.thinning == 0 {
            return Err(Error::InvalidParameter("sweeps and thinning must be at least 1".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.sweeps / self.thinning
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub z: f64,
    pub beta: f64,
    #[serde(default)]
    pub mix: MoveMix,
    #[serde(default)]
    pub schedule: Schedule,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(z: f64, beta: f64, seed: u64) -> Self {
        SamplerConfig {
            z,
            beta,
            mix: MoveMix::default(),
            schedule: Schedule::default(),
            seed,
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0) || !self.z.is_finite() {
            return Err(Error::InvalidParameter(format!("activity z must be positive, got {}", self.z)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature beta must be nonnegative, got {}",
                self.beta
            )));
        }
        self.mix.validate()?;
        self.schedule.validate()
    }
}

/// Proposals per sweep for intensity `z` on `window`.
pub fn sweep_length(z: f64, window: &Window) -> usize {
    ((z * window.area()).ceil() as usize).max(1)
}

/// Poisson process of intensity `z` on `window`, drawn from `rng`.
pub fn poisson_draw<R: Rng + ?Sized>(window: &Window, z: f64, cell: f64, rng: &mut R) -> PointConfiguration {
    let mean = z * window.area();
    let n = if mean > 0.0 {
        Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let mut config = PointConfiguration::empty(*window, cell);
    for _ in 0..n {
        // coordinate collisions have probability zero; skip them if they occur
        let _ = config.insert(window.sample_uniform(rng));
    }
    config
}

/// Poisson process of intensity `z ≥ 0` on `window`.
pub fn sample_poisson(window: &Window, z: f64, seed: u64) -> Result<PointConfiguration> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("intensity must be nonnegative, got {z}")));
    }
    Ok(poisson_draw(window, z, window.width().max(window.height()), &mut rng_for(seed, 0)))
}

fn cell_for(model: &EnergyModel) -> f64 {
    model.range()
}

/// One exact draw by rejection from the dominating Poisson process
/// `Poisson(z e^{−βA})`. Returns the draw and the number of proposals.
pub fn rejection_draw<R: Rng + ?Sized>(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    rng: &mut R,
) -> Result<(PointConfiguration, u64)> {
    rejection_draw_capped(model, window, z, beta, bc, MAX_REJECTION_PROPOSALS, rng)
}

/// [`rejection_draw`] giving up after `max_proposals` proposals.
pub fn rejection_draw_capped<R: Rng + ?Sized>(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    max_proposals: u64,
    rng: &mut R,
) -> Result<(PointConfiguration, u64)> {
    let a = model.stability().ok_or_else(|| {
        Error::UnsupportedModel(format!(
            "{} has no declared stability constant; exact rejection sampling needs one",
            model.family_name()
        ))
    })?;
    let intensity = z * (-beta * a).exp();
    for attempt in 1..=max_proposals {
        let proposal = poisson_draw(window, intensity, cell_for(model), rng);
        let h = energy::total_energy(model, &proposal, bc);
        let log_accept = -beta * (h - a * proposal.len() as f64);
        let accept = if h == f64::INFINITY {
            false
        } else {
            log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp()
        };
        if accept {
            return Ok((proposal, attempt));
        }
    }
    Err(Error::RejectionInefficient(format!(
        "no acceptance in {max_proposals} proposals (acceptance rate below {:.0e}); \
         use the MCMC sampler or a smaller window",
        1.0 / max_proposals as f64
    )))
}

/// Exact draw from `P_Λ^{z,β}(·|bc)`, seeded by `sc.seed`.
pub fn rejection_sample(
    model: &EnergyModel,
    window: &Window,
    sc: &SamplerConfig,
    bc: &BoundaryCondition,
) -> Result<PointConfiguration> {
    sc.validate()?;
    rejection_draw(model, window, sc.z, sc.beta, bc, &mut rng_for(sc.seed, 0)).map(|(c, _)| c)
}

/// `n` independent exact draws; draw `i` uses stream `i` of `sc.seed`.
pub fn rejection_samples(
    model: &EnergyModel,
    window: &Window,
    sc: &SamplerConfig,
    bc: &BoundaryCondition,
    n: usize,
) -> Result<Vec<PointConfiguration>> {
    sc.validate()?;
    map_replicates(n, |i| {
        rejection_draw(model, window, sc.z, sc.beta, bc, &mut rng_for(sc.seed, i as u64)).map(|(c, _)| c)
    })
    .into_iter()
    .collect()
}

/// Current state of a Metropolis-Hastings chain.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub config: PointConfiguration,
    /// Cached `H_Λ(γ|bc)`, updated incrementally.
    pub energy: f64,
    pub steps: u64,
    /// Proposed and accepted counts for birth, death and translate.
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
}

impl ChainState {
    pub fn acceptance_rates(&self) -> [f64; 3] {
        let mut r = [0.0; 3];
        for k in 0..3 {
            if self.proposed[k] > 0 {
                r[k] = self.accepted[k] as f64 / self.proposed[k] as f64;
            }
        }
        r
    }
}

/// Birth-death-move chain targeting `P_Λ^{z,β}(·|bc)`.
pub struct Chain<'a> {
    model: &'a EnergyModel,
    bc: &'a BoundaryCondition,
    z: f64,
    beta: f64,
    mix: MoveMix,
    state: ChainState,
    rng: ChaCha8Rng,
    sweep: usize,
}

impl<'a> Chain<'a> {
    /// Chain on `window` started from the empty configuration.
    pub fn new(
        model: &'a EnergyModel,
        window: &Window,
        sc: &SamplerConfig,
        bc: &'a BoundaryCondition,
        stream: u64,
    ) -> Result<Self> {
        Self::from_config(model, PointConfiguration::empty(*window, cell_for(model)), sc, bc, stream)
    }

    /// Chain started from `initial`, which must have finite energy.
    pub fn from_config(
        model: &'a EnergyModel,
        initial: PointConfiguration,
        sc: &SamplerConfig,
        bc: &'a BoundaryCondition,
        stream: u64,
    ) -> Result<Self> {
        sc.validate()?;
        let config = initial.reindexed(cell_for(model));
        let energy = energy::total_energy(model, &config, bc);
        if !energy.is_finite() {
            return Err(Error::InfiniteInitialEnergy);
        }
        let sweep = sweep_length(sc.z, config.window());
        Ok(Chain {
            model,
            bc,
            z: sc.z,
            beta: sc.beta,
            mix: sc.mix,
            state: ChainState {
                config,
                energy,
                steps: 0,
                proposed: [0; 3],
                accepted: [0; 3],
            },
            rng: rng_for(sc.seed, stream),
            sweep,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn config(&self) -> &PointConfiguration {
        &self.state.config
    }

    pub fn sweep_length(&self) -> usize {
        self.sweep
    }

    /// `|cached − recomputed|` energy.
    pub fn energy_drift(&self) -> f64 {
        let fresh = energy::total_energy(self.model, &self.state.config, self.bc);
        (fresh - self.state.energy).abs()
    }

    /// One proposal; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        self.state.steps += 1;
        let u: f64 = self.rng.random();
        if u < self.mix.birth {
            self.birth()
        } else if u < self.mix.birth + self.mix.death {
            self.death()
        } else {
            self.translate()
        }
    }

    pub fn run_sweeps(&mut self, sweeps: usize) {
        for _ in 0..sweeps * self.sweep {
            self.step();
        }
    }

    /// Runs burn-in then returns the thinned states.
    pub fn sample(&mut self, schedule: &Schedule) -> Vec<PointConfiguration> {
        self.run_sweeps(schedule.burn_in);
        let mut out = Vec::with_capacity(schedule.retained());
        for _ in 0..schedule.retained() {
            self.run_sweeps(schedule.thinning);
            out.push(self.state.config.clone());
        }
        out
    }

    fn accept(&mut self, log_ratio: f64) -> bool {
        log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp()
    }

    fn birth(&mut self) -> bool {
        self.state.proposed[0] += 1;
        let window = *self.state.config.window();
        let x = window.sample_uniform(&mut self.rng);
        let h = energy::local_energy(self.model, &x, &self.state.config, self.bc);
        let weight = boltzmann(self.beta, h);
        if weight == 0.0 {
            return false;
        }
        let n = self.state.config.len() as f64;
        let ratio = (self.mix.death / self.mix.birth) * self.z * window.area() * weight / (n + 1.0);
        if !self.accept(ratio.ln()) {
            return false;
        }
        if self.state.config.insert(x).is_err() {
            return false;
        }
        self.state.energy += h;
        self.state.accepted[0] += 1;
        true
    }

    fn death(&mut self) -> bool {
        self.state.proposed[1] += 1;
        let n = self.state.config.len();
        if n == 0 {
            return false;
        }
        let idx = self.rng.random_range(0..n);
        let h = energy::local_energy_of_member(self.model, idx, &self.state.config, self.bc);
        let area = self.state.config.window().area();
        let log_ratio =
            (self.mix.birth / self.mix.death * n as f64 / (self.z * area)).ln() + self.beta * finite_or_zero(h);
        if !self.accept(log_ratio) {
            return false;
        }
        let _ = self.state.config.remove(idx);
        self.state.energy -= h;
        self.state.accepted[1] += 1;
        true
    }

    fn translate(&mut self) -> bool {
        self.state.proposed[2] += 1;
        let n = self.state.config.len();
        if n == 0 {
            return false;
        }
        let idx = self.rng.random_range(0..n);
        let window = *self.state.config.window();
        let to = window.sample_uniform(&mut self.rng);
        let old_h = energy::local_energy_of_member(self.model, idx, &self.state.config, self.bc);
        let new_h = energy::local_energy_impl(self.model, &to, &self.state.config, self.bc, Some(idx));
        if new_h == f64::INFINITY || self.state.config.contains(&to) {
            return false;
        }
        let delta = new_h - old_h;
        if !self.accept(-self.beta * delta) {
            return false;
        }
        if self.state.config.translate(idx, to).is_err() {
            return false;
        }
        self.state.energy += delta;
        self.state.accepted[2] += 1;
        true
    }
}

fn finite_or_zero(h: f64) -> f64 {
    if h.is_finite() {
        h
    } else {
        0.0
    }
}

/// Metropolis-Hastings acceptance probability of `mv` from `config`,
/// computed from the local energies the chain uses.
pub fn acceptance_probability(
    model: &EnergyModel,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    z: f64,
    beta: f64,
    mix: &MoveMix,
    mv: &Move,
) -> f64 {
    let area = config.window().area();
    let n = config.len() as f64;
    let ratio = match mv {
        Move::Birth(x) => {
            let h = energy::local_energy(model, x, config, bc);
            (mix.death / mix.birth) * z * area * boltzmann(beta, h) / (n + 1.0)
        }
        Move::Death(i) => {
            let h = energy::local_energy_of_member(model, *i, config, bc);
            (mix.birth / mix.death) * n / (z * area) * (beta * h).exp()
        }
        Move::Translate(i, to) => {
            let old = energy::local_energy_of_member(model, *i, config, bc);
            let new = energy::local_energy_impl(model, to, config, bc, Some(*i));
            boltzmann(beta, new) / boltzmann(beta, old)
        }
    };
    ratio.min(1.0)
}

/// Thinned post-burn-in states of a chain started empty, seeded by
/// `sc.seed`.
pub fn mh_sample(
    model: &EnergyModel,
    window: &Window,
    sc: &SamplerConfig,
    bc: &BoundaryCondition,
) -> Result<Vec<PointConfiguration>> {
    let mut chain = Chain::new(model, window, sc, bc, 0)?;
    Ok(chain.sample(&sc.schedule))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrVariant {
    /// Metropolis-Hastings on the two-type configuration.
    Direct,
    /// Random-cluster process followed by fair component splitting.
    ViaRandomCluster,
}

/// Two-type configuration with cross-type distances above `R`.
#[derive(Clone, Debug)]
pub struct TwoType {
    pub first: PointConfiguration,
    pub second: PointConfiguration,
}

impl TwoType {
    /// Smallest distance between points of different types.
    pub fn min_cross_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for p in self.first.points() {
            for q in self.second.points() {
                best = best.min(p.dist(q));
            }
        }
        best
    }
}

/// Draws of the two-type Widom–Rowlinson model on `window` with activity `z`
/// per type: type-1 disks of radius `R/2` lie inside the window and no disk
/// of one type meets a disk of the other.
pub fn sample_two_type_wr(
    window: &Window,
    z: f64,
    radius: f64,
    seed: u64,
    variant: WrVariant,
    schedule: &Schedule,
) -> Result<Vec<TwoType>> {
    schedule.validate()?;
    if !(z > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidParameter("two-type sampler needs z > 0 and R > 0".into()));
    }
    match variant {
        WrVariant::Direct => Ok(direct_wr(window, z, radius, seed, schedule)),
        WrVariant::ViaRandomCluster => {
            let model = EnergyModel::random_cluster_process(radius, *window)?;
            let sc = SamplerConfig {
                z,
                beta: std::f64::consts::LN_2,
                mix: MoveMix::default(),
                schedule: *schedule,
                seed,
            };
            let bc = BoundaryCondition::Free;
            let states = mh_sample(&model, window, &sc, &bc)?;
            let mut rng = rng_for(seed, u64::MAX);
            Ok(states.iter().map(|c| split_components(c, radius, &mut rng)).collect())
        }
    }
}

/// Colors each cluster of radius-`R/2` disks: clusters inside the window
/// pick a type by a fair coin, the others become type 2.
pub fn split_components<R: Rng + ?Sized>(config: &PointConfiguration, radius: f64, rng: &mut R) -> TwoType {
    let pts = config.points();
    let window = *config.window();
    let mut uf = UnionFind::new(pts.len());
    config.for_each_pair_within(radius, |i, j, _| {
        uf.union(i, j);
    });
    let mut inside = vec![true; pts.len()];
    for (i, p) in pts.iter().enumerate() {
        if window.depth(p) < 0.5 * radius {
            inside[uf.find(i)] = false;
        }
    }
    let mut coin: Vec<Option<bool>> = vec![None; pts.len()];
    for i in 0..pts.len() {
        let root = uf.find(i);
        if coin[root].is_none() {
            coin[root] = Some(inside[root] && rng.random::<bool>());
        }
    }
    let cell = config.cell_side();
    let mut first = PointConfiguration::empty(window, cell);
    let mut second = PointConfiguration::empty(window, cell);
    for (i, p) in pts.iter().enumerate() {
        let target = if coin[uf.find(i)] == Some(true) { &mut first } else { &mut second };
        let _ = target.insert(*p);
    }
    TwoType { first, second }
}

fn direct_wr(window: &Window, z: f64, radius: f64, seed: u64, schedule: &Schedule) -> Vec<TwoType> {
    let mut rng = rng_for(seed, 0);
    let mut types = [PointConfiguration::empty(*window, radius), PointConfiguration::empty(*window, radius)];
    let area = window.area();
    // one sweep proposes as often as both types together
    let sweep = sweep_length(2.0 * z, window);
    let step = |types: &mut [PointConfiguration; 2], rng: &mut ChaCha8Rng| {
        let t = rng.random_range(0..2usize);
        if rng.random::<bool>() {
            let x = window.sample_uniform(rng);
            if t == 0 && window.depth(&x) < 0.5 * radius {
                return;
            }
            if any_within(&types[1 - t], &x, radius) {
                return;
            }
            let ratio = z * area / (types[t].len() as f64 + 1.0);
            if ratio >= 1.0 || rng.random::<f64>() < ratio {
                let _ = types[t].insert(x);
            }
        } else {
            let n = types[t].len();
            if n == 0 {
                return;
            }
            let idx = rng.random_range(0..n);
            let ratio = n as f64 / (z * area);
            if ratio >= 1.0 || rng.random::<f64>() < ratio {
                let _ = types[t].remove(idx);
            }
        }
    };
    for _ in 0..schedule.burn_in * sweep {
        step(&mut types, &mut rng);
    }
    let mut out = Vec::with_capacity(schedule.retained());
    for _ in 0..schedule.retained() {
        for _ in 0..schedule.thinning * sweep {
            step(&mut types, &mut rng);
        }
        out.push(TwoType {
            first: types[0].clone(),
            second: types[1].clone(),
        });
    }
    out
}

fn any_within(config: &PointConfiguration, x: &Point, r: f64) -> bool {
    let mut found = false;
    config.for_each_within(x, r, |_, _| found = true);
    found
}
