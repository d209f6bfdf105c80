//! Fusion-outcome sampling and the three boosted fusion schemes.
//!
//! The physical model loses each photon independently with `p_eras`; when
//! both photons are detected the fusion fails with `p_fail`. The closed-form
//! success rates in [`analytic_success`] are additive approximations of this
//! model that become exact at `p_eras = 0`.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstate::{FusionOutcome, GraphState, VertexId};
use crate::seed;

/// Photons per prepared branch segment: a 4-qubit linear graph plus the
/// qubit consumed by the Z cut that separates it from the emitted chain.
pub const PHOTONS_PER_SEGMENT: u32 = 5;

/// Default number of preparation rounds before giving up.
pub const DEFAULT_PREP_RETRY_CAP: u32 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("{name} = {value} is not a probability")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("invalid scheme parameters: {0}")]
    InvalidScheme(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p_fail: f64,
    pub p_eras: f64,
    pub rng_seed: u64,
}

impl NoiseParams {
    pub fn new(p_fail: f64, p_eras: f64, rng_seed: u64) -> Result<Self, FusionError> {
        let n = Self { p_fail, p_eras, rng_seed };
        n.validate()?;
        Ok(n)
    }

    pub fn noiseless(rng_seed: u64) -> Self {
        Self { p_fail: 0.0, p_eras: 0.0, rng_seed }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        for (name, value) in [("p_fail", self.p_fail), ("p_eras", self.p_eras)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::InvalidProbability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeConfig {
    /// `m` parallel fusions between two `m`-leaf logical qubits.
    Redundant { m: u32 },
    /// Repeat-until-success: up to `m` sequential attempts.
    Rus { m: u32 },
    /// Tree-encoded fusion with `b` branches, prepared from `b_prep` attempts.
    Tree { b: u32, b_prep: u32 },
}

impl SchemeConfig {
    pub const DEFAULT_REDUNDANT: Self = Self::Redundant { m: 5 };
    pub const DEFAULT_RUS: Self = Self::Rus { m: 6 };
    pub const DEFAULT_TREE: Self = Self::Tree { b: 4, b_prep: 6 };

    pub fn validate(&self) -> Result<(), FusionError> {
        match *self {
            Self::Redundant { m } | Self::Rus { m } if m < 1 => Err(FusionError::InvalidScheme("m must be at least 1")),
            Self::Tree { b, .. } if b < 1 => Err(FusionError::InvalidScheme("b must be at least 1")),
            Self::Tree { b, b_prep } if b_prep < b => Err(FusionError::InvalidScheme("b_prep must be at least b")),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Redundant { .. } => "redundant",
            Self::Rus { .. } => "rus",
            Self::Tree { .. } => "tree",
        }
    }

    /// `m` for the redundant and RUS schemes, `b` for the tree scheme.
    pub fn parameter(&self) -> u32 {
        match *self {
            Self::Redundant { m } | Self::Rus { m } => m,
            Self::Tree { b, .. } => b,
        }
    }

    /// Leaf qubits a caterpillar must carry per fusion endpoint.
    pub fn encoding_overhead(&self) -> usize {
        match *self {
            Self::Redundant { m } => m as usize,
            Self::Rus { .. } => 1,
            Self::Tree { b, .. } => b as usize,
        }
    }

    fn code(&self) -> [u64; 3] {
        match *self {
            Self::Redundant { m } => [0, m.into(), 0],
            Self::Rus { m } => [1, m.into(), 0],
            Self::Tree { b, b_prep } => [2, b.into(), b_prep.into()],
        }
    }
}

pub fn sample_physical_fusion<R: Rng + ?Sized>(noise: &NoiseParams, rng: &mut R) -> FusionOutcome {
    let lost_a = rng.gen::<f64>() < noise.p_eras;
    let lost_b = rng.gen::<f64>() < noise.p_eras;
    match (lost_a, lost_b) {
        (true, true) => FusionOutcome::ErasureBoth,
        (true, false) => FusionOutcome::ErasureA,
        (false, true) => FusionOutcome::ErasureB,
        (false, false) if rng.gen::<f64>() < noise.p_fail => FusionOutcome::Failure,
        (false, false) => FusionOutcome::Success,
    }
}

/// Closed-form logical success probability, clamped to `[0, 1]`.
pub fn analytic_success(scheme: &SchemeConfig, noise: &NoiseParams) -> f64 {
    let (pf, pe) = (noise.p_fail, noise.p_eras);
    let s = match *scheme {
        SchemeConfig::Redundant { m } => {
            let m = m as i32;
            (1.0 - libm::pow(pf, m.into())) * libm::pow(1.0 - pe, (2 * m).into())
        }
        SchemeConfig::Rus { m } => {
            let erased: f64 = (0..m).map(|i| libm::pow(pf, i.into()) * 2.0 * pe).sum();
            1.0 - erased - libm::pow(pf, m.into())
        }
        SchemeConfig::Tree { b, .. } => {
            let bad_branch = 1.0 - (1.0 - pe) * (1.0 - pe) + pf;
            1.0 - libm::pow(bad_branch, b.into())
        }
    };
    s.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalOutcome {
    Success,
    /// Heralded failure: the resulting graph is known.
    Failure,
    /// Photon loss left the logical qubits in an unknown state.
    Erasure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalFusionResult {
    pub outcome: LogicalOutcome,
    pub physical_fusions: u32,
    pub photons_consumed: u32,
    pub timesteps: u32,
    /// Tree scheme only: the result came from the backup round.
    pub used_backup: bool,
    pub outcome_trace: Vec<FusionOutcome>,
}

impl LogicalFusionResult {
    pub fn success(&self) -> bool {
        self.outcome == LogicalOutcome::Success
    }
}

pub fn simulate_logical_fusion<R: Rng + ?Sized>(
    scheme: &SchemeConfig,
    noise: &NoiseParams,
    rng: &mut R,
) -> LogicalFusionResult {
    match *scheme {
        SchemeConfig::Redundant { m } => redundant(m, noise, rng),
        SchemeConfig::Rus { m } => rus(m, noise, rng),
        SchemeConfig::Tree { b, .. } => TreeFusion::new(b as usize).run(noise, rng),
    }
}

fn redundant<R: Rng + ?Sized>(m: u32, noise: &NoiseParams, rng: &mut R) -> LogicalFusionResult {
    let trace: Vec<FusionOutcome> = (0..m).map(|_| sample_physical_fusion(noise, rng)).collect();
    let outcome = if trace.iter().any(|o| o.is_erasure()) {
        LogicalOutcome::Erasure
    } else if trace.contains(&FusionOutcome::Success) {
        LogicalOutcome::Success
    } else {
        LogicalOutcome::Failure
    };
    LogicalFusionResult {
        outcome,
        physical_fusions: m,
        photons_consumed: 2 * m,
        timesteps: 1,
        used_backup: false,
        outcome_trace: trace,
    }
}

fn rus<R: Rng + ?Sized>(m: u32, noise: &NoiseParams, rng: &mut R) -> LogicalFusionResult {
    let mut trace = Vec::new();
    let mut outcome = LogicalOutcome::Failure;
    for _ in 0..m {
        let o = sample_physical_fusion(noise, rng);
        trace.push(o);
        match o {
            FusionOutcome::Success => {
                outcome = LogicalOutcome::Success;
                break;
            }
            FusionOutcome::Failure => {}
            _ => {
                outcome = LogicalOutcome::Erasure;
                break;
            }
        }
    }
    let attempts = trace.len() as u32;
    LogicalFusionResult {
        outcome,
        physical_fusions: attempts,
        photons_consumed: 2 * attempts,
        timesteps: attempts,
        used_backup: false,
        outcome_trace: trace,
    }
}

/// Branch `q_a - q_b - q_c` hanging off a logical root.
#[derive(Debug, Clone, Copy)]
struct Branch {
    a: VertexId,
    b: VertexId,
    c: VertexId,
}

/// Two tree-encoded logical qubits `A` and `B` about to be fused, kept as an
/// explicit graph so that every recovery rule is a real rewrite.
struct TreeFusion {
    g: GraphState,
    roots: [VertexId; 2],
    branches: Vec<[Branch; 2]>,
}

impl TreeFusion {
    fn new(b: usize) -> Self {
        let mut g = GraphState::new(0);
        let roots = [g.add_vertex(), g.add_vertex()];
        let mut branches = Vec::with_capacity(b);
        for _ in 0..b {
            let pair = roots.map(|root| {
                let (a, bq, c) = (g.add_vertex(), g.add_vertex(), g.add_vertex());
                for (u, v) in [(root, a), (a, bq), (bq, c)] {
                    g.add_edge(u, v).expect("fresh vertices");
                }
                Branch { a, b: bq, c }
            });
            branches.push(pair);
        }
        Self { g, roots, branches }
    }

    fn z(&mut self, v: VertexId) {
        self.g.measure_z_in_place(v).expect("tree rewrite on active qubit");
    }

    /// Drops what is left of a branch side after its leaf was used up.
    fn discard_stem(&mut self, br: Branch) {
        for v in [br.b, br.a] {
            if self.g.is_active(v) {
                self.z(v);
            }
        }
    }

    fn run<R: Rng + ?Sized>(mut self, noise: &NoiseParams, rng: &mut R) -> LogicalFusionResult {
        let b = self.branches.len() as u32;
        let mut trace = Vec::with_capacity(self.branches.len());
        let mut successes = Vec::new();
        let mut backups = Vec::new();

        for i in 0..self.branches.len() {
            let [ba, bb] = self.branches[i];
            let o = sample_physical_fusion(noise, rng);
            trace.push(o);
            self.g.fuse_type2_in_place(ba.c, bb.c, o).expect("leaf fusion");
            match o {
                FusionOutcome::Success => successes.push(i),
                FusionOutcome::Failure => {
                    // q_c already measured out; Z on q_b leaves q_a as a backup leaf.
                    self.z(ba.b);
                    self.z(bb.b);
                    backups.push(i);
                }
                FusionOutcome::ErasureA | FusionOutcome::ErasureB | FusionOutcome::ErasureBoth => {
                    let lost = [
                        matches!(o, FusionOutcome::ErasureA | FusionOutcome::ErasureBoth),
                        matches!(o, FusionOutcome::ErasureB | FusionOutcome::ErasureBoth),
                    ];
                    for (side, br) in [ba, bb].into_iter().enumerate() {
                        if lost[side] {
                            self.g.indirect_z_in_place(br.c, br.b).expect("indirect Z on lost leaf");
                        } else {
                            self.discard_stem(br);
                        }
                    }
                }
            }
        }

        let mut result = LogicalFusionResult {
            outcome: LogicalOutcome::Failure,
            physical_fusions: b,
            photons_consumed: 2 * b,
            timesteps: 1,
            used_backup: false,
            outcome_trace: trace,
        };

        if let Some((&keep, rest)) = successes.split_first() {
            for &i in rest.iter().chain(&backups) {
                for br in self.branches[i] {
                    if self.g.is_active(br.a) {
                        self.z(br.a);
                    }
                    if self.g.is_active(br.b) {
                        self.z(br.b);
                    }
                }
            }
            let [ba, bb] = self.branches[keep];
            self.g.measure_x_pair_in_place(ba.a, ba.b).expect("X pair on side A");
            self.g.measure_x_pair_in_place(bb.a, bb.b).expect("X pair on side B");
            result.outcome = LogicalOutcome::Success;
        } else if !backups.is_empty() {
            result.timesteps = 2;
            result.used_backup = true;
            result.outcome = self.backup_round(&backups, noise, rng, &mut result.outcome_trace);
            let n = backups.len() as u32;
            result.physical_fusions += n;
            result.photons_consumed += 2 * n;
        }

        debug_assert_eq!(
            result.success(),
            self.g.has_edge(self.roots[0], self.roots[1]),
            "logical success must leave the roots bonded"
        );
        result
    }

    /// Bare fusions between the banked `q_a` leaves, all in one timestep.
    /// The lowest-index success is kept; a lost backup photon sits directly
    /// on a root and corrupts the logical qubit.
    fn backup_round<R: Rng + ?Sized>(
        &mut self,
        backups: &[usize],
        noise: &NoiseParams,
        rng: &mut R,
        trace: &mut Vec<FusionOutcome>,
    ) -> LogicalOutcome {
        let outcomes: Vec<FusionOutcome> = backups.iter().map(|_| sample_physical_fusion(noise, rng)).collect();
        trace.extend_from_slice(&outcomes);
        if outcomes.iter().any(|o| o.is_erasure()) {
            return LogicalOutcome::Erasure;
        }
        let keep = outcomes.iter().position(|&o| o == FusionOutcome::Success);
        for (k, &i) in backups.iter().enumerate() {
            let [ba, bb] = self.branches[i];
            let o = if Some(k) == keep { FusionOutcome::Success } else { FusionOutcome::Failure };
            self.g.fuse_type2_in_place(ba.a, bb.a, o).expect("backup fusion");
        }
        if keep.is_some() {
            LogicalOutcome::Success
        } else {
            LogicalOutcome::Failure
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePreparation {
    /// Branches attached in the last round performed.
    pub branches_ready: u32,
    pub timesteps: u32,
    pub photons: u32,
    pub physical_fusions: u32,
    /// The retry cap was hit before `b` branches were ready.
    pub overflow: bool,
}

/// Attaches branch segments to a logical root, `b_prep` attempts per
/// timestep, retrying whole rounds until at least `b` succeed.
pub fn prepare_tree_logical<R: Rng + ?Sized>(
    b: u32,
    b_prep: u32,
    noise: &NoiseParams,
    rng: &mut R,
) -> TreePreparation {
    prepare_tree_logical_capped(b, b_prep, noise, rng, DEFAULT_PREP_RETRY_CAP)
}

pub fn prepare_tree_logical_capped<R: Rng + ?Sized>(
    b: u32,
    b_prep: u32,
    noise: &NoiseParams,
    rng: &mut R,
    retry_cap: u32,
) -> TreePreparation {
    let mut prep = TreePreparation { branches_ready: 0, timesteps: 0, photons: 0, physical_fusions: 0, overflow: true };
    for _ in 0..retry_cap.max(1) {
        prep.timesteps += 1;
        prep.photons += PHOTONS_PER_SEGMENT * b_prep;
        prep.physical_fusions += b_prep;
        // Failed attachments are measured out, erased ones are cut off by an
        // indirect Z measurement; neither leaves anything on the root.
        prep.branches_ready =
            (0..b_prep).filter(|_| sample_physical_fusion(noise, rng) == FusionOutcome::Success).count() as u32;
        if prep.branches_ready >= b {
            prep.overflow = false;
            break;
        }
    }
    prep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub scheme: SchemeConfig,
    pub p_fail: f64,
    pub p_eras: f64,
    pub trials: u32,
    pub success_rate: f64,
    /// Success without the tree backup round; equals `success_rate` for the
    /// other schemes.
    pub first_round_rate: f64,
    pub failure_rate: f64,
    pub erasure_rate: f64,
    pub mean_timesteps: f64,
    pub mean_photons: f64,
}

/// Seed of one sweep cell. Derived from the cell's values, not its position,
/// so a cell gets the same stream in any grid.
pub fn cell_seed(root: u64, scheme: &SchemeConfig, p_fail: f64, p_eras: f64) -> u64 {
    let [k, p, q] = scheme.code();
    seed::derive_seed(root, "fusion-sweep", &[k, p, q, p_fail.to_bits(), p_eras.to_bits()])
}

pub fn sweep_cell(scheme: &SchemeConfig, p_fail: f64, p_eras: f64, trials: u32, root_seed: u64) -> SweepCell {
    let trials = trials.max(1);
    let seed = cell_seed(root_seed, scheme, p_fail, p_eras);
    let noise = NoiseParams { p_fail, p_eras, rng_seed: seed };
    let mut rng = <seed::SimRng as rand::SeedableRng>::seed_from_u64(seed);
    let (mut ok, mut first, mut fail, mut eras, mut steps, mut photons) = (0u32, 0u32, 0u32, 0u32, 0u64, 0u64);
    for _ in 0..trials {
        let r = simulate_logical_fusion(scheme, &noise, &mut rng);
        match r.outcome {
            LogicalOutcome::Success => {
                ok += 1;
                if !r.used_backup {
                    first += 1;
                }
            }
            LogicalOutcome::Failure => fail += 1,
            LogicalOutcome::Erasure => eras += 1,
        }
        steps += u64::from(r.timesteps);
        photons += u64::from(r.photons_consumed);
    }
    let t = f64::from(trials);
    SweepCell {
        scheme: *scheme,
        p_fail,
        p_eras,
        trials,
        success_rate: f64::from(ok) / t,
        first_round_rate: f64::from(first) / t,
        failure_rate: f64::from(fail) / t,
        erasure_rate: f64::from(eras) / t,
        mean_timesteps: steps as f64 / t,
        mean_photons: photons as f64 / t,
    }
}

/// Empirical success table over `schemes × p_fail_grid × p_eras_grid`, in
/// that nesting order.
pub fn sweep_success_rates(
    schemes: &[SchemeConfig],
    p_fail_grid: &[f64],
    p_eras_grid: &[f64],
    trials: u32,
    seed: u64,
) -> Vec<SweepCell> {
    let mut out = Vec::with_capacity(schemes.len() * p_fail_grid.len() * p_eras_grid.len());
    for scheme in schemes {
        for &pf in p_fail_grid {
            for &pe in p_eras_grid {
                out.push(sweep_cell(scheme, pf, pe, trials, seed));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    fn noise(pf: f64, pe: f64) -> NoiseParams {
        NoiseParams::new(pf, pe, 0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(NoiseParams::new(1.2, 0.0, 0).is_err());
        assert!(NoiseParams::new(0.0, -0.1, 0).is_err());
        assert!(SchemeConfig::Redundant { m: 0 }.validate().is_err());
        assert!(SchemeConfig::Tree { b: 4, b_prep: 3 }.validate().is_err());
        assert!(SchemeConfig::DEFAULT_TREE.validate().is_ok());
    }

    #[test]
    fn analytic_corner_values() {
        let s = analytic_success(&SchemeConfig::Redundant { m: 1 }, &noise(0.25, 0.0));
        assert_eq!(s, 0.75);
        for m in [1, 3, 6] {
            let s = analytic_success(&SchemeConfig::Rus { m }, &noise(0.0, 0.07));
            assert!((s - (1.0 - 2.0 * 0.07)).abs() < 1e-15);
        }
        let s = analytic_success(&SchemeConfig::DEFAULT_TREE, &noise(0.25, 0.0));
        assert_eq!(s, 0.99609375);
        // clamped where the additive approximation overshoots
        assert_eq!(analytic_success(&SchemeConfig::Rus { m: 6 }, &noise(0.9, 0.5)), 0.0);
        assert_eq!(analytic_success(&SchemeConfig::DEFAULT_TREE, &noise(1.0, 0.5)), 0.0);
    }

    #[test]
    fn deterministic_physical_corners() {
        let mut rng = rng_for(1, "t", &[]);
        for _ in 0..1000 {
            assert_eq!(sample_physical_fusion(&noise(0.0, 0.0), &mut rng), FusionOutcome::Success);
            assert_eq!(sample_physical_fusion(&noise(1.0, 0.0), &mut rng), FusionOutcome::Failure);
        }
    }

    #[test]
    fn noiseless_tree_fusion() {
        let r = simulate_logical_fusion(&SchemeConfig::DEFAULT_TREE, &noise(0.0, 0.0), &mut rng_for(1, "t", &[]));
        assert!(r.success());
        assert_eq!((r.timesteps, r.physical_fusions, r.photons_consumed), (1, 4, 8));
    }

    #[test]
    fn total_loss_defeats_redundancy() {
        let mut rng = rng_for(2, "t", &[]);
        for _ in 0..100 {
            let r = simulate_logical_fusion(&SchemeConfig::DEFAULT_REDUNDANT, &noise(0.25, 1.0), &mut rng);
            assert_eq!(r.outcome, LogicalOutcome::Erasure);
            assert_eq!(r.photons_consumed, 10);
        }
    }

    #[test]
    fn tree_backup_round_is_used_when_every_branch_fails() {
        let mut rng = rng_for(3, "t", &[]);
        let r = simulate_logical_fusion(&SchemeConfig::Tree { b: 3, b_prep: 3 }, &noise(1.0, 0.0), &mut rng);
        assert_eq!(r.outcome, LogicalOutcome::Failure);
        assert!(r.used_backup);
        assert_eq!((r.timesteps, r.physical_fusions, r.photons_consumed), (2, 6, 12));
        assert_eq!(r.outcome_trace.len(), 6);
    }

    #[test]
    fn rus_stops_at_first_non_failure() {
        let mut rng = rng_for(4, "t", &[]);
        for _ in 0..500 {
            let r = simulate_logical_fusion(&SchemeConfig::Rus { m: 6 }, &noise(0.5, 0.05), &mut rng);
            let n = r.outcome_trace.len();
            assert!((1..=6).contains(&n));
            assert!(r.outcome_trace[..n - 1].iter().all(|&o| o == FusionOutcome::Failure));
            assert_eq!(r.timesteps as usize, n);
            assert_eq!(r.photons_consumed as usize, 2 * n);
        }
    }

    #[test]
    fn prep_without_noise_is_one_round() {
        let p = prepare_tree_logical(4, 6, &noise(0.0, 0.0), &mut rng_for(5, "t", &[]));
        assert_eq!(p, TreePreparation { branches_ready: 6, timesteps: 1, photons: 30, physical_fusions: 6, overflow: false });
        let p = prepare_tree_logical_capped(4, 6, &noise(1.0, 0.0), &mut rng_for(5, "t", &[]), 3);
        assert!(p.overflow);
        assert_eq!(p.timesteps, 3);
    }

    #[test]
    fn sweep_is_positionally_independent() {
        let a = sweep_success_rates(&[SchemeConfig::DEFAULT_TREE], &[0.25], &[0.05, 0.1], 200, 9);
        let b = sweep_success_rates(
            &[SchemeConfig::DEFAULT_RUS, SchemeConfig::DEFAULT_TREE],
            &[0.0, 0.25],
            &[0.1, 0.05],
            200,
            9,
        );
        assert_eq!(a[0], b[7]);
        assert_eq!(a[1], b[6]);
    }
}
