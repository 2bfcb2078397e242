//! The rendering contest.
//!
//! Each user (contestant) picks an upload rate from the divisors of its
//! native rate. Users are ranked by rate, the top ranks collect prizes from a
//! fixed pool, and uploading costs `f / a` where `a` is the user's capability.
//! A user only knows its own capability; rivals' capabilities are modeled as
//! uniform on `[0, max_capability]`, which gives the win probability
//! [`win_cdf`] and the rank-weighted [`expected_payment`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::{downsampling_loss, SkeletonSequence};

/// Smallest capability a contestant can have; keeps `cost` finite for users
/// who do not move at all.
pub const CAPABILITY_FLOOR: f64 = 1e-9;

/// Upload rate at which capability is measured.
pub const CAPABILITY_REFERENCE_RATE: u32 = 1;

/// Default multiplier on upload cost in net selection. Capabilities are
/// measured in meters, so `f / a` runs into the hundreds for slow movers;
/// this brings it onto the scale of a 100-unit prize pool.
pub const DEFAULT_COST_SCALE: f64 = 0.05;

/// Relative slack under which two objective values count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ContestError {
    #[error("capability must be positive and finite, got {0}")]
    NonPositiveCapability(f64),
    #[error("{prizes} prizes offered to only {contestants} contestants")]
    TooManyPrizes { prizes: usize, contestants: usize },
    #[error("invalid award setting: {0}")]
    InvalidAwards(String),
    #[error("invalid population model: max capability {0}")]
    InvalidPopulation(f64),
    #[error("scenario has no contestants")]
    NoContestants,
    #[error("rendering budget must be at least 1 fps")]
    ZeroBudget,
    #[error("contestant {0} has a sequence without any admissible rate")]
    EmptyEffortSet(usize),
}

pub type Result<T, E = ContestError> = std::result::Result<T, E>;

/// Capability of a user: its down-sampling loss at the reference rate of
/// 1 fps, i.e. how much the user moves, floored at [`CAPABILITY_FLOOR`].
pub fn capability(seq: &SkeletonSequence) -> f64 {
    // 1 divides every native rate
    let loss = downsampling_loss(seq, CAPABILITY_REFERENCE_RATE).unwrap_or(0.0);
    loss.max(CAPABILITY_FLOOR)
}

/// Cost of uploading at `rate` for a contestant with capability `a`.
pub fn cost(a: f64, rate: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ContestError::NonPositiveCapability(a));
    }
    Ok(rate / a)
}

/// Prizes by rank, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwardSetting {
    prizes: Vec<f64>,
}

impl AwardSetting {
    /// Validates a non-increasing, non-negative prize vector.
    pub fn new(prizes: Vec<f64>) -> Result<Self> {
        if prizes.is_empty() {
            return Err(ContestError::InvalidAwards("no prizes".into()));
        }
        if let Some(p) = prizes.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(ContestError::InvalidAwards(format!(
                "prize {p} is negative or not finite"
            )));
        }
        if prizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(ContestError::InvalidAwards(format!(
                "prizes {prizes:?} are not non-increasing"
            )));
        }
        Ok(Self { prizes })
    }

    /// Sorts `prizes` into rank order first.
    pub fn sorted(mut prizes: Vec<f64>) -> Result<Self> {
        prizes.sort_by(|a, b| b.total_cmp(a));
        Self::new(prizes)
    }

    /// `n` equal prizes sharing `pool`.
    pub fn equal_split(pool: f64, n: usize) -> Result<Self> {
        Self::new(vec![pool / n as f64; n])
    }

    pub fn prizes(&self) -> &[f64] {
        &self.prizes
    }

    pub fn len(&self) -> usize {
        self.prizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prizes.is_empty()
    }

    pub fn pool(&self) -> f64 {
        self.prizes.iter().sum()
    }

    /// Prize for 0-based rank position `rank`.
    pub fn prize_at(&self, rank: usize) -> f64 {
        self.prizes.get(rank).copied().unwrap_or(0.0)
    }

    /// Same prizes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.prizes.iter().map(|p| p * factor).collect())
    }
}

impl fmt::Display for AwardSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.prizes.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Belief about rivals' capabilities: uniform on `[0, max_capability]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationModel {
    max_capability: f64,
}

impl PopulationModel {
    pub fn new(max_capability: f64) -> Result<Self> {
        if !(max_capability > 0.0 && max_capability.is_finite()) {
            return Err(ContestError::InvalidPopulation(max_capability));
        }
        Ok(Self { max_capability })
    }

    /// Calibrates the upper bound to the most capable enrolled user.
    pub fn calibrated(contestants: &[ContestantState]) -> Result<Self> {
        let max = contestants
            .iter()
            .map(|c| c.capability)
            .fold(f64::NEG_INFINITY, f64::max);
        if contestants.is_empty() {
            return Err(ContestError::NoContestants);
        }
        Self::new(max)
    }

    pub fn max_capability(&self) -> f64 {
        self.max_capability
    }
}

/// Probability that a rival's loss exceeds `delta`.
pub fn win_cdf(delta: f64, pop: &PopulationModel) -> f64 {
    let max = pop.max_capability;
    if (0.0..=max).contains(&delta) {
        ((max - delta) / max).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expected prize for a contestant whose loss is `delta` among `n_total`
/// contestants: prize `i` weighted by the probability that exactly `i - 1`
/// rivals rank ahead.
pub fn expected_payment(
    delta: f64,
    awards: &AwardSetting,
    n_total: usize,
    pop: &PopulationModel,
) -> Result<f64> {
    if awards.len() > n_total {
        return Err(ContestError::TooManyPrizes {
            prizes: awards.len(),
            contestants: n_total,
        });
    }
    let p = win_cdf(delta, pop);
    Ok(awards
        .prizes()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ahead = i as i32;
            r * binomial(n_total - 1, i)
                * p.powi(n_total as i32 - 1 - ahead)
                * (1.0 - p).powi(ahead)
        })
        .sum())
}

/// Realized utility: the prize for `rank` (1-based, `None` if unranked)
/// minus the upload cost.
pub fn utility(rank: Option<usize>, awards: &AwardSetting, a: f64, rate: f64) -> Result<f64> {
    let prize = match rank {
        Some(r) if r >= 1 => awards.prize_at(r - 1),
        _ => 0.0,
    };
    Ok(prize - cost(a, rate)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Maximize expected payment minus upload cost.
    #[default]
    Net,
    /// Maximize expected payment alone.
    #[serde(rename = "literal-e")]
    LiteralPayment,
}

impl FromStr for SelectionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "net" => Ok(SelectionMode::Net),
            "literal-e" | "literal" => Ok(SelectionMode::LiteralPayment),
            other => Err(format!("unknown selection mode `{other}`")),
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::Net => "net",
            SelectionMode::LiteralPayment => "literal-e",
        })
    }
}

/// How contestants choose their upload rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortRule {
    pub mode: SelectionMode,
    /// Multiplier on `cost` in [`SelectionMode::Net`]. Converts the unitless
    /// `f / a` into prize units.
    pub cost_scale: f64,
}

impl Default for EffortRule {
    fn default() -> Self {
        Self::net(DEFAULT_COST_SCALE)
    }
}

impl EffortRule {
    pub fn net(cost_scale: f64) -> Self {
        Self {
            mode: SelectionMode::Net,
            cost_scale,
        }
    }

    pub fn literal_payment() -> Self {
        Self {
            mode: SelectionMode::LiteralPayment,
            cost_scale: 1.0,
        }
    }
}

/// One user in the contest, with its loss at every admissible rate
/// precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestantState {
    pub id: usize,
    pub sequence: SkeletonSequence,
    pub effort_set: Vec<u32>,
    pub capability: f64,
    losses: Vec<f64>,
}

impl ContestantState {
    pub fn new(id: usize, sequence: SkeletonSequence) -> Result<Self> {
        let effort_set = sequence.effort_set();
        if effort_set.is_empty() {
            return Err(ContestError::EmptyEffortSet(id));
        }
        let losses = effort_set
            .iter()
            .map(|&f| downsampling_loss(&sequence, f).expect("divisor of the native rate"))
            .collect();
        let capability = capability(&sequence);
        Ok(Self {
            id,
            sequence,
            effort_set,
            capability,
            losses,
        })
    }

    pub fn native_rate(&self) -> u32 {
        self.sequence.native_rate()
    }

    /// Down-sampling loss at `rate`, or `None` if `rate` is not admissible.
    pub fn loss_at(&self, rate: u32) -> Option<f64> {
        self.effort_set
            .binary_search(&rate)
            .ok()
            .map(|i| self.losses[i])
    }

    /// `(rate, loss)` for every admissible rate, ascending.
    pub fn loss_table(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.effort_set
            .iter()
            .copied()
            .zip(self.losses.iter().copied())
    }
}

/// Best response of one contestant; ties go to the smallest rate.
pub fn select_effort(
    contestant: &ContestantState,
    awards: &AwardSetting,
    pop: &PopulationModel,
    n_total: usize,
    rule: EffortRule,
) -> Result<u32> {
    let mut best: Option<(u32, f64)> = None;
    for (rate, loss) in contestant.loss_table() {
        let payment = expected_payment(loss, awards, n_total, pop)?;
        let value = match rule.mode {
            SelectionMode::Net => {
                payment - rule.cost_scale * cost(contestant.capability, rate as f64)?
            }
            SelectionMode::LiteralPayment => payment,
        };
        let better = match best {
            None => true,
            Some((_, v)) => value > v + TIE_TOLERANCE * v.abs().max(1.0),
        };
        if better {
            best = Some((rate, value));
        }
    }
    best.map(|(r, _)| r)
        .ok_or(ContestError::EmptyEffortSet(contestant.id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub contestants: Vec<ContestantState>,
    /// Total rendering budget `f_T` in fps.
    pub budget: u32,
    pub awards: AwardSetting,
    pub rule: EffortRule,
    /// Overrides the calibrated population bound when set.
    pub max_capability: Option<f64>,
}

impl ScenarioConfig {
    pub fn new(
        contestants: Vec<ContestantState>,
        budget: u32,
        awards: AwardSetting,
        rule: EffortRule,
    ) -> Result<Self> {
        if contestants.is_empty() {
            return Err(ContestError::NoContestants);
        }
        if budget == 0 {
            return Err(ContestError::ZeroBudget);
        }
        if awards.len() > contestants.len() {
            return Err(ContestError::TooManyPrizes {
                prizes: awards.len(),
                contestants: contestants.len(),
            });
        }
        Ok(Self {
            contestants,
            budget,
            awards,
            rule,
            max_capability: None,
        })
    }

    pub fn len(&self) -> usize {
        self.contestants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contestants.is_empty()
    }

    pub fn pool(&self) -> f64 {
        self.awards.pool()
    }

    pub fn population(&self) -> Result<PopulationModel> {
        match self.max_capability {
            Some(m) => PopulationModel::new(m),
            None => PopulationModel::calibrated(&self.contestants),
        }
    }

    pub fn with_awards(&self, awards: AwardSetting) -> Self {
        Self {
            awards,
            ..self.clone()
        }
    }

    pub fn with_rule(&self, rule: EffortRule) -> Self {
        Self {
            rule,
            ..self.clone()
        }
    }

    pub fn with_budget(&self, budget: u32) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContestOutcome {
    /// Chosen rate per contestant, in contestant order.
    pub efforts: Vec<u32>,
    /// Contestant indices, best rank first.
    pub ranking: Vec<usize>,
    /// Prize collected per contestant, in contestant order.
    pub prizes_assigned: Vec<f64>,
    pub per_user_loss: Vec<f64>,
    pub total_loss: f64,
    /// Whether the chosen rates fit the rendering budget.
    pub feasible: bool,
}

impl ContestOutcome {
    pub fn effort_sum(&self) -> u32 {
        self.efforts.iter().sum()
    }

    /// 1-based rank of contestant `n`.
    pub fn rank_of(&self, n: usize) -> Option<usize> {
        self.ranking.iter().position(|&i| i == n).map(|p| p + 1)
    }
}

/// Ranks contestants by rate (desc), then capability (desc), then id (asc).
pub fn rank_contestants(contestants: &[ContestantState], efforts: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..contestants.len()).collect();
    order.sort_by(|&a, &b| {
        efforts[b]
            .cmp(&efforts[a])
            .then(
                contestants[b]
                    .capability
                    .total_cmp(&contestants[a].capability),
            )
            .then(contestants[a].id.cmp(&contestants[b].id))
    });
    order
}

/// Scores a fixed effort profile (rates in contestant order).
pub fn evaluate_efforts(cfg: &ScenarioConfig, efforts: Vec<u32>) -> ContestOutcome {
    score_efforts(cfg, &cfg.awards, efforts)
}

fn score_efforts(cfg: &ScenarioConfig, awards: &AwardSetting, efforts: Vec<u32>) -> ContestOutcome {
    let ranking = rank_contestants(&cfg.contestants, &efforts);
    let mut prizes_assigned = vec![0.0; cfg.len()];
    for (pos, &n) in ranking.iter().enumerate() {
        prizes_assigned[n] = awards.prize_at(pos);
    }
    let per_user_loss: Vec<f64> = cfg
        .contestants
        .iter()
        .zip(&efforts)
        .map(|(c, &f)| {
            c.loss_at(f)
                .expect("effort drawn from the contestant's effort set")
        })
        .collect();
    let total_loss = per_user_loss.iter().sum();
    let feasible = efforts.iter().map(|&f| f as u64).sum::<u64>() <= cfg.budget as u64;
    ContestOutcome {
        efforts,
        ranking,
        prizes_assigned,
        per_user_loss,
        total_loss,
        feasible,
    }
}

/// Runs one contest: every contestant best-responds to the award setting,
/// then prizes are paid out by rank.
pub fn simulate_contest(cfg: &ScenarioConfig, pop: &PopulationModel) -> Result<ContestOutcome> {
    simulate_with_awards(cfg, &cfg.awards, pop)
}

/// [`simulate_contest`] with `awards` in place of the scenario's own setting.
pub fn simulate_with_awards(
    cfg: &ScenarioConfig,
    awards: &AwardSetting,
    pop: &PopulationModel,
) -> Result<ContestOutcome> {
    if awards.len() > cfg.len() {
        return Err(ContestError::TooManyPrizes {
            prizes: awards.len(),
            contestants: cfg.len(),
        });
    }
    let n = cfg.len();
    let efforts = cfg
        .contestants
        .iter()
        .map(|c| select_effort(c, awards, pop, n, cfg.rule))
        .collect::<Result<Vec<_>>>()?;
    Ok(score_efforts(cfg, awards, efforts))
}

pub fn total_loss(outcome: &ContestOutcome) -> f64 {
    outcome.per_user_loss.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{
        generate_synthetic, Keypoint3, MotionKind, MotionProfile, SkeletonFrame,
    };
    use proptest::prelude::*;

    fn pop(max: f64) -> PopulationModel {
        PopulationModel::new(max).unwrap()
    }

    fn awards(p: &[f64]) -> AwardSetting {
        AwardSetting::new(p.to_vec()).unwrap()
    }

    fn default_users(seed: u64) -> Vec<ContestantState> {
        MotionKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let seq =
                    generate_synthetic(&MotionProfile::preset(k), 300, 60, 17, seed + i as u64)
                        .unwrap();
                ContestantState::new(i, seq).unwrap()
            })
            .collect()
    }

    fn still(id: usize) -> ContestantState {
        let f = SkeletonFrame::new(vec![Keypoint3::new(0.1, 0.2, 0.3)]);
        ContestantState::new(id, SkeletonSequence::new(vec![f; 12], 12, "still").unwrap()).unwrap()
    }

    #[test]
    fn capability_examples() {
        let seq = SkeletonSequence::new(
            vec![
                SkeletonFrame::new(vec![Keypoint3::new(0.0, 0.0, 0.0)]),
                SkeletonFrame::new(vec![Keypoint3::new(1.0, 0.0, 0.0)]),
            ],
            2,
            "",
        )
        .unwrap();
        assert!((capability(&seq) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(still(0).capability, CAPABILITY_FLOOR);
        let users = default_users(1);
        assert!(users[0].capability > users[3].capability);
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(2.0, 10.0).unwrap(), 5.0);
        assert!(cost(0.0, 1.0).is_err());
        assert!(cost(-1.0, 1.0).is_err());
        assert!(cost(1.0, 2.0).unwrap() > cost(1.0, 1.0).unwrap());
        assert!(cost(2.0, 1.0).unwrap() < cost(1.0, 1.0).unwrap());
    }

    #[test]
    fn win_cdf_examples() {
        let p = pop(8.0);
        assert_eq!(win_cdf(0.0, &p), 1.0);
        assert_eq!(win_cdf(8.0, &p), 0.0);
        assert_eq!(win_cdf(2.0, &p), 0.75);
        assert_eq!(win_cdf(9.0, &p), 0.0);
    }

    #[test]
    fn expected_payment_examples() {
        let p = pop(1.0);
        // single contestant always takes the only prize
        assert_eq!(
            expected_payment(0.7, &awards(&[100.0]), 1, &p).unwrap(),
            100.0
        );
        // certain first place
        assert_eq!(
            expected_payment(0.0, &awards(&[60.0, 30.0, 10.0]), 5, &p).unwrap(),
            60.0
        );
        // P = 0.5 with two equal prizes among four
        let e = expected_payment(0.5, &awards(&[50.0, 50.0]), 4, &p).unwrap();
        assert!((e - 25.0).abs() < 1e-12, "{e}");
        assert!(matches!(
            expected_payment(0.5, &awards(&[1.0, 1.0, 1.0]), 2, &p),
            Err(ContestError::TooManyPrizes {
                prizes: 3,
                contestants: 2
            })
        ));
    }

    #[test]
    fn utility_examples() {
        let a = awards(&[100.0, 0.0, 0.0, 0.0]);
        assert_eq!(utility(Some(1), &a, 10.0, 20.0).unwrap(), 98.0);
        assert_eq!(utility(None, &a, 10.0, 0.0).unwrap(), 0.0);
        assert_eq!(utility(Some(3), &a, 4.0, 2.0).unwrap(), -0.5);
        assert_eq!(utility(Some(6), &a, 4.0, 2.0).unwrap(), -0.5);
    }

    #[test]
    fn award_validation() {
        assert!(AwardSetting::new(vec![]).is_err());
        assert!(AwardSetting::new(vec![10.0, 20.0]).is_err());
        assert!(AwardSetting::new(vec![10.0, -1.0]).is_err());
        assert_eq!(
            AwardSetting::sorted(vec![0.0, 50.0, 25.0, 25.0])
                .unwrap()
                .prizes(),
            &[50.0, 25.0, 25.0, 0.0]
        );
        assert_eq!(AwardSetting::equal_split(100.0, 4).unwrap().pool(), 100.0);
    }

    #[test]
    fn equal_prizes_pick_lowest_rate() {
        let users = default_users(1);
        let p = PopulationModel::calibrated(&users).unwrap();
        let equal = AwardSetting::equal_split(100.0, 4).unwrap();
        for c in &users {
            for rule in [EffortRule::net(1.0), EffortRule::literal_payment()] {
                assert_eq!(select_effort(c, &equal, &p, 4, rule).unwrap(), 1);
            }
        }
    }

    #[test]
    fn winner_take_all_maxes_out() {
        let users = default_users(1);
        let p = PopulationModel::calibrated(&users).unwrap();
        let wta = awards(&[100.0, 0.0, 0.0, 0.0]);
        for c in &users {
            assert_eq!(
                select_effort(c, &wta, &p, 4, EffortRule::literal_payment()).unwrap(),
                60
            );
        }
    }

    #[test]
    fn single_contestant_contest() {
        let users = default_users(5);
        let one = vec![users[1].clone()];
        let cfg = ScenarioConfig::new(one, 60, awards(&[10.0]), EffortRule::default()).unwrap();
        let out = simulate_contest(&cfg, &cfg.population().unwrap()).unwrap();
        assert_eq!(out.ranking, vec![0]);
        assert_eq!(out.prizes_assigned, vec![10.0]);
        assert_eq!(out.total_loss, users[1].loss_at(out.efforts[0]).unwrap());
    }

    #[test]
    fn identical_contestants_rank_by_id() {
        let users = default_users(3);
        let clones: Vec<ContestantState> = (0..3)
            .map(|i| ContestantState {
                id: i,
                ..users[1].clone()
            })
            .collect();
        let cfg = ScenarioConfig::new(
            clones,
            100,
            AwardSetting::equal_split(30.0, 3).unwrap(),
            EffortRule::default(),
        )
        .unwrap();
        let out = simulate_contest(&cfg, &cfg.population().unwrap()).unwrap();
        assert!(out.efforts.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(out.ranking, vec![0, 1, 2]);
    }

    #[test]
    fn ranking_tie_breaks() {
        let mut users = default_users(1);
        users.push(still(4));
        // rates tie between 1 and 2; capability decides, then id
        let ranking = rank_contestants(&users, &[5, 10, 10, 1, 1]);
        assert_eq!(ranking, vec![1, 2, 0, 3, 4]);
    }

    #[test]
    fn average_scheme_everyone_at_one() {
        let users = default_users(1);
        let cfg = ScenarioConfig::new(
            users.clone(),
            120,
            AwardSetting::equal_split(100.0, 4).unwrap(),
            EffortRule::default(),
        )
        .unwrap();
        let out = simulate_contest(&cfg, &cfg.population().unwrap()).unwrap();
        assert_eq!(out.efforts, vec![1, 1, 1, 1]);
        assert!(out.feasible);
        let caps: f64 = users.iter().map(|c| c.capability).sum();
        assert!((out.total_loss - caps).abs() < 1e-12);
        assert_eq!(total_loss(&out), out.total_loss);
    }

    #[test]
    fn full_rate_total_loss_is_zero() {
        let users = default_users(2);
        let cfg = ScenarioConfig::new(users, 240, awards(&[100.0]), EffortRule::default()).unwrap();
        let out = evaluate_efforts(&cfg, vec![60; 4]);
        assert_eq!(total_loss(&out), 0.0);
        assert!(out.feasible);
        assert!(!evaluate_efforts(&cfg.with_budget(239), vec![60; 4]).feasible);
    }

    #[test]
    fn scenario_validation() {
        let users = default_users(1);
        assert_eq!(
            ScenarioConfig::new(vec![], 10, awards(&[1.0]), EffortRule::default()).unwrap_err(),
            ContestError::NoContestants
        );
        assert_eq!(
            ScenarioConfig::new(users.clone(), 0, awards(&[1.0]), EffortRule::default())
                .unwrap_err(),
            ContestError::ZeroBudget
        );
        assert!(ScenarioConfig::new(
            users[..1].to_vec(),
            10,
            awards(&[1.0, 1.0]),
            EffortRule::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn equal_prizes_are_normalized(delta in 0.0f64..=1.0, n in 1usize..9, pool in 1.0f64..1000.0) {
            let p = pop(1.0);
            let e = expected_payment(delta, &AwardSetting::equal_split(pool, n).unwrap(), n, &p).unwrap();
            prop_assert!((e - pool / n as f64).abs() < 1e-9 * pool.max(1.0));
        }

        #[test]
        fn winner_take_all_payment(d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0, n in 1usize..8) {
            let p = pop(1.0);
            let mut prizes = vec![0.0; n];
            prizes[0] = 100.0;
            let a = awards(&prizes);
            let e1 = expected_payment(d1, &a, n, &p).unwrap();
            let expect = 100.0 * win_cdf(d1, &p).powi(n as i32 - 1);
            prop_assert!((e1 - expect).abs() < 1e-9);
            let e2 = expected_payment(d2, &a, n, &p).unwrap();
            if d1 <= d2 {
                prop_assert!(e1 >= e2 - 1e-12);
            }
        }

        #[test]
        fn chosen_effort_is_a_divisor(seed in 0u64..50, r1 in 0u32..=100, r2 in 0u32..=100) {
            let users = default_users(seed);
            let (hi, lo) = (r1.max(r2) as f64, r1.min(r2) as f64);
            let a = awards(&[hi, lo]);
            let p = PopulationModel::calibrated(&users).unwrap();
            for c in &users {
                for rule in [EffortRule::net(1.0), EffortRule::literal_payment()] {
                    let f = select_effort(c, &a, &p, 4, rule).unwrap();
                    prop_assert_eq!(60 % f, 0);
                }
            }
        }

        #[test]
        fn literal_argmax_ignores_prize_scale(seed in 0u64..20, scale in 0.01f64..100.0) {
            let users = default_users(seed);
            let a = awards(&[50.0, 30.0, 20.0]);
            let p = PopulationModel::calibrated(&users).unwrap();
            for c in &users {
                let base = select_effort(c, &a, &p, 4, EffortRule::literal_payment()).unwrap();
                let scaled = select_effort(c, &a.scaled(scale).unwrap(), &p, 4, EffortRule::literal_payment()).unwrap();
                prop_assert_eq!(base, scaled);
            }
        }

        #[test]
        fn net_argmax_invariant_under_joint_scaling(seed in 0u64..20, scale in 0.01f64..100.0) {
            let users = default_users(seed);
            let a = awards(&[50.0, 50.0]);
            let p = PopulationModel::calibrated(&users).unwrap();
            for c in &users {
                let base = select_effort(c, &a, &p, 4, EffortRule::net(2.0)).unwrap();
                let scaled = select_effort(c, &a.scaled(scale).unwrap(), &p, 4, EffortRule::net(2.0 * scale)).unwrap();
                prop_assert_eq!(base, scaled);
            }
        }

        #[test]
        fn prizes_are_conserved(seed in 0u64..30, cut in 0u32..=100) {
            let users = default_users(seed);
            let a = AwardSetting::sorted(vec![cut as f64, 100.0 - cut as f64, 0.0]).unwrap();
            let cfg = ScenarioConfig::new(users, 120, a, EffortRule::default()).unwrap();
            let out = simulate_contest(&cfg, &cfg.population().unwrap()).unwrap();
            prop_assert!((out.prizes_assigned.iter().sum::<f64>() - 100.0).abs() < 1e-9);
            let again = simulate_contest(&cfg, &cfg.population().unwrap()).unwrap();
            prop_assert_eq!(out, again);
        }
    }
}
