//! Brute-force references: every award setting on a lattice, every effort
//! profile under the budget, and the uniform split.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::contest::{
    evaluate_efforts, simulate_with_awards, AwardSetting, ContestError, ContestOutcome,
    ScenarioConfig,
};

pub const DEFAULT_GRID_STEP: f64 = 5.0;
pub const DEFAULT_EFFORT_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid step {step} does not divide the pool {pool}")]
    InvalidStep { step: f64, pool: f64 },
    #[error("{size} effort profiles exceed the search cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("budget {budget} cannot give each of {users} users one frame per second")]
    BudgetTooSmall { budget: u32, users: usize },
    #[error(transparent)]
    Contest(#[from] ContestError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// All non-increasing prize vectors on a `step` lattice that share out the
/// pool, in ascending lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct AwardGrid {
    step: f64,
    entries: Vec<Vec<f64>>,
}

impl AwardGrid {
    pub fn new(pool: f64, prizes: usize, step: f64) -> Result<Self, OracleError> {
        let units = pool / step;
        let whole = units.round();
        if !step.is_finite()
            || step <= 0.0
            || (units - whole).abs() > 1e-9 * units.max(1.0)
            || prizes == 0
        {
            return Err(OracleError::InvalidStep { step, pool });
        }
        let mut parts = Vec::new();
        non_increasing_parts(
            whole as u64,
            prizes,
            u64::MAX,
            &mut Vec::with_capacity(prizes),
            &mut parts,
        );
        let entries = parts
            .into_iter()
            .map(|p| p.into_iter().map(|u| u as f64 * step).collect())
            .collect();
        Ok(Self { step, entries })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn non_increasing_parts(
    left: u64,
    slots: usize,
    cap: u64,
    cur: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if slots == 0 {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    // the head must be large enough for the remaining slots to absorb the rest
    let lo = left.div_ceil(slots as u64);
    let hi = left.min(cap);
    for head in lo..=hi {
        cur.push(head);
        non_increasing_parts(left - head, slots - 1, head, cur, out);
        cur.pop();
    }
}

/// One simulated grid entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub awards: Vec<f64>,
    pub efforts: Vec<u32>,
    pub total_loss: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Lowest-loss feasible entry; `None` when no entry fits the budget.
    pub best: Option<LedgerEntry>,
    pub evaluated_count: usize,
    pub ledger: Vec<LedgerEntry>,
}

impl SearchResult {
    pub fn feasible_count(&self) -> usize {
        self.ledger.iter().filter(|e| e.feasible).count()
    }
}

/// Simulates the contest for every entry of the award grid.
pub fn exhaustive_award_search(
    scenario: &ScenarioConfig,
    step: f64,
) -> Result<SearchResult, OracleError> {
    let grid = AwardGrid::new(scenario.pool(), scenario.awards.len(), step)?;
    let pop = scenario.population()?;
    let ledger = grid
        .entries()
        .par_iter()
        .map(|awards| {
            let setting = AwardSetting::new(awards.clone())?;
            let o = simulate_with_awards(scenario, &setting, &pop)?;
            Ok(LedgerEntry {
                awards: awards.clone(),
                efforts: o.efforts,
                total_loss: o.total_loss,
                feasible: o.feasible,
            })
        })
        .collect::<Result<Vec<_>, ContestError>>()?;
    // ledger is in lexicographic order, so the first strict minimum wins ties
    let best = ledger
        .iter()
        .filter(|e| e.feasible)
        .fold(None::<&LedgerEntry>, |best, e| match best {
            Some(b) if b.total_loss <= e.total_loss => Some(b),
            _ => Some(e),
        })
        .cloned();
    Ok(SearchResult {
        best,
        evaluated_count: ledger.len(),
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffortOptimum {
    pub efforts: Vec<u32>,
    pub total_loss: f64,
    pub profiles_visited: u64,
}

/// Minimum total loss over every effort profile that fits the budget,
/// ignoring incentives. Ties go to the lexicographically smallest profile.
pub fn exhaustive_effort_search(
    scenario: &ScenarioConfig,
    cap: u64,
) -> Result<EffortOptimum, OracleError> {
    let size = scenario.contestants.iter().fold(1u128, |acc, c| {
        acc.saturating_mul(c.effort_set.len() as u128)
    });
    if size > cap as u128 {
        return Err(OracleError::CapExceeded { size, cap });
    }
    let tables: Vec<Vec<(u32, f64)>> = scenario
        .contestants
        .iter()
        .map(|c| c.loss_table().collect())
        .collect();
    let min_rate: Vec<u64> = tables.iter().map(|t| t[0].0 as u64).collect();
    // cheapest possible spend of users i.. so hopeless prefixes are cut early
    let mut floor_after = vec![0u64; tables.len() + 1];
    for i in (0..tables.len()).rev() {
        floor_after[i] = floor_after[i + 1] + min_rate[i];
    }
    if floor_after[0] > scenario.budget as u64 {
        return Err(OracleError::BudgetTooSmall {
            budget: scenario.budget,
            users: scenario.len(),
        });
    }

    struct Search<'a> {
        tables: &'a [Vec<(u32, f64)>],
        floor_after: &'a [u64],
        budget: u64,
        cur: Vec<u32>,
        best: Option<(Vec<u32>, f64)>,
        visited: u64,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, spent: u64, loss: f64) {
            if i == self.tables.len() {
                self.visited += 1;
                if self.best.as_ref().is_none_or(|(_, b)| loss < *b) {
                    self.best = Some((self.cur.clone(), loss));
                }
                return;
            }
            for &(rate, l) in &self.tables[i] {
                if spent + rate as u64 + self.floor_after[i + 1] > self.budget {
                    break;
                }
                self.cur.push(rate);
                self.run(i + 1, spent + rate as u64, loss + l);
                self.cur.pop();
            }
        }
    }

    let mut s = Search {
        tables: &tables,
        floor_after: &floor_after,
        budget: scenario.budget as u64,
        cur: Vec::with_capacity(tables.len()),
        best: None,
        visited: 0,
    };
    s.run(0, 0, 0.0);
    let (efforts, total_loss) = s.best.expect("the all-minimum profile fits the budget");
    Ok(EffortOptimum {
        efforts,
        total_loss,
        profiles_visited: s.visited,
    })
}

/// Every user uploads at the largest admissible rate not above an even
/// share of the budget.
pub fn average_baseline(scenario: &ScenarioConfig) -> Result<ContestOutcome, OracleError> {
    let share = scenario.budget as usize / scenario.len();
    let efforts = scenario
        .contestants
        .iter()
        .map(|c| {
            c.effort_set
                .iter()
                .copied()
                .filter(|&f| f as usize <= share)
                .max()
        })
        .collect::<Option<Vec<u32>>>()
        .ok_or(OracleError::BudgetTooSmall {
            budget: scenario.budget,
            users: scenario.len(),
        })?;
    Ok(evaluate_efforts(scenario, efforts))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// CSV with columns `awards,efforts,total_loss,feasible`; list cells are
/// `;`-separated.
pub fn write_ledger_csv<W: Write>(ledger: &[LedgerEntry], writer: W) -> Result<(), OracleError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["awards", "efforts", "total_loss", "feasible"])?;
    for e in ledger {
        w.write_record([
            join(&e.awards),
            join(&e.efforts),
            e.total_loss.to_string(),
            e.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
