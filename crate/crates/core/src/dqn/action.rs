use std::fmt;

use serde::{Deserialize, Serialize};

/// Per-prize nudge: each entry is -1, 0 or +1 and the entries sum to zero,
/// so the pool is preserved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    deltas: Vec<i8>,
}

impl Action {
    /// Returns `None` unless every entry is in `{-1, 0, 1}` and they sum to 0.
    pub fn new(deltas: Vec<i8>) -> Option<Self> {
        let valid = deltas.iter().all(|d| (-1..=1).contains(d))
            && deltas.iter().map(|&d| d as i32).sum::<i32>() == 0;
        valid.then_some(Self { deltas })
    }

    pub fn deltas(&self) -> &[i8] {
        &self.deltas
    }

    pub fn is_noop(&self) -> bool {
        self.deltas.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.deltas.iter().map(|d| format!("{d:+}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every zero-sum vector in `{-1, 0, 1}^n`, in lexicographic order
/// (-1 < 0 < 1).
pub fn enumerate_actions(n: usize) -> Vec<Action> {
    fn rec(n: usize, sum: i32, cur: &mut Vec<i8>, out: &mut Vec<Action>) {
        let left = (n - cur.len()) as i32;
        if left == 0 {
            if sum == 0 {
                out.push(Action {
                    deltas: cur.clone(),
                });
            }
            return;
        }
        // remaining entries can still pull the sum back to zero
        if sum.abs() > left {
            return;
        }
        for d in [-1i8, 0, 1] {
            cur.push(d);
            rec(n, sum + d as i32, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Applies `action` to `awards` and returns the result sorted largest first.
/// If any prize would go negative the action is ignored.
pub fn apply_action(awards: &[f64], action: &Action) -> Vec<f64> {
    assert_eq!(
        awards.len(),
        action.deltas.len(),
        "action width must match award count"
    );
    let moved: Vec<f64> = awards
        .iter()
        .zip(&action.deltas)
        .map(|(r, &d)| r + d as f64)
        .collect();
    let mut next = if moved.iter().all(|&r| r >= 0.0) {
        moved
    } else {
        awards.to_vec()
    };
    next.sort_by(|a, b| b.total_cmp(a));
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_actions(4).len(), 19);
        assert_eq!(enumerate_actions(1), vec![Action { deltas: vec![0] }]);
        assert_eq!(enumerate_actions(0).len(), 1);
    }

    #[test]
    fn two_user_actions() {
        let got: Vec<Vec<i8>> = enumerate_actions(2).into_iter().map(|a| a.deltas).collect();
        assert_eq!(got, vec![vec![-1, 1], vec![0, 0], vec![1, -1]]);
    }

    #[test]
    fn count_matches_closed_form_and_brute_force() {
        for n in 1..=6usize {
            let closed: u64 = (0..=n as u64 / 2)
                .map(|k| binomial(n as u64, k) * binomial(n as u64 - k, k))
                .sum();
            // brute force over all 3^n vectors
            let mut brute = Vec::new();
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut v = vec![0i8; n];
                for slot in v.iter_mut().rev() {
                    *slot = (c % 3) as i8 - 1;
                    c /= 3;
                }
                if v.iter().map(|&d| d as i32).sum::<i32>() == 0 {
                    brute.push(v);
                }
            }
            let listed: Vec<Vec<i8>> = enumerate_actions(n).into_iter().map(|a| a.deltas).collect();
            assert_eq!(listed.len() as u64, closed, "n={n}");
            assert_eq!(listed, brute, "n={n}");
        }
    }

    #[test]
    fn first_action_leads_with_decreases() {
        assert_eq!(enumerate_actions(4)[0].deltas(), &[-1, -1, 1, 1]);
    }

    #[test]
    fn apply_examples() {
        let a = Action::new(vec![1, -1, 0, 0]).unwrap();
        assert_eq!(apply_action(&[25.0; 4], &a), vec![26.0, 25.0, 25.0, 24.0]);
        let b = Action::new(vec![-1, 1, 0, 0]).unwrap();
        assert_eq!(
            apply_action(&[0.0, 50.0, 25.0, 25.0], &b),
            vec![50.0, 25.0, 25.0, 0.0]
        );
        let zero = Action::new(vec![0; 4]).unwrap();
        assert_eq!(
            apply_action(&[40.0, 30.0, 20.0, 10.0], &zero),
            vec![40.0, 30.0, 20.0, 10.0]
        );
    }

    #[test]
    fn action_validation() {
        assert!(Action::new(vec![1, 1]).is_none());
        assert!(Action::new(vec![2, -2]).is_none());
        assert!(Action::new(vec![1, 0, -1]).is_some());
    }
}
